//! Summary statistics used by the Monte Carlo experiments.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::prob::kahan_sum;

/// Mean and unbiased variance of a sample, with standard errors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    pub mean_se: f64,
    /// Standard error of the sample variance from the fourth central moment.
    pub variance_se: f64,
}

impl Moments {
    /// Two-pass compensated moments of `values` in slice order.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        let count = values.len();
        if count < 2 {
            return domain(format!("need at least 2 values for moments, got {count}"));
        }
        let c = count as f64;
        let mean = kahan_sum(values.iter().copied()) / c;
        let m2 = kahan_sum(values.iter().map(|v| (v - mean).powi(2))) / c;
        let m4 = kahan_sum(values.iter().map(|v| (v - mean).powi(4))) / c;
        let variance = m2 * c / (c - 1.0);
        let var_of_var = (m4 - (c - 3.0) / (c - 1.0) * variance * variance) / c;
        Ok(Self { count, mean, variance, mean_se: (variance / c).sqrt(), variance_se: var_of_var.max(0.0).sqrt() })
    }
}

/// Wilson score interval for a binomial proportion at normal quantile `z`.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let t = trials as f64;
    let p = successes as f64 / t;
    let z2 = z * z;
    let denom = 1.0 + z2 / t;
    let centre = (p + z2 / (2.0 * t)) / denom;
    let half = z * (p * (1.0 - p) / t + z2 / (4.0 * t * t)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes >= trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Normal quantile for a two-sided 95% interval.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares of `ys` on `xs`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return domain(format!("line fit needs matching inputs of length >= 2, got {} and {}", xs.len(), ys.len()));
    }
    let c = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / c;
    let my = ys.iter().sum::<f64>() / c;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return domain("line fit needs at least two distinct abscissae");
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LinearFit { slope, intercept: my - slope * mx, r_squared })
}

/// Fits `ln(values)` against `ns`; every value must be positive.
pub fn fit_log_decay(ns: &[u32], values: &[f64]) -> Result<LinearFit> {
    if let Some(v) = values.iter().find(|v| !(**v > 0.0)) {
        return domain(format!("log fit needs positive values, got {v}"));
    }
    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    fit_line(&xs, &ys)
}

/// `points` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || points < 2 {
        return domain(format!("log grid needs 0 < lo < hi and >= 2 points, got {lo}, {hi}, {points}"));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..points).map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_of_small_sample() {
        let m = Moments::from_values(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m.mean, 2.5);
        assert!((m.variance - 5.0 / 3.0).abs() < 1e-15);
        assert!((m.mean_se - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert!(Moments::from_values(&[1.0]).is_err());
    }

    #[test]
    fn variance_se_matches_normal_theory() {
        use rand::Rng;
        use rand_distr::StandardNormal;
        let mut rng = crate::rng::derive_stream(5, 0).rng();
        let v: Vec<f64> = (0..200_000).map(|_| rng.sample(StandardNormal)).collect();
        let m = Moments::from_values(&v).unwrap();
        let expected = (2.0 / v.len() as f64).sqrt();
        assert!((m.variance_se / expected - 1.0).abs() < 0.05);
    }

    #[test]
    fn wilson_examples() {
        let (lo, hi) = wilson_interval(0, 100, Z95);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.036_994).abs() < 1e-5);
        let (lo, hi) = wilson_interval(50, 100, Z95);
        assert!((lo - 0.403_832).abs() < 1e-5 && (hi - 0.596_168).abs() < 1e-5);
    }

    #[test]
    fn exact_line() {
        let f = fit_line(&[1.0, 2.0, 3.0], &[3.0, 5.0, 7.0]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-15 && (f.intercept - 1.0).abs() < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-15);
        let d = fit_log_decay(&[1, 2, 3], &[0.5, 0.25, 0.125]).unwrap();
        assert!((d.slope + std::f64::consts::LN_2).abs() < 1e-15);
        assert!(fit_log_decay(&[1, 2], &[0.5, 0.0]).is_err());
    }

    #[test]
    fn grid_endpoints() {
        let g = log_grid(0.01, 100.0, 5).unwrap();
        assert!((g[0] - 0.01).abs() < 1e-15 && (g[2] - 1.0).abs() < 1e-14 && (g[4] - 100.0).abs() < 1e-12);
    }
}
