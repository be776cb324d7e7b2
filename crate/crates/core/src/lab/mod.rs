//! Monte Carlo estimates of tail curves, pairwise loss moments,
//! anticoncentration and diagonal-observable variance over random
//! instances of a family.
//!
//! Trial `t` always uses `stream.child(t)`, and trial results are reduced
//! in trial order, so every report is a pure function of the stream no
//! matter how many threads execute the trials.

mod family;
mod metric;
mod stats;

pub use family::FamilySpec;
pub use metric::{Bandwidth, MetricSpec};
pub use stats::{fit_line, fit_log_decay, log_grid, wilson_interval, LinearFit, Moments, Z95};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::SubsetMask;
use crate::circuits::diagonal_pauli_expectation;
use crate::error::{domain, Result};
use crate::loss::{l1_distance, squared_distance, weighted_spectrum_energy};
use crate::prob::{kahan_sum, ProbVector};
use crate::rng::RandomStream;
use crate::walsh::fwht_in_place;

/// Smallest trial count the estimators accept.
pub const MIN_TRIALS: usize = 100;

fn check_trials(trials: usize) -> Result<()> {
    if trials < MIN_TRIALS {
        return domain(format!("need at least {MIN_TRIALS} trials, got {trials}"));
    }
    Ok(())
}

/// Runs `f(stream.child(t))` for `t in 0..trials` on the current rayon pool
/// and returns the results in trial order.
pub fn map_trials<T, F>(trials: usize, stream: &RandomStream, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&RandomStream) -> Result<T> + Sync + Send,
{
    (0..trials as u64).into_par_iter().map(|t| f(&stream.child(t))).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub family: FamilySpec,
    pub n: u32,
    pub metric: String,
    pub sigma: Option<f64>,
    pub trials: usize,
    pub mean: f64,
    pub variance: f64,
    pub mean_se: f64,
    pub variance_se: f64,
}

impl MomentReport {
    fn new(family: FamilySpec, n: u32, metric: impl Into<String>, sigma: Option<f64>, values: &[f64]) -> Result<Self> {
        let m = Moments::from_values(values)?;
        Ok(Self {
            family,
            n,
            metric: metric.into(),
            sigma,
            trials: m.count,
            mean: m.mean,
            variance: m.variance,
            mean_se: m.mean_se,
            variance_se: m.variance_se,
        })
    }
}

/// Which outcome the tail curve reads `p(x)` at.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceOutcome {
    /// `x* = 0…0` in every trial.
    #[default]
    Fixed,
    /// A fresh uniformly random `x` in every trial.
    Pooled,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    /// Threshold in units of `1/2^n`.
    pub y: f64,
    pub survival: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailCurve {
    pub family: FamilySpec,
    pub n: u32,
    pub trials: usize,
    pub points: Vec<TailPoint>,
}

/// Empirical `Prob(p(x) ≥ y / 2^n)` over instances, with 95% Wilson
/// intervals. The grid is sorted ascending before use.
pub fn estimate_tail_curve(
    family: FamilySpec,
    n: u32,
    y_grid: &[f64],
    trials: usize,
    stream: &RandomStream,
    reference: ReferenceOutcome,
) -> Result<TailCurve> {
    check_trials(trials)?;
    family.check(n)?;
    let mut grid = y_grid.to_vec();
    if let Some(y) = grid.iter().find(|y| !(**y > 0.0) || !y.is_finite()) {
        return domain(format!("tail grid values must be positive, got {y}"));
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut values = map_trials(trials, stream, |s| {
        let x = match reference {
            ReferenceOutcome::Fixed => 0,
            ReferenceOutcome::Pooled => s.labelled("reference").rng().random_range(0..1u64 << n),
        };
        family.marginal(n, x, s)
    })?;
    values.sort_by(f64::total_cmp);
    let big_n = 2f64.powi(n as i32);
    let points = grid
        .into_iter()
        .map(|y| {
            let threshold = y / big_n;
            let hits = values.len() - values.partition_point(|&v| v < threshold);
            let (ci_low, ci_high) = wilson_interval(hits, trials, Z95);
            TailPoint { y, survival: hits as f64 / trials as f64, ci_low, ci_high }
        })
        .collect();
    Ok(TailCurve { family, n, trials, points })
}

/// Per-pair loss values, one column per metric, for `pairs` independent
/// instance pairs.
pub fn pairwise_loss_samples(
    family: FamilySpec,
    n: u32,
    metrics: &[MetricSpec],
    pairs: usize,
    stream: &RandomStream,
) -> Result<Vec<Vec<f64>>> {
    check_trials(pairs)?;
    family.check(n)?;
    let kernels = metrics.iter().map(|m| m.kernel(n)).collect::<Result<Vec<_>>>()?;
    let needs_spectrum = kernels.iter().any(Option::is_some);
    let rows = map_trials(pairs, stream, |s| {
        let p = family.instance(n, &s.child(0))?;
        let q = family.instance(n, &s.child(1))?;
        let spectrum = needs_spectrum.then(|| {
            let mut d: Vec<f64> = p.values().iter().zip(q.values()).map(|(a, b)| a - b).collect();
            fwht_in_place(&mut d);
            d
        });
        metrics
            .iter()
            .zip(&kernels)
            .map(|(m, k)| match (m, k, &spectrum) {
                (MetricSpec::Sd, _, _) => squared_distance(&p, &q),
                (MetricSpec::L1, _, _) => l1_distance(&p, &q),
                (MetricSpec::Tvd, _, _) => Ok(l1_distance(&p, &q)? / 2.0),
                (MetricSpec::Mmd2(_), Some(k), Some(d)) => Ok(weighted_spectrum_energy(d, n, k)),
                _ => unreachable!("kernel metrics carry a kernel and a spectrum"),
            })
            .collect::<Result<Vec<f64>>>()
    })?;
    Ok((0..metrics.len()).map(|j| rows.iter().map(|r| r[j]).collect()).collect())
}

/// Mean and variance of each metric over shared instance pairs.
pub fn pairwise_loss_moments_multi(
    family: FamilySpec,
    n: u32,
    metrics: &[MetricSpec],
    pairs: usize,
    stream: &RandomStream,
) -> Result<Vec<MomentReport>> {
    let columns = pairwise_loss_samples(family, n, metrics, pairs, stream)?;
    metrics.iter().zip(&columns).map(|(m, col)| MomentReport::new(family, n, m.label(), m.sigma(n), col)).collect()
}

pub fn pairwise_loss_moments(
    family: FamilySpec,
    n: u32,
    metric: MetricSpec,
    pairs: usize,
    stream: &RandomStream,
) -> Result<MomentReport> {
    Ok(pairwise_loss_moments_multi(family, n, &[metric], pairs, stream)?.remove(0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnticoncentrationReport {
    pub family: FamilySpec,
    pub n: u32,
    pub trials: usize,
    /// `2^{2n} E[p(x)²]`.
    pub second_moment: f64,
    pub second_moment_se: f64,
    /// `Prob(p(x) ≥ 1 / 2^{n+1})`.
    pub tail_half: f64,
    pub tail_half_se: f64,
}

impl AnticoncentrationReport {
    /// Tail at `y = 1/2` stays above `beta`.
    pub fn anticoncentrates(&self, beta: f64) -> bool {
        self.tail_half >= beta
    }
}

/// Estimates `2^{2n} E[p(x)²]` and `Prob(p(x) ≥ 1/2^{n+1})`.
///
/// Each instance contributes the average over all of its outcomes, which
/// is an unbiased per-instance estimate for every family here because
/// their marginals do not depend on `x`.
pub fn anticoncentration_statistic(
    family: FamilySpec,
    n: u32,
    trials: usize,
    stream: &RandomStream,
) -> Result<AnticoncentrationReport> {
    check_trials(trials)?;
    family.check(n)?;
    let per_instance = map_trials(trials, stream, |s| {
        let p = family.instance(n, s)?;
        let big_n = p.len() as f64;
        let threshold = 0.5 / big_n;
        let hits = p.values().iter().filter(|&&v| v >= threshold).count();
        Ok((big_n * kahan_sum(p.values().iter().map(|v| v * v)), hits as f64 / big_n))
    })?;
    let stat: Vec<f64> = per_instance.iter().map(|r| r.0).collect();
    let tail: Vec<f64> = per_instance.iter().map(|r| r.1).collect();
    let (ms, mt) = (Moments::from_values(&stat)?, Moments::from_values(&tail)?);
    Ok(AnticoncentrationReport {
        family,
        n,
        trials,
        second_moment: ms.mean,
        second_moment_se: ms.mean_se,
        tail_half: mt.mean,
        tail_half_se: mt.mean_se,
    })
}

/// Spread of `⟨Z_S⟩` across instances.
pub fn diagonal_observable_variance(
    family: FamilySpec,
    n: u32,
    s: SubsetMask,
    trials: usize,
    stream: &RandomStream,
) -> Result<MomentReport> {
    if s.is_empty() {
        return domain("observable support must be non-empty");
    }
    check_trials(trials)?;
    family.check(n)?;
    let values = map_trials(trials, stream, |st| diagonal_pauli_expectation(&family.instance(n, st)?, s))?;
    let label = format!("z{}", s.qubits().iter().map(|q| q.to_string()).collect::<Vec<_>>().join("_"));
    MomentReport::new(family, n, label, None, &values)
}

/// Moments of `Δ(p, u)` across instances.
pub fn distance_to_uniform_moments(
    family: FamilySpec,
    n: u32,
    trials: usize,
    stream: &RandomStream,
) -> Result<MomentReport> {
    check_trials(trials)?;
    family.check(n)?;
    let u = ProbVector::uniform(n)?;
    let values = map_trials(trials, stream, |s| squared_distance(&family.instance(n, s)?, &u))?;
    MomentReport::new(family, n, "sd_to_uniform", None, &values)
}

/// Fraction of `values` strictly above `threshold` and its binomial SE.
pub fn exceedance_fraction(values: &[f64], threshold: f64) -> (f64, f64) {
    let t = values.len() as f64;
    let f = values.iter().filter(|&&v| v > threshold).count() as f64 / t;
    (f, (f * (1.0 - f) / t).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{dirichlet_distance_to_uniform_mean, product_sd_mean, product_tail_exact, Underlying};
    use crate::rng::derive_stream;

    #[test]
    fn trial_minimum() {
        let s = derive_stream(1, 0);
        assert!(pairwise_loss_moments(FamilySpec::Product, 3, MetricSpec::Sd, 99, &s).is_err());
        assert!(anticoncentration_statistic(FamilySpec::Product, 3, 10, &s).is_err());
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let s = derive_stream(77, 0);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| {
                pairwise_loss_moments_multi(
                    FamilySpec::dirichlet(),
                    5,
                    &[MetricSpec::Sd, MetricSpec::Mmd2(Bandwidth::Fixed(1.0)), MetricSpec::L1],
                    300,
                    &s,
                )
                .unwrap()
            })
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn tail_curve_is_monotone_and_matches_product_oracle() {
        let grid = log_grid(1e-3, 10.0, 12).unwrap();
        let c =
            estimate_tail_curve(FamilySpec::Product, 6, &grid, 20_000, &derive_stream(3, 0), ReferenceOutcome::Fixed)
                .unwrap();
        assert!(c.points.windows(2).all(|w| w[1].survival <= w[0].survival));
        let misses = c
            .points
            .iter()
            .filter(|pt| {
                let exact = product_tail_exact(6, pt.y).unwrap();
                exact < pt.ci_low || exact > pt.ci_high
            })
            .count();
        assert!(misses <= 2, "{misses} of 12 points outside their 95% interval");
    }

    #[test]
    fn peaked_tail_is_bounded_by_support_fraction() {
        let f = FamilySpec::Peaked { k: Some(8), underlying: Underlying::exponential() };
        let grid = log_grid(1e-2, 100.0, 9).unwrap();
        let c = estimate_tail_curve(f, 8, &grid, 5_000, &derive_stream(4, 0), ReferenceOutcome::Pooled).unwrap();
        for pt in &c.points {
            assert!(pt.ci_low <= 8.0 / 256.0);
        }
    }

    #[test]
    fn uniform_degenerate_cases() {
        let s = derive_stream(5, 0);
        let a = anticoncentration_statistic(FamilySpec::Uniform, 5, 100, &s).unwrap();
        assert_eq!(a.second_moment, 1.0);
        assert_eq!(a.tail_half, 1.0);
        assert_eq!(distance_to_uniform_moments(FamilySpec::Uniform, 5, 100, &s).unwrap().mean, 0.0);
    }

    #[test]
    fn point_mass_observable_has_unit_variance() {
        let s = derive_stream(6, 0);
        let r =
            diagonal_observable_variance(FamilySpec::PointMass, 4, SubsetMask::from_qubits(&[1], 4).unwrap(), 4000, &s)
                .unwrap();
        assert!((r.variance - 1.0).abs() < 0.01);
        assert!(diagonal_observable_variance(FamilySpec::Product, 4, SubsetMask::empty(4).unwrap(), 100, &s).is_err());
    }

    #[test]
    fn moments_track_closed_forms() {
        let s = derive_stream(8, 0);
        let r = pairwise_loss_moments(FamilySpec::Product, 5, MetricSpec::Sd, 20_000, &s).unwrap();
        assert!((r.mean - product_sd_mean(5)).abs() < 4.0 * r.mean_se);
        let d = distance_to_uniform_moments(FamilySpec::dirichlet(), 6, 5_000, &s).unwrap();
        assert!((d.mean - dirichlet_distance_to_uniform_mean(6)).abs() < 4.0 * d.mean_se);
    }

    #[test]
    fn exceedance_examples() {
        assert_eq!(exceedance_fraction(&[0.1, 0.2, 0.3, 0.4], 0.25), (0.5, 0.25));
    }
}
