//! Closed-form marginals, tail probabilities and moment formulas.

use std::f64::consts::LN_2;

use crate::error::{domain, Result};
use crate::special::{gamma_p, ln_gamma};

fn big_n(n: u32) -> f64 {
    2f64.powi(n as i32)
}

/// Density of `p_a(x)` under uniform `a`: `ln(1/y)^{n−1} / (n−1)!`.
pub fn product_marginal_density(n: u32, y: f64) -> Result<f64> {
    if n == 0 {
        return domain("n must be at least 1");
    }
    if !(y > 0.0 && y <= 1.0) {
        return domain(format!("marginal density needs 0 < y <= 1, got {y}"));
    }
    if n == 1 {
        return Ok(1.0);
    }
    let m = (n - 1) as f64;
    let l = -y.ln();
    if l == 0.0 {
        return Ok(0.0);
    }
    Ok((m * l.ln() - ln_gamma(n as f64)).exp())
}

fn check_tail_arg(n: u32, y: f64) -> Result<()> {
    if n == 0 {
        return domain("n must be at least 1");
    }
    if !(y > 0.0 && y <= big_n(n)) {
        return domain(format!("tail argument must lie in (0, 2^{n}], got {y}"));
    }
    Ok(())
}

/// `Prob(p_a(x) ≥ y / 2^n) = γ(n, n ln 2 − ln y) / Γ(n)` for uniform `a`.
pub fn product_tail_exact(n: u32, y: f64) -> Result<f64> {
    check_tail_arg(n, y)?;
    let lambda = (n as f64 * LN_2 - y.ln()).max(0.0);
    gamma_p(n as f64, lambda)
}

/// Poisson-Chernoff upper bound `(λ/n)^n exp(n − λ)`, `λ = n ln 2 − ln y`.
///
/// Only informative for `λ < n`; at or beyond that point the bound is
/// the trivial value 1.
pub fn product_tail_chernoff_bound(n: u32, y: f64) -> Result<f64> {
    check_tail_arg(n, y)?;
    let nf = n as f64;
    let lambda = nf * LN_2 - y.ln();
    if lambda <= 0.0 {
        return Ok(0.0);
    }
    if lambda >= nf {
        return Ok(1.0);
    }
    Ok((nf * (lambda / nf).ln() + nf - lambda).exp())
}

/// Large-`n` simplification `exp(−n/20) / √y` of the Chernoff bound.
/// An approximation, not a bound.
pub fn product_tail_chernoff_approx(n: u32, y: f64) -> Result<f64> {
    check_tail_arg(n, y)?;
    Ok((-(n as f64) / 20.0).exp() / y.sqrt())
}

/// Lower bound on `Prob(X_i ≥ α / N)` for a pseudo-independent vector:
/// `(1 − α(1 + 1/k))² (1 − σ²k²/(Nμ²)) μ²/σ²`.
///
/// `k` is passed through as given; no convention is imposed on it.
pub fn pseudo_indep_anticoncentration_bound(alpha: f64, k: f64, mu: f64, sigma: f64, big_n: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return domain(format!("sigma must be positive, got {sigma}"));
    }
    if !(k > 0.0) || !(big_n >= 1.0) || !(mu > 0.0) {
        return domain("k, mu must be positive and N >= 1");
    }
    let pre = 1.0 - alpha * (1.0 + 1.0 / k);
    let ratio = mu * mu / (sigma * sigma);
    Ok(pre * pre * (1.0 - sigma * sigma * k * k / (big_n * mu * mu)) * ratio)
}

fn check_unit(y: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&y) {
        return domain(format!("argument must lie in [0, 1], got {y}"));
    }
    Ok(())
}

/// Exact survival `(1 − y)^{N−1}` of the Beta(1, N−1) Dirichlet(1) marginal.
pub fn porter_thomas_survival(big_n: f64, y: f64) -> Result<f64> {
    check_unit(y)?;
    Ok(((big_n - 1.0) * (-y).ln_1p()).exp())
}

/// Porter-Thomas limit `exp(−N y)`.
pub fn porter_thomas_exp_approx(big_n: f64, y: f64) -> Result<f64> {
    check_unit(y)?;
    Ok((-big_n * y).exp())
}

/// Survival written with exponent `N` instead of `N − 1`; an approximation
/// of [`porter_thomas_survival`] kept for comparison.
pub fn porter_thomas_survival_power_n(big_n: f64, y: f64) -> Result<f64> {
    check_unit(y)?;
    Ok((big_n * (-y).ln_1p()).exp())
}

/// Exact Beta(1, N−1) density `(N − 1)(1 − y)^{N−2}`.
pub fn dirichlet_marginal_density(big_n: f64, y: f64) -> Result<f64> {
    check_unit(y)?;
    Ok((big_n - 1.0) * ((big_n - 2.0) * (-y).ln_1p()).exp())
}

/// Upper bound `K / 2^n` on peaked tails.
pub fn peaked_tail_bound(n: u32, k: usize) -> Result<f64> {
    if k as f64 > big_n(n) {
        return domain(format!("support size {k} exceeds 2^{n}"));
    }
    Ok(k as f64 / big_n(n))
}

/// Mean and variance of the overlap of two uniform `K`-subsets of `N` outcomes.
pub fn hypergeometric_overlap_moments(big_n: usize, k: usize) -> Result<(f64, f64)> {
    if k > big_n || big_n == 0 {
        return domain(format!("support size {k} exceeds {big_n}"));
    }
    let (nf, kf) = (big_n as f64, k as f64);
    let mean = kf * kf / nf;
    let var = if big_n == 1 { 0.0 } else { mean * ((nf - kf) / nf) * ((nf - kf) / (nf - 1.0)) };
    Ok((mean, var))
}

/// `E[Δ(p, q)] = 2((2/3)^n − 2^{−n})` for independent uniform-`a` products.
pub fn product_sd_mean(n: u32) -> f64 {
    2.0 * ((2.0f64 / 3.0).powi(n as i32) - 0.5f64.powi(n as i32))
}

/// `E[Δ(p, q)] = 2(N − 1) / (N(N + 1))` for independent Dirichlet(1) vectors.
pub fn dirichlet_sd_mean(n: u32) -> f64 {
    let nn = big_n(n);
    2.0 * (nn - 1.0) / (nn * (nn + 1.0))
}

/// `E[Δ(p, u)]` for Dirichlet(1): `2/(N + 1) − 1/N`.
pub fn dirichlet_distance_to_uniform_mean(n: u32) -> f64 {
    let nn = big_n(n);
    2.0 / (nn + 1.0) - 1.0 / nn
}

/// `E[Δ(p, u)]` for uniform-`a` products: `(2/3)^n − 2^{−n}`.
pub fn product_distance_to_uniform_mean(n: u32) -> f64 {
    product_sd_mean(n) / 2.0
}

/// `E[‖p − q‖₁]` for Dirichlet(1) at finite `N`: `2(N − 1)/(2N − 1)`.
pub fn dirichlet_l1_mean(n: u32) -> f64 {
    let nn = big_n(n);
    2.0 * (nn - 1.0) / (2.0 * nn - 1.0)
}

/// Leading-order upper bound `Var[‖p − q‖₁] ≤ (4/N)(σ²/μ² − G²)`.
pub fn pseudo_indep_l1_variance(n: u32, mu: f64, sigma2: f64, gini: f64) -> f64 {
    4.0 / big_n(n) * (sigma2 / (mu * mu) - gini * gini)
}

/// Leading-order `Var[‖p − q‖₁] ≈ 1 / (2N)` for Dirichlet(1) pairs.
///
/// Linearizing the normalization gives
/// `‖p − q‖₁ ≈ (1/N) Σ_x (|E_x − E'_x| − (E_x + E'_x)/2) + const` with
/// `E, E'` i.i.d. Exp(1), and `Var(|E − E'| − (E + E')/2) = 1/2`. The
/// per-outcome sum without the normalization term gives `1/N`, and
/// [`pseudo_indep_l1_variance`] gives the larger `3/N`.
pub fn dirichlet_l1_variance(n: u32) -> f64 {
    0.5 / big_n(n)
}

/// Markov bound `Prob(Δ ≥ k²/N) ≤ 6σ²/(μ²k²) (1 + μ₂/(μ²N))`.
pub fn pseudo_indep_sd_tail_bound(n: u32, k: f64, mu: f64, sigma2: f64, mu2: f64) -> f64 {
    6.0 * sigma2 / (mu * mu * k * k) * (1.0 + mu2 / (mu * mu * big_n(n)))
}

/// `Var⟨Z⟩ ≤ σ²/(Nμ²) (1 + σ²/(Nμ²))` for diagonal Pauli strings.
pub fn diagonal_observable_variance_bound(n: u32, mu: f64, sigma2: f64) -> f64 {
    let r = sigma2 / (big_n(n) * mu * mu);
    r * (1.0 + r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marginal_density_examples() {
        assert_eq!(product_marginal_density(1, 0.3).unwrap(), 1.0);
        assert!((product_marginal_density(2, (-1f64).exp()).unwrap() - 1.0).abs() < 1e-14);
        assert!(product_marginal_density(3, 0.0).is_err());
        assert!(product_marginal_density(3, 1.1).is_err());
    }

    #[test]
    fn marginal_density_integrates_to_one() {
        // Substituting y = e^{-s} turns the log singularity into a smooth
        // gamma-kernel integrand; composite Simpson on [0, 120].
        for n in 1..=12u32 {
            let steps = 24_000;
            let h = 120.0 / steps as f64;
            let f = |s: f64| {
                let y = (-s).exp();
                if y <= 0.0 || s == 0.0 {
                    if n == 1 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    product_marginal_density(n, y).unwrap() * y
                }
            };
            let mut acc = f(0.0) + f(120.0);
            for i in 1..steps {
                acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            let integral = acc * h / 3.0;
            assert!((integral - 1.0).abs() < 1e-6, "n={n}: {integral}");
        }
    }

    #[test]
    fn product_tail_examples() {
        for n in 1..=10 {
            assert_eq!(product_tail_exact(n, big_n(n)).unwrap(), 0.0);
        }
        assert!((product_tail_exact(1, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(product_tail_exact(3, 0.0).is_err());
        assert!(product_tail_exact(3, 9.0).is_err());
        assert!(product_tail_exact(6, 1e-12).unwrap() > 0.999);
    }

    fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
        (0..points).map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (points - 1) as f64).exp().min(hi)).collect()
    }

    #[test]
    fn tail_monotone_decreasing() {
        for n in [2u32, 7, 13] {
            let grid = log_grid(1e-8, big_n(n), 100);
            let vals: Vec<f64> = grid.iter().map(|&y| product_tail_exact(n, y).unwrap()).collect();
            assert!(vals.windows(2).all(|w| w[1] <= w[0] + 1e-15));
        }
    }

    #[test]
    fn chernoff_dominates_exact() {
        for n in 2..=16u32 {
            for y in log_grid(1e-8, big_n(n), 100) {
                let exact = product_tail_exact(n, y).unwrap();
                let bound = product_tail_chernoff_bound(n, y).unwrap();
                assert!(bound >= exact - 1e-15, "n={n} y={y}: {bound} < {exact}");
            }
        }
        assert_eq!(product_tail_chernoff_bound(5, 32.0).unwrap(), 0.0);
    }

    #[test]
    fn chernoff_log_slope_at_unit_y() {
        let slope = 1.0 - LN_2 + LN_2.ln();
        assert!((slope + 0.0597).abs() < 1e-3);
        for n in 2..16u32 {
            let d = product_tail_chernoff_bound(n + 1, 1.0).unwrap().ln()
                - product_tail_chernoff_bound(n, 1.0).unwrap().ln();
            assert!((d - slope).abs() < 1e-12);
        }
    }

    #[test]
    fn anticoncentration_bound_examples() {
        let b = pseudo_indep_anticoncentration_bound(1.0 / 3.0, 2.0, 1.0, 1.0, 1e300).unwrap();
        assert!((b - 0.25).abs() < 1e-12);
        let b = pseudo_indep_anticoncentration_bound(0.5 - 1e-9, 1.0, 1.0, 1.0, 1e6).unwrap();
        assert!(b < 1e-16);
        assert!(pseudo_indep_anticoncentration_bound(0.3, 2.0, 1.0, 0.0, 10.0).is_err());
    }

    #[test]
    fn porter_thomas_examples() {
        assert_eq!(porter_thomas_survival(100.0, 0.0).unwrap(), 1.0);
        let nn = 1e7;
        assert!((porter_thomas_survival(nn, 0.5 / nn).unwrap() - (-0.5f64).exp()).abs() < 1e-6);
        for nn in [256.0, 1024.0, 65536.0] {
            for i in 0..=40 {
                let y = 4.0 / nn * i as f64 / 40.0;
                let exact = porter_thomas_survival(nn, y).unwrap();
                let approx = porter_thomas_exp_approx(nn, y).unwrap();
                assert!((approx - exact).abs() / exact <= 0.02);
            }
        }
        assert!(porter_thomas_survival(4.0, 1.5).is_err());
        assert!(porter_thomas_survival_power_n(4.0, 0.2).unwrap() < porter_thomas_survival(4.0, 0.2).unwrap());
    }

    #[test]
    fn dirichlet_density_integrates_to_one() {
        let nn = 64.0;
        let steps = 20_000;
        let h = 1.0 / steps as f64;
        let mut acc = dirichlet_marginal_density(nn, 0.0).unwrap() + dirichlet_marginal_density(nn, 1.0).unwrap();
        for i in 1..steps {
            acc += dirichlet_marginal_density(nn, i as f64 * h).unwrap() * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        assert!((acc * h / 3.0 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn peaked_and_overlap_examples() {
        assert_eq!(peaked_tail_bound(10, 1024).unwrap(), 1.0);
        assert_eq!(peaked_tail_bound(10, 16).unwrap(), 2f64.powi(-6));
        assert!(peaked_tail_bound(3, 9).is_err());
        assert_eq!(hypergeometric_overlap_moments(8, 2).unwrap().0, 0.5);
        assert_eq!(hypergeometric_overlap_moments(16, 16).unwrap(), (16.0, 0.0));
    }

    #[test]
    fn overlap_sampling_oracle() {
        use crate::families::random_k_subset;
        use crate::rng::derive_stream;
        let (nn, k, trials) = (1024usize, 32usize, 10_000);
        let mut rng = derive_stream(77, 0).rng();
        let overlaps: Vec<f64> = (0..trials)
            .map(|_| {
                let a: std::collections::HashSet<usize> = random_k_subset(nn, k, &mut rng).into_iter().collect();
                random_k_subset(nn, k, &mut rng).into_iter().filter(|x| a.contains(x)).count() as f64
            })
            .collect();
        let mean = overlaps.iter().sum::<f64>() / trials as f64;
        let var = overlaps.iter().map(|o| (o - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
        let (em, ev) = hypergeometric_overlap_moments(nn, k).unwrap();
        assert!((mean - em).abs() < 3.0 * (var / trials as f64).sqrt());
        assert!((var / ev - 1.0).abs() < 0.1);
    }

    #[test]
    fn closed_form_moments() {
        assert!((product_sd_mean(1) - 2.0 * (2.0 / 3.0 - 0.5)).abs() < 1e-16);
        assert!((dirichlet_sd_mean(1) - 2.0 / 6.0).abs() < 1e-16);
        assert!((dirichlet_l1_mean(20) - 1.0).abs() < 1e-6);
        assert!((pseudo_indep_l1_variance(4, 1.0, 1.0, 0.5) - 3.0 / 16.0).abs() < 1e-16);
        assert!((diagonal_observable_variance_bound(3, 1.0, 1.0) - (1.0 / 8.0) * (1.0 + 1.0 / 8.0)).abs() < 1e-16);
    }
}
