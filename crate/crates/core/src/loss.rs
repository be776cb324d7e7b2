//! Losses between distributions over bitstrings: squared distance, MMD²
//! under the Gaussian-Hamming kernel (double-sum, Fourier and unbiased
//! sample forms), the MMD two-sample test, and 1-norm / total variation.

use serde::{Deserialize, Serialize};

use crate::bits::{hamming_distance, BitString};
use crate::error::{check_same_n, domain, Error, Result};
use crate::prob::{kahan_sum, ProbVector};
use crate::samples::SampleSet;
use crate::walsh::fwht_in_place;

/// Largest `n` for the `O(N²)` kernel double sum.
pub const POPULATION_MMD_CAP: u32 = 13;

/// Gaussian kernel over Hamming distance, `k(x, y) = exp(−d_H / 2ς²) = ρ^{d_H}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    sigma: f64,
    rho: f64,
}

impl KernelSpec {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return domain(format!("kernel bandwidth must be positive, got {sigma}"));
        }
        Ok(Self { sigma, rho: (-1.0 / (2.0 * sigma * sigma)).exp() })
    }

    /// Kernel with a given `ρ ∈ [0, 1)`; `ρ = 0` is the zero-bandwidth limit.
    pub fn from_rho(rho: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&rho) {
            return domain(format!("rho must lie in [0, 1), got {rho}"));
        }
        let sigma = if rho == 0.0 { 0.0 } else { (-1.0 / (2.0 * rho.ln())).sqrt() };
        Ok(Self { sigma, rho })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Upper bound of the kernel, `k(x, x)`.
    pub fn k_max(&self) -> f64 {
        1.0
    }

    /// `ρ^d` for `d = 0..=n`.
    fn powers(&self, n: u32) -> Vec<f64> {
        let mut out = Vec::with_capacity(n as usize + 1);
        let mut v = 1.0;
        for _ in 0..=n {
            out.push(v);
            v *= self.rho;
        }
        out
    }

    /// Fourier weight of a character of weight `k`: `(1 − ρ)^k (1 + ρ)^{n−k}`.
    pub fn fourier_weights(&self, n: u32) -> Vec<f64> {
        (0..=n).map(|k| (1.0 - self.rho).powi(k as i32) * (1.0 + self.rho).powi((n - k) as i32)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Sd,
    Mmd2,
    Mmd2Estimate,
    L1,
    Tvd,
}

impl Metric {
    pub fn label(&self) -> &'static str {
        match self {
            Metric::Sd => "sd",
            Metric::Mmd2 => "mmd2",
            Metric::Mmd2Estimate => "mmd2_estimate",
            Metric::L1 => "l1",
            Metric::Tvd => "tvd",
        }
    }
}

/// A computed loss with the parameters it was computed under.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossValue {
    pub metric: Metric,
    pub value: f64,
    pub sigma: Option<f64>,
    pub samples: Option<(usize, usize)>,
}

pub fn squared_distance(p: &ProbVector, q: &ProbVector) -> Result<f64> {
    check_same_n(p.n(), q.n())?;
    Ok(kahan_sum(p.values().iter().zip(q.values()).map(|(a, b)| (a - b) * (a - b))))
}

pub fn gaussian_hamming_kernel(x: BitString, y: BitString, spec: &KernelSpec) -> Result<f64> {
    let d = hamming_distance(x, y)?;
    Ok(spec.rho.powi(d as i32))
}

/// `Σ_{x,y} k(x, y) (p(x) − q(x)) (p(y) − q(y))` by direct double sum.
pub fn mmd2_population(p: &ProbVector, q: &ProbVector, spec: &KernelSpec) -> Result<f64> {
    check_same_n(p.n(), q.n())?;
    let n = p.n();
    if n > POPULATION_MMD_CAP {
        return Err(Error::Resource(format!(
            "kernel double sum is capped at {POPULATION_MMD_CAP} qubits, got {n}; use mmd2_fourier"
        )));
    }
    let powers = spec.powers(n);
    let d: Vec<f64> = p.values().iter().zip(q.values()).map(|(a, b)| a - b).collect();
    let rows = d.iter().enumerate().map(|(x, &dx)| {
        if dx == 0.0 {
            return 0.0;
        }
        let inner = kahan_sum(d.iter().enumerate().map(|(y, &dy)| powers[(x ^ y).count_ones() as usize] * dy));
        dx * inner
    });
    Ok(kahan_sum(rows))
}

/// MMD² in the character basis, `2^{−n} Σ_S (1 − ρ)^{|S|} (1 + ρ)^{n−|S|} (P̂(S) − Q̂(S))²`.
pub fn mmd2_fourier(p: &ProbVector, q: &ProbVector, spec: &KernelSpec) -> Result<f64> {
    check_same_n(p.n(), q.n())?;
    let mut d: Vec<f64> = p.values().iter().zip(q.values()).map(|(a, b)| a - b).collect();
    fwht_in_place(&mut d);
    Ok(weighted_spectrum_energy(&d, p.n(), spec))
}

/// Weighted energy of an already transformed difference vector.
pub(crate) fn weighted_spectrum_energy(diff_hat: &[f64], n: u32, spec: &KernelSpec) -> f64 {
    let w = spec.fourier_weights(n);
    let total = kahan_sum(diff_hat.iter().enumerate().map(|(s, v)| w[s.count_ones() as usize] * v * v));
    total / diff_hat.len() as f64
}

/// Unbiased two-sample U-statistic for MMD²; may be negative.
pub fn mmd2_unbiased(x: &SampleSet, y: &SampleSet, spec: &KernelSpec) -> Result<f64> {
    check_same_n(x.n(), y.n())?;
    let (m, l) = (x.len(), y.len());
    if m < 2 || l < 2 {
        return domain(format!("unbiased MMD² needs at least 2 samples per side, got {m} and {l}"));
    }
    let powers = spec.powers(x.n());
    let k = |a: u64, b: u64| powers[(a ^ b).count_ones() as usize];
    let within = |s: &[u64]| -> f64 {
        let mut acc = 0.0;
        for i in 0..s.len() {
            for j in i + 1..s.len() {
                acc += k(s[i], s[j]);
            }
        }
        2.0 * acc / (s.len() * (s.len() - 1)) as f64
    };
    let (xs, ys) = (x.outcomes(), y.outcomes());
    let cross: f64 = xs.iter().map(|&a| ys.iter().map(|&b| k(a, b)).sum::<f64>()).sum::<f64>() / (m * l) as f64;
    Ok(within(xs) + within(ys) - 2.0 * cross)
}

/// Acceptance threshold `K √(8 ln(1/α) / (m + l))`.
pub fn mmd_test_threshold(m: usize, l: usize, alpha: f64, k_max: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return domain(format!("significance level must lie in (0, 1], got {alpha}"));
    }
    if m + l == 0 {
        return domain("need at least one sample");
    }
    Ok(k_max * (8.0 * (1.0 / alpha).ln() / (m + l) as f64).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MmdTestOutcome {
    pub estimate: f64,
    pub threshold: f64,
    /// `true` when `p = q` is not rejected.
    pub accept: bool,
}

/// Accepts `p = q` iff the unbiased estimate does not exceed the threshold.
pub fn mmd_two_sample_test(x: &SampleSet, y: &SampleSet, spec: &KernelSpec, alpha: f64) -> Result<MmdTestOutcome> {
    let estimate = mmd2_unbiased(x, y, spec)?;
    let threshold = mmd_test_threshold(x.len(), y.len(), alpha, spec.k_max())?;
    Ok(MmdTestOutcome { estimate, threshold, accept: estimate <= threshold })
}

/// `‖p − q‖₁ = Σ_x |p(x) − q(x)|`.
pub fn l1_distance(p: &ProbVector, q: &ProbVector) -> Result<f64> {
    check_same_n(p.n(), q.n())?;
    Ok(kahan_sum(p.values().iter().zip(q.values()).map(|(a, b)| (a - b).abs())))
}

/// Total variation in the halved convention, `‖p − q‖₁ / 2`.
pub fn total_variation(p: &ProbVector, q: &ProbVector) -> Result<f64> {
    Ok(l1_distance(p, q)? / 2.0)
}

/// Range for `Δ(p, q)` implied by `Δ(p, u)` and `Δ(q, u)` through the
/// triangle inequality on the 2-norm.
pub fn triangle_bounds(dpu: f64, dqu: f64) -> Result<(f64, f64)> {
    if !(dpu >= 0.0 && dqu >= 0.0) {
        return domain(format!("distances must be non-negative, got {dpu} and {dqu}"));
    }
    let (a, b) = (dpu.sqrt(), dqu.sqrt());
    Ok(((a - b).powi(2), (a + b).powi(2)))
}
