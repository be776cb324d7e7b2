//! Pseudo-independent distributions `p(x) = Y_x / Σ_j Y_j` and their
//! peaked (sparse-support) variant.

use std::collections::HashMap;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use serde::{Deserialize, Serialize};

use crate::bits::check_qubits;
use crate::error::{domain, Error, Result};
use crate::prob::{kahan_sum, ProbVector};
use crate::rng::{RandomStream, StreamRng};
use crate::special::ln_gamma;

/// Law of the i.i.d. variables `Y_x` behind a pseudo-independent vector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "lowercase")]
pub enum Underlying {
    /// `Gamma(shape, rate 1)`; shape 1 gives the symmetric Dirichlet(1).
    Gamma { shape: f64 },
    /// Density `α / (1 + y)^{α + 1}` on `y ≥ 0`.
    Pareto { alpha: f64 },
    /// Degenerate law; yields the uniform distribution.
    Constant { value: f64 },
}

impl Underlying {
    pub fn exponential() -> Self {
        Underlying::Gamma { shape: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Underlying::Gamma { shape } if !(shape > 0.0 && shape.is_finite()) => {
                domain(format!("gamma shape must be positive, got {shape}"))
            }
            Underlying::Pareto { alpha } if !(alpha > 1.0 && alpha.is_finite()) => {
                domain(format!("pareto alpha must exceed 1, got {alpha}"))
            }
            Underlying::Constant { value } if !(value > 0.0 && value.is_finite()) => {
                domain(format!("constant law must be positive, got {value}"))
            }
            _ => Ok(()),
        }
    }

    /// Returns a sampler; assumes [`Underlying::validate`] passed.
    pub fn sampler(&self) -> UnderlyingSampler {
        match *self {
            Underlying::Gamma { shape: 1.0 } => UnderlyingSampler::Exp,
            Underlying::Gamma { shape } => UnderlyingSampler::Gamma(Gamma::new(shape, 1.0).expect("validated shape")),
            Underlying::Pareto { alpha } => UnderlyingSampler::Pareto { inv_alpha: 1.0 / alpha },
            Underlying::Constant { value } => UnderlyingSampler::Constant(value),
        }
    }

    /// `μ = E[Y]`.
    pub fn mean(&self) -> f64 {
        match *self {
            Underlying::Gamma { shape } => shape,
            Underlying::Pareto { alpha } => 1.0 / (alpha - 1.0),
            Underlying::Constant { value } => value,
        }
    }

    /// `σ² = Var[Y]`; infinite for Pareto with `α ≤ 2`.
    pub fn variance(&self) -> f64 {
        match *self {
            Underlying::Gamma { shape } => shape,
            Underlying::Pareto { alpha } if alpha > 2.0 => alpha / ((alpha - 1.0).powi(2) * (alpha - 2.0)),
            Underlying::Pareto { .. } => f64::INFINITY,
            Underlying::Constant { .. } => 0.0,
        }
    }

    /// `μ₂ = E[Y²]`.
    pub fn second_moment(&self) -> f64 {
        self.variance() + self.mean().powi(2)
    }

    /// Closed-form Gini coefficient `E|Y − Y'| / (2 E[Y])`.
    pub fn gini(&self) -> f64 {
        match *self {
            Underlying::Gamma { shape } => {
                (ln_gamma(shape + 0.5) - ln_gamma(shape + 1.0)).exp() / std::f64::consts::PI.sqrt()
            }
            Underlying::Pareto { alpha } => alpha / (2.0 * alpha - 1.0),
            Underlying::Constant { .. } => 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub enum UnderlyingSampler {
    Exp,
    Gamma(Gamma<f64>),
    Pareto { inv_alpha: f64 },
    Constant(f64),
}

impl UnderlyingSampler {
    #[inline]
    pub fn draw(&self, rng: &mut StreamRng) -> f64 {
        match self {
            UnderlyingSampler::Exp => Exp1.sample(rng),
            UnderlyingSampler::Gamma(g) => g.sample(rng),
            UnderlyingSampler::Pareto { inv_alpha } => {
                // inverse CDF of 1 - (1 + y)^{-α}; u in (0, 1]
                let u = 1.0 - rng.random::<f64>();
                u.powf(-inv_alpha) - 1.0
            }
            UnderlyingSampler::Constant(v) => *v,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PseudoIndepParams {
    pub n: u32,
    pub underlying: Underlying,
}

impl PseudoIndepParams {
    pub fn new(n: u32, underlying: Underlying) -> Result<Self> {
        check_qubits(n)?;
        underlying.validate()?;
        Ok(Self { n, underlying })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeakedParams {
    pub n: u32,
    pub k: usize,
    pub underlying: Underlying,
}

impl PeakedParams {
    pub fn new(n: u32, k: usize, underlying: Underlying) -> Result<Self> {
        check_qubits(n)?;
        underlying.validate()?;
        let big_n = 1usize << n;
        if k == 0 || k > big_n {
            return domain(format!("support size {k} outside 1..={big_n}"));
        }
        Ok(Self { n, k, underlying })
    }

    /// `K = 2^{⌈log₂ n⌉}`.
    pub fn default_support(n: u32) -> usize {
        (n.max(1) as usize).next_power_of_two()
    }
}

/// Draws `len` i.i.d. variables and normalizes them, redrawing on a zero sum.
pub(crate) fn normalized_draws(underlying: &Underlying, len: usize, rng: &mut StreamRng) -> Vec<f64> {
    let sampler = underlying.sampler();
    loop {
        let mut y: Vec<f64> = (0..len).map(|_| sampler.draw(rng)).collect();
        let total = kahan_sum(y.iter().copied());
        if total > 0.0 && total.is_finite() {
            y.iter_mut().for_each(|v| *v /= total);
            return y;
        }
        log::warn!("pseudo-independent draw summed to {total}; redrawing");
    }
}

pub fn pseudo_indep_prob_vector(params: &PseudoIndepParams, stream: &RandomStream) -> ProbVector {
    let mut rng = stream.rng();
    let values = normalized_draws(&params.underlying, 1usize << params.n, &mut rng);
    ProbVector::new(values, params.n).expect("normalized draws form a distribution")
}

pub fn peaked_prob_vector(params: &PeakedParams, stream: &RandomStream) -> Result<ProbVector> {
    let big_n = 1usize << params.n;
    if params.k > big_n {
        return Err(Error::Domain(format!("support size {} exceeds {big_n}", params.k)));
    }
    let mut rng = stream.rng();
    let support = random_k_subset(big_n, params.k, &mut rng);
    let masses = normalized_draws(&params.underlying, params.k, &mut rng);
    Ok(scatter(params.n, &support, &masses))
}

/// Places `masses[i]` at outcome `support[i]`.
pub(crate) fn scatter(n: u32, support: &[usize], masses: &[f64]) -> ProbVector {
    let mut values = vec![0.0; 1usize << n];
    for (&pos, &m) in support.iter().zip(masses) {
        values[pos] = m;
    }
    ProbVector::new(values, n).expect("scattered masses form a distribution")
}

/// Uniformly random `k`-subset of `0..len` in random order, by a partial
/// Fisher-Yates shuffle over a sparse swap table.
pub fn random_k_subset(len: usize, k: usize, rng: &mut StreamRng) -> Vec<usize> {
    assert!(k <= len);
    let mut swaps: HashMap<usize, usize> = HashMap::with_capacity(2 * k);
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        let j = rng.random_range(i..len);
        let at_j = *swaps.get(&j).unwrap_or(&j);
        let at_i = *swaps.get(&i).unwrap_or(&i);
        swaps.insert(j, at_i);
        out.push(at_j);
    }
    out
}

/// Monte Carlo Gini coefficient with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GiniEstimate {
    pub value: f64,
    pub stderr: f64,
    pub trials: usize,
}

/// Estimates `E|Y − Y'| / (2 E[Y])` from `trials` independent pairs.
///
/// Ratio estimator `mean|Y − Y'| / mean(Y + Y')`; the standard error comes
/// from the delta method.
pub fn gini_coefficient(underlying: &Underlying, stream: &RandomStream, trials: usize) -> Result<GiniEstimate> {
    underlying.validate()?;
    if trials < 2 {
        return domain("gini estimate needs at least 2 trials");
    }
    let sampler = underlying.sampler();
    let mut rng = stream.rng();
    let pairs: Vec<(f64, f64)> = (0..trials)
        .map(|_| {
            let (a, b) = (sampler.draw(&mut rng), sampler.draw(&mut rng));
            ((a - b).abs(), a + b)
        })
        .collect();
    let t = trials as f64;
    let mean_d = kahan_sum(pairs.iter().map(|p| p.0)) / t;
    let mean_s = kahan_sum(pairs.iter().map(|p| p.1)) / t;
    let value = mean_d / mean_s;
    let resid_var = kahan_sum(pairs.iter().map(|&(d, s)| (d - value * s).powi(2))) / (t - 1.0);
    Ok(GiniEstimate { value, stderr: (resid_var / t).sqrt() / mean_s, trials })
}
