use crate::bits::check_qubits;
use crate::error::{Error, Result};

/// Absolute tolerance on `|Σ p − 1|`.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// A validated dense probability vector over `2^n` outcomes.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbVector {
    n: u32,
    values: Vec<f64>,
}

impl ProbVector {
    /// Validates `values` as a distribution over `n` qubits.
    pub fn new(values: Vec<f64>, n: u32) -> Result<Self> {
        check_qubits(n)?;
        let len = 1usize << n;
        if values.len() != len {
            return Err(Error::Dimension(format!("{} entries for {n} qubits, expected {len}", values.len())));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::Domain(format!("entry {i} is {v}, probabilities must be finite and non-negative")));
        }
        let sum = kahan_sum(values.iter().copied());
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Normalization { sum, tol: NORMALIZATION_TOL });
        }
        Ok(Self { n, values })
    }

    /// Normalizes non-negative weights by their sum.
    pub fn from_weights(mut weights: Vec<f64>, n: u32) -> Result<Self> {
        let sum = kahan_sum(weights.iter().copied());
        if !(sum > 0.0) || !sum.is_finite() {
            return Err(Error::Domain(format!("weights sum to {sum}")));
        }
        weights.iter_mut().for_each(|w| *w /= sum);
        Self::new(weights, n)
    }

    pub fn uniform(n: u32) -> Result<Self> {
        check_qubits(n)?;
        let len = 1usize << n;
        Ok(Self { n, values: vec![1.0 / len as f64; len] })
    }

    pub fn point_mass(n: u32, index: usize) -> Result<Self> {
        check_qubits(n)?;
        let len = 1usize << n;
        if index >= len {
            return Err(Error::Domain(format!("outcome {index} outside 0..{len}")));
        }
        let mut values = vec![0.0; len];
        values[index] = 1.0;
        Ok(Self { n, values })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Number of outcomes `N = 2^n`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, index: usize) -> f64 {
        self.values[index]
    }

    /// `Σ_x p(x)^2`.
    pub fn collision_probability(&self) -> f64 {
        kahan_sum(self.values.iter().map(|v| v * v))
    }

    pub fn support_size(&self) -> usize {
        self.values.iter().filter(|&&v| v > 0.0).count()
    }
}

pub fn validate_prob_vector(values: Vec<f64>, n: u32) -> Result<ProbVector> {
    ProbVector::new(values, n)
}

/// Compensated summation.
pub fn kahan_sum(iter: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in iter {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}
