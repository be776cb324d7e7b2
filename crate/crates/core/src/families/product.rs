//! Product distributions `p_a(x) = Π_i (a_i if x_i = 0 else 1 - a_i)`.

use rand::Rng;

use crate::bits::check_qubits;
use crate::error::{Error, Result};
use crate::prob::ProbVector;
use crate::rng::RandomStream;
use crate::samples::SampleSet;

/// Per-qubit probabilities of reading `0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductParams {
    a: Vec<f64>,
}

impl ProductParams {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        check_qubits(a.len() as u32)?;
        if let Some(bad) = a.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Domain(format!("product weight {bad} outside [0, 1]")));
        }
        Ok(Self { a })
    }

    pub fn n(&self) -> u32 {
        self.a.len() as u32
    }

    pub fn weights(&self) -> &[f64] {
        &self.a
    }

    /// `p_a(x)` for a single outcome, without building the dense vector.
    pub fn probability(&self, x: u64) -> f64 {
        self.a.iter().enumerate().map(|(i, &a)| if (x >> i) & 1 == 0 { a } else { 1.0 - a }).product()
    }
}

pub fn product_prob_vector(params: &ProductParams) -> ProbVector {
    // Doubling construction: after qubit i the first 2^{i+1} entries hold the
    // marginal over qubits 1..=i+1.
    let n = params.n();
    let mut values = vec![0.0; 1usize << n];
    values[0] = 1.0;
    for (i, &a) in params.a.iter().enumerate() {
        let half = 1usize << i;
        for j in 0..half {
            let v = values[j];
            values[j] = v * a;
            values[j + half] = v * (1.0 - a);
        }
    }
    ProbVector::new(values, n).expect("product vector is normalized by construction")
}

/// `a_i` i.i.d. uniform on `[0, 1]`.
pub fn random_product_instance(n: u32, stream: &RandomStream) -> Result<ProductParams> {
    check_qubits(n)?;
    let mut rng = stream.rng();
    ProductParams::new((0..n).map(|_| rng.random::<f64>()).collect())
}

/// Draws `count` outcomes bit by bit.
pub fn sample_product(params: &ProductParams, stream: &RandomStream, count: usize) -> SampleSet {
    let mut rng = stream.rng();
    let outcomes = (0..count)
        .map(|_| {
            params.a.iter().enumerate().fold(0u64, |acc, (i, &a)| {
                let one = rng.random::<f64>() >= a;
                acc | ((one as u64) << i)
            })
        })
        .collect();
    SampleSet::from_outcomes(params.n(), outcomes)
        .expect("product outcomes fit the register")
        .with_provenance("product", *stream)
}
