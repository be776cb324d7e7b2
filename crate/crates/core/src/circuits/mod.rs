//! Circuit-backed distribution generators: IQP circuits, their
//! single-qubit (product) restriction, peaked IQP embeddings and random
//! matrix product states.

mod iqp;
mod mps;

pub use iqp::*;
pub use mps::*;

use crate::bits::{character, SubsetMask};
use crate::error::{check_same_n, Result};
use crate::prob::{kahan_sum, ProbVector};

/// Largest register simulated as a dense state vector.
pub const STATEVECTOR_CAP: u32 = 16;

/// `⟨Z_S⟩ = Σ_x χ_S(x) p(x)` for the diagonal Pauli string on `S`.
pub fn diagonal_pauli_expectation(p: &ProbVector, s: SubsetMask) -> Result<f64> {
    check_same_n(p.n(), s.n())?;
    let mask = s.mask();
    Ok(kahan_sum(p.values().iter().enumerate().map(|(x, &v)| character(mask, x as u64) as f64 * v)))
}
