//! Output distributions of quantum generative model families, the losses
//! used to train them, and Monte Carlo experiments measuring how those
//! losses concentrate as the qubit count grows.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bits;
pub mod circuits;
pub mod error;
pub mod families;
pub mod harness;
pub mod lab;
pub mod loss;
pub mod prob;
pub mod rng;
pub mod samples;
pub mod special;
pub mod walsh;

pub use bits::{fourier_character, hamming_distance, BitString, SubsetMask};
pub use error::{Error, Result};
pub use prob::{validate_prob_vector, ProbVector};
pub use rng::{derive_stream, RandomStream};
pub use samples::SampleSet;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/bitstrings.md")]
    mod bitstrings {}
    #[doc = include_str!("../../../book/src/families.md")]
    mod families {}
    #[doc = include_str!("../../../book/src/losses.md")]
    mod losses {}
    #[doc = include_str!("../../../book/src/concentration.md")]
    mod concentration {}
    #[doc = include_str!("../../../book/src/harness.md")]
    mod harness {}
}
