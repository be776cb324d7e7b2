//! Analytical distribution families and their closed-form statistics.

mod bounds;
mod product;
mod pseudo;

pub use bounds::*;
pub use product::*;
pub use pseudo::*;
