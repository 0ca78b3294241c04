pub mod chart;
pub mod error;
pub mod invariant;
pub mod jet;
pub mod potential;
pub mod quaternionic;
pub mod reduction;
pub mod residual;
pub mod suite;

#[cfg(test)]
mod properties;

pub use error::{HktError, Result};
pub use residual::Residual;
