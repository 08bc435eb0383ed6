//! Mean-field variational Bayes image restoration.

pub mod cli;
pub mod degradation;
pub mod error;
pub mod io;
pub mod losses;
pub mod metrics;
pub mod plane;
pub mod priors;
pub mod restore;
pub mod solver;

#[cfg(test)]
pub(crate) mod test_support;

pub use error::{Error, Result};
