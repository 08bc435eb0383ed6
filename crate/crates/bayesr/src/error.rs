//! Crate-wide error type.
//!
//! Every fallible public operation returns [`Result`]. Numerical failures
//! carry enough context to identify the offending quantity; the solver's
//! divergence error additionally carries the objective trace recorded up to
//! the point of failure.

use thiserror::Error;

/// Errors produced by the restoration library.
#[derive(Debug, Error)]
pub enum Error {
    /// Two planes or stacks that must share a shape do not.
    #[error("shape mismatch: expected {expected:?}, got {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    /// An argument violates a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A computation produced a non-finite or otherwise unusable value.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The solver's objective rose for several consecutive sweeps.
    #[error("solver diverged: objective rose for {rising} consecutive sweeps")]
    Diverged {
        rising: usize,
        /// Objective values recorded before the failure, initial value first.
        trace: Vec<f64>,
    },

    /// A least-squares system has no unique solution.
    #[error("rank-deficient system: {0}")]
    RankDeficient(String),

    /// A file could not be parsed in its declared format.
    #[error("malformed {what} in {path}: {reason}")]
    Malformed {
        what: &'static str,
        path: String,
        reason: String,
    },

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// Image encoding or decoding failure.
    #[error("image codec: {0}")]
    Codec(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

impl From<image::ImageError> for Error {
    fn from(e: image::ImageError) -> Self {
        Error::Codec(e.to_string())
    }
}
