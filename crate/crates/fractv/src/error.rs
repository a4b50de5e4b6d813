//! Crate-wide error type.

use thiserror::Error;

/// Error type shared by all fractv modules.
#[derive(Debug, Error)]
pub enum FractvError {
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two objects that must share a shape (or spacing) do not.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A text or binary input could not be parsed. `offset` is a byte
    /// offset into the input stream.
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    /// The grid search finished, but its best record came from a solve
    /// that did not converge.
    #[error("grid search optimum not converged: {0}")]
    OptimumNotConverged(String),

    /// An internal consistency check failed; indicates a bug.
    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FractvError>;

pub(crate) fn invalid(msg: impl Into<String>) -> FractvError {
    FractvError::InvalidArgument(msg.into())
}

pub(crate) fn shape(msg: impl Into<String>) -> FractvError {
    FractvError::ShapeMismatch(msg.into())
}
