use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("negative edge weight {weight} on edge ({i}, {j})")]
    NegativeWeight { i: usize, j: usize, weight: f64 },

    #[error("matrix of size {n} exceeds the dense eigendecomposition cap of {cap}")]
    DenseCapExceeded { n: usize, cap: usize },

    #[error("eigendecomposition failed to converge")]
    EigenFailure,

    #[error("zero input vector")]
    ZeroVector,

    #[error(
        "conjugate gradient stalled after {iterations} iterations (relative residual {residual:e})"
    )]
    NotConverged { iterations: usize, residual: f64 },

    #[error("malformed {kind} data: {reason}")]
    Format { kind: &'static str, reason: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn format(kind: &'static str, reason: impl Into<String>) -> Self {
        Error::Format {
            kind,
            reason: reason.into(),
        }
    }

    /// True for errors caused by the filesystem rather than by the inputs.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_))
    }
}
