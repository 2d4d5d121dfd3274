use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    ShapeMismatch {
        context: &'static str,
        expected: String,
        actual: String,
    },

    /// A stencil or update produced NaN/Inf. Usually a CFL violation.
    #[error("non-finite value after {operator} at step {step}")]
    NonFinite { step: usize, operator: &'static str },

    #[error("symmetric positive definite solve failed in {context} (min diagonal {min_diag:e}, max diagonal {max_diag:e})")]
    SpdSolve {
        context: &'static str,
        min_diag: f64,
        max_diag: f64,
    },

    #[error("internal error: {0}")]
    Internal(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn shape(context: &'static str, expected: impl ToString, actual: impl ToString) -> Self {
        Error::ShapeMismatch {
            context,
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }

    /// Tags a non-finite failure with the step at which it happened.
    pub fn at_step(self, step: usize) -> Self {
        match self {
            Error::NonFinite { operator, .. } => Error::NonFinite { step, operator },
            other => other,
        }
    }

    /// True for failures of the numerics (as opposed to bad input or I/O).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFinite { .. } | Error::SpdSolve { .. } | Error::Internal(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
