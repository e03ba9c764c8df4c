//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by kernel construction, selection, and experiments.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("calibration failed: no penalty transition detected over the lambda grid")]
    CalibrationFailed {
        trace: Box<crate::calibration::CalibrationTrace>,
    },

    #[error("evaluation grid covers too little probability mass: {missing:.3e} outside grid")]
    CoverageError { missing: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
