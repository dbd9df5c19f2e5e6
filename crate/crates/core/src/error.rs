use thiserror::Error;

use crate::waveform::AngleSet;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input failed validation. `field` names the offending input.
    #[error("invalid `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("dimension mismatch: {angles} angles for {targets} target harmonics")]
    DimensionMismatch { angles: usize, targets: usize },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("divergence: {0}")]
    Divergence(String),

    #[error("no convergence after {iterations} iterations (best residual {residual_norm:e})")]
    NonConvergence {
        best: AngleSet,
        residual_norm: f64,
        iterations: usize,
    },

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("search too expensive: {0}")]
    Cost(String),

    #[error("THD undefined: fundamental amplitude is zero")]
    UndefinedThd,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation { .. } | Error::DimensionMismatch { .. } | Error::Cost(_) => 2,
            Error::Singular(_)
            | Error::Divergence(_)
            | Error::NonConvergence { .. }
            | Error::NoSolution(_)
            | Error::UndefinedThd => 3,
            Error::Io(_) | Error::Json(_) | Error::Csv(_) => 1,
        }
    }
}
