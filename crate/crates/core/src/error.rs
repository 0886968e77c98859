use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("optimal value f* is not available for this problem; call `ProblemInstance::precompute_f_star` first")]
    FStarUnavailable,

    #[error("minimizer x* is not available for this problem")]
    XStarUnavailable,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("schedule invariant violated at round {round}: {reason}")]
    Schedule { round: usize, reason: String },

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("malformed bitstring: {0}")]
    Codec(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("every grid point diverged: {0}")]
    AllDiverged(String),

    #[error("run diverged at round {round}")]
    Diverged { round: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
