use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid availability: {0}")]
    InvalidAvailability(String),

    #[error("infeasible mask: {0}")]
    InfeasibleMask(String),

    #[error("unsupported protocol: {0}")]
    UnsupportedProtocol(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("parse error in {path}: row {row}, column {col}: {msg}")]
    Parse {
        path: PathBuf,
        row: usize,
        col: usize,
        msg: String,
    },

    #[error("invalid k: {0}")]
    InvalidK(String),

    #[error("degenerate sigma: {0}")]
    SigmaDegenerate(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("infeasible state: {0}")]
    InfeasibleState(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("objective diverged at iteration {iteration}: {value}")]
    Divergence { iteration: usize, value: f64 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
