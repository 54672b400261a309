use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("MRF dimension {0} exceeds the exact-enumeration limit of {max}", max = crate::priors::MAX_MRF_DIM)]
    DimensionTooLarge(usize),

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("inconsistent state: {0}")]
    InconsistentState(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("rescaling lost edge ({0}, {1}) to an exact zero")]
    SupportLost(usize, usize),

    #[error("parse error in {path}: row {row}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        column: usize,
        message: String,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("group '{group}' on platform '{platform}' has {n} samples (need at least 2)")]
    EmptyGroup {
        platform: String,
        group: String,
        n: usize,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("sampler failure at iteration {iteration}: {source}")]
    Sampler {
        iteration: usize,
        #[source]
        source: Box<Error>,
        dump: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParameter(_) => 2,
            Error::Parse { .. }
            | Error::Schema(_)
            | Error::EmptyGroup { .. }
            | Error::Json(_)
            | Error::Csv(_) => 3,
            Error::Sampler { .. }
            | Error::NotPositiveDefinite { .. }
            | Error::InconsistentState(_) => 4,
            Error::DimensionMismatch(_) | Error::DegenerateInput(_) => 5,
            _ => 1,
        }
    }
}
