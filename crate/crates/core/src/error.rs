use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("duplicate sample id {0}")]
    DuplicateSampleId(u64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("partition covers {partition} samples but {expected} were expected")]
    SizeMismatch { expected: usize, partition: usize },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:.3e}, tolerance {tol:.1e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        tol: f64,
    },

    #[error("instance too large for exhaustive search: {count:.3e} partitions (limit {limit:.0e})")]
    TooLarge { count: f64, limit: f64 },

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("batch sizes are not uniform")]
    NonUniformBatches,

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
}
