use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coordinate {value} out of range on axis {axis} (extent {extent})")]
    Index {
        axis: usize,
        value: i64,
        extent: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("integration diverged at step {step}, node {node}")]
    Diverged { step: u64, node: usize },

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("rank-deficient point covariance: rank {rank} < {requested}")]
    RankDeficient { rank: usize, requested: usize },

    #[error("insufficient sampling: {have} points, need at least {need}")]
    InsufficientSampling { have: usize, need: usize },

    #[error("fit rejected: {0}")]
    FitRejected(String),

    #[error("malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }
}
