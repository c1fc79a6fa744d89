use std::path::{Path, PathBuf};

use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;
pub const EXIT_ANALYSIS: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] superscroll::Error),

    #[error("{failed} of {total} inputs failed")]
    Batch { failed: usize, total: usize },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: impl AsRef<Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        use superscroll::Error as E;
        match self {
            CliError::Core(E::Diverged { .. } | E::Numerical(_)) => EXIT_NUMERICAL,
            CliError::Core(
                E::FitRejected(_)
                | E::InsufficientSampling { .. }
                | E::RankDeficient { .. }
                | E::Degenerate(_),
            ) => EXIT_ANALYSIS,
            _ => EXIT_CONFIG,
        }
    }
}
