//! Failure categories and their exit codes.

use std::path::{Path, PathBuf};

use thiserror::Error;

/// Command failure.
#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid flags, config file or problem parameters.
    #[error("configuration error: {0}")]
    Config(String),
    /// A solve failed numerically.
    #[error("numeric error: {0}")]
    Numeric(layerwind::Error),
    /// Reading or writing a file failed.
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        /// File involved.
        path: PathBuf,
        /// Underlying failure.
        source: std::io::Error,
    },
}

impl CliError {
    /// Process exit code of this category.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

impl From<layerwind::Error> for CliError {
    fn from(e: layerwind::Error) -> Self {
        if e.is_numeric() {
            CliError::Numeric(e)
        } else {
            CliError::Config(e.to_string())
        }
    }
}
