use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller violated an operation's precondition (shapes, ids, ranges).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An experiment configuration is inconsistent or unsatisfiable.
    #[error("configuration error: {0}")]
    Config(String),

    /// Training produced a non-finite loss or gradient.
    #[error("training diverged at epoch {epoch}, batch {batch}: {reason}")]
    TrainingFailure {
        epoch: usize,
        batch: usize,
        reason: String,
    },

    /// A text artifact (config, dataset, checkpoint, CSV) could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
