use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the simulator, the estimators and the experiment runners.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter set that can never describe a valid run.
    #[error("invalid configuration: {field}: {reason}")]
    Config { field: String, reason: String },

    /// A call that violates an operation's preconditions.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the caller's parameters rather than the environment.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Config { .. } | Error::Usage(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
