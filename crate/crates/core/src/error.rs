use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Case text could not be read.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A structurally well-formed input violates a model invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// Vector or matrix shapes do not agree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A parameter lies outside its allowed range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// The requested constraint set is empty.
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serde(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
