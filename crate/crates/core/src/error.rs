//! Error type shared across the toolkit.

use thiserror::Error;

/// Errors produced by corpus loading, rendering, parsing and scoring.
#[derive(Debug, Error)]
pub enum Error {
    /// Filesystem-level failure (missing file, permissions, short write).
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// A line of a JSONL file could not be decoded.
    #[error("{path}:{line}: malformed line: {message}")]
    MalformedLine {
        path: String,
        line: usize,
        message: String,
    },

    /// Input data violated a contract (schema mismatch, bad record, bad argument).
    #[error("{0}")]
    Validation(String),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// True for errors caused by the data handed in rather than the filesystem.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Validation(_) | Error::MalformedLine { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
