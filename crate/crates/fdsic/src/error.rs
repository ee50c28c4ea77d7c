//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by configuration checks, numerical routines, and I/O.
#[derive(Debug, Error)]
pub enum FdsicError {
    /// A configuration value is out of its documented range.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An input sequence has the wrong length or an empty input was given
    /// where at least one sample is required.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A numerical routine could not produce a usable result
    /// (e.g. every tuning candidate diverged).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A persisted artifact (parameter file, dataset, CSV) is malformed.
    #[error("parse error: {0}")]
    Parse(String),

    /// Filesystem failure, annotated with the path involved.
    #[error("io error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl FdsicError {
    /// Wrap an I/O error together with the offending path.
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        FdsicError::Io { path: path.as_ref().display().to_string(), source }
    }
}

/// Convenience alias used by most fallible functions in the crate.
pub type Result<T> = std::result::Result<T, FdsicError>;
