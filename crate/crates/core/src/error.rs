use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the forecasting pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Not enough observations for the requested computation.
    #[error("series too short: need at least {needed} points, got {got}")]
    TooShort { needed: usize, got: usize },

    /// Input data violates a domain invariant (non-positive price, unordered dates, ...).
    #[error("invalid data: {0}")]
    Validation(String),

    /// A caller-supplied parameter is out of its documented range.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A computed value left its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("{path}: line {line}: {message}")]
    Ingest {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// True for errors caused by bad parameters rather than bad data.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Argument(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
