use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("empty counts: at least one sample is required")]
    EmptyCounts,

    #[error("instance too large for exact enumeration ({compositions} count vectors, limit {limit}); use mc_mode_error")]
    TooLarge { compositions: u128, limit: u128 },

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("integration failure: {0}")]
    Integration(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("budget error: {0}")]
    Budget(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("schema error at line {line}: {message}")]
    Schema { line: usize, message: String },

    #[error("collection error for question {question}: {message}")]
    Collect { question: String, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

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

pub type Result<T> = std::result::Result<T, Error>;
