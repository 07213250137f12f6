//! Crate-wide error type.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid configuration (bad layer sizes, out-of-range hyperparameters,
    /// malformed experiment configs, more tasks than classes, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// Tensor/batch dimension mismatch.
    #[error("shape error: {0}")]
    Shape(String),

    /// Bad data fed to an otherwise valid call (label out of range,
    /// non-finite features, ...).
    #[error("data error: {0}")]
    Data(String),

    /// A file did not parse as the expected format.
    #[error("format error in {path}: {detail}")]
    Format { path: PathBuf, detail: String },

    /// API misuse (evaluating on an empty dataset, sampling an empty
    /// buffer, writing an accuracy row twice, ...).
    #[error("usage error: {0}")]
    Usage(String),

    /// Non-finite values where finite ones are required.
    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Data(format!("csv: {other:?}")),
        }
    }
}

impl Error {
    pub fn format(path: impl Into<PathBuf>, detail: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            detail: detail.into(),
        }
    }

    /// Process exit code for the CLI: 1 config, 2 run failure, 3 i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Io(_) => 3,
            _ => 2,
        }
    }
}
