use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("value out of range: {0}")]
    Range(String),

    /// A solver hit a non-finite value. `last_iterate` is the last parameter
    /// vector at which everything was still finite.
    #[error("numerical failure: {message}")]
    Numerical {
        message: String,
        last_iterate: Option<Vec<f64>>,
    },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("neighborhood graph is disconnected: smallest component has {} point(s) {:?}", .component.len(), .component)]
    Connectivity { component: Vec<usize> },

    #[error("distance measure returned invalid value {value} for pair ({i}, {j})")]
    Measurement { i: usize, j: usize, value: f64 },

    #[error("cannot ingest {path}: {reason}")]
    Ingestion { path: PathBuf, reason: String },

    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    /// Displays the whole chain itself, so the inner error is not exposed
    /// as a `source` (which would print it twice).
    #[error("{context}: {inner}")]
    Context { context: String, inner: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Broad failure classes, used by the command-line front end to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Numerical,
}

impl Error {
    pub fn numerical(message: impl Into<String>) -> Self {
        Error::Numerical {
            message: message.into(),
            last_iterate: None,
        }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            inner: Box::new(self),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidArgument(_) => ErrorClass::Usage,
            Error::Numerical { .. } | Error::Degenerate(_) => ErrorClass::Numerical,
            Error::Context { inner, .. } => inner.class(),
            _ => ErrorClass::Data,
        }
    }
}

pub(crate) trait ResultExt<T> {
    fn context_with<C: Into<String>>(self, f: impl FnOnce() -> C) -> Result<T>;
}

impl<T> ResultExt<T> for Result<T> {
    fn context_with<C: Into<String>>(self, f: impl FnOnce() -> C) -> Result<T> {
        self.map_err(|e| e.context(f()))
    }
}
