use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("numerical failure: {message}")]
    NumericalFailure {
        message: String,
        /// Condition number of the offending matrix, when one was computed.
        condition: Option<f64>,
    },

    #[error("{path}:{line}: {message}")]
    Config {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("malformed codebook file at line {line}: {message}")]
    CodebookFormat { line: usize, message: String },

    #[error("trial failed (scheme {scheme}, seed {seed}): {source}")]
    Trial {
        scheme: String,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>, condition: Option<f64>) -> Self {
        Error::NumericalFailure {
            message: msg.into(),
            condition,
        }
    }

    /// True when the error (or the error a failed trial wraps) came from a
    /// solver or decomposition rather than from bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NumericalFailure { .. } => true,
            Error::Trial { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
