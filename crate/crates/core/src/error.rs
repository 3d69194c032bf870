use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("configuration error at `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("world parse error at line {line}, column {column}: {reason}")]
    WorldParse {
        line: usize,
        column: usize,
        reason: String,
    },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line frontend.
    ///
    /// | code | meaning |
    /// |------|---------|
    /// | 2 | invalid parameter, configuration or world file |
    /// | 3 | numerical failure or non-convergence |
    /// | 4 | internal invariant violation |
    /// | 5 | I/O failure |
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter { .. }
            | Error::Config { .. }
            | Error::WorldParse { .. }
            | Error::Precondition(_) => 2,
            Error::NumericalFailure(_) | Error::Convergence { .. } => 3,
            Error::InvariantViolation(_) => 4,
            Error::Io { .. } => 5,
        }
    }
}
