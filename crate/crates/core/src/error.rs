use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
///
/// `Validation` and `Parse` describe bad user input; everything else is an
/// I/O or internal failure. The CLI maps the former to exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("unknown simplex id {0}")]
    UnknownSimplex(usize),

    #[error("set of {0} simplices is not orderly convex")]
    NotConvex(usize),

    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("i/o error on {path}: {source}")]
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
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True when the error was caused by invalid input rather than an
    /// environment or internal failure.
    pub fn is_user_error(&self) -> bool {
        matches!(
            self,
            Error::Validation(_) | Error::UnknownSimplex(_) | Error::NotConvex(_) | Error::Parse { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
