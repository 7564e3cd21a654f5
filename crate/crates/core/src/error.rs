use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by the library and the command-line driver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("parameter file, line {line}: {key}: {message}")]
    ParamParse { line: usize, key: String, message: String },

    #[error("parameter file: missing mandatory key {key}")]
    MissingParam { key: String },

    #[error("initial point has residual norm {norm:e}, above tolerance {tol:e}")]
    UnconvergedStart { norm: f64, tol: f64 },

    #[error("bootstrap failed: {0}")]
    Bootstrap(String),

    #[error("residual evaluation produced non-finite values")]
    Evaluation,

    #[error("invalid problem configuration: {0}")]
    Config(String),

    #[error("{path}:{line}: {message}")]
    Format { path: PathBuf, line: usize, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
