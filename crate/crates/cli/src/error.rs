use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("a_{index}: cannot parse {literal:?} as a complex number (expected \"re\" or \"re+imi\")")]
    ComplexLiteral { index: usize, literal: String },

    #[error("a: expected 1 or {expected} values for size {size}, got {found}")]
    ParameterCount { size: usize, expected: usize, found: usize },

    #[error("grid: {0}")]
    Grid(String),

    #[error("tolerance: {0}")]
    Tolerance(String),

    #[error("{0}")]
    Params(#[from] matorth::Error),

    #[error("moment sequence stopped at degree {n} before nmax + 1: {reason}")]
    Truncated { n: usize, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("table {0} missing from input")]
    MissingTable(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}
