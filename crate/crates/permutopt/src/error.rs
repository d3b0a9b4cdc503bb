//! Harness error type.

use std::path::PathBuf;

use permutopt_core::CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config {path} at line {line}, column {column}: {message}")]
    ConfigParse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("config {path}: {message}")]
    ConfigInvalid { path: PathBuf, message: String },
    #[error("unknown optimizer '{name}'; registered methods: {valid}")]
    UnknownOptimizer { name: String, valid: &'static str },
    #[error("dataset {path}: non-numeric cell at row {row}, column {column}")]
    DatasetCell {
        path: PathBuf,
        row: usize,
        column: usize,
    },
    #[error("dataset {path}: {message}")]
    DatasetInvalid { path: PathBuf, message: String },
    #[error("plot: {0}")]
    Plot(String),
    #[error("icc over runs: {0}")]
    IccInput(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }
}
