use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExpError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot read config {path}: {source}")]
    ConfigRead { path: PathBuf, source: std::io::Error },
    #[error("config is not valid JSON: {0}")]
    ConfigParse(#[from] serde_json::Error),
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("CSV does not match a known schema: {0}")]
    SchemaMismatch(String),
    #[error(transparent)]
    Core(#[from] mcrb_core::Error),
    #[error("{failed} of {total} trials failed at sweep value {sweep_value} (limit 1%)")]
    FailureThreshold { sweep_value: f64, failed: usize, total: usize },
}

impl ExpError {
    /// Process exit code for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExpError::Config(_) | ExpError::ConfigRead { .. } | ExpError::ConfigParse(_) => 2,
            ExpError::FailureThreshold { .. } => 3,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ExpError::Io { path: path.into(), source }
    }
}

pub type ExpResult<T> = std::result::Result<T, ExpError>;
