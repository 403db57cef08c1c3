use ldpd_core::sim::{EnvError, SnapshotError};
use ldpd_llm::{LlmError, StoreError};
use ldpd_marl::MarlError;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config line {line}: {msg}")]
    ConfigLine { line: usize, msg: String },
    #[error("invalid config: {0}")]
    Config(String),
    #[error("policy input width {found} does not match the environment's observation width {expected}")]
    DimMismatch { expected: usize, found: usize },
    #[error("report has no rows")]
    EmptyReport,
    #[error("malformed report: {0}")]
    Report(String),
    #[error("trace line {line}: {msg}")]
    Trace { line: usize, msg: String },
    #[error("checkpoint {0} was written for a different configuration")]
    ForeignCheckpoint(PathBuf),
    #[error(transparent)]
    Marl(#[from] MarlError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| HarnessError::Io { path, source }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
