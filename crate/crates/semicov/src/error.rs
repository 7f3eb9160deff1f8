use std::path::PathBuf;

/// Everything that ends a run with exit code 1.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Domain(#[from] semicov_core::Error),
    #[error("config-error: {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("input-error: {path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error("io-error: {0}")]
    Io(#[from] std::io::Error),
    #[error("io-error: {0}")]
    Csv(#[from] csv::Error),
    #[error("io-error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("thread-pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

impl CliError {
    pub fn name(&self) -> &'static str {
        match self {
            CliError::Domain(e) => e.name(),
            CliError::Config { .. } => "config-error",
            CliError::Input { .. } => "input-error",
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => "io-error",
            CliError::ThreadPool(_) => "thread-pool",
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
