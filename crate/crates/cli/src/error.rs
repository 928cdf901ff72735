use std::path::PathBuf;

use thiserror::Error;

/// Harness error type. Stage failures wrap the underlying cause together
/// with the stage name and the artifact path being produced or read.
#[derive(Debug, Error)]
pub enum Error {
    #[error("stage {stage} failed at {}", path.display())]
    Stage {
        stage: &'static str,
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Core(#[from] wleak_core::Error),

    #[error("{context} {}", path.display())]
    Io {
        context: &'static str,
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config file {}: {message}", path.display())]
    Config { path: PathBuf, message: String },

    #[error("weight file {}: {message}", path.display())]
    WeightFormat { path: PathBuf, message: String },

    #[error("JSON file {}: {message}", path.display())]
    Json { path: PathBuf, message: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
