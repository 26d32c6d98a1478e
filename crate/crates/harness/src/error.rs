use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("reading config {path}: {source}")]
    ConfigFile {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parsing config: {0}")]
    ConfigParse(#[from] toml::de::Error),
    #[error("numerical failure: {0}")]
    Numerical(#[from] fracshift_core::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0} acceptance threshold violation(s)")]
    Threshold(usize),
}

impl HarnessError {
    /// Process exit code: 1 config, 2 numerical, 3 threshold.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::ConfigFile { .. } | HarnessError::ConfigParse(_) => 1,
            HarnessError::Threshold(_) => 3,
            HarnessError::Numerical(_) | HarnessError::Io(_) | HarnessError::Csv(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
