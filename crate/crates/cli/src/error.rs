use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("config file {path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("output directory {0} exists and is not empty (pass --force to overwrite)")]
    OutputExists(PathBuf),

    #[error(transparent)]
    Core(#[from] mch_core::Error),

    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },

    #[error("{0}")]
    Acceptance(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) | Self::Config { .. } | Self::OutputExists(_) => 2,
            Self::Core(mch_core::Error::InvalidParameter { .. }) => 2,
            Self::Core(_) | Self::Io { .. } => 3,
            Self::Acceptance(_) => 4,
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Self::Io { context: context.into(), source }
    }
}

pub type CliResult<T> = Result<T, CliError>;
