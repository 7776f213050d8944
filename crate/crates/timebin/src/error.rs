use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] timebin_core::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format { path: path.into(), message: message.into() }
    }

    /// 1 for violated physical or numerical invariants, 2 for IO and
    /// configuration problems.
    pub fn exit_code(&self) -> i32 {
        use timebin_core::Error as C;
        match self {
            Error::Core(C::ConfigInvalid(_) | C::OutOfRange { .. } | C::MissingRun { .. }) => 2,
            Error::Core(_) => 1,
            _ => 2,
        }
    }
}
