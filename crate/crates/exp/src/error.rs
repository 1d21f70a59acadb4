use std::path::{Path, PathBuf};

use felix_core::FelixError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExpError {
    #[error("bad config: {0}")]
    Config(String),
    #[error("unknown experiment kind `{0}`")]
    UnknownKind(String),
    #[error("invalid parameter: {0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("did not converge: {0}")]
    Convergence(String),
}

impl ExpError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        ExpError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Process exit status for this error. 1 and 2 are left to panics and
    /// command-line usage errors.
    pub fn exit_code(&self) -> u8 {
        match self {
            ExpError::Config(_) => 3,
            ExpError::UnknownKind(_) => 4,
            ExpError::Invalid(_) => 5,
            ExpError::Io { .. } => 6,
            ExpError::Convergence(_) => 7,
        }
    }
}

impl From<FelixError> for ExpError {
    fn from(e: FelixError) -> Self {
        match e {
            FelixError::NonConvergence { .. } | FelixError::Singular { .. } => {
                ExpError::Convergence(e.to_string())
            }
            other => ExpError::Invalid(other.to_string()),
        }
    }
}
