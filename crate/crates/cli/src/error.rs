use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Param(String),
    #[error("{0}")]
    Io(String),
    #[error("verification failed: {0}")]
    Verify(String),
}

impl CliError {
    /// Process exit code: 1 verification failure, 2 parameter error, 3 I/O error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Verify(_) => 1,
            Self::Param(_) => 2,
            Self::Io(_) => 3,
        }
    }

    pub(crate) fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        Self::Io(format!("{}: {err}", path.display()))
    }
}

impl From<blocksplit::Error> for CliError {
    fn from(e: blocksplit::Error) -> Self {
        Self::Param(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
