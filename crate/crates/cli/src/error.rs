use oadmm_core::Error as CoreError;

/// Failure of a CLI command, classified by exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Invalid spec, unknown solver, unreadable or unwritable files.
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    /// A solver hit a numerical failure.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Numerical(_) => 1,
            Self::Config(_) | Self::Io(_) => 2,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::RankDeficient { .. }
            | CoreError::NotOnManifold { .. }
            | CoreError::LineSearchStalled { .. }
            | CoreError::NonFinite(_) => Self::Numerical(e.to_string()),
            CoreError::Io(_) | CoreError::FileNotFound(_) => Self::Io(e.to_string()),
            _ => Self::Config(e.to_string()),
        }
    }
}
