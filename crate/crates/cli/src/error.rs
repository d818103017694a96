use slag_toric::Error;
use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("verification failed: {0}")]
    Verify(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    /// Process exit code for scripting.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::NotGorenstein(_)) => 2,
            CliError::Core(Error::NotAmple) => 3,
            CliError::Core(Error::TooLarge { .. }) => 4,
            CliError::Core(Error::DegenerateHeights(_)) => 5,
            CliError::Verify(_) => 6,
            _ => 1,
        }
    }
}
