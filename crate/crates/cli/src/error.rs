use thiserror::Error;

/// Failure classes of the runner, one per process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Runtime(_) => 3,
            Self::Io(_) => 4,
        }
    }
}

impl From<loggas::Error> for CliError {
    fn from(e: loggas::Error) -> Self {
        use loggas::Error as E;
        match e {
            E::Io(_) | E::Csv(_) | E::Json(_) | E::Format { .. } => Self::Io(e.to_string()),
            E::InvalidArgument(_) => Self::Config(e.to_string()),
            _ => Self::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}
