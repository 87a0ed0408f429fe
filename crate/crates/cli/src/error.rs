use thiserror::Error;

/// Failure classes, each with its own exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("I/O error: {0}")]
    Io(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 2,
            CliError::Config(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl From<hypercoarse::Error> for CliError {
    fn from(e: hypercoarse::Error) -> Self {
        use hypercoarse::Error as E;
        let msg = e.to_string();
        match e {
            E::Io(_) | E::Json(_) | E::Format { .. } | E::InvalidInput(_) => CliError::Io(msg),
            E::Dimension(_) | E::Config(_) | E::Size { .. } => CliError::Config(msg),
            E::Precondition(_) | E::Sampling(_) | E::Numerical(_) | E::Metric(_) => CliError::Numerical(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
