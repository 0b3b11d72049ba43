use std::fmt;

/// Failure classes of the command line, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or config file.
    Usage(String),
    /// Unreadable or malformed input data, or arguments outside a domain.
    Data(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Data(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<sphereuni::Error> for CliError {
    fn from(e: sphereuni::Error) -> Self {
        match e.root() {
            sphereuni::Error::Internal(_) => CliError::Internal(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
