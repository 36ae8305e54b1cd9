//! CLI errors and their exit codes.

use std::fmt;

use duio_core::DuioError;

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input; exit code 2.
    Input(String),
    /// A violated existence, design or verification condition; exit code 1.
    Condition(String),
    /// A numerical failure while processing valid input; exit code 1.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Condition(_) | CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Condition(m) => write!(f, "condition failed: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<DuioError> for CliError {
    fn from(e: DuioError) -> Self {
        let msg = format!("{} ({})", e, e.code());
        if e.is_condition_failure() {
            return CliError::Condition(msg);
        }
        match e {
            DuioError::DimensionMismatch(_)
            | DuioError::InvalidArgument(_)
            | DuioError::ModeMismatch(_)
            | DuioError::RequiresConnectivity { .. }
            | DuioError::RequiresStrongConnectivity
            | DuioError::RequiresSymmetric { .. }
            | DuioError::StepTooLarge { .. }
            | DuioError::Io(_) => CliError::Input(msg),
            _ => CliError::Runtime(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
