//! Error classes mapped onto the process exit codes: configuration problems
//! exit with 2, runtime/numerical problems with 3.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Anything wrong with user-supplied configuration (files, flags, dims).
    Config(String),
    /// Failures during a run: I/O on outputs, numerical breakdowns.
    Runtime(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<pwclra::Error> for CliError {
    fn from(e: pwclra::Error) -> Self {
        match e {
            pwclra::Error::Config(_) | pwclra::Error::Argument(_) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}
