//! Exit-status contract: 0 success, 1 domain error, 2 environment error,
//! 64 usage error.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitClass {
    Domain,
    Environment,
    Usage,
}

/// A classified CLI failure.
#[derive(Debug)]
pub struct CliError {
    pub class: ExitClass,
    pub message: String,
}

impl CliError {
    pub fn domain(message: impl Into<String>) -> Self {
        CliError { class: ExitClass::Domain, message: message.into() }
    }

    pub fn environment(message: impl Into<String>) -> Self {
        CliError { class: ExitClass::Environment, message: message.into() }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        CliError { class: ExitClass::Usage, message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self.class {
            ExitClass::Domain => 1,
            ExitClass::Environment => 2,
            ExitClass::Usage => 64,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::environment(e.to_string())
    }
}

pub fn domain<E: fmt::Display>(e: E) -> CliError {
    CliError::domain(e.to_string())
}

pub fn environment<E: fmt::Display>(e: E) -> CliError {
    CliError::environment(e.to_string())
}
