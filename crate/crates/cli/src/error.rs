use std::fmt;

use renewal_ldp::Error;

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config file or specs: exit 2.
    Config(String),
    /// A numerical routine failed: exit 3.
    Numeric(Error),
    /// A verification check did not pass: exit 4.
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Check(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numeric(e) => write!(f, "numeric failure: {e}"),
            CliError::Check(m) => write!(f, "check failed: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } | Error::InvalidLaw(_) | Error::InvalidArgument(_) | Error::NotAdmissible(_) => {
                CliError::Config(e.to_string())
            }
            Error::Io(m) => CliError::Config(m),
            other => CliError::Numeric(other),
        }
    }
}
