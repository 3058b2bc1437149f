use std::fmt;

/// All checks passed, or the instance was solved.
pub const OK: i32 = 0;
/// Certification ran and at least one check failed.
pub const CHECK_FAILED: i32 = 1;
/// The input could not be read, parsed or validated.
pub const BAD_INPUT: i32 = 2;
/// The classification could not be decided numerically.
pub const INCONCLUSIVE: i32 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub error: anyhow::Error,
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn input(error: anyhow::Error) -> Self {
        Self { code: BAD_INPUT, error }
    }

    pub fn context(self, msg: String) -> Self {
        Self {
            code: self.code,
            error: self.error.context(msg),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

impl From<dtc_core::Error> for CliError {
    fn from(e: dtc_core::Error) -> Self {
        let code = match e {
            dtc_core::Error::InconclusiveCase { .. } | dtc_core::Error::InconclusiveSearch { .. } => INCONCLUSIVE,
            _ => BAD_INPUT,
        };
        Self { code, error: e.into() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::input(e.into())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::input(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::input(e.into())
    }
}
