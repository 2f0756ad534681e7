use std::fmt;

use woodmask_curation::CurationError;

pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_IO: u8 = 2;

/// A failed command: exit code plus the diagnostic printed on stderr.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn validation(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_VALIDATION,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_IO,
            message: message.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

impl From<woodmask_core::Error> for Failure {
    fn from(e: woodmask_core::Error) -> Self {
        let code = if e.is_io() { EXIT_IO } else { EXIT_VALIDATION };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<CurationError> for Failure {
    fn from(e: CurationError) -> Self {
        let code = if e.is_io() { EXIT_IO } else { EXIT_VALIDATION };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

pub type CmdResult<T> = Result<T, Failure>;
