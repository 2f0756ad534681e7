use thiserror::Error;

#[derive(Debug, Error)]
pub enum CurationError {
    #[error("not found: {0}")]
    NotFound(String),

    #[error("conflict: {0}")]
    Conflict(String),

    #[error("{0}")]
    Invalid(String),

    #[error("decision log: {0}")]
    Log(String),

    #[error(transparent)]
    Core(#[from] woodmask_core::Error),
}

impl CurationError {
    /// True when the failure is environmental rather than caused by the
    /// request.
    pub fn is_io(&self) -> bool {
        match self {
            CurationError::Log(_) => true,
            CurationError::Core(e) => e.is_io(),
            _ => false,
        }
    }
}

pub type Result<T, E = CurationError> = std::result::Result<T, E>;
