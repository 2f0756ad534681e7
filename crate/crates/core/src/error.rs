use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown class {0:?}")]
    UnknownClass(String),

    #[error("invalid class id {0}")]
    InvalidClassId(u8),

    #[error("invalid class hierarchy: {0}")]
    InvalidHierarchy(String),

    #[error("degenerate polygon in region {region}: {reason}")]
    DegeneratePolygon { region: String, reason: String },

    #[error("invalid region {region}: {reason}")]
    InvalidRegion { region: String, reason: String },

    #[error("dimension mismatch: expected {expected_width}x{expected_height}, got {width}x{height}")]
    DimensionMismatch {
        expected_width: u32,
        expected_height: u32,
        width: u32,
        height: u32,
    },

    #[error("invalid run-length encoding: {0}")]
    InvalidRle(String),

    #[error("invalid cast target {0}: must be Rot or Crosscut")]
    InvalidCastTarget(crate::ClassId),

    #[error("duplicate sample id {0:?}")]
    DuplicateSample(String),

    #[error("sample {sample}: {reason}")]
    InvalidSample { sample: String, reason: String },

    #[error("unsupported manifest format version {0}")]
    UnsupportedFormat(u32),

    #[error("{0}")]
    Invalid(String),

    #[error("malformed input {path}: {reason}")]
    Malformed { path: PathBuf, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("png {path}: {reason}")]
    Png { path: PathBuf, reason: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the environment (missing files, unreadable
    /// or corrupt input) rather than by invalid content.
    pub fn is_io(&self) -> bool {
        matches!(
            self,
            Error::Io { .. } | Error::Png { .. } | Error::Malformed { .. } | Error::Csv(_)
        )
    }
}
