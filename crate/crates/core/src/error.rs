use std::path::PathBuf;

/// Errors raised by the denoising toolkit.
///
/// Every variant belongs to one of three classes (usage, data, solver) which
/// the command-line front end maps onto exit codes 1, 2 and 3.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("usage: {0}")]
    Usage(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed header {path}: {reason}")]
    Header { path: PathBuf, reason: String },

    #[error("payload size mismatch: header implies {expected} bytes, found {found}")]
    SizeMismatch { expected: u64, found: u64 },

    #[error("non-finite value at flat index {index}")]
    NonFinite { index: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("value {value} at flat index {index} lies outside [0, 1]")]
    NotNormalized { index: usize, value: f64 },

    #[error("malformed csv: {0}")]
    Csv(String),

    #[error("solver failure at iteration {iteration}: {reason}")]
    Solver { iteration: usize, reason: String },

    #[error("patch at origin ({row}, {col}): {source}")]
    Patch {
        row: usize,
        col: usize,
        #[source]
        source: Box<Error>,
    },
}

/// Coarse error class, one per CLI exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Solver,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Usage(_) => ErrorKind::Usage,
            Error::Solver { .. } => ErrorKind::Solver,
            Error::Patch { source, .. } => source.kind(),
            _ => ErrorKind::Data,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
