use std::path::PathBuf;

use crate::colorspace::LabColor;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("color L={:.4} a={:.4} b={:.4} is outside the sRGB gamut", .0.l, .0.a, .0.b)]
    OutOfGamut(LabColor),

    #[error("degenerate wheel: {0}")]
    DegenerateWheel(String),

    #[error("degenerate colormap: {0}")]
    Degenerate(String),

    #[error("size mismatch: header declares {expected} bytes, payload has {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("non-finite value at byte offset {offset}")]
    NonFinite { offset: usize },

    #[error("unsupported field format: {0}")]
    Unsupported(String),

    #[error("parse error in {path} at line {line}: {msg}")]
    Parse {
        path: String,
        line: u64,
        msg: String,
    },

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {msg}", .path.display())]
    Png { path: PathBuf, msg: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable name for structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::OutOfGamut(_) => "out_of_gamut",
            Error::DegenerateWheel(_) => "degenerate_wheel",
            Error::Degenerate(_) => "degenerate",
            Error::SizeMismatch { .. } => "size_mismatch",
            Error::NonFinite { .. } => "non_finite",
            Error::Unsupported(_) => "unsupported",
            Error::Parse { .. } => "parse",
            Error::Io { .. } => "io",
            Error::Png { .. } => "png",
        }
    }

    /// Process exit code, distinct per error kind. 2 is reserved for usage errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) => 3,
            Error::OutOfGamut(_) => 4,
            Error::DegenerateWheel(_) => 5,
            Error::Degenerate(_) => 6,
            Error::SizeMismatch { .. } => 7,
            Error::NonFinite { .. } => 8,
            Error::Unsupported(_) => 9,
            Error::Parse { .. } => 10,
            Error::Io { .. } => 11,
            Error::Png { .. } => 12,
        }
    }
}
