use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}:{line}: face corner has no texture coordinate", path.display())]
    MissingUv { path: PathBuf, line: usize },

    #[error("malformed OMG1 data: {0}")]
    Format(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("mesh has zero extent, cannot normalize positions")]
    DegenerateBounds,

    #[error("island {island_id} has a zero-area UV bounding box")]
    UnpackableInput { island_id: usize },

    #[error("no transform supplied for island {island_id}")]
    TransformMissing { island_id: usize },

    #[error("resolution {resolution} is not divisible by {low}")]
    NotDivisible { resolution: usize, low: usize },

    #[error("object image has no occupied pixel")]
    EmptyImage,

    #[error("mesh has zero surface area")]
    ZeroArea,

    #[error("PNG error on {}: {message}", path.display())]
    Png { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable machine-readable name, used in CLI error documents.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io { .. } => "IoError",
            Error::Parse { .. } => "ParseError",
            Error::MissingUv { .. } => "MissingUv",
            Error::Format(_) => "FormatError",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::DegenerateBounds => "DegenerateBounds",
            Error::UnpackableInput { .. } => "UnpackableInput",
            Error::TransformMissing { .. } => "TransformMissing",
            Error::NotDivisible { .. } => "NotDivisible",
            Error::EmptyImage => "EmptyImage",
            Error::ZeroArea => "ZeroArea",
            Error::Png { .. } => "IoError",
        }
    }

    /// Process exit status: 2 input/parse, 3 pipeline, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. }
            | Error::MissingUv { .. }
            | Error::Format(_)
            | Error::InvalidConfig(_) => 2,
            Error::Io { .. } | Error::Png { .. } => 4,
            _ => 3,
        }
    }
}
