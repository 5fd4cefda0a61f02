use thiserror::Error;

use crate::eigen::EigenBasis;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input text. `line` is 1-based.
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("point cloud is empty")]
    EmptyCloud,

    #[error("non-finite coordinate in point {0}")]
    NonFinite(usize),

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    /// The covariance has (near-)repeated eigenvalues, so the principal axes
    /// are not unique. The basis is attached for diagnostics.
    #[error(
        "degenerate reference frame: eigenvalues ({:.6e}, {:.6e}, {:.6e})",
        .0.values[0], .0.values[1], .0.values[2]
    )]
    DegenerateFrame(Box<EigenBasis>),

    #[error("zero extent: all points coincide")]
    ZeroExtent,

    #[error("mesh has zero total area")]
    DegenerateMesh,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("negative feature value {value} at index {index}")]
    NegativeValue { index: usize, value: f64 },

    #[error("non-finite feature value at index {0}")]
    NonFiniteFeature(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("incompatible descriptor: {0}")]
    Incompatible(String),

    /// A record in an embedding or store file failed validation.
    #[error("record `{key}`: {msg}")]
    Record { key: String, msg: String },

    #[error("dataset: {0}")]
    Dataset(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    /// Process exit code for the command-line front end:
    /// 2 usage, 3 data, 4 numeric/degeneracy.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidArgument(_) => 2,
            Error::DegenerateFrame(_) | Error::ZeroExtent | Error::DegenerateMesh => 4,
            _ => 3,
        }
    }
}
