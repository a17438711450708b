use thiserror::Error;

/// Errors raised by the clustering library. Matrix coordinates are stored
/// 0-based and displayed 1-based.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what}: n = {n} exceeds capacity limit {limit}")]
    Capacity {
        what: &'static str,
        n: usize,
        limit: usize,
    },

    #[error("matrix is not square: row {} has {len} entries, expected {expected}", .row + 1)]
    NotSquare {
        row: usize,
        len: usize,
        expected: usize,
    },

    #[error("matrix is not symmetric at ({}, {}): {upper} vs {lower}", .row + 1, .col + 1)]
    Asymmetric {
        row: usize,
        col: usize,
        upper: f64,
        lower: f64,
    },

    #[error("entry ({}, {}) = {value} is out of range {range}", .row + 1, .col + 1)]
    OutOfRange {
        row: usize,
        col: usize,
        value: f64,
        range: &'static str,
    },

    #[error("diagonal entry ({0}, {0}) = {value}, expected {expected}", .index + 1)]
    Diagonal {
        index: usize,
        value: f64,
        expected: f64,
    },

    #[error("need at least {min} points, got {n}")]
    TooFewPoints { n: usize, min: usize },

    #[error("subset mask {mask:#x} is out of range for n = {n}")]
    SubsetOutOfRange { mask: u64, n: usize },

    #[error("expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("set function must vanish on the empty set, got {0}")]
    NonZeroEmpty(f64),

    #[error("coordinate {index} = {value} lies outside [0, 1]")]
    Coordinate { index: usize, value: f64 },

    #[error("invalid cover: {0}")]
    InvalidCover(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("subset {subset} does not contain point {point}")]
    NotMember { point: usize, subset: String },

    #[error("negative score w({subset}) = {value}")]
    NegativeScore { subset: String, value: f64 },

    #[error("zero normalizer for point {point}")]
    ZeroNormalizer { point: usize },

    #[error("collection does not cover point {0}")]
    Uncovered(usize),

    #[error("cover fails the support condition on subset {0}")]
    SupportCondition(String),

    #[error("iteration guard exceeded: {limit} iterations")]
    IterationGuard { limit: usize },

    #[error("invalid options: {0}")]
    Options(String),

    #[error("invalid shift vector: {0}")]
    Shift(String),

    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("I/O error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Parse(err.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse(err.to_string())
    }
}
