use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate parameter name {0}")]
    DuplicateParameter(String),
    #[error("inverted/empty bounds for parameter {name}: [{lower}, {upper}]")]
    InvalidBounds {
        name: String,
        lower: f64,
        upper: f64,
    },
    #[error("parameter space must contain at least one parameter")]
    EmptySpace,
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("non-finite value at coordinate {0}")]
    NonFinite(usize),
    #[error("label {0} outside [0, 1]")]
    InvalidLabel(f64),
    #[error("unknown relation {0}")]
    UnknownRelation(String),
    #[error("unknown qualitative mode {0}")]
    UnknownMode(u32),
    #[error("invalid vocabulary: {}", .0.join("; "))]
    InvalidVocabulary(Vec<String>),
    #[error("relational state violates disjoint group {0}")]
    DisjointViolation(String),
    #[error("invalid precondition model: {0}")]
    InvalidPreconditions(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error(
        "model fit failed: kernel matrix not positive definite with jitter up to {max_jitter:e}"
    )]
    ModelFit { max_jitter: f64 },
    #[error("cannot sample a correction for a zero update")]
    ZeroDelta,
    #[error("unknown failure cause {0}")]
    UnknownCause(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
