use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid rational literal {0:?}")]
    InvalidRational(String),

    #[error("NonMonotonePartition: partition point {index} ({value}) does not exceed its predecessor")]
    NonMonotonePartition { index: usize, value: String },

    #[error("EndpointViolation: partition must start at 0 and end at 1, got {first} .. {last}")]
    EndpointViolation { first: String, last: String },

    #[error("EmptyPartition: a partition needs at least two points")]
    EmptyPartition,

    #[error("ShapeMismatch: expected a {expected}x{expected} value matrix, {detail}")]
    ShapeMismatch { expected: usize, detail: String },

    #[error("AsymmetricValues: values[{i}][{j}] != values[{j}][{i}]")]
    AsymmetricValues { i: usize, j: usize },

    #[error("ValueOutOfRange: values[{i}][{j}] = {value} is outside [0, 1]")]
    ValueOutOfRange { i: usize, j: usize, value: String },

    #[error("DisconnectedSkeleton: the skeleton graph has {components} connected components")]
    DisconnectedSkeleton { components: usize },

    #[error("DimensionMismatch: expected {expected} entries, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("TooLarge: brute force is limited to {max} nodes, got {n}")]
    TooLarge { n: usize, max: usize },

    #[error("LeftLargerThanRight: left side has {left} nodes, right side only {right}")]
    LeftLargerThanRight { left: usize, right: usize },

    #[error("NotALineGraphon: {0}")]
    NotALineGraphon(String),

    #[error("NotTwoBlocks: conditional split needs a two-block graphon, got q = {q}")]
    NotTwoBlocks { q: usize },

    #[error("line-graphon inequalities disagree with the exact LP: {0}")]
    LineCriterionDisagreement(String),

    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
