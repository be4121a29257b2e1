use thiserror::Error;

/// Errors raised by the analysis toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("insufficient length: need at least {required} samples, got {actual}")]
    InsufficientLength { required: usize, actual: usize },

    #[error("window [{onset}, {offset}) out of bounds for series of length {len}")]
    OutOfBounds {
        onset: usize,
        offset: usize,
        len: usize,
    },

    #[error("no admissible neighbor for point {query} with Theiler window {theiler}")]
    NoNeighbor { query: usize, theiler: usize },

    #[error("zero variance")]
    ZeroVariance,

    #[error("singular derivative at orbit index {0}")]
    SingularDerivative(usize),

    #[error("insufficient data density: {skipped} of {total} renormalization steps skipped")]
    InsufficientDensity { skipped: usize, total: usize },

    #[error("degenerate embedding: {excluded} of {total} points have coincident neighbors")]
    DegenerateEmbedding { excluded: usize, total: usize },

    #[error("no scaling region: {0}")]
    NoScalingRegion(String),

    #[error("divergent trajectory at step {0}")]
    Divergent(usize),

    #[error("class imbalance: {positive} samples labeled +1, {negative} labeled -1")]
    ClassImbalance { positive: usize, negative: usize },

    #[error("missing class {0}")]
    MissingClass(i8),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite loss at iteration {0}")]
    NonFiniteLoss(usize),

    #[error("degenerate training set: {0}")]
    DegenerateTrainingSet(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("model format: {0}")]
    Model(String),
}

pub type Result<T> = std::result::Result<T, Error>;
