use thiserror::Error;

/// Errors raised by the manifold primitives, proximal catalog, problem
/// builders and solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected}, got {found}")]
    ShapeMismatch { expected: String, found: String },

    #[error("matrix is rank deficient (smallest/largest singular value ratio {ratio:e})")]
    RankDeficient { ratio: f64 },

    #[error("point is not on the Stiefel manifold: |X^T X - I|_F = {residual:e}")]
    NotOnManifold { residual: f64 },

    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),

    #[error("smoothing parameter mu = {mu} exceeds 1/(2 W_h) = {limit}")]
    SmoothingTooCoarse { mu: f64, limit: f64 },

    #[error("penalty beta = {beta} must exceed 1/mu = {limit}")]
    BetaTooSmall { beta: f64, limit: f64 },

    #[error("k = {k} outside 1..={max}")]
    KOutOfRange { k: usize, max: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("data matrix is empty")]
    EmptyData,

    #[error("column {0} is identically zero and cannot be normalized")]
    DegenerateColumn(usize),

    #[error("file not found: {0}")]
    FileNotFound(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("invalid solver configuration: {0}")]
    ConfigInvalid(String),

    #[error("line search stalled after {backtracks} backtracks at iteration {iteration}")]
    LineSearchStalled { iteration: usize, backtracks: usize },

    #[error("criticality needs either an exact subdifferential distance or a canonical element")]
    MissingCanonicalElement,

    #[error("Lyapunov value needs a previous iterate (t >= 1)")]
    InsufficientHistory,

    #[error("trace is empty")]
    EmptyTrace,

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn shape_mismatch(expected: (usize, usize), found: (usize, usize)) -> Error {
    Error::ShapeMismatch {
        expected: format!("{}x{}", expected.0, expected.1),
        found: format!("{}x{}", found.0, found.1),
    }
}
