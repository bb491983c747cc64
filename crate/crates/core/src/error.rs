use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("index sets differ: {0}")]
    IndexMismatch(String),

    #[error("covariance is not positive semidefinite (offending value {value:e})")]
    NonPsdCovariance { value: f64 },

    #[error("marginal masses differ: row sum {row} vs column sum {col}")]
    MarginalMismatch { row: f64, col: f64 },

    #[error("degenerate problem: {0}")]
    Degenerate(String),

    #[error("scale constant must be positive, got {0}")]
    NonpositiveC(f64),

    #[error("sequence class has {size} elements, cap is {cap}")]
    ClassTooLarge { size: u128, cap: u128 },

    #[error("need at least {min} samples, got {got}")]
    InsufficientSamples { got: usize, min: usize },

    #[error("exact covering needs n <= {max}, got n = {n}")]
    ExactTooLarge { n: usize, max: usize },

    #[error("group action is not transitive: orbit of the first point has {orbit} of {n} points")]
    NotTransitive { orbit: usize, n: usize },

    #[error("covariance not invariant under generator {generator}: entry ({row}, {col})")]
    NotInvariant { generator: usize, row: usize, col: usize },

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("linear program: {0}")]
    Lp(String),
}

pub type Result<T> = std::result::Result<T, Error>;
