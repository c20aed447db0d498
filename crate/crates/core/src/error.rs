use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("Gamma argument must be positive, got {0}")]
    NonPositiveArgument(f64),

    #[error("Gamma({0}) overflows f64")]
    Overflow(f64),

    #[error("dimension n = {n} must exceed 2s = {two_s}")]
    DimensionTooSmall { n: f64, two_s: f64 },

    #[error("no sign change of the stability margin in ({lo}, {hi})")]
    NoRootInBracket { lo: f64, hi: f64 },

    #[error("inputs must be nonnegative: {0}")]
    NegativeInput(String),

    #[error("fractional order s = {0} outside the admissible range")]
    InvalidS(f64),

    #[error("grid needs at least {min} interior points, got {got}")]
    GridTooSmall { min: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("matrix is singular or not positive definite")]
    SingularMatrix,

    #[error("radial function is not smooth at r = {0}")]
    SingularPoint(f64),

    #[error("quadrature error estimate {estimate:e} exceeds tolerance {tol:e}")]
    ToleranceNotMet { estimate: f64, tol: f64 },

    #[error("monotone iterate decreased by {decrease:e} at node {node} (iteration {iteration})")]
    MonotonicityViolated {
        iteration: usize,
        node: usize,
        decrease: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("coarse sweep never diverged up to lambda = {0}")]
    BracketNotFound(f64),

    #[error("weak-form residual {residual:e} exceeds {limit:e} at lambda = {lambda}")]
    WeakResidual { lambda: f64, residual: f64, limit: f64 },

    #[error("eigensolver did not converge: {0}")]
    ConvergenceFailure(String),

    #[error("test function is identically zero")]
    ZeroTestFunction,

    #[error("nonlinearity `{0}` is not exponential")]
    NotExponential(String),

    #[error("parameters outside the estimate's regime: {0}")]
    InvalidRegime(String),
}
