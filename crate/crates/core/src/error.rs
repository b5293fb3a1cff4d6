use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("quadrature order {0} is outside 1..=512")]
    InvalidOrder(usize),

    #[error("dimension mismatch: expected {expected} values, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("x = {0} lies outside [0, 1]")]
    Domain(f64),

    #[error("non-finite value while evaluating {what} at x = {x}")]
    Evaluation { what: &'static str, x: f64 },

    #[error("grid function value at node {0} is not finite")]
    NonFinite(usize),

    #[error("unknown problem `{name}`; available: {}", available.join(", "))]
    NotFound { name: String, available: Vec<String> },

    #[error("cannot construct problem: {0}")]
    Construction(String),

    #[error("problem `{0}` has no exact solution")]
    MissingExact(String),

    /// The Newton denominator `T_{F,u}(h)(x)` fell below the guard.
    #[error("smoothness violation at x = {x}: T(h)(x) = {denominator:e} is below the guard in magnitude")]
    SmoothnessViolation { x: f64, denominator: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("insufficient data: need at least {needed} errors above the floor, got {got}")]
    InsufficientData { needed: usize, got: usize },
}
