use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library reports. The message starts with the variant
/// name so the CLI can echo it verbatim.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("OutOfRange: beta = {0} is not in the open interval (1, 2)")]
    OutOfRange(f64),
    #[error("InvalidPolynomial: x^2 = {a}x + {b} has no root in (1, 2) with a, b >= 1")]
    InvalidPolynomial { a: i64, b: i64 },
    #[error("BackendMismatch: operands come from different numeric backends")]
    BackendMismatch,
    #[error("PointOutsideInterval: x = {x} is not in I_beta = [0, {right}]")]
    PointOutsideInterval { x: f64, right: f64 },
    #[error("DepthExceeded: n = {n} exceeds the configured maximum {max}")]
    DepthExceeded { n: usize, max: usize },
    #[error("OutputTooLarge: {count} words exceed the enumeration cap {cap}")]
    OutputTooLarge { count: String, cap: usize },
    #[error("PieceBudgetExceeded: {pieces} pieces exceed the budget {budget}")]
    PieceBudgetExceeded { pieces: usize, budget: usize },
    #[error("SupportViolation: {0}")]
    SupportViolation(String),
    #[error("OmegaExhausted: the explicit omega word ran out after {consumed} bits")]
    OmegaExhausted { consumed: usize },
    #[error("InvalidParams: {0}")]
    InvalidParams(String),
}

impl Error {
    /// The bare variant name, e.g. `"DepthExceeded"`.
    pub fn name(&self) -> &'static str {
        match self {
            Error::OutOfRange(_) => "OutOfRange",
            Error::InvalidPolynomial { .. } => "InvalidPolynomial",
            Error::BackendMismatch => "BackendMismatch",
            Error::PointOutsideInterval { .. } => "PointOutsideInterval",
            Error::DepthExceeded { .. } => "DepthExceeded",
            Error::OutputTooLarge { .. } => "OutputTooLarge",
            Error::PieceBudgetExceeded { .. } => "PieceBudgetExceeded",
            Error::SupportViolation(_) => "SupportViolation",
            Error::OmegaExhausted { .. } => "OmegaExhausted",
            Error::InvalidParams(_) => "InvalidParams",
        }
    }
}
