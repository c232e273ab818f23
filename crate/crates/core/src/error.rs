use thiserror::Error;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("polynomial division is not exact")]
    NotDivisible,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("monomial of total degree {degree} in the right-hand side of `{variable}'` (at most 2 allowed)")]
    DegreeTooHigh { variable: String, degree: u32 },

    #[error("unknown variable `{name}` at line {line}, column {column}")]
    UnknownVariable {
        name: String,
        line: usize,
        column: usize,
    },

    #[error("det(I - h/2 f'(x)) vanishes identically; the map cannot be inverted")]
    DegenerateMap,

    #[error("resource budget exceeded: {0}")]
    ResourceBudgetExceeded(String),

    #[error("cofactor has sign -1, (C - 1)/h has no limit as h -> 0")]
    NoContinuumLimit,

    #[error("continuum limit fails the identity grad(P).f = C P: {0}")]
    LimitInconsistent(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("denominator of the monitored quantity fell below threshold at t = {time}")]
    DenominatorBlowup { time: f64 },

    #[error("I/O error: {0}")]
    Io(String),

    #[error("JSON error: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
