use thiserror::Error;

/// Library-wide error type. Variants map one-to-one onto the CLI exit-code
/// categories, so keep them coarse.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input text (edge lists, rule JSON, numeric fields).
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Self-loops are rejected everywhere: they never change connectivity,
    /// component sizes, or spanning trees, and would only distort edge counts.
    #[error("self-loop rejected at {location}")]
    SelfLoop { location: String },

    /// Input exceeds an exact-pipeline cap (bitmask width, subset-walk size).
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// A parameter is structurally invalid (bad alpha, vertex out of range,
    /// divisibility failure).
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A value is outside an operation's domain (x outside [0, 1], wrong
    /// basis, empty family where one is required).
    #[error("domain error: {0}")]
    Domain(String),

    /// A verified identity failed.
    #[error("constraint violation: {0}")]
    Constraint(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }
}
