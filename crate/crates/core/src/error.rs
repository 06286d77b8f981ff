use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown identifier `{name}` at {pos}")]
    UnknownIdentifier { name: String, pos: usize },

    #[error("non-integer exponent at {pos}")]
    NonIntegerExponent { pos: usize },

    #[error("evaluation domain error: {0}")]
    Domain(String),

    #[error("unbound variable `{0}`")]
    UnboundVariable(char),

    #[error("series mismatch: {0}")]
    SeriesMismatch(String),

    #[error("singular jet (p={p:e})")]
    SingularJet { p: f64 },

    #[error("singular time t={t}")]
    SingularTime { t: f64 },

    #[error("invalid tolerance {0:e}, expected a value in [1e-13, 1e-3]")]
    InvalidTolerance(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("quadrature did not converge on [{a}, {b}] (error estimate {estimate:e})")]
    Quadrature { a: f64, b: f64, estimate: f64 },

    #[error("infeasible: {0}")]
    Infeasible(String),
}

pub type Result<T> = std::result::Result<T, Error>;
