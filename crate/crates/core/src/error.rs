use thiserror::Error;

use crate::scalar::GaussianRational;

/// Errors raised by the exact engine and the numeric reflection code.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("series live over different rings")]
    RingMismatch,

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("invalid ring: {0}")]
    InvalidRing(String),

    #[error("contract violation: {0}")]
    Contract(String),

    /// The Jacobian of an implicit system vanishes at the expansion point.
    #[error("Levi-degenerate / singular Jacobian (determinant {determinant})")]
    LeviDegenerate { determinant: GaussianRational },

    #[error("bad coordinates: {0}")]
    BadCoordinates(String),

    #[error("point is not on the hypersurface (residual {residual})")]
    NotOnSurface { residual: GaussianRational },

    #[error("reality violated: coefficient of {first} is {first_value}, but the conjugate slot {second} holds {second_value}")]
    Reality {
        first: String,
        first_value: GaussianRational,
        second: String,
        second_value: GaussianRational,
    },

    #[error("Levi form is not definite: {0}")]
    NotStrictlyPseudoconvex(String),

    #[error("truncation: {0}")]
    Truncation(String),

    #[error("index {index} out of range (n = {n})")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("cannot solve exactly: {0}")]
    NotExactlySolvable(String),

    #[error("Newton iteration did not converge after {iterations} steps (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),
}

pub type Result<T> = std::result::Result<T, Error>;
