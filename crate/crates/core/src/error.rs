use thiserror::Error;

use crate::mask::SolutionFamily;

/// Errors raised by the construction, verification and evaluation pipeline.
///
/// The `Display` form is a single line beginning with a stable kebab-case
/// tag so the CLI can forward it to stderr for machine parsing.
#[derive(Debug, Error)]
pub enum Error {
    #[error("infeasible-parameters: family={family} c32={c32} c33={c33} discriminant={discriminant:e}")]
    InfeasibleParameters {
        family: SolutionFamily,
        c32: f64,
        c33: f64,
        discriminant: f64,
    },

    #[error("non-finite: {what}")]
    NonFinite { what: String },

    #[error("zero-shift: shift (0,0) is the sum-of-squares equation")]
    ZeroShift,

    #[error("no-convergence: iterations={iterations} last_step={last_step:e}")]
    NoConvergence { iterations: usize, last_step: f64 },

    #[error("invalid-key-vector: component sum {sum} differs from 1")]
    InvalidKeyVector { sum: f64 },

    #[error("insufficient-range: {detail}")]
    InsufficientRange { detail: String },

    #[error("invalid-argument: {0}")]
    InvalidArgument(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
