use thiserror::Error;

/// Errors produced by every fallible operation in this crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// The weight vector has a vanishing first or last entry.
    #[error("weight vector is not class A (a1 > 0 and aN > 0 required)")]
    NotClassA,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// Pseudo-time relaxation stopped making progress.
    #[error(
        "iteration diverged at step {iteration}: residual {residual:.6e} \
         exceeded twice the best value {best:.6e}"
    )]
    Diverged {
        iteration: usize,
        residual: f64,
        best: f64,
    },

    #[error("exponent undefined: {0}")]
    ExponentUndefined(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
