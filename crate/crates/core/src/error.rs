use thiserror::Error;

use crate::solver::ExtremalSolution;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("kernel is identically zero")]
    ZeroKernel,

    #[error("exponent p = {0} is outside (1, inf)")]
    InvalidExponent(f64),

    #[error("sample count mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degree {degree} exceeds the alias-free limit {max} of the grid")]
    DegreeTooLarge { degree: usize, max: usize },

    #[error("non-finite result ({0}); coefficients or degree out of supported range")]
    NonFinite(&'static str),

    #[error("solver did not reach residual {tol:e} (got {residual:e} after {iterations} iterations)")]
    NonConvergence {
        residual: f64,
        tol: f64,
        iterations: usize,
        /// Best iterate, still carrying diagnostics.
        solution: Box<ExtremalSolution>,
    },

    #[error("{0}")]
    InvalidArgument(String),
}
