//! Linear extremal problems in Bergman spaces of the unit disc.
//!
//! Given a polynomial kernel `k` and an exponent `1 < p < ∞`, the functional
//! `phi(f) = ∫ f conj(k) dσ` on `A^p` has a unique extremal function `F` with
//! `||F||_{A^p} = 1` and `Re phi(F) = ||phi||`. This crate computes `F` and
//! `||phi||` numerically and checks the resulting pair against a battery of
//! norm identities and inequalities in the [`harness`] module.

pub mod error;
pub mod harness;
pub mod norms;
pub mod poly;
pub mod projection;
pub mod quadrature;
pub mod solver;
pub mod zeros;

pub use error::{Error, Result};
pub use poly::{k_transform, TaylorPolynomial};
pub use quadrature::{CircleGrid, DiscQuadrature, DiscSamples};
pub use solver::{solve, DegreeChoice, ExtremalProblem, ExtremalSolution, SolverOptions};
