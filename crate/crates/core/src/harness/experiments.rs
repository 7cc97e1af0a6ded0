//! Experiments over families of kernels: continuity in the kernel and
//! boundedness under coefficient decay.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::norms::{hardy_norm, lp_mean};
use crate::poly::TaylorPolynomial;
use crate::solver::{ExtremalProblem, SolverOptions};

use super::checks::{boundary_grid, INEQUALITY_TOL};
use super::report::{CheckContext, CheckReport};
use super::solve_instance;

/// Distances above this count as an increase when judging monotonicity.
const MONOTONE_SLACK: f64 = 1e-9;

/// `||F_n - F||_{H^p}` for the extremal functions of `k_sequence[n]` and of
/// `k_limit`. One log report per term, then a verdict requiring the final
/// distance below `1e-3` and the second half of the sequence non-increasing.
pub fn continuity_experiment(
    p: f64,
    k_sequence: &[TaylorPolynomial],
    k_limit: &TaylorPolynomial,
    opts: &SolverOptions,
) -> Result<Vec<CheckReport>> {
    if k_sequence.is_empty() {
        return Err(Error::InvalidArgument("empty kernel sequence".into()));
    }
    let limit = solve_instance(&ExtremalProblem::new(k_limit.clone(), p)?, opts)?;
    let mut reports = Vec::with_capacity(k_sequence.len() + 1);
    let mut distances = Vec::with_capacity(k_sequence.len());
    let mut worst_residual = limit.residual;
    for (n, k) in k_sequence.iter().enumerate() {
        let sol = solve_instance(&ExtremalProblem::new(k.clone(), p)?, opts)?;
        worst_residual = worst_residual.max(sol.residual);
        let diff = &sol.f - &limit.f;
        let grid = boundary_grid(diff.degree());
        let dist = hardy_norm(&diff, p, &grid)?;
        distances.push(dist);
        let ctx = CheckContext {
            p: Some(p),
            kernel_degree: Some(k.degree()),
            working_degree: Some(sol.degree),
            residual: Some(sol.residual),
            ..CheckContext::default()
        }
        .param("index", n as f64);
        reports.push(CheckReport::ratio_log("continuity_distance", dist, 1.0, ctx));
    }
    let tail_start = distances.len() / 2;
    let decreasing = distances[tail_start..].windows(2).all(|w| w[1] <= w[0] + MONOTONE_SLACK);
    let last = *distances.last().expect("nonempty");
    let ctx = CheckContext { p: Some(p), residual: Some(worst_residual), ..CheckContext::default() }
        .param("terms", distances.len() as f64);
    reports.push(
        CheckReport::inequality("continuity", last, 1e-3, 0.0, ctx)
            .require(decreasing, "distances not eventually decreasing"),
    );
    Ok(reports)
}

/// `k_N = Σ_{n=1}^N n^{-alpha} z^n`.
pub fn decay_kernel(alpha: f64, n: usize) -> TaylorPolynomial {
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
    for (j, c) in coeffs.iter_mut().enumerate().skip(1) {
        *c = Complex64::new((j as f64).powf(-alpha), 0.0);
    }
    TaylorPolynomial::new(coeffs)
}

/// Sup norms of the extremal functions for the truncations `k_N`, and per
/// instance the estimate
/// `||F||_∞^{p-1} <= (p/||phi||) / ((alpha - 3/2) sqrt(2 alpha - 1)) + 5 ||F||_{H^p}^p`.
/// A final verdict requires the last two sup norms to differ by under 10%.
pub fn decay_experiment(
    p: f64,
    alpha: f64,
    n_list: &[usize],
    opts: &SolverOptions,
) -> Result<Vec<CheckReport>> {
    if !(alpha > 1.5) {
        return Err(Error::InvalidArgument(format!("decay exponent {alpha} must exceed 3/2")));
    }
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(Error::InvalidArgument("truncation list must hold positive degrees".into()));
    }
    let mut reports = Vec::with_capacity(2 * n_list.len() + 1);
    let mut sups = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let prob = ExtremalProblem::new(decay_kernel(alpha, n), p)?;
        let sol = solve_instance(&prob, opts)?;
        let grid = boundary_grid(sol.degree);
        let boundary = grid.boundary(&sol.f);
        let sup = lp_mean(&boundary, f64::INFINITY);
        let hp = lp_mean(&boundary, p);
        sups.push(sup);
        let ctx = CheckContext {
            p: Some(p),
            kernel_degree: Some(n),
            working_degree: Some(sol.degree),
            residual: Some(sol.residual),
            ..CheckContext::default()
        }
        .param("alpha", alpha)
        .param("N", n as f64);
        reports.push(CheckReport::ratio_log("decay_sup_norm", sup, 1.0, ctx.clone()));
        let rhs = (p / sol.phi_norm) / ((alpha - 1.5) * (2.0 * alpha - 1.0).sqrt()) + 5.0 * hp.powf(p);
        reports.push(CheckReport::inequality("decay_inequality", sup.powf(p - 1.0), rhs, INEQUALITY_TOL, ctx));
    }
    let variation = match sups.as_slice() {
        [.., a, b] => (b - a).abs() / a,
        _ => 0.0,
    };
    let ctx = CheckContext { p: Some(p), ..CheckContext::default() }.param("alpha", alpha);
    reports.push(CheckReport::inequality("decay_uniform_bound", variation, 0.1, 0.0, ctx));
    Ok(reports)
}
