//! Verification of solved instances against norm identities and
//! inequalities satisfied by extremal functions.
//!
//! Each check produces a [`CheckReport`]. Identities are judged at
//! [`checks::IDENTITY_TOL`], inequalities with explicit constants at
//! [`checks::INEQUALITY_TOL`]. Statements whose constants are not known
//! explicitly are recorded as ratio logs and never fail a run.

pub mod checks;
pub mod corpus;
pub mod experiments;
pub mod report;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::TaylorPolynomial;
use crate::projection::TrigPolynomial;
use crate::solver::{solve, ExtremalProblem, ExtremalSolution, SolverOptions};

pub use checks::*;
pub use corpus::{standard_corpus, CorpusKernel, CORPUS_P_VALUES, DEFAULT_SEED};
pub use experiments::{continuity_experiment, decay_experiment, decay_kernel};
pub use report::{all_passed, CheckContext, CheckKind, CheckReport, CheckValue};

/// Solves, keeping the best iterate when the residual target is missed.
/// Checks carry the residual and enforce their own preconditions.
pub fn solve_instance(prob: &ExtremalProblem, opts: &SolverOptions) -> Result<ExtremalSolution> {
    match solve(prob, opts) {
        Ok(sol) => Ok(sol),
        Err(Error::NonConvergence { solution, .. }) => Ok(*solution),
        Err(e) => Err(e),
    }
}

/// Checks selectable by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CheckName {
    Optimality,
    NormEquality,
    WeightedIdentity,
    FourierIdentity,
    FourierBound,
    FourierSymmetry,
    Ryabykh,
    Sandwich,
    KernelRoundtrip,
    ConverseBound,
    RegularityRatio,
    ExtremalBoundRatio,
}

impl CheckName {
    pub const ALL: [CheckName; 12] = [
        CheckName::Optimality,
        CheckName::NormEquality,
        CheckName::WeightedIdentity,
        CheckName::FourierIdentity,
        CheckName::FourierBound,
        CheckName::FourierSymmetry,
        CheckName::Ryabykh,
        CheckName::Sandwich,
        CheckName::KernelRoundtrip,
        CheckName::ConverseBound,
        CheckName::RegularityRatio,
        CheckName::ExtremalBoundRatio,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckName::Optimality => "optimality",
            CheckName::NormEquality => "norm_equality",
            CheckName::WeightedIdentity => "weighted_identity",
            CheckName::FourierIdentity => "fourier_identity",
            CheckName::FourierBound => "fourier_bound",
            CheckName::FourierSymmetry => "fourier_symmetry",
            CheckName::Ryabykh => "ryabykh",
            CheckName::Sandwich => "sandwich",
            CheckName::KernelRoundtrip => "kernel_roundtrip",
            CheckName::ConverseBound => "converse_bound",
            CheckName::RegularityRatio => "regularity_ratio",
            CheckName::ExtremalBoundRatio => "extremal_bound_ratio",
        }
    }

    /// Parses a comma-separated list; `all` selects every check.
    pub fn parse_list(s: &str) -> Result<Vec<CheckName>> {
        if s.trim() == "all" {
            return Ok(Self::ALL.to_vec());
        }
        let mut names = s.split(',').map(|t| t.trim().parse()).collect::<Result<Vec<CheckName>>>()?;
        names.sort();
        names.dedup();
        Ok(names)
    }
}

impl fmt::Display for CheckName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CheckName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown check '{s}'")))
    }
}

/// Parameters shared by the parametrized checks.
#[derive(Clone, Debug)]
pub struct SuiteOptions {
    /// Exponents `q1` for the regularity, converse and extremal-bound checks;
    /// values outside each check's admissible range are skipped, and `q` is
    /// always added for the two checks needing `q1 >= q`.
    pub q1_values: Vec<f64>,
    /// Analytic weights for the weighted identity.
    pub weights: Vec<TaylorPolynomial>,
    /// Boundary weights for the extremal-bound ratio.
    pub trig_weights: Vec<TrigPolynomial>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let half = Complex64::new(0.5, 0.0);
        SuiteOptions {
            q1_values: vec![1.5, 2.0, 4.0],
            weights: vec![
                TaylorPolynomial::monomial(1, one),
                TaylorPolynomial::monomial(2, one),
                TaylorPolynomial::new(vec![one, half, Complex64::new(0.0, 0.0), Complex64::new(0.0, -0.25)]),
            ],
            trig_weights: vec![
                TrigPolynomial::exponential(0),
                TrigPolynomial::exponential(1),
                TrigPolynomial::new(vec![half, one, half]).expect("odd length"),
            ],
        }
    }
}

impl SuiteOptions {
    /// `q` followed by the configured values `>= q`.
    fn q1_at_least_q(&self, q: f64) -> Vec<f64> {
        let mut out = vec![q];
        out.extend(self.q1_values.iter().copied().filter(|&x| x > q * (1.0 + 1e-12)));
        out
    }
}

/// Runs the selected checks on one solved instance and labels the reports.
pub fn run_checks(
    label: &str,
    sol: &ExtremalSolution,
    prob: &ExtremalProblem,
    names: &[CheckName],
    opts: &SuiteOptions,
) -> Result<Vec<CheckReport>> {
    let mut reports = Vec::new();
    for &name in names {
        match name {
            CheckName::Optimality => reports.push(check_optimality(sol, prob)?),
            CheckName::NormEquality => reports.push(check_norm_equality(sol, prob)?),
            CheckName::WeightedIdentity => {
                for h in &opts.weights {
                    reports.push(check_weighted_identity(sol, prob, h)?);
                }
            }
            CheckName::FourierIdentity => {
                for m in 0..=(prob.kernel_degree() as i64 + 2) {
                    reports.push(check_fourier_identity(sol, prob, m)?);
                }
            }
            CheckName::FourierBound => reports.extend(check_fourier_bound(sol, prob)?),
            CheckName::FourierSymmetry => reports.push(check_fourier_symmetry(sol, prob)?),
            CheckName::Ryabykh => reports.push(check_ryabykh(sol, prob)?),
            CheckName::Sandwich => reports.extend(check_duality_sandwich(sol, prob)?),
            CheckName::KernelRoundtrip => reports.push(check_kernel_roundtrip(sol, prob)?),
            CheckName::ConverseBound => {
                if prob.p >= 2.0 {
                    for &q1 in &opts.q1_values {
                        reports.push(check_converse_bound(sol, prob, q1)?);
                    }
                }
            }
            CheckName::RegularityRatio => {
                for q1 in opts.q1_at_least_q(prob.q) {
                    reports.push(check_regularity_ratio(sol, prob, q1)?);
                }
            }
            CheckName::ExtremalBoundRatio => {
                for q1 in opts.q1_at_least_q(prob.q) {
                    for h in &opts.trig_weights {
                        let mut r = check_extremal_bound_ratio(sol, prob, q1, h)?;
                        r.context.params.insert("h_degree".into(), h.degree() as f64);
                        reports.push(r);
                    }
                }
            }
        }
    }
    for r in &mut reports {
        r.context.label = Some(label.to_string());
    }
    Ok(reports)
}
