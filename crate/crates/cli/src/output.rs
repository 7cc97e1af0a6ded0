//! Solution files, run reports and sweep tables.

use std::cmp::Ordering;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use bergex::harness::CheckReport;
use bergex::solver::{DegreeChoice, ExtremalProblem, ExtremalSolution};
use serde::Serialize;

use crate::kernel::KernelSpec;

pub const TOOL_VERSION: &str = concat!("bergex ", env!("CARGO_PKG_VERSION"));

/// Seconds since the Unix epoch; the only field that varies between
/// identical invocations.
pub fn timestamp() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

#[derive(Debug, Serialize)]
pub struct ProblemDescriptor {
    pub label: String,
    pub p: f64,
    pub q: f64,
    pub kernel: KernelSpec,
    pub degree: DegreeChoice,
    pub tol: f64,
}

impl ProblemDescriptor {
    pub fn new(label: &str, prob: &ExtremalProblem, degree: DegreeChoice, tol: f64) -> Self {
        ProblemDescriptor {
            label: label.to_string(),
            p: prob.p,
            q: prob.q,
            kernel: KernelSpec::from_polynomial(&prob.kernel, label),
            degree,
            tol,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SolutionFile<'a> {
    pub tool_version: &'static str,
    pub timestamp: u64,
    pub converged: bool,
    pub problem: ProblemDescriptor,
    pub solution: &'a ExtremalSolution,
}

#[derive(Debug, Serialize)]
pub struct SolutionSummary {
    pub phi_norm: f64,
    pub residual: f64,
    pub degree: usize,
    pub iterations: usize,
    pub converged: bool,
    pub degree_converged: bool,
    pub tail: f64,
    pub epsilon_final: f64,
}

impl SolutionSummary {
    pub fn new(sol: &ExtremalSolution, converged: bool) -> Self {
        SolutionSummary {
            phi_norm: sol.phi_norm,
            residual: sol.residual,
            degree: sol.degree,
            iterations: sol.iterations,
            converged,
            degree_converged: sol.degree_converged,
            tail: sol.tail,
            epsilon_final: sol.epsilon_final,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub tool_version: &'static str,
    pub timestamp: u64,
    pub seed: Option<u64>,
    pub problem: ProblemDescriptor,
    pub solution: SolutionSummary,
    pub all_passed: bool,
    pub checks: Vec<CheckReport>,
}

pub fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text),
        None => io::stdout().write_all(text.as_bytes()),
    }
}

/// One line of a sweep table.
#[derive(Clone, Debug)]
pub struct Row {
    pub p: f64,
    pub kernel: String,
    pub report: CheckReport,
}

impl Row {
    fn key_cmp(&self, other: &Row) -> Ordering {
        self.p
            .total_cmp(&other.p)
            .then_with(|| self.kernel.cmp(&other.kernel))
            .then_with(|| self.report.check_id.cmp(&other.report.check_id))
    }
}

/// Stable sort by `(p, kernel, check)`; rows sharing a key keep generation order.
pub fn sort_rows(rows: &mut [Row]) {
    rows.sort_by(Row::key_cmp);
}

pub const CSV_HEADER: [&str; 7] = ["p", "kernel", "check", "lhs", "rhs", "slack", "passed"];

pub fn write_csv<W: Write>(rows: &[Row], sink: W) -> csv::Result<()> {
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(CSV_HEADER)?;
    for row in rows {
        let r = &row.report;
        writer.write_record([
            row.p.to_string(),
            row.kernel.clone(),
            r.check_id.clone(),
            r.lhs.to_string(),
            r.rhs.to_string(),
            format!("{:e}", r.slack),
            r.passed.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}
