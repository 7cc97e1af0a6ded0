//! `bergex`: solve extremal problems in Bergman spaces and verify the
//! properties of their solutions.
//!
//! Exit codes: 0 success, 1 malformed input, 2 solver did not converge
//! (solution still written), 3 a check failed.

mod kernel;
mod output;

use std::fmt;
use std::fs::File;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bergex::harness::corpus::{monomial_kernels, random_kernels};
use bergex::harness::{
    all_passed, decay_experiment, run_checks, solve_instance, standard_corpus, CheckName, CheckReport, CheckValue,
    SuiteOptions, DEFAULT_SEED,
};
use bergex::solver::{solve, DegreeChoice, ExtremalProblem, ExtremalSolution, SolverOptions};
use bergex::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use kernel::Kernel;
use output::{ProblemDescriptor, Row, RunReport, SolutionFile, SolutionSummary, TOOL_VERSION};

#[derive(Parser)]
#[command(name = "bergex", version, about = "Linear extremal problems in Bergman spaces A^p")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem and write the extremal function.
    Solve(SolveArgs),
    /// Solve one problem and run verification checks on the solution.
    Verify(VerifyArgs),
    /// Run checks over a grid of exponents and kernels; writes a CSV table.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct SolverArgs {
    /// Working degree: a positive integer or `auto`.
    #[arg(long, default_value = "auto", value_parser = parse_degree)]
    degree: DegreeChoice,
    /// Target first-order residual.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

impl SolverArgs {
    fn options(&self) -> SolverOptions {
        SolverOptions::default().with_degree(self.degree).with_tol(self.tol)
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Exponent p in (1, inf).
    #[arg(long)]
    p: f64,
    /// Kernel file (JSON), inline JSON, `random(seed=S,deg=D)`, or a
    /// polynomial such as `1+z` or `z^3`.
    #[arg(long)]
    kernel: String,
    #[command(flatten)]
    solver: SolverArgs,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    p: f64,
    #[arg(long)]
    kernel: String,
    /// Comma-separated check names, or `all`.
    #[arg(long, default_value = "all")]
    checks: String,
    /// Exponents q1 for the parametrized checks (comma-separated).
    #[arg(long, value_delimiter = ',')]
    q1: Vec<f64>,
    #[command(flatten)]
    solver: SolverArgs,
    /// JSON report file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Corpus {
    /// Monomials z^0..z^4 and 20 random kernels.
    Standard,
    /// `--size` random kernels of degree at most 6.
    Seeded,
    /// Monomials z^0..z^{size-1}.
    Monomials,
}

#[derive(Args)]
struct SweepArgs {
    /// Exponents (comma-separated).
    #[arg(long, value_delimiter = ',', required = true)]
    p_list: Vec<f64>,
    /// Directory of kernel JSON files.
    #[arg(long, conflicts_with_all = ["corpus", "alpha"])]
    kernel_dir: Option<PathBuf>,
    /// Built-in kernel corpus.
    #[arg(long, conflicts_with = "alpha")]
    corpus: Option<Corpus>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Number of kernels for `seeded` and `monomials`.
    #[arg(long, default_value_t = 10)]
    size: usize,
    /// Run the decay experiment on k_N = sum n^-alpha z^n instead of a corpus.
    #[arg(long, requires = "n_list")]
    alpha: Option<f64>,
    /// Truncation degrees N for the decay experiment (comma-separated).
    #[arg(long = "N", value_delimiter = ',')]
    n_list: Vec<usize>,
    #[arg(long, default_value = "all")]
    checks: String,
    #[arg(long, value_delimiter = ',')]
    q1: Vec<f64>,
    #[command(flatten)]
    solver: SolverArgs,
    /// CSV output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_degree(s: &str) -> Result<DegreeChoice, String> {
    if s == "auto" {
        return Ok(DegreeChoice::Auto);
    }
    match s.parse::<usize>() {
        Ok(d) if d > 0 => Ok(DegreeChoice::Fixed(d)),
        _ => Err(format!("expected a positive integer or 'auto', got '{s}'")),
    }
}

enum Failure {
    Input(String),
    NonConvergence(String),
    ChecksFailed(usize),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::NonConvergence(_) => 2,
            Failure::ChecksFailed(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(msg) | Failure::NonConvergence(msg) => f.write_str(msg),
            Failure::ChecksFailed(n) => write!(f, "{n} check(s) failed"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn io_failure(path: Option<&Path>) -> impl Fn(io::Error) -> Failure + '_ {
    move |e| match path {
        Some(p) => Failure::Input(format!("cannot write {}: {e}", p.display())),
        None => Failure::Input(format!("cannot write output: {e}")),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Err(f) = configure_threads() {
        eprintln!("error: {f}");
        return ExitCode::from(f.code());
    }
    let result = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}

/// Caps the rayon pool at `BERGEX_THREADS` when set.
fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("BERGEX_THREADS") else {
        return Ok(());
    };
    let threads = match value.trim().parse::<usize>() {
        Ok(n) if n > 0 => n,
        _ => return Err(Failure::Input(format!("BERGEX_THREADS must be a positive integer, got '{value}'"))),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Input(format!("cannot configure thread pool: {e}")))
}

fn problem(kernel: &Kernel, p: f64) -> Result<ExtremalProblem, Failure> {
    Ok(ExtremalProblem::new(kernel.poly.clone(), p)?)
}

/// Solves, returning the best iterate and whether the residual target was met.
fn solve_keeping(prob: &ExtremalProblem, opts: &SolverOptions) -> Result<(ExtremalSolution, bool), Failure> {
    match solve(prob, opts) {
        Ok(sol) => Ok((sol, true)),
        Err(Error::NonConvergence { solution, .. }) => Ok((*solution, false)),
        Err(e) => Err(e.into()),
    }
}

fn cmd_solve(args: SolveArgs) -> Result<(), Failure> {
    let kernel = kernel::resolve(&args.kernel).map_err(Failure::Input)?;
    let prob = problem(&kernel, args.p)?;
    let opts = args.solver.options();
    let (sol, converged) = solve_keeping(&prob, &opts)?;
    let file = SolutionFile {
        tool_version: TOOL_VERSION,
        timestamp: output::timestamp(),
        converged,
        problem: ProblemDescriptor::new(&kernel.label, &prob, opts.degree, opts.tol),
        solution: &sol,
    };
    output::write_json(&file, args.out.as_deref()).map_err(io_failure(args.out.as_deref()))?;
    if args.out.is_some() {
        println!(
            "phi_norm {:.12} residual {:.2e} degree {} iterations {}",
            sol.phi_norm, sol.residual, sol.degree, sol.iterations
        );
    }
    if converged {
        Ok(())
    } else {
        Err(Failure::NonConvergence(format!(
            "residual {:.2e} above tolerance {:.2e} at degree {}; best iterate written",
            sol.residual, opts.tol, sol.degree
        )))
    }
}

fn suite_options(q1: &[f64]) -> Result<SuiteOptions, Failure> {
    let mut suite = SuiteOptions::default();
    if !q1.is_empty() {
        if q1.iter().any(|&x| !(x > 1.0 && x.is_finite())) {
            return Err(Failure::Input("q1 values must lie in (1, inf)".into()));
        }
        suite.q1_values = q1.to_vec();
    }
    Ok(suite)
}

fn print_report(r: &CheckReport) {
    let verdict = match (r.is_decisive(), r.passed) {
        (false, _) => "LOG ",
        (true, true) => "PASS",
        (true, false) => "FAIL",
    };
    let params: Vec<String> = r.context.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
    println!(
        "{verdict} {:<22} lhs={} rhs={} slack={:.3e} {}",
        r.check_id,
        short(r.lhs),
        short(r.rhs),
        r.slack,
        params.join(" ")
    );
}

fn short(v: CheckValue) -> String {
    match v {
        CheckValue::Real(x) => format!("{x:.10e}"),
        CheckValue::Complex([re, im]) => format!("{re:.10e}{im:+.2e}i"),
    }
}

fn cmd_verify(args: VerifyArgs) -> Result<(), Failure> {
    let kernel = kernel::resolve(&args.kernel).map_err(Failure::Input)?;
    let prob = problem(&kernel, args.p)?;
    let names = CheckName::parse_list(&args.checks)?;
    let suite = suite_options(&args.q1)?;
    let opts = args.solver.options();
    let (sol, converged) = solve_keeping(&prob, &opts)?;
    let checks = run_checks(&kernel.label, &sol, &prob, &names, &suite)?;
    for r in &checks {
        print_report(r);
    }
    let failed = checks.iter().filter(|r| r.is_decisive() && !r.passed).count();
    let report = RunReport {
        tool_version: TOOL_VERSION,
        timestamp: output::timestamp(),
        seed: kernel.seed,
        problem: ProblemDescriptor::new(&kernel.label, &prob, opts.degree, opts.tol),
        solution: SolutionSummary::new(&sol, converged),
        all_passed: all_passed(&checks),
        checks,
    };
    if let Some(out) = &args.out {
        output::write_json(&report, Some(out)).map_err(io_failure(Some(out)))?;
    }
    if failed > 0 {
        Err(Failure::ChecksFailed(failed))
    } else {
        Ok(())
    }
}

fn sweep_kernels(args: &SweepArgs) -> Result<Vec<Kernel>, Failure> {
    let from_corpus = |list: Vec<bergex::harness::CorpusKernel>| {
        list.into_iter().map(|c| Kernel { label: c.label, poly: c.kernel, seed: Some(args.seed) }).collect()
    };
    let kernels: Vec<Kernel> = match (&args.kernel_dir, args.corpus) {
        (Some(dir), _) => kernel::load_dir(dir).map_err(Failure::Input)?,
        (None, Some(Corpus::Standard)) => from_corpus(standard_corpus(args.seed)),
        (None, Some(Corpus::Seeded)) => from_corpus(random_kernels(args.seed, args.size, 6)),
        (None, Some(Corpus::Monomials)) => {
            let mut list = monomial_kernels(args.size.saturating_sub(1));
            list.truncate(args.size);
            from_corpus(list)
        }
        (None, None) => return Err(Failure::Input("one of --kernel-dir, --corpus or --alpha is required".into())),
    };
    if kernels.is_empty() {
        return Err(Failure::Input("empty corpus".into()));
    }
    if let Some(k) = kernels.iter().find(|k| k.poly.is_zero()) {
        return Err(Failure::Input(format!("{}: {}", k.label, Error::ZeroKernel)));
    }
    Ok(kernels)
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Failure> {
    if args.p_list.iter().any(|&p| !(p > 1.0 && p.is_finite())) {
        return Err(Failure::Input("every p must lie in (1, inf)".into()));
    }
    let opts = args.solver.options();
    let mut rows = match args.alpha {
        Some(alpha) => decay_rows(&args, alpha, &opts)?,
        None => corpus_rows(&args, &opts)?,
    };
    output::sort_rows(&mut rows);
    let out = args.out.as_deref();
    let written = match out {
        Some(path) => File::create(path).map_err(csv::Error::from).and_then(|f| output::write_csv(&rows, f)),
        None => output::write_csv(&rows, io::stdout().lock()),
    };
    written.map_err(|e| Failure::Input(format!("cannot write table: {e}")))?;
    let failed = rows.iter().filter(|r| r.report.is_decisive() && !r.report.passed).count();
    eprintln!("{} rows, {failed} failing", rows.len());
    if failed > 0 {
        Err(Failure::ChecksFailed(failed))
    } else {
        Ok(())
    }
}

fn corpus_rows(args: &SweepArgs, opts: &SolverOptions) -> Result<Vec<Row>, Failure> {
    let kernels = sweep_kernels(args)?;
    let names = CheckName::parse_list(&args.checks)?;
    let suite = suite_options(&args.q1)?;
    let jobs: Vec<(f64, &Kernel)> = args.p_list.iter().flat_map(|&p| kernels.iter().map(move |k| (p, k))).collect();
    let batches = jobs
        .par_iter()
        .map(|&(p, k)| -> Result<Vec<Row>, Failure> {
            let prob = problem(k, p)?;
            let sol = solve_instance(&prob, opts)?;
            let reports = run_checks(&k.label, &sol, &prob, &names, &suite)?;
            Ok(reports.into_iter().map(|report| Row { p, kernel: k.label.clone(), report }).collect())
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(batches.into_iter().flatten().collect())
}

fn decay_rows(args: &SweepArgs, alpha: f64, opts: &SolverOptions) -> Result<Vec<Row>, Failure> {
    let batches = args
        .p_list
        .par_iter()
        .map(|&p| -> Result<Vec<Row>, Failure> {
            let reports = decay_experiment(p, alpha, &args.n_list, opts)?;
            Ok(reports
                .into_iter()
                .map(|report| {
                    let kernel = match report.context.params.get("N") {
                        Some(&n) => format!("k_N(alpha={alpha},N={n:04})"),
                        None => format!("k_N(alpha={alpha})"),
                    };
                    Row { p, kernel, report }
                })
                .collect())
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(batches.into_iter().flatten().collect())
}
