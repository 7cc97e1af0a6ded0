use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bergex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bergex")).args(args).output().expect("binary runs")
}

fn bergex_env(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bergex"))
        .args(args)
        .env("BERGEX_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn coeff_re(v: &Value, n: usize) -> f64 {
    v["solution"]["f"][n][0].as_f64().unwrap()
}

#[test]
fn solve_p2_monomial() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sol.json");
    let res = bergex(&["solve", "--p", "2", "--kernel", r#"{"coeffs":[[0,0],[1,0]]}"#, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let v = read_json(&out);
    assert!(coeff_re(&v, 0).abs() < 1e-12);
    assert!((coeff_re(&v, 1) - std::f64::consts::SQRT_2).abs() < 1e-8);
    assert!((v["solution"]["phi_norm"].as_f64().unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-8);
    assert_eq!(v["converged"], Value::Bool(true));
}

#[test]
fn solve_p4_kernel_file() {
    let dir = tempfile::tempdir().unwrap();
    let kernel = dir.path().join("k.json");
    fs::write(&kernel, r#"{"coeffs": [[0, 0], [1, 0]], "label": "z"}"#).unwrap();
    let out = dir.path().join("sol.json");
    let res = bergex(&["solve", "--p", "4", "--kernel", kernel.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&res), 0);
    let v = read_json(&out);
    assert!((coeff_re(&v, 1) - 1.31607401).abs() < 1e-8);
    assert!((v["solution"]["phi_norm"].as_f64().unwrap() - 0.65803701).abs() < 1e-8);
    assert_eq!(v["problem"]["label"], "z");
}

#[test]
fn zero_kernel_is_rejected() {
    let res = bergex(&["solve", "--p", "3", "--kernel", r#"{"coeffs":[[0,0],[0,0]]}"#]);
    assert_eq!(code(&res), 1);
    assert!(String::from_utf8_lossy(&res.stderr).contains("kernel is identically zero"));
}

#[test]
fn malformed_input_exits_1() {
    assert_eq!(code(&bergex(&["solve", "--p", "3", "--kernel", "{\"coeffs\": 3}"])), 1);
    assert_eq!(code(&bergex(&["solve", "--p", "1", "--kernel", "z"])), 1);
    assert_eq!(code(&bergex(&["solve", "--p", "2", "--kernel", "z", "--degree", "x"])), 1);
    assert_eq!(code(&bergex(&["verify", "--p", "2", "--kernel", "z", "--checks", "nope"])), 1);
    assert_eq!(code(&bergex(&["solve", "--kernel", "z"])), 1);
    assert_eq!(code(&bergex_env(&["solve", "--p", "2", "--kernel", "z"], "zero")), 1);
}

#[test]
fn nonconvergence_exits_2_and_writes_solution() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sol.json");
    let res = bergex(&[
        "solve", "--p", "3", "--kernel", "1+z", "--degree", "4", "--tol", "1e-12", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&res), 2);
    let v = read_json(&out);
    assert_eq!(v["converged"], Value::Bool(false));
    assert_eq!(v["solution"]["degree"], 4);
    assert!(v["solution"]["residual"].as_f64().unwrap() > 1e-12);
}

#[test]
fn verify_norm_equality_p2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let res = bergex(&["verify", "--p", "2", "--kernel", "z", "--checks", "norm_equality", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&res), 0);
    let v = read_json(&out);
    let checks = v["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 1);
    assert!(checks[0]["slack"].as_f64().unwrap() < 1e-12);
    assert_eq!(v["all_passed"], Value::Bool(true));
    assert_eq!(v["tool_version"], concat!("bergex ", env!("CARGO_PKG_VERSION")));
}

#[test]
fn verify_fourier_bound_vanishes_above_kernel_degree() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let res = bergex(&["verify", "--p", "3", "--kernel", "z", "--checks", "fourier_bound", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&res), 0);
    let v = read_json(&out);
    for c in v["checks"].as_array().unwrap() {
        if c["context"]["params"]["m"].as_f64().unwrap() >= 2.0 {
            assert_eq!(c["check_id"], "fourier_vanishing");
            assert!(c["lhs"].as_f64().unwrap() < 1e-12);
        }
    }
}

#[test]
fn verify_all_on_random_kernel() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let res = bergex(&["verify", "--p", "2.5", "--kernel", "random(seed=7, deg=5)", "--checks", "all", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stdout));
    let v = read_json(&out);
    assert_eq!(v["seed"], 7);
    let kinds: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["kind"].as_str().unwrap()).collect();
    assert!(kinds.contains(&"ratio_log") && kinds.contains(&"identity") && kinds.contains(&"inequality"));
}

#[test]
fn failed_check_exits_3() {
    // k = 1 at p = 1.5: |b_0| = 1 exceeds the bound p/2
    let res = bergex(&["verify", "--p", "1.5", "--kernel", "1", "--checks", "fourier_bound"]);
    assert_eq!(code(&res), 3);
    assert!(String::from_utf8_lossy(&res.stdout).starts_with("FAIL fourier_bound"));
}

#[test]
fn ratio_logs_do_not_affect_exit_code() {
    let res = bergex(&["verify", "--p", "3", "--kernel", "1+z", "--checks", "regularity_ratio,extremal_bound_ratio"]);
    assert_eq!(code(&res), 0);
    assert!(String::from_utf8_lossy(&res.stdout).lines().all(|l| l.starts_with("LOG")));
}

#[test]
fn verify_report_is_reproducible_apart_from_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let strip = |path: &Path| {
        let mut v = read_json(path);
        v.as_object_mut().unwrap().remove("timestamp");
        v
    };
    let mut reports = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("r{i}.json"));
        let res = bergex(&["verify", "--p", "1.5", "--kernel", "1+z-0.3z^2", "--checks", "norm_equality,ryabykh", "--out", out.to_str().unwrap()]);
        assert_eq!(code(&res), 0);
        reports.push(strip(&out));
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn sweep_monomials_ryabykh() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("table.csv");
    let res = bergex(&["sweep", "--p-list", "2", "--corpus", "monomials", "--size", "4", "--checks", "ryabykh", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&res), 0);
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "p,kernel,check,lhs,rhs,slack,passed");
    assert_eq!(lines.len(), 5);
    for (n, line) in lines[1..].iter().enumerate() {
        assert!(line.starts_with(&format!("2,z^{n},ryabykh,")) && line.ends_with(",true"), "{line}");
    }
}

#[test]
fn sweep_is_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut tables = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.path().join(format!("t{threads}.csv"));
        let res = bergex_env(
            &["sweep", "--p-list", "3,1.5", "--corpus", "seeded", "--seed", "7", "--size", "3", "--checks", "norm_equality,sandwich,ryabykh", "--out", out.to_str().unwrap()],
            threads,
        );
        assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
        tables.push(fs::read(&out).unwrap());
    }
    assert_eq!(tables[0], tables[1]);
    let text = String::from_utf8(tables.pop().unwrap()).unwrap();
    let keys: Vec<(f64, String, String)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].to_string(), f[2].to_string())
        })
        .collect();
    assert_eq!(keys.len(), 2 * 3 * 4);
    assert!(keys.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(keys[0].0, 1.5);
}

#[test]
fn sweep_kernel_dir() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.json"), r#"{"coeffs": [[1, 0], [0.5, 0]]}"#).unwrap();
    fs::write(dir.path().join("b.json"), r#"{"coeffs": [[0, 0], [0, 1]], "label": "iz"}"#).unwrap();
    fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
    let res = bergex(&["sweep", "--p-list", "2", "--kernel-dir", dir.path().to_str().unwrap(), "--checks", "sandwich"]);
    assert_eq!(code(&res), 0);
    let text = String::from_utf8(res.stdout).unwrap();
    let kernels: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(kernels, ["a", "a", "iz", "iz"]);
}

#[test]
fn sweep_empty_corpus_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&bergex(&["sweep", "--p-list", "2", "--kernel-dir", dir.path().to_str().unwrap()])), 1);
    assert_eq!(code(&bergex(&["sweep", "--p-list", "2", "--corpus", "seeded", "--size", "0"])), 1);
    assert_eq!(code(&bergex(&["sweep", "--p-list", "2"])), 1);
}

#[test]
fn sweep_decay_sup_norms_are_bounded_and_increasing() {
    let res = bergex(&["sweep", "--p-list", "3", "--alpha", "2", "--N", "4,8,16"]);
    assert_eq!(code(&res), 0);
    let text = String::from_utf8(res.stdout).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let sups: Vec<f64> = reader
        .records()
        .map(|r| r.unwrap())
        .filter(|r| &r[2] == "decay_sup_norm")
        .map(|r| r[3].parse().unwrap())
        .collect();
    assert_eq!(sups.len(), 3);
    assert!(sups.windows(2).all(|w| w[0] < w[1] && w[1] < 1.1 * w[0]));
}
