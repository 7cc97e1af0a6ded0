//! Kernel input: JSON files, inline JSON, and command-line shorthand.

use std::fs;
use std::path::Path;

use bergex::harness::corpus::seeded_kernel;
use bergex::TaylorPolynomial;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// On-disk kernel: coefficients `c_0, c_1, ...` as `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub coeffs: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl KernelSpec {
    pub fn from_polynomial(k: &TaylorPolynomial, label: &str) -> Self {
        KernelSpec {
            coeffs: k.coeffs().iter().map(|c| [c.re, c.im]).collect(),
            label: Some(label.to_string()),
        }
    }

    pub fn polynomial(&self) -> TaylorPolynomial {
        TaylorPolynomial::new(self.coeffs.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
    }
}

/// A resolved kernel argument.
#[derive(Clone, Debug)]
pub struct Kernel {
    pub label: String,
    pub poly: TaylorPolynomial,
    /// Seed of a `random(...)` kernel.
    pub seed: Option<u64>,
}

/// Resolves `arg` as a file path, inline JSON, `random(seed=S,deg=D)`, or a
/// real polynomial in `z` such as `1+z`, `z^3` or `0.5-2z^2`.
pub fn resolve(arg: &str) -> Result<Kernel, String> {
    let trimmed = arg.trim();
    let path = Path::new(trimmed);
    if path.is_file() {
        let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("kernel");
        return from_json(&text, stem).map_err(|e| format!("{}: {e}", path.display()));
    }
    if trimmed.starts_with('{') {
        return from_json(trimmed, "inline");
    }
    if let Some(inner) = trimmed.strip_prefix("random(").and_then(|s| s.strip_suffix(')')) {
        return random(inner);
    }
    let poly = shorthand(trimmed).ok_or_else(|| format!("'{arg}' is neither a kernel file nor a kernel expression"))?;
    Ok(Kernel { label: trimmed.replace(' ', ""), poly, seed: None })
}

pub fn from_json(text: &str, fallback_label: &str) -> Result<Kernel, String> {
    let spec: KernelSpec = serde_json::from_str(text).map_err(|e| format!("malformed kernel JSON: {e}"))?;
    if spec.coeffs.iter().flatten().any(|x| !x.is_finite()) {
        return Err("kernel coefficients must be finite".into());
    }
    Ok(Kernel {
        label: spec.label.clone().unwrap_or_else(|| fallback_label.to_string()),
        poly: spec.polynomial(),
        seed: None,
    })
}

fn random(inner: &str) -> Result<Kernel, String> {
    let (mut seed, mut degree) = (None, None);
    for part in inner.split(',') {
        let (key, value) = part.split_once('=').ok_or_else(|| format!("expected key=value, got '{part}'"))?;
        let value = value.trim();
        match key.trim() {
            "seed" => seed = Some(value.parse::<u64>().map_err(|e| format!("seed: {e}"))?),
            "deg" | "degree" => degree = Some(value.parse::<usize>().map_err(|e| format!("deg: {e}"))?),
            other => return Err(format!("unknown random() parameter '{other}'")),
        }
    }
    let (seed, degree) = match (seed, degree) {
        (Some(s), Some(d)) => (s, d),
        _ => return Err("random() needs seed=S and deg=D".into()),
    };
    Ok(Kernel { label: format!("random(seed={seed},deg={degree})"), poly: seeded_kernel(seed, degree), seed: Some(seed) })
}

/// Parses a sum of terms `c`, `z`, `cz`, `c*z^n`, `z^n` with real `c`.
fn shorthand(expr: &str) -> Option<TaylorPolynomial> {
    let s: String = expr.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    let mut terms = Vec::new();
    let mut start = 0;
    for (i, c) in s.char_indices() {
        if (c == '+' || c == '-') && i > start && !s[..i].ends_with(['e', 'E']) {
            terms.push(&s[start..i]);
            start = i;
        }
    }
    terms.push(&s[start..]);

    let mut coeffs: Vec<f64> = Vec::new();
    for term in terms {
        let (sign, body) = match term.strip_prefix('-') {
            Some(rest) => (-1.0, rest),
            None => (1.0, term.strip_prefix('+').unwrap_or(term)),
        };
        let (c, n) = match body.find('z') {
            None => (body.parse::<f64>().ok()?, 0),
            Some(pos) => {
                let head = body[..pos].strip_suffix('*').unwrap_or(&body[..pos]);
                let c = if head.is_empty() { 1.0 } else { head.parse::<f64>().ok()? };
                let tail = &body[pos + 1..];
                let n = if tail.is_empty() { 1 } else { tail.strip_prefix('^')?.parse::<usize>().ok()? };
                (c, n)
            }
        };
        if !c.is_finite() || n > 100_000 {
            return None;
        }
        if coeffs.len() <= n {
            coeffs.resize(n + 1, 0.0);
        }
        coeffs[n] += sign * c;
    }
    Some(TaylorPolynomial::from_real(&coeffs))
}

/// All `*.json` kernels in `dir`, sorted by file name.
pub fn load_dir(dir: &Path) -> Result<Vec<Kernel>, String> {
    let entries = fs::read_dir(dir).map_err(|e| format!("cannot read {}: {e}", dir.display()))?;
    let mut paths: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths.iter().map(|p| resolve(p.to_str().ok_or("non-UTF-8 path")?)).collect()
}
