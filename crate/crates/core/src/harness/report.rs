use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// How a check is judged.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// `|lhs - rhs| <= tolerance`.
    Identity,
    /// `lhs <= rhs + tolerance`.
    Inequality,
    /// Logged value (`lhs`, with `rhs` the normalizer); passes when finite.
    /// Never affects exit codes.
    RatioLog,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CheckValue {
    Real(f64),
    Complex([f64; 2]),
}

impl CheckValue {
    pub fn as_complex(self) -> Complex64 {
        match self {
            CheckValue::Real(x) => Complex64::new(x, 0.0),
            CheckValue::Complex([re, im]) => Complex64::new(re, im),
        }
    }

    pub fn is_finite(self) -> bool {
        let c = self.as_complex();
        c.re.is_finite() && c.im.is_finite()
    }
}

impl From<f64> for CheckValue {
    fn from(x: f64) -> Self {
        CheckValue::Real(x)
    }
}

impl From<Complex64> for CheckValue {
    fn from(c: Complex64) -> Self {
        CheckValue::Complex([c.re, c.im])
    }
}

impl fmt::Display for CheckValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            CheckValue::Real(x) => write!(f, "{x:e}"),
            CheckValue::Complex([re, im]) if im < 0.0 => write!(f, "{re:e}{im:e}i"),
            CheckValue::Complex([re, im]) => write!(f, "{re:e}+{im:e}i"),
        }
    }
}

/// Problem descriptor attached to every report.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckContext {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel_degree: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub working_degree: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    /// Check parameters such as `m`, `q1` or `N`.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckContext {
    pub fn param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_id: String,
    pub kind: CheckKind,
    pub lhs: CheckValue,
    pub rhs: CheckValue,
    /// `rhs - lhs` for inequalities, `|lhs - rhs|` for identities, the
    /// ratio itself for logs.
    pub slack: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub context: CheckContext,
}

impl CheckReport {
    pub fn identity(
        check_id: &str,
        lhs: impl Into<CheckValue>,
        rhs: impl Into<CheckValue>,
        tolerance: f64,
        context: CheckContext,
    ) -> Self {
        let (lhs, rhs) = (lhs.into(), rhs.into());
        let slack = (lhs.as_complex() - rhs.as_complex()).norm();
        CheckReport {
            check_id: check_id.to_string(),
            kind: CheckKind::Identity,
            lhs,
            rhs,
            slack,
            tolerance,
            passed: slack <= tolerance,
            context,
        }
    }

    pub fn inequality(check_id: &str, lhs: f64, rhs: f64, tolerance: f64, context: CheckContext) -> Self {
        let slack = rhs - lhs;
        CheckReport {
            check_id: check_id.to_string(),
            kind: CheckKind::Inequality,
            lhs: lhs.into(),
            rhs: rhs.into(),
            slack,
            tolerance,
            passed: lhs <= rhs + tolerance,
            context,
        }
    }

    /// Logs `numerator / denominator`.
    pub fn ratio_log(check_id: &str, numerator: f64, denominator: f64, context: CheckContext) -> Self {
        let ratio = numerator / denominator;
        CheckReport {
            check_id: check_id.to_string(),
            kind: CheckKind::RatioLog,
            lhs: numerator.into(),
            rhs: denominator.into(),
            slack: ratio,
            tolerance: 0.0,
            passed: ratio.is_finite(),
            context,
        }
    }

    /// Fails the report (keeping its numbers) when a precondition is unmet.
    pub(crate) fn require(mut self, ok: bool, note: &str) -> Self {
        if !ok {
            self.passed = false;
            self.context.note = Some(note.to_string());
        }
        self
    }

    /// The logged value of a [`CheckKind::RatioLog`] report.
    pub fn ratio(&self) -> Option<f64> {
        (self.kind == CheckKind::RatioLog).then_some(self.slack)
    }

    /// Whether this report may affect a pass/fail verdict.
    pub fn is_decisive(&self) -> bool {
        self.kind != CheckKind::RatioLog
    }
}

/// `true` when every decisive report passed.
pub fn all_passed(reports: &[CheckReport]) -> bool {
    reports.iter().filter(|r| r.is_decisive()).all(|r| r.passed)
}
