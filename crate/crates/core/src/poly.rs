//! Coefficient-level algebra for analytic polynomials on the unit disc.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// An analytic polynomial `c_0 + c_1 z + ... + c_D z^D`.
///
/// Coefficients are stored densely from degree 0 and kept in canonical form:
/// trailing exact zeros are trimmed, so either the polynomial is the constant
/// `c_0` (possibly zero) or `c_D != 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<[f64; 2]>", from = "Vec<[f64; 2]>")]
pub struct TaylorPolynomial {
    coeffs: Vec<Complex64>,
}

impl TaylorPolynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        let mut poly = TaylorPolynomial { coeffs };
        poly.trim();
        poly
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        TaylorPolynomial { coeffs: vec![Complex64::new(0.0, 0.0)] }
    }

    pub fn constant(c: Complex64) -> Self {
        TaylorPolynomial { coeffs: vec![c] }
    }

    /// The monomial `c z^n`.
    pub fn monomial(n: usize, c: Complex64) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
        coeffs[n] = c;
        Self::new(coeffs)
    }

    fn trim(&mut self) {
        while self.coeffs.len() > 1 && *self.coeffs.last().unwrap() == Complex64::new(0.0, 0.0) {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.coeffs.push(Complex64::new(0.0, 0.0));
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `z^n`, zero beyond the degree.
    pub fn coeff(&self, n: usize) -> Complex64 {
        self.coeffs.get(n).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == Complex64::new(0.0, 0.0))
    }

    /// Coefficients padded (or truncated) to exactly `len` entries.
    pub fn padded(&self, len: usize) -> Vec<Complex64> {
        (0..len).map(|n| self.coeff(n)).collect()
    }

    /// Horner evaluation.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> TaylorPolynomial {
        if self.coeffs.len() <= 1 {
            return TaylorPolynomial::zero();
        }
        let coeffs = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(n, &c)| c * (n + 1) as f64)
            .collect();
        TaylorPolynomial::new(coeffs)
    }

    /// The Taylor polynomial of order `n` (coefficients `0..=n`).
    pub fn partial_sum(&self, n: usize) -> TaylorPolynomial {
        let end = (n + 1).min(self.coeffs.len());
        TaylorPolynomial::new(self.coeffs[..end].to_vec())
    }

    /// Multiplication by `z`.
    pub fn shift_up(&self) -> TaylorPolynomial {
        if self.is_zero() {
            return TaylorPolynomial::zero();
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(Complex64::new(0.0, 0.0));
        coeffs.extend_from_slice(&self.coeffs);
        TaylorPolynomial::new(coeffs)
    }

    /// `f(e^{i alpha} z)`.
    pub fn rotate(&self, alpha: f64) -> TaylorPolynomial {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, &c)| c * Complex64::from_polar(1.0, alpha * n as f64))
            .collect();
        TaylorPolynomial::new(coeffs)
    }

    pub fn scale(&self, s: Complex64) -> TaylorPolynomial {
        TaylorPolynomial::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn scale_real(&self, s: f64) -> TaylorPolynomial {
        self.scale(Complex64::new(s, 0.0))
    }

    /// `sum |c_n|^2 / (n+1)`, the squared A^2 norm by monomial orthogonality.
    pub fn bergman_l2_norm_sq(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| c.norm_sqr() / (n + 1) as f64)
            .sum()
    }

    /// `sum |c_n|^2`, the squared H^2 norm by Parseval.
    pub fn hardy_l2_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Largest coefficient modulus among indices `>= from`.
    pub fn max_coeff_from(&self, from: usize) -> f64 {
        self.coeffs.iter().skip(from).map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &TaylorPolynomial) -> f64 {
        let len = self.coeffs.len().max(other.coeffs.len());
        (0..len)
            .map(|n| (self.coeff(n) - other.coeff(n)).norm())
            .fold(0.0, f64::max)
    }
}

impl Default for TaylorPolynomial {
    fn default() -> Self {
        TaylorPolynomial::zero()
    }
}

impl From<Vec<[f64; 2]>> for TaylorPolynomial {
    fn from(pairs: Vec<[f64; 2]>) -> Self {
        TaylorPolynomial::new(pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

impl From<TaylorPolynomial> for Vec<[f64; 2]> {
    fn from(poly: TaylorPolynomial) -> Self {
        poly.coeffs.iter().map(|c| [c.re, c.im]).collect()
    }
}

impl Add for &TaylorPolynomial {
    type Output = TaylorPolynomial;

    fn add(self, rhs: &TaylorPolynomial) -> TaylorPolynomial {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        TaylorPolynomial::new((0..len).map(|n| self.coeff(n) + rhs.coeff(n)).collect())
    }
}

impl Sub for &TaylorPolynomial {
    type Output = TaylorPolynomial;

    fn sub(self, rhs: &TaylorPolynomial) -> TaylorPolynomial {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        TaylorPolynomial::new((0..len).map(|n| self.coeff(n) - rhs.coeff(n)).collect())
    }
}

impl Neg for &TaylorPolynomial {
    type Output = TaylorPolynomial;

    fn neg(self) -> TaylorPolynomial {
        self.scale_real(-1.0)
    }
}

impl Mul for &TaylorPolynomial {
    type Output = TaylorPolynomial;

    fn mul(self, rhs: &TaylorPolynomial) -> TaylorPolynomial {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        TaylorPolynomial::new(coeffs)
    }
}

impl fmt::Display for TaylorPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (n, c) in self.coeffs.iter().enumerate() {
            if c.norm() == 0.0 && !(self.coeffs.len() == 1) {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if c.im == 0.0 {
                write!(f, "{}", c.re)?;
            } else {
                write!(f, "({}{:+}i)", c.re, c.im)?;
            }
            match n {
                0 => {}
                1 => write!(f, "z")?,
                _ => write!(f, "z^{n}")?,
            }
        }
        Ok(())
    }
}

/// The transform `K(z) = (1/z) * integral_0^z k`, i.e. the unique polynomial
/// with `(zK)' = k`.
#[derive(Clone, Debug, PartialEq)]
pub struct KTransformResult {
    pub k_transform: TaylorPolynomial,
}

pub fn k_transform(k: &TaylorPolynomial) -> KTransformResult {
    let coeffs = k
        .coeffs()
        .iter()
        .enumerate()
        .map(|(n, &c)| c / (n + 1) as f64)
        .collect();
    KTransformResult { k_transform: TaylorPolynomial::new(coeffs) }
}
