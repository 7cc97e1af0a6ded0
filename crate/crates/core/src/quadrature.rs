//! Spectral quadrature on the unit disc and the unit circle.
//!
//! Disc integrals are taken against normalized area measure, so the rule is a
//! tensor product of a radial Gauss-Legendre rule carrying the weight `2r dr`
//! and the uniform trapezoid rule in angle. Angular sums are done with FFTs,
//! which makes sampling a polynomial on the grid and extracting conjugate
//! moments `∫ u conj(z)^n dσ` both `O(R M log M)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::poly::TaylorPolynomial;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
///
/// Newton iteration on the three-term recurrence, started from the
/// Tricomi asymptotic guess; accurate to a few ulps for the sizes used here.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos()
            * (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf));
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Cached forward/inverse FFT plans of one length.
#[derive(Clone)]
pub(crate) struct FftPair {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FftPair {
    fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        FftPair {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    /// `out[m] = (1/M) sum_t buf[t] e^{-2 pi i m t / M}`, in place.
    pub(crate) fn analyze(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
        let scale = 1.0 / self.len as f64;
        buf.iter_mut().for_each(|v| *v *= scale);
    }

    /// `out[t] = sum_m buf[m] e^{2 pi i m t / M}`, in place.
    pub(crate) fn synthesize(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
    }
}

impl fmt::Debug for FftPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FftPair").field("len", &self.len).finish()
    }
}

/// Uniform grid `theta_t = 2 pi t / M` on the unit circle.
///
/// The trapezoid rule on this grid integrates `e^{i m theta}` exactly for
/// `0 < |m| < M`.
#[derive(Clone, Debug)]
pub struct CircleGrid {
    fft: FftPair,
}

impl CircleGrid {
    pub fn new(angular_count: usize) -> Result<Self> {
        if angular_count == 0 {
            return Err(Error::InvalidArgument("circle grid needs at least one node".into()));
        }
        Ok(CircleGrid { fft: FftPair::new(angular_count) })
    }

    pub fn angular_count(&self) -> usize {
        self.fft.len
    }

    pub fn theta(&self, t: usize) -> f64 {
        2.0 * PI * t as f64 / self.fft.len as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.fft.len).map(|t| self.theta(t)).collect()
    }

    /// Samples of `f(r e^{i theta_t})`.
    pub fn sample(&self, f: &TaylorPolynomial, r: f64) -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.fft.len];
        let mut rp = 1.0;
        for (j, &c) in f.coeffs().iter().enumerate() {
            buf[j % self.fft.len] += c * rp;
            rp *= r;
        }
        self.fft.synthesize(&mut buf);
        buf
    }

    /// Boundary samples `f(e^{i theta_t})`.
    pub fn boundary(&self, f: &TaylorPolynomial) -> Vec<Complex64> {
        self.sample(f, 1.0)
    }

    /// Trapezoid mean `(1/M) sum_t v_t`.
    pub fn mean(&self, values: &[Complex64]) -> Result<Complex64> {
        if values.len() != self.fft.len {
            return Err(Error::DimensionMismatch { expected: self.fft.len, found: values.len() });
        }
        Ok(values.iter().sum::<Complex64>() / self.fft.len as f64)
    }

    pub fn mean_real(&self, values: &[f64]) -> f64 {
        values.iter().sum::<f64>() / values.len() as f64
    }

    /// Discrete Fourier coefficients `(1/M) sum_t v_t e^{-i m theta_t}`,
    /// indexed by `m mod M`.
    pub fn analyze(&self, values: &[Complex64]) -> Result<Vec<Complex64>> {
        if values.len() != self.fft.len {
            return Err(Error::DimensionMismatch { expected: self.fft.len, found: values.len() });
        }
        let mut buf = values.to_vec();
        self.fft.analyze(&mut buf);
        Ok(buf)
    }
}

/// Complex samples on a disc grid, stored radius-major: entry `(j, t)` is at
/// `j * angular_count + t`.
#[derive(Clone, Debug)]
pub struct DiscSamples {
    values: Vec<Complex64>,
    radial_count: usize,
    angular_count: usize,
}

impl DiscSamples {
    pub fn new(values: Vec<Complex64>, radial_count: usize, angular_count: usize) -> Result<Self> {
        if values.len() != radial_count * angular_count {
            return Err(Error::DimensionMismatch {
                expected: radial_count * angular_count,
                found: values.len(),
            });
        }
        Ok(DiscSamples { values, radial_count, angular_count })
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn radial_count(&self) -> usize {
        self.radial_count
    }

    pub fn angular_count(&self) -> usize {
        self.angular_count
    }

    pub fn row(&self, j: usize) -> &[Complex64] {
        &self.values[j * self.angular_count..(j + 1) * self.angular_count]
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> DiscSamples {
        DiscSamples {
            values: self.values.iter().map(|&v| f(v)).collect(),
            radial_count: self.radial_count,
            angular_count: self.angular_count,
        }
    }
}

/// Product rule for `∫_D u dσ`: radial Gauss-Legendre nodes on `(0, 1)` with
/// weights absorbing `2r dr`, times `M` equispaced angles.
#[derive(Clone, Debug)]
pub struct DiscQuadrature {
    radial_nodes: Vec<f64>,
    radial_weights: Vec<f64>,
    fft: FftPair,
}

/// Radial node count used when nothing else is requested.
pub const DEFAULT_RADIAL_NODES: usize = 64;
/// Smallest angular count used by [`DiscQuadrature::for_degree`].
pub const MIN_ANGULAR_COUNT: usize = 256;

impl DiscQuadrature {
    pub fn new(radial_count: usize, angular_count: usize) -> Result<Self> {
        if radial_count == 0 || angular_count == 0 {
            return Err(Error::InvalidArgument(
                "disc quadrature needs positive radial and angular counts".into(),
            ));
        }
        let (x, w) = gauss_legendre(radial_count);
        let radial_nodes: Vec<f64> = x.iter().map(|&x| 0.5 * (x + 1.0)).collect();
        let radial_weights = radial_nodes
            .iter()
            .zip(&w)
            .map(|(&r, &w)| 0.5 * w * 2.0 * r)
            .collect();
        Ok(DiscQuadrature { radial_nodes, radial_weights, fft: FftPair::new(angular_count) })
    }

    /// A rule sized for polynomials of degree `degree`: the angular count is
    /// the next power of two at or above `max(256, 4 degree + 1)` and the
    /// radial count is `max(64, degree + 32)`.
    pub fn for_degree(degree: usize) -> Self {
        let angular = (4 * degree + 1).max(MIN_ANGULAR_COUNT).next_power_of_two();
        let radial = (degree + 32).max(DEFAULT_RADIAL_NODES);
        Self::new(radial, angular).expect("positive sizes")
    }

    /// The same family of rules at twice the resolution in both directions.
    pub fn refined(&self) -> Self {
        Self::new(2 * self.radial_count(), 2 * self.angular_count()).expect("positive sizes")
    }

    pub fn radial_nodes(&self) -> &[f64] {
        &self.radial_nodes
    }

    pub fn radial_weights(&self) -> &[f64] {
        &self.radial_weights
    }

    pub fn radial_count(&self) -> usize {
        self.radial_nodes.len()
    }

    pub fn angular_count(&self) -> usize {
        self.fft.len
    }

    /// Highest polynomial degree whose conjugate moments are alias-free.
    pub fn max_projection_degree(&self) -> usize {
        (self.angular_count() - 1) / 2
    }

    pub(crate) fn fft(&self) -> &FftPair {
        &self.fft
    }

    pub fn point(&self, j: usize, t: usize) -> Complex64 {
        Complex64::from_polar(self.radial_nodes[j], 2.0 * PI * t as f64 / self.fft.len as f64)
    }

    /// Samples of a pointwise function of `z` on the grid.
    pub fn sample_fn(&self, f: impl Fn(Complex64) -> Complex64) -> DiscSamples {
        let m = self.angular_count();
        let mut values = Vec::with_capacity(self.radial_count() * m);
        for j in 0..self.radial_count() {
            for t in 0..m {
                values.push(f(self.point(j, t)));
            }
        }
        DiscSamples { values, radial_count: self.radial_count(), angular_count: m }
    }

    /// Samples of a polynomial on the grid (FFT synthesis per radius).
    pub fn sample(&self, f: &TaylorPolynomial) -> DiscSamples {
        self.sample_coeffs(f.coeffs())
    }

    pub(crate) fn sample_coeffs(&self, coeffs: &[Complex64]) -> DiscSamples {
        let m = self.angular_count();
        let mut values = vec![Complex64::new(0.0, 0.0); self.radial_count() * m];
        for (j, &r) in self.radial_nodes.iter().enumerate() {
            let row = &mut values[j * m..(j + 1) * m];
            let mut rp = 1.0;
            for (n, &c) in coeffs.iter().enumerate() {
                row[n % m] += c * rp;
                rp *= r;
            }
            self.fft.synthesize(row);
        }
        DiscSamples { values, radial_count: self.radial_count(), angular_count: m }
    }

    fn check_shape(&self, samples: &DiscSamples) -> Result<()> {
        if samples.radial_count != self.radial_count() || samples.angular_count != self.angular_count() {
            return Err(Error::DimensionMismatch {
                expected: self.radial_count() * self.angular_count(),
                found: samples.values.len(),
            });
        }
        Ok(())
    }

    /// `sum_j w_j (1/M) sum_t u(j, t)`.
    pub fn integrate(&self, samples: &DiscSamples) -> Result<Complex64> {
        self.check_shape(samples)?;
        let m = self.angular_count();
        Ok(self
            .radial_weights
            .iter()
            .enumerate()
            .map(|(j, &w)| w * samples.row(j).iter().sum::<Complex64>() / m as f64)
            .sum())
    }

    /// Quadrature of a real pointwise quantity evaluated on complex samples.
    pub fn integrate_real(&self, samples: &DiscSamples, f: impl Fn(Complex64) -> f64) -> Result<f64> {
        self.check_shape(samples)?;
        let m = self.angular_count() as f64;
        Ok(self
            .radial_weights
            .iter()
            .enumerate()
            .map(|(j, &w)| w * samples.row(j).iter().map(|&v| f(v)).sum::<f64>() / m)
            .sum())
    }

    /// Conjugate moments `mu_n = ∫ u conj(z)^n dσ` for `n = 0..=max_n`.
    ///
    /// Indices at or above the angular count alias; callers that need exact
    /// moments keep `max_n <= max_projection_degree()`.
    pub fn conjugate_moments(&self, samples: &DiscSamples, max_n: usize) -> Result<Vec<Complex64>> {
        self.check_shape(samples)?;
        let m = self.angular_count();
        let mut moments = vec![Complex64::new(0.0, 0.0); max_n + 1];
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for (j, (&r, &w)) in self.radial_nodes.iter().zip(&self.radial_weights).enumerate() {
            buf.copy_from_slice(samples.row(j));
            self.fft.analyze(&mut buf);
            let mut rp = w;
            for (n, mom) in moments.iter_mut().enumerate() {
                *mom += buf[n % m] * rp;
                rp *= r;
            }
        }
        Ok(moments)
    }
}
