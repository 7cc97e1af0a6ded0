//! Szegő and Bergman projections, and boundary Fourier analysis.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::TaylorPolynomial;
use crate::quadrature::{CircleGrid, DiscQuadrature, DiscSamples};

/// A trigonometric polynomial `sum_{m=-d}^{d} a_m e^{i m theta}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPolynomial {
    /// `coeffs[m + d]` holds `a_m`.
    coeffs: Vec<Complex64>,
}

impl TrigPolynomial {
    /// Builds from coefficients `a_{-d}, ..., a_d` (odd length).
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument(
                "trigonometric polynomial needs coefficients a_{-d}..a_d".into(),
            ));
        }
        Ok(TrigPolynomial { coeffs })
    }

    /// `e^{i m theta}`.
    pub fn exponential(m: i64) -> Self {
        let d = m.unsigned_abs() as usize;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * d + 1];
        coeffs[(m + d as i64) as usize] = Complex64::new(1.0, 0.0);
        TrigPolynomial { coeffs }
    }

    /// Boundary values of an analytic polynomial.
    pub fn from_analytic(f: &TaylorPolynomial) -> Self {
        let d = f.degree();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * d + 1];
        for (n, &c) in f.coeffs().iter().enumerate() {
            coeffs[d + n] = c;
        }
        TrigPolynomial { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() / 2
    }

    pub fn coeff(&self, m: i64) -> Complex64 {
        let d = self.degree() as i64;
        if m.abs() > d {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(m + d) as usize]
        }
    }

    pub fn eval(&self, theta: f64) -> Complex64 {
        let d = self.degree() as i64;
        (-d..=d).map(|m| self.coeff(m) * Complex64::from_polar(1.0, m as f64 * theta)).sum()
    }

    pub fn sample(&self, grid: &CircleGrid) -> Vec<Complex64> {
        grid.nodes().iter().map(|&th| self.eval(th)).collect()
    }
}

/// Discrete Fourier coefficients `b_m` of boundary data for
/// `|m| <= (M - 1) / 2`; the rest of the spectrum is aliased and dropped.
#[derive(Clone, Debug)]
pub struct BoundaryFourier {
    /// `coeffs[m + limit]` holds `b_m`.
    coeffs: Vec<Complex64>,
    limit: usize,
    angular_count: usize,
}

impl BoundaryFourier {
    /// Fourier analysis of samples on `grid`.
    pub fn from_samples(values: &[Complex64], grid: &CircleGrid) -> Result<Self> {
        let spectrum = grid.analyze(values)?;
        let m = grid.angular_count();
        let limit = (m - 1) / 2;
        let coeffs = (-(limit as i64)..=limit as i64)
            .map(|k| spectrum[k.rem_euclid(m as i64) as usize])
            .collect();
        Ok(BoundaryFourier { coeffs, limit, angular_count: m })
    }

    /// Direct construction from `b_{-L}..b_L`.
    pub fn from_coefficients(coeffs: Vec<Complex64>, angular_count: usize) -> Result<Self> {
        if coeffs.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument("coefficient list must be b_{-L}..b_L".into()));
        }
        let limit = coeffs.len() / 2;
        if 2 * limit + 1 > angular_count {
            return Err(Error::DegreeTooLarge { degree: limit, max: (angular_count - 1) / 2 });
        }
        Ok(BoundaryFourier { coeffs, limit, angular_count })
    }

    /// Largest reported `|m|`.
    pub fn limit(&self) -> usize {
        self.limit
    }

    pub fn angular_count(&self) -> usize {
        self.angular_count
    }

    /// `b_m`, or `None` beyond the reported band.
    pub fn get(&self, m: i64) -> Option<Complex64> {
        if m.unsigned_abs() as usize > self.limit {
            None
        } else {
            Some(self.coeffs[(m + self.limit as i64) as usize])
        }
    }

    /// `max_m |b_{-m} - conj(b_m)|`; zero for real-valued data.
    pub fn hermitian_defect(&self) -> f64 {
        (0..=self.limit as i64)
            .map(|m| (self.get(-m).unwrap() - self.get(m).unwrap().conj()).norm())
            .fold(0.0, f64::max)
    }
}

/// The Szegő projection: keep the nonnegative modes as Taylor coefficients.
pub fn szego_project(bf: &BoundaryFourier) -> TaylorPolynomial {
    TaylorPolynomial::new((0..=bf.limit as i64).map(|m| bf.get(m).unwrap()).collect())
}

/// The Bergman projection of disc samples onto polynomials of degree
/// `out_degree`, via `(P u)_n = (n+1) ∫ u conj(z)^n dσ`.
pub fn bergman_project(
    samples: &DiscSamples,
    quad: &DiscQuadrature,
    out_degree: usize,
) -> Result<TaylorPolynomial> {
    let max = quad.max_projection_degree();
    if out_degree > max {
        return Err(Error::DegreeTooLarge { degree: out_degree, max });
    }
    let moments = quad.conjugate_moments(samples, out_degree)?;
    Ok(TaylorPolynomial::new(
        moments.into_iter().enumerate().map(|(n, m)| m * (n + 1) as f64).collect(),
    ))
}

/// Modulus below which `sgn F` is taken to be zero.
pub const SIGN_CUTOFF: f64 = 1e-14;

/// `|v|^{p-1} sgn v`, with `sgn v = 0` where `|v| < SIGN_CUTOFF`.
pub fn signed_power(v: Complex64, p: f64) -> Complex64 {
    let a = v.norm();
    if a < SIGN_CUTOFF {
        Complex64::new(0.0, 0.0)
    } else {
        v * a.powf(p - 2.0)
    }
}

/// Fourier coefficients of `|F(e^{i theta})|^p` on `grid`.
pub fn boundary_fourier_of_modulus_power(
    f: &TaylorPolynomial,
    p: f64,
    grid: &CircleGrid,
) -> Result<BoundaryFourier> {
    let values: Vec<Complex64> = grid
        .boundary(f)
        .iter()
        .map(|v| Complex64::new(v.norm().powf(p), 0.0))
        .collect();
    BoundaryFourier::from_samples(&values, grid)
}
