//! The linear extremal problem in `A^p` for polynomial kernels.
//!
//! For a kernel `k` the extremal function `F` maximizes `Re phi(g)` over the
//! unit sphere of `A^p`, where `phi(g) = ∫ g conj(k) dσ`. Instead of working on
//! the sphere we maximize the smooth concave surrogate
//!
//! ```text
//! J(g) = Re phi(g) - (1/p) ∫ |g|^p dσ
//! ```
//!
//! over polynomials of a working degree `D`. At the maximizer `g` the
//! first-order condition reads `P_D(|g|^{p-2} g) = k`, so `F = g / ||g||` and
//! `||phi|| = ||g||^{p-1}`.
//!
//! The iteration is a damped Newton method on the `2(D+1)` real coordinates
//! of `g`. The Hessian of `∫ |g|^p` is assembled exactly from angular Fourier
//! coefficients of the two weights `|g|^{p-2}` and `|g|^{p-4} conj(g)^2`, so
//! each step costs a handful of FFTs per radius plus one dense Cholesky
//! factorization. For `p < 2` the weight `|g|^{p-2}` is singular at zeros of
//! `g`; there `|g|^2` is replaced by `|g|^2 + eps` and `eps` is driven down a
//! geometric schedule, warm-starting each stage.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::{bergman_norm, conjugate_exponent, phi_apply};
use crate::poly::TaylorPolynomial;
use crate::projection::signed_power;
use crate::quadrature::DiscQuadrature;
use crate::zeros::{patched_moments, ZeroPatches};

/// Data of one extremal problem: exponent and (nonzero) kernel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtremalProblem {
    pub p: f64,
    pub q: f64,
    pub kernel: TaylorPolynomial,
}

impl ExtremalProblem {
    pub fn new(kernel: TaylorPolynomial, p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidExponent(p));
        }
        if kernel.is_zero() {
            return Err(Error::ZeroKernel);
        }
        Ok(ExtremalProblem { p, q: conjugate_exponent(p), kernel })
    }

    pub fn kernel_degree(&self) -> usize {
        self.kernel.degree()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DegreeChoice {
    Auto,
    Fixed(usize),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolverOptions {
    pub degree: DegreeChoice,
    /// Target for the first-order residual.
    pub tol: f64,
    /// Newton iterations allowed per continuation stage.
    pub max_iterations: usize,
    /// Regularization levels for `p < 2`, relative to the squared size of
    /// the initial iterate. Ignored for `p >= 2`.
    pub epsilon_schedule: Vec<f64>,
    /// Cap for automatic degree doubling.
    pub max_degree: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            degree: DegreeChoice::Auto,
            tol: 1e-9,
            max_iterations: 100,
            epsilon_schedule: (1..=7).map(|k| 10f64.powi(-2 * k)).collect(),
            max_degree: 1024,
        }
    }
}

impl SolverOptions {
    pub fn with_degree(mut self, degree: DegreeChoice) -> Self {
        self.degree = degree;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance {} must be positive", self.tol)));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument("max_iterations must be positive".into()));
        }
        Ok(())
    }
}

/// Extremal function and functional norm, with solver diagnostics.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExtremalSolution {
    /// Truncated Taylor form of the extremal function.
    pub f: TaylorPolynomial,
    /// `||phi||`, read off as `||g||^{p-1}`.
    pub phi_norm: f64,
    /// First-order residual over probes `z^j`, `j <= degree + deg k`.
    pub residual: f64,
    /// Working degree `D`.
    pub degree: usize,
    /// Newton iterations over all stages and degrees.
    pub iterations: usize,
    /// Last regularization level used (0 when none was needed).
    pub epsilon_final: f64,
    /// Largest `|F_j|` over the top quarter of coefficients.
    pub tail: f64,
    /// Whether the automatic degree rule's stopping test was met.
    pub degree_converged: bool,
    pub radial_nodes: usize,
    pub angular_count: usize,
}

impl ExtremalSolution {
    /// Quadrature rule matching the one used for this solution's residual.
    pub fn quadrature(&self, kernel_degree: usize) -> DiscQuadrature {
        DiscQuadrature::for_degree(self.degree + kernel_degree)
    }
}

/// Squared-modulus weights of the regularized surrogate.
struct Surrogate<'a> {
    quad: &'a DiscQuadrature,
    p: f64,
    /// `k_j / (j+1)`: the gradient of `Re phi` in Wirtinger form.
    target: Vec<Complex64>,
}

struct Evaluation {
    value: f64,
    /// `∂J/∂a_j + i ∂J/∂b_j` for `g_j = a_j + i b_j`.
    gradient: Vec<Complex64>,
}

impl<'a> Surrogate<'a> {
    fn new(quad: &'a DiscQuadrature, p: f64, kernel: &TaylorPolynomial, degree: usize) -> Self {
        let target = (0..=degree).map(|j| kernel.coeff(j) / (j + 1) as f64).collect();
        Surrogate { quad, p, target }
    }

    fn linear_part(&self, g: &[Complex64]) -> f64 {
        g.iter().zip(&self.target).map(|(a, t)| (a * t.conj()).re).sum()
    }

    fn value(&self, g: &[Complex64], eps: f64) -> f64 {
        let samples = self.quad.sample_coeffs(g);
        let patches = ZeroPatches::locate(g, &samples, self.quad, self.p);
        let half_p = 0.5 * self.p;
        let h = |v: Complex64| (v.norm_sqr() + eps).powf(half_p);
        let m = self.quad.angular_count() as f64;
        let mut norm_part = 0.0;
        for (i, &w) in self.quad.radial_weights().iter().enumerate() {
            let row = samples.row(i);
            let mut sum: f64 = row.iter().map(|&v| h(v)).sum();
            for &(t, chi) in patches.ring_cover(i) {
                sum -= chi * h(row[t]);
            }
            norm_part += w * sum / m;
        }
        let local: Vec<f64> = patches.eval(g).into_iter().map(h).collect();
        norm_part += patches.sum_real(&local);
        self.linear_part(g) - norm_part / self.p
    }

    /// Value, gradient and, if requested, the Hessian of `∫ |g|^p / p` in
    /// the real coordinates `(Re g_0.., Im g_0..)`.
    fn evaluate(&self, g: &[Complex64], eps: f64, with_hessian: bool) -> (Evaluation, Option<DMatrix<f64>>) {
        let n = g.len();
        let quad = self.quad;
        let m = quad.angular_count();
        let radial = quad.radial_count();
        let samples = quad.sample_coeffs(g);
        let patches = ZeroPatches::locate(g, &samples, quad, self.p);
        let half_p = 0.5 * self.p;
        let c2 = 0.5 * (self.p - 2.0);
        let zero = Complex64::new(0.0, 0.0);

        let mut norm_part = 0.0;
        let mut moments = vec![zero; n];
        // weighted radial powers w_i r_i^s, split by the parity of s
        let (mut pow_even, mut pow_odd) = if with_hessian {
            (DMatrix::<f64>::zeros(n, radial), DMatrix::<f64>::zeros(n.saturating_sub(1), radial))
        } else {
            (DMatrix::zeros(0, 0), DMatrix::zeros(0, 0))
        };
        // angular modes alpha_i[d], d < n, split by the parity of d
        let half_even = n.div_ceil(2);
        let half_odd = n / 2;
        let (mut ae_re, mut ae_im, mut ao_re, mut ao_im) = if with_hessian {
            (
                DMatrix::<f64>::zeros(radial, half_even),
                DMatrix::<f64>::zeros(radial, half_even),
                DMatrix::<f64>::zeros(radial, half_odd),
                DMatrix::<f64>::zeros(radial, half_odd),
            )
        } else {
            (DMatrix::zeros(0, 0), DMatrix::zeros(0, 0), DMatrix::zeros(0, 0), DMatrix::zeros(0, 0))
        };
        // ∫ beta z^s dσ, which depends on s = j + l only
        let mut hankel = if with_hessian { vec![zero; 2 * n - 1] } else { Vec::new() };

        let mut grad_buf = vec![zero; m];
        let mut alpha_buf = vec![zero; m];
        let mut beta_buf = vec![zero; m];
        let mut powers = vec![0.0; 2 * n - 1];

        for (i, (&r, &w)) in quad.radial_nodes().iter().zip(quad.radial_weights()).enumerate() {
            let row = samples.row(i);
            let mut row_sum = 0.0;
            for t in 0..m {
                let v = row[t];
                let u = v.norm_sqr() + eps;
                let a = u.powf(half_p - 1.0);
                row_sum += a * u;
                grad_buf[t] = v * a;
                if with_hessian {
                    let b = if u > 0.0 { c2 * a / u } else { 0.0 };
                    alpha_buf[t] = Complex64::new(a + b * v.norm_sqr(), 0.0);
                    beta_buf[t] = v.conj() * v.conj() * b;
                }
            }
            // the Hessian keeps the plain rule; only value and gradient are patched
            for &(t, chi) in patches.ring_cover(i) {
                let u = row[t].norm_sqr() + eps;
                row_sum -= chi * u.powf(half_p);
                grad_buf[t] *= 1.0 - chi;
            }
            norm_part += w * row_sum / m as f64;

            let mut rp = w;
            for pw in powers.iter_mut() {
                *pw = rp;
                rp *= r;
            }
            let fft = quad.fft();
            fft.analyze(&mut grad_buf);
            for (l, mom) in moments.iter_mut().enumerate() {
                *mom += grad_buf[l % m] * powers[l];
            }
            if with_hessian {
                fft.analyze(&mut alpha_buf);
                fft.analyze(&mut beta_buf);
                for (s, &pw) in powers.iter().enumerate() {
                    if s % 2 == 0 {
                        pow_even[(s / 2, i)] = pw;
                    } else {
                        pow_odd[(s / 2, i)] = pw;
                    }
                    hankel[s] += beta_buf[(m - s % m) % m] * pw;
                }
                for d in 0..n {
                    let mode = alpha_buf[d % m];
                    if d % 2 == 0 {
                        ae_re[(i, d / 2)] = mode.re;
                        ae_im[(i, d / 2)] = mode.im;
                    } else {
                        ao_re[(i, d / 2)] = mode.re;
                        ao_im[(i, d / 2)] = mode.im;
                    }
                }
            }
        }

        if !patches.is_empty() {
            let local = patches.eval(g);
            let powers: Vec<f64> = local.iter().map(|v| (v.norm_sqr() + eps).powf(half_p - 1.0)).collect();
            let grad_local: Vec<Complex64> = local.iter().zip(&powers).map(|(v, a)| v * a).collect();
            let value_local: Vec<f64> =
                local.iter().zip(&powers).map(|(v, a)| a * (v.norm_sqr() + eps)).collect();
            patches.add_moments(&grad_local, &mut moments);
            norm_part += patches.sum_real(&value_local);
        }
        let gradient: Vec<Complex64> =
            self.target.iter().zip(&moments).map(|(t, mom)| t - mom).collect();
        let value = self.linear_part(g) - norm_part / self.p;

        let hessian = with_hessian.then(|| {
            // herm(j, l) = ∫ alpha z^j conj(z)^l dσ = Σ_i w_i r_i^{j+l} alpha_i[l - j]
            // for j <= l; with s = j + l and d = l - j of equal parity this is
            // entry (s/2, d/2) of the parity-matched product below.
            let even_re = &pow_even * &ae_re;
            let even_im = &pow_even * &ae_im;
            let odd_re = &pow_odd * &ao_re;
            let odd_im = &pow_odd * &ao_im;
            let herm = |j: usize, l: usize| -> Complex64 {
                let (s, d) = (j + l, l - j);
                if d % 2 == 0 {
                    Complex64::new(even_re[(s / 2, d / 2)], even_im[(s / 2, d / 2)])
                } else {
                    Complex64::new(odd_re[(s / 2, d / 2)], odd_im[(s / 2, d / 2)])
                }
            };
            let mut h = DMatrix::<f64>::zeros(2 * n, 2 * n);
            for a in 0..n {
                for b in 0..n {
                    let herm_ab = if a <= b { herm(a, b) } else { herm(b, a).conj() };
                    let sym_ab = hankel[a + b];
                    h[(a, b)] = herm_ab.re + sym_ab.re;
                    h[(n + a, n + b)] = herm_ab.re - sym_ab.re;
                    h[(a, n + b)] = herm_ab.im - sym_ab.im;
                    h[(n + b, a)] = herm_ab.im - sym_ab.im;
                }
            }
            h
        });

        (Evaluation { value, gradient }, hessian)
    }
}

fn max_modulus(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

fn to_real(v: &[Complex64]) -> DVector<f64> {
    let n = v.len();
    DVector::from_fn(2 * n, |i, _| if i < n { v[i].re } else { v[i - n].im })
}

fn from_real(v: &DVector<f64>) -> Vec<Complex64> {
    let n = v.len() / 2;
    (0..n).map(|i| Complex64::new(v[i], v[n + i])).collect()
}

struct StageOutcome {
    iterations: usize,
    converged: bool,
}

/// Damped Newton ascent on one regularization level.
fn newton_stage(
    surrogate: &Surrogate<'_>,
    g: &mut Vec<Complex64>,
    eps: f64,
    grad_tol: f64,
    max_iterations: usize,
) -> StageOutcome {
    const ARMIJO: f64 = 1e-4;
    let mut iterations = 0;
    while iterations < max_iterations {
        let (eval, hessian) = surrogate.evaluate(g, eps, true);
        if max_modulus(&eval.gradient) <= grad_tol {
            return StageOutcome { iterations, converged: true };
        }
        iterations += 1;
        let hessian = hessian.expect("requested");
        let grad = to_real(&eval.gradient);
        let step = match hessian.clone().cholesky() {
            Some(chol) => chol.solve(&grad),
            None => {
                // curvature breakdown: scaled gradient ascent
                let diag_mean = hessian.diagonal().mean().abs().max(f64::MIN_POSITIVE);
                &grad / diag_mean
            }
        };
        let decrement = grad.dot(&step);
        if !(decrement > 0.0) || !decrement.is_finite() {
            return StageOutcome { iterations, converged: false };
        }
        let dir = from_real(&step);
        // Near the optimum differences of J drown in rounding; judge the full
        // step by the gradient instead.
        if decrement <= 1e-10 * (1.0 + eval.value.abs()) {
            let trial: Vec<Complex64> = g.iter().zip(&dir).map(|(a, d)| a + d).collect();
            let (next, _) = surrogate.evaluate(&trial, eps, false);
            if max_modulus(&next.gradient) < max_modulus(&eval.gradient) {
                *g = trial;
                continue;
            }
        }
        let mut t = 1.0;
        loop {
            let trial: Vec<Complex64> = g.iter().zip(&dir).map(|(a, d)| a + d * t).collect();
            let value = surrogate.value(&trial, eps);
            if value >= eval.value + ARMIJO * t * decrement {
                *g = trial;
                break;
            }
            t *= 0.5;
            if t < 1e-12 {
                return StageOutcome { iterations, converged: false };
            }
        }
    }
    StageOutcome { iterations, converged: false }
}

fn tail_size(f: &TaylorPolynomial, degree: usize) -> f64 {
    let from = (3 * (degree + 1)).div_ceil(4);
    f.max_coeff_from(from)
}

/// Solves the extremal problem for a polynomial kernel.
///
/// With [`DegreeChoice::Auto`] the working degree starts at `4 deg k + 8`
/// and doubles until the top quarter of `F`'s coefficients is below `1e-10`
/// and `||phi||` moves by less than `1e-10` (relative) between degrees, or
/// `max_degree` is reached.
pub fn solve(prob: &ExtremalProblem, opts: &SolverOptions) -> Result<ExtremalSolution> {
    opts.validate()?;
    if prob.kernel.is_zero() {
        return Err(Error::ZeroKernel);
    }
    let p = prob.p;
    let kernel_degree = prob.kernel_degree();
    // F is invariant under positive scaling of k; work with a unit A^2 kernel.
    let kernel_scale = prob.kernel.bergman_l2_norm_sq().sqrt();
    let kernel = prob.kernel.scale_real(1.0 / kernel_scale);

    let (mut degree, fixed) = match opts.degree {
        DegreeChoice::Auto => ((4 * kernel_degree + 8).min(opts.max_degree.max(kernel_degree)), false),
        DegreeChoice::Fixed(d) => (d, true),
    };
    if degree < kernel_degree {
        return Err(Error::InvalidArgument(format!(
            "working degree {degree} is below the kernel degree {kernel_degree}"
        )));
    }

    let mut quad = DiscQuadrature::for_degree(degree + kernel_degree);
    // the exact maximizer of J along the ray through k
    let ray_norm = bergman_norm(&kernel, p, &quad)?;
    let lambda = (1.0 / ray_norm.powf(p)).powf(1.0 / (p - 1.0));
    let mut g: Vec<Complex64> = kernel.padded(degree + 1).iter().map(|c| c * lambda).collect();
    let eps_scale = lambda * lambda;

    let schedule: Vec<f64> = if p < 2.0 { opts.epsilon_schedule.clone() } else { vec![0.0] };
    let final_eps = schedule.last().copied().unwrap_or(0.0) * eps_scale;

    let mut iterations = 0;
    let mut first_pass = true;
    let mut previous_phi: Option<f64> = None;
    loop {
        let surrogate = Surrogate::new(&quad, p, &kernel, degree);
        let grad_tol = 1e-3 * opts.tol;
        let stages: Vec<f64> = if first_pass {
            schedule.iter().map(|e| e * eps_scale).collect()
        } else {
            vec![final_eps]
        };
        let last = stages.len() - 1;
        for (i, &eps) in stages.iter().enumerate() {
            let stage_tol = if i == last { grad_tol } else { grad_tol.max(1e-8) };
            let outcome = newton_stage(&surrogate, &mut g, eps, stage_tol, opts.max_iterations);
            iterations += outcome.iterations;
            let _ = outcome.converged;
        }
        first_pass = false;

        let g_poly = TaylorPolynomial::new(g.clone());
        let g_norm = bergman_norm(&g_poly, p, &quad)?;
        let phi_norm_unit = g_norm.powf(p - 1.0);
        let f = g_poly.scale_real(1.0 / g_norm);
        let residual_unit = {
            let problem = ExtremalProblem { p, q: prob.q, kernel: kernel.clone() };
            optimality_residual(&f, &problem, phi_norm_unit, degree + kernel_degree, &quad)?
        };
        let tail = tail_size(&f, degree);
        let degree_converged = match previous_phi {
            Some(prev) => ((phi_norm_unit - prev) / phi_norm_unit).abs() < 1e-10 && tail < 1e-10,
            None => false,
        };

        let solution = ExtremalSolution {
            f,
            phi_norm: phi_norm_unit * kernel_scale,
            residual: residual_unit,
            degree,
            iterations,
            epsilon_final: if p < 2.0 { final_eps } else { 0.0 },
            tail,
            degree_converged,
            radial_nodes: quad.radial_count(),
            angular_count: quad.angular_count(),
        };
        if !solution.phi_norm.is_finite() {
            return Err(Error::NonFinite("functional norm"));
        }

        let next = 2 * degree;
        if fixed || degree_converged || next > opts.max_degree {
            if solution.residual <= opts.tol {
                return Ok(solution);
            }
            return Err(Error::NonConvergence {
                residual: solution.residual,
                tol: opts.tol,
                iterations,
                solution: Box::new(solution),
            });
        }
        previous_phi = Some(phi_norm_unit);
        degree = next;
        g.resize(degree + 1, Complex64::new(0.0, 0.0));
        quad = DiscQuadrature::for_degree(degree + kernel_degree);
    }
}

/// The `p = 2` solution `F = k / ||k||_{A^2}`, `||phi|| = ||k||_{A^2}`.
pub fn p2_closed_form(k: &TaylorPolynomial) -> Result<ExtremalSolution> {
    if k.is_zero() {
        return Err(Error::ZeroKernel);
    }
    let norm = k.bergman_l2_norm_sq().sqrt();
    let f = k.scale_real(1.0 / norm);
    let degree = k.degree();
    let quad = DiscQuadrature::for_degree(2 * degree);
    let prob = ExtremalProblem::new(k.clone(), 2.0)?;
    let residual = optimality_residual(&f, &prob, norm, 2 * degree, &quad)?;
    Ok(ExtremalSolution {
        tail: tail_size(&f, degree),
        f,
        phi_norm: norm,
        residual,
        degree,
        iterations: 0,
        epsilon_final: 0.0,
        degree_converged: true,
        radial_nodes: quad.radial_count(),
        angular_count: quad.angular_count(),
    })
}

/// `max_{j <= probe_degree} |∫ z^j |F|^{p-1} conj(sgn F) dσ - phi(z^j) / ||phi|| |`.
pub fn optimality_residual(
    f: &TaylorPolynomial,
    prob: &ExtremalProblem,
    phi_norm: f64,
    probe_degree: usize,
    quad: &DiscQuadrature,
) -> Result<f64> {
    let max = quad.max_projection_degree();
    if probe_degree > max {
        return Err(Error::DegreeTooLarge { degree: probe_degree, max });
    }
    let moments = patched_moments(f, prob.p, quad, probe_degree, |v| signed_power(v, prob.p))?;
    // ∫ z^j u dσ = conj(∫ u conj(z)^j dσ) and phi(z^j) = conj(k_j)/(j+1);
    // both sides conjugated, the defect modulus is unchanged.
    Ok(moments
        .iter()
        .enumerate()
        .map(|(j, mom)| (mom - prob.kernel.coeff(j) / ((j + 1) as f64 * phi_norm)).norm())
        .fold(0.0, f64::max))
}

/// `P(|F|^{p-1} sgn F)`, truncated at `out_degree`. For the extremal function
/// of `k` this is `k / ||phi||`.
pub fn recover_kernel(
    f: &TaylorPolynomial,
    p: f64,
    quad: &DiscQuadrature,
    out_degree: usize,
) -> Result<TaylorPolynomial> {
    let max = quad.max_projection_degree();
    if out_degree > max {
        return Err(Error::DegreeTooLarge { degree: out_degree, max });
    }
    let moments = patched_moments(f, p, quad, out_degree, |v| signed_power(v, p))?;
    Ok(TaylorPolynomial::new(moments.into_iter().enumerate().map(|(n, m)| m * (n + 1) as f64).collect()))
}

/// Convenience wrapper: `Re phi(F)` for a solution.
pub fn functional_value(prob: &ExtremalProblem, f: &TaylorPolynomial) -> Complex64 {
    phi_apply(&prob.kernel, f)
}
