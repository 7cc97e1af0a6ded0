//! Local corrections to the disc rule at zeros of a polynomial.
//!
//! Near a simple zero `a` of `f`, integrands such as `|f|^p` or
//! `|f|^{p-2} f` behave like `|z - a|^{p-1}` times a smooth factor, and the
//! tensor rule converges only algebraically there. Each zero inside the disc
//! gets a patch of radius `rho`: a cutoff `chi(z) = eta(|z - a| / rho)`,
//! equal to 1 to infinite order at `a` and vanishing to infinite order at
//! `rho`, splits the integrand. The tensor rule takes `u (1 - chi)`, which is
//! smooth, and a polar rule centred at `a` takes `u chi`: Gauss-Jacobi with
//! weight `s^{p-1}` in the radius and the trapezoid rule in the angle.
//!
//! Zeros are found from the winding of the grid samples around each grid
//! cell and polished by Newton's method. Zeros of higher multiplicity, zeros
//! so close to the circle or to each other that no patch fits, and a zero at
//! the origin, where the tensor rule is already polar, are left to the
//! tensor rule.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::Result;
use crate::poly::TaylorPolynomial;
use crate::quadrature::{DiscQuadrature, DiscSamples};

/// Radial nodes of each local rule.
const LOCAL_RADIAL: usize = 32;
/// Angular nodes of each local rule.
const LOCAL_ANGULAR: usize = 64;
/// Largest patch radius.
const MAX_RADIUS: f64 = 0.4;
/// Patch radius in units of `1 / R` for an `R`-ring grid; keeps the cutoff
/// resolved by the tensor rule and the moments `conj(z)^n`, `n < R`,
/// resolved by the local rule.
const RADIUS_PER_RING: f64 = 48.0;
/// Patches below `MIN_RADIUS_PER_RING / R` are not built.
const MIN_RADIUS_PER_RING: f64 = 20.0;
const MAX_PATCHES: usize = 32;

/// Gauss-Jacobi rule for `∫_0^1 s^beta h(s) ds`, `beta > -1`, by the
/// Golub-Welsch eigenvalue method.
pub fn gauss_jacobi_unit(n: usize, beta: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0 && beta > -1.0, "Gauss-Jacobi rule needs n > 0 and beta > -1");
    // Jacobi matrix of the weight (1 + x)^beta on [-1, 1]
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let s = 2.0 * kf + beta;
        jac[(k, k)] = if k == 0 { beta / (beta + 2.0) } else { beta * beta / (s * (s + 2.0)) };
        if k + 1 < n {
            let m = kf + 1.0;
            let s = 2.0 * m + beta;
            let b = (4.0 * m * m * (m + beta) * (m + beta) / (s * s * (s + 1.0) * (s - 1.0))).sqrt();
            jac[(k, k + 1)] = b;
            jac[(k + 1, k)] = b;
        }
    }
    let eig = SymmetricEigen::new(jac);
    // ∫_0^1 s^beta ds
    let mass = 1.0 / (beta + 1.0);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let v0 = eig.eigenvectors[(0, k)];
            (0.5 * (eig.eigenvalues[k] + 1.0), mass * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Smooth step: 1 on `t <= 0`, 0 on `t >= 1`, flat to all orders at both ends.
fn cutoff(t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    if t >= 1.0 {
        return 0.0;
    }
    let a = (-1.0 / (1.0 - t)).exp();
    let b = (-1.0 / t).exp();
    a / (a + b)
}

fn horner_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let zero = Complex64::new(0.0, 0.0);
    coeffs.iter().rev().fold((zero, zero), |(v, d), &c| (v * z + c, d * z + v))
}

fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |v, &c| v * z + c)
}

fn wrap(a: f64) -> f64 {
    let b = a.rem_euclid(2.0 * PI);
    if b > PI {
        b - 2.0 * PI
    } else {
        b
    }
}

/// Simple zeros of `coeffs` in the open disc, located from grid samples.
fn simple_zeros(coeffs: &[Complex64], samples: &DiscSamples, quad: &DiscQuadrature) -> Vec<Complex64> {
    let m = quad.angular_count();
    let radial = quad.radial_count();
    let radii = quad.radial_nodes();
    let arg: Vec<f64> = samples.values().iter().map(|v| v.arg()).collect();
    let at = |i: usize, t: usize| arg[i * m + t % m];

    let mut starts = Vec::new();
    // the disc inside the first ring
    let inner: f64 = (0..m).map(|t| wrap(at(0, t + 1) - at(0, t))).sum();
    if (inner / (2.0 * PI)).round() as i64 == 1 {
        starts.push(Complex64::new(0.0, 0.0));
    }
    for i in 0..radial.saturating_sub(1) {
        for t in 0..m {
            // counterclockwise: out along t, along the outer ring, back in
            let w = wrap(at(i + 1, t) - at(i, t)) + wrap(at(i + 1, t + 1) - at(i + 1, t))
                - wrap(at(i + 1, t + 1) - at(i, t + 1))
                - wrap(at(i, t + 1) - at(i, t));
            if (w / (2.0 * PI)).round() as i64 == 1 {
                let r = 0.5 * (radii[i] + radii[i + 1]);
                starts.push(Complex64::from_polar(r, 2.0 * PI * (t as f64 + 0.5) / m as f64));
            }
        }
    }

    // bound for |f'| on the disc; smaller derivatives at a zero mean a
    // (nearly) multiple zero
    let slope: f64 = coeffs.iter().enumerate().map(|(n, c)| n as f64 * c.norm()).sum();
    let mut zeros: Vec<Complex64> = Vec::new();
    for z0 in starts {
        let mut z = z0;
        let mut converged = false;
        for _ in 0..40 {
            let (v, d) = horner_with_derivative(coeffs, z);
            if d.norm() == 0.0 {
                break;
            }
            let step = v / d;
            z -= step;
            if !z.re.is_finite() || !z.im.is_finite() {
                break;
            }
            if step.norm() <= 1e-15 * (1.0 + z.norm()) {
                converged = true;
                break;
            }
        }
        let simple = horner_with_derivative(coeffs, z).1.norm() > 1e-6 * slope;
        if converged && simple && z.norm() < 1.0 && zeros.iter().all(|w| (w - z).norm() > 1e-9) {
            zeros.push(z);
        }
    }
    zeros
}

/// Patches around the zeros of one polynomial, for one disc rule.
#[derive(Clone, Debug, Default)]
pub struct ZeroPatches {
    centers: Vec<Complex64>,
    radii: Vec<f64>,
    /// Offsets into `cover` for each ring of the tensor rule.
    cover_rows: Vec<usize>,
    /// `(angle index, sum of cutoffs)` for covered tensor nodes, by ring.
    cover: Vec<(usize, f64)>,
    nodes: Vec<Complex64>,
    weights: Vec<f64>,
}

impl ZeroPatches {
    /// No patches: the plain tensor rule.
    pub fn none() -> Self {
        ZeroPatches::default()
    }

    /// Patches for integrands with a `|f|^{p-1}`-type singularity at the
    /// zeros of `f`, given `f`'s samples on `quad`. Even integer `p` gives
    /// polynomial integrands and no patches.
    pub fn locate(coeffs: &[Complex64], samples: &DiscSamples, quad: &DiscQuadrature, p: f64) -> Self {
        if !p.is_finite() || p <= 0.0 || (p % 2.0 == 0.0) {
            return Self::none();
        }
        let zeros = simple_zeros(coeffs, samples, quad);
        if zeros.is_empty() {
            return Self::none();
        }
        let ring_count = quad.radial_count() as f64;
        let largest = MAX_RADIUS.min(RADIUS_PER_RING / ring_count);
        let smallest = MIN_RADIUS_PER_RING / ring_count;
        let mut chosen: Vec<(Complex64, f64)> = zeros
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                let gap = zeros
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, b)| (a - b).norm())
                    .fold(f64::INFINITY, f64::min);
                (a, largest.min(0.999 * (1.0 - a.norm())).min(0.45 * gap))
            })
            .filter(|&(a, rho)| rho >= smallest && a.norm() > 1e-12)
            .collect();
        chosen.sort_by(|x, y| y.1.total_cmp(&x.1));
        chosen.truncate(MAX_PATCHES);
        Self::build(&chosen, quad, p - 1.0)
    }

    fn build(chosen: &[(Complex64, f64)], quad: &DiscQuadrature, beta: f64) -> Self {
        let m = quad.angular_count();
        let radii = quad.radial_nodes();
        let mut cover_map: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(a, rho) in chosen {
            let (ra, ta) = (a.norm(), a.arg());
            for (i, &r) in radii.iter().enumerate() {
                if (r - ra).abs() >= rho {
                    continue;
                }
                let (lo, hi) = if r + ra <= rho || ra == 0.0 {
                    (0i64, m as i64 - 1)
                } else {
                    let c = ((r * r + ra * ra - rho * rho) / (2.0 * r * ra)).clamp(-1.0, 1.0);
                    let half = c.acos();
                    let scale = m as f64 / (2.0 * PI);
                    (((ta - half) * scale).floor() as i64, ((ta + half) * scale).ceil() as i64)
                };
                let span = (hi - lo + 1).min(m as i64);
                for k in 0..span {
                    let t = (lo + k).rem_euclid(m as i64) as usize;
                    let chi = cutoff((quad.point(i, t) - a).norm() / rho);
                    if chi > 0.0 {
                        *cover_map.entry((i, t)).or_insert(0.0) += chi;
                    }
                }
            }
        }
        let mut cover_rows = vec![0; radii.len() + 1];
        let mut cover = Vec::with_capacity(cover_map.len());
        for (&(i, t), &chi) in &cover_map {
            cover_rows[i + 1] += 1;
            cover.push((t, chi));
        }
        for i in 0..radii.len() {
            cover_rows[i + 1] += cover_rows[i];
        }

        let (s_hat, w_hat) = gauss_jacobi_unit(LOCAL_RADIAL, beta);
        let mut nodes = Vec::with_capacity(chosen.len() * LOCAL_RADIAL * LOCAL_ANGULAR);
        let mut weights = Vec::with_capacity(nodes.capacity());
        for &(a, rho) in chosen {
            // ∫ u chi s ds dpsi / pi with u chi s = s^beta (u chi s^{1-beta})
            for (&sh, &wh) in s_hat.iter().zip(&w_hat) {
                let s = rho * sh;
                let w = rho.powf(beta + 1.0) * wh * s.powf(1.0 - beta) * cutoff(sh) * 2.0
                    / LOCAL_ANGULAR as f64;
                for b in 0..LOCAL_ANGULAR {
                    let psi = 2.0 * PI * (b as f64 + 0.5) / LOCAL_ANGULAR as f64;
                    nodes.push(a + Complex64::from_polar(s, psi));
                    weights.push(w);
                }
            }
        }
        ZeroPatches {
            centers: chosen.iter().map(|c| c.0).collect(),
            radii: chosen.iter().map(|c| c.1).collect(),
            cover_rows,
            cover,
            nodes,
            weights,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Zeros that carry a patch.
    pub fn centers(&self) -> &[Complex64] {
        &self.centers
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Nodes of the local rules.
    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    /// Weights of the local rules against `dσ`, cutoff included.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `(angle index, chi)` for the covered nodes of ring `i`.
    pub(crate) fn ring_cover(&self, i: usize) -> &[(usize, f64)] {
        match self.cover_rows.get(i + 1) {
            Some(&end) => &self.cover[self.cover_rows[i]..end],
            None => &[],
        }
    }

    /// Multiplies grid samples by `1 - chi`.
    pub fn mask(&self, samples: &mut DiscSamples) {
        if self.is_empty() {
            return;
        }
        let m = samples.angular_count();
        let values = samples.values_mut();
        for i in 0..self.cover_rows.len() - 1 {
            for &(t, chi) in self.ring_cover(i) {
                values[i * m + t] *= 1.0 - chi;
            }
        }
    }

    /// Adds `Σ_k w_k u_k conj(y_k)^n` to `moments[n]`.
    pub fn add_moments(&self, values: &[Complex64], moments: &mut [Complex64]) {
        for ((&y, &w), &u) in self.nodes.iter().zip(&self.weights).zip(values) {
            let yc = y.conj();
            let mut term = u * w;
            for mom in moments.iter_mut() {
                *mom += term;
                term *= yc;
            }
        }
    }

    /// `Σ_k w_k u_k`.
    pub fn sum_real(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, u)| w * u).sum()
    }

    /// Values of a polynomial at the local nodes.
    pub fn eval(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        self.nodes.iter().map(|&y| horner(coeffs, y)).collect()
    }
}

/// `∫ h(f) conj(z)^n dσ`, `n <= max_n`, where `h(f)` is singular at the
/// zeros of `f` like `|f|^{p-1}`.
pub fn patched_moments(
    f: &TaylorPolynomial,
    p: f64,
    quad: &DiscQuadrature,
    max_n: usize,
    h: impl Fn(Complex64) -> Complex64,
) -> Result<Vec<Complex64>> {
    let samples = quad.sample(f);
    let patches = ZeroPatches::locate(f.coeffs(), &samples, quad, p);
    let mut values = samples.map(&h);
    patches.mask(&mut values);
    let mut moments = quad.conjugate_moments(&values, max_n)?;
    let local: Vec<Complex64> = patches.eval(f.coeffs()).into_iter().map(&h).collect();
    patches.add_moments(&local, &mut moments);
    Ok(moments)
}

/// `∫ h(f) dσ` for real `h`, singular at the zeros of `f` like `|f|^{p-1}`
/// or milder.
pub fn patched_integral(
    f: &TaylorPolynomial,
    p: f64,
    quad: &DiscQuadrature,
    h: impl Fn(Complex64) -> f64,
) -> Result<f64> {
    let samples = quad.sample(f);
    let patches = ZeroPatches::locate(f.coeffs(), &samples, quad, p);
    let mut total = 0.0;
    let m = quad.angular_count();
    for (i, &w) in quad.radial_weights().iter().enumerate() {
        let row = samples.row(i);
        let mut sum: f64 = row.iter().map(|&v| h(v)).sum();
        for &(t, chi) in patches.ring_cover(i) {
            sum -= chi * h(row[t]);
        }
        total += w * sum / m as f64;
    }
    let local: Vec<f64> = patches.eval(f.coeffs()).into_iter().map(&h).collect();
    Ok(total + patches.sum_real(&local))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gauss_jacobi_integrates_weighted_powers() {
        for beta in [-0.5, 0.0, 0.5, 1.3, 2.0] {
            let (s, w) = gauss_jacobi_unit(12, beta);
            assert!(s.windows(2).all(|p| p[0] < p[1]) && s[0] > 0.0 && s[11] < 1.0);
            for k in 0..24 {
                let q: f64 = s.iter().zip(&w).map(|(s, w)| w * s.powi(k)).sum();
                let exact = 1.0 / (beta + k as f64 + 1.0);
                assert!((q - exact).abs() < 1e-14, "beta={beta} k={k}: {q} vs {exact}");
            }
        }
        let (s, w) = gauss_jacobi_unit(1, 0.5);
        assert!((s[0] - 0.6).abs() < 1e-15 && (w[0] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn cutoff_is_a_smooth_step() {
        assert_eq!(cutoff(0.0), 1.0);
        assert_eq!(cutoff(1.0), 0.0);
        assert!((cutoff(0.5) - 0.5).abs() < 1e-15);
        assert!((cutoff(0.3) + cutoff(0.7) - 1.0).abs() < 1e-15);
        assert!(1.0 - cutoff(0.01) < 1e-40 && cutoff(0.99) < 1e-40);
    }

    #[test]
    fn finds_simple_zeros_inside_the_disc() {
        // (z - 0.3i)(z + 0.5)(z - 2)
        let roots = [c(0.0, 0.3), c(-0.5, 0.0), c(2.0, 0.0)];
        let mut coeffs = vec![c(1.0, 0.0)];
        for r in roots {
            let mut next = vec![c(0.0, 0.0); coeffs.len() + 1];
            for (n, &a) in coeffs.iter().enumerate() {
                next[n + 1] += a;
                next[n] -= a * r;
            }
            coeffs = next;
        }
        let quad = DiscQuadrature::for_degree(8);
        let mut found = simple_zeros(&coeffs, &quad.sample_coeffs(&coeffs), &quad);
        found.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert_eq!(found.len(), 2);
        assert!((found[0] - roots[1]).norm() < 1e-14 && (found[1] - roots[0]).norm() < 1e-14);
    }

    #[test]
    fn double_zero_gets_no_patch() {
        let a = Complex64::from_polar(0.3, 0.3);
        let f = TaylorPolynomial::new(vec![a * a, -2.0 * a, c(1.0, 0.0)]);
        let quad = DiscQuadrature::for_degree(4);
        assert!(ZeroPatches::locate(f.coeffs(), &quad.sample(&f), &quad, 1.5).is_empty());
        let z2 = TaylorPolynomial::from_real(&[0.0, 0.0, 1.0]);
        assert!(ZeroPatches::locate(z2.coeffs(), &quad.sample(&z2), &quad, 1.5).is_empty());
    }

    #[test]
    fn patch_geometry() {
        let f = TaylorPolynomial::from_real(&[0.4, 1.0]);
        let quad = DiscQuadrature::for_degree(4);
        let samples = quad.sample(&f);
        assert!(ZeroPatches::locate(f.coeffs(), &samples, &quad, 2.0).is_empty());
        assert!(ZeroPatches::locate(f.coeffs(), &samples, &quad, 4.0).is_empty());
        let patches = ZeroPatches::locate(f.coeffs(), &samples, &quad, 1.5);
        assert_eq!(patches.centers().len(), 1);
        assert!((patches.centers()[0] - c(-0.4, 0.0)).norm() < 1e-15);
        assert_eq!(patches.radii()[0], MAX_RADIUS);
        assert_eq!(patches.nodes().len(), LOCAL_RADIAL * LOCAL_ANGULAR);
        assert!(patches.nodes().iter().all(|y| (y - c(-0.4, 0.0)).norm() < MAX_RADIUS));
        // a zero near the circle gets a patch only on a fine grid, and the
        // patch stays inside the disc
        let g = TaylorPolynomial::from_real(&[-0.9, 1.0]);
        assert!(ZeroPatches::locate(g.coeffs(), &quad.sample(&g), &quad, 1.5).is_empty());
        let fine = DiscQuadrature::for_degree(256);
        let patches = ZeroPatches::locate(g.coeffs(), &fine.sample(&g), &fine, 1.5);
        assert!((patches.radii()[0] - 0.0999).abs() < 1e-12);
        assert!(patches.nodes().iter().all(|y| y.norm() < 1.0));
        // the origin is left alone
        let z = TaylorPolynomial::from_real(&[0.0, 1.0, 0.5]);
        assert!(ZeroPatches::locate(z.coeffs(), &quad.sample(&z), &quad, 1.5).is_empty());
    }

    #[test]
    fn patched_integral_converges_fast() {
        let p = 1.5;
        let f = TaylorPolynomial::new(vec![c(0.2, -0.3), c(1.0, 0.4), c(-0.3, 0.1)]);
        let h = |v: Complex64| v.norm().powf(p);
        let fine = patched_integral(&f, p, &DiscQuadrature::for_degree(256), h).unwrap();
        let coarse = DiscQuadrature::for_degree(64);
        let patched = patched_integral(&f, p, &coarse, h).unwrap();
        let plain = coarse.integrate_real(&coarse.sample(&f), h).unwrap();
        assert!((patched - fine).abs() < 1e-10, "patched {}", patched - fine);
        assert!((plain - fine).abs() > 1e-9, "plain {}", plain - fine);
    }

    #[test]
    fn singular_moments_converge_fast() {
        // u = |f|^{p-2} f for f = z - a: the patched rule on a coarse grid
        // matches the patched rule on a fine grid far better than the plain one.
        let p = 1.5;
        let a = c(-0.41, 0.2);
        let f = TaylorPolynomial::new(vec![-a, c(1.0, 0.0)]);
        let u = |v: Complex64| if v.norm() > 0.0 { v * v.norm().powf(p - 2.0) } else { v };
        let coarse = DiscQuadrature::for_degree(64);
        let fine = DiscQuadrature::for_degree(256);
        let reference = patched_moments(&f, p, &fine, 8, u).unwrap();
        let patched = patched_moments(&f, p, &coarse, 8, u).unwrap();
        let plain = coarse.conjugate_moments(&coarse.sample(&f).map(u), 8).unwrap();
        let err = |m: &[Complex64]| m.iter().zip(&reference).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(err(&patched) < 1e-12, "patched {}", err(&patched));
        assert!(err(&plain) > 1e-7, "plain {}", err(&plain));
    }
}
