//! Bergman and Hardy norms, integral means, and the duality pairing.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::TaylorPolynomial;
use crate::quadrature::{CircleGrid, DiscQuadrature, DiscSamples};
use crate::zeros::patched_integral;

/// Conjugate exponent `p / (p - 1)`.
pub fn conjugate_exponent(p: f64) -> f64 {
    p / (p - 1.0)
}

/// `∫_D u dσ` for grid samples.
pub fn disc_integral(samples: &DiscSamples, quad: &DiscQuadrature) -> Result<Complex64> {
    quad.integrate(samples)
}

/// `||f||_{A^p}` for `0 < p <= inf`. At `p = 2` the coefficient formula
/// `(sum |c_n|^2 / (n+1))^{1/2}` is used; otherwise the disc quadrature.
pub fn bergman_norm(f: &TaylorPolynomial, p: f64, quad: &DiscQuadrature) -> Result<f64> {
    if p == 2.0 {
        return finite(f.bergman_l2_norm_sq().sqrt(), "A^2 norm");
    }
    bergman_norm_quadrature(f, p, quad)
}

/// Quadrature route for `||f||_{A^p}`, valid for every `p`, including 2.
pub fn bergman_norm_quadrature(f: &TaylorPolynomial, p: f64, quad: &DiscQuadrature) -> Result<f64> {
    check_positive_exponent(p)?;
    if p.is_infinite() {
        let samples = quad.sample(f);
        return finite(samples.values().iter().map(|v| v.norm()).fold(0.0, f64::max), "A^inf norm");
    }
    let integral = patched_integral(f, p, quad, |v| v.norm().powf(p))?;
    finite(integral.powf(1.0 / p), "A^p norm")
}

/// `||f||_{H^p} = M_p(f, 1)`; for polynomials the supremum over radii is
/// attained on the boundary. `p = inf` takes the maximum over the grid nodes.
pub fn hardy_norm(f: &TaylorPolynomial, p: f64, grid: &CircleGrid) -> Result<f64> {
    integral_mean(f, p, 1.0, grid)
}

/// `M_p(f, r)`, the `L^p(dθ/2π)` mean of `f` on the circle of radius `r`.
pub fn integral_mean(f: &TaylorPolynomial, p: f64, r: f64, grid: &CircleGrid) -> Result<f64> {
    check_positive_exponent(p)?;
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::InvalidArgument(format!("radius {r} outside [0, 1]")));
    }
    let values = grid.sample(f, r);
    Ok(lp_mean(&values, p))
}

/// `L^p(dθ/2π)` norm of boundary samples.
pub fn lp_mean(values: &[Complex64], p: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    }
    let m = values.len() as f64;
    (values.iter().map(|v| v.norm().powf(p)).sum::<f64>() / m).powf(1.0 / p)
}

fn check_positive_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p <= 0.0 {
        return Err(Error::InvalidArgument(format!("exponent {p} must be positive")));
    }
    Ok(())
}

fn finite(v: f64, what: &'static str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(what))
    }
}

/// A bounded functional on `A^p` represented by its kernel:
/// `phi(f) = ∫_D f conj(k) dσ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalPhi {
    pub kernel: TaylorPolynomial,
    pub p: f64,
    pub q: f64,
}

impl FunctionalPhi {
    pub fn new(kernel: TaylorPolynomial, p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidExponent(p));
        }
        Ok(FunctionalPhi { kernel, p, q: conjugate_exponent(p) })
    }

    pub fn apply(&self, f: &TaylorPolynomial) -> Complex64 {
        phi_apply(&self.kernel, f)
    }
}

/// `∫_D f conj(k) dσ = sum_n f_n conj(k_n) / (n+1)`, exact by monomial
/// orthogonality.
pub fn phi_apply(kernel: &TaylorPolynomial, f: &TaylorPolynomial) -> Complex64 {
    f.coeffs()
        .iter()
        .zip(kernel.coeffs())
        .enumerate()
        .map(|(n, (&a, &b))| a * b.conj() / (n + 1) as f64)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_poly(rng: &mut ChaCha8Rng, max_degree: usize) -> TaylorPolynomial {
        let d = rng.gen_range(0..=max_degree);
        TaylorPolynomial::new(
            (0..=d).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(),
        )
    }

    #[test]
    fn bergman_norm_examples() {
        let q = DiscQuadrature::new(64, 256).unwrap();
        let one = TaylorPolynomial::from_real(&[1.0]);
        for p in [1.3, 2.0, 3.0, 4.0] {
            assert!((bergman_norm(&one, p, &q).unwrap() - 1.0).abs() < 1e-13);
        }
        let z = TaylorPolynomial::monomial(1, c(1.0, 0.0));
        assert!((bergman_norm(&z, 2.0, &q).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((bergman_norm_quadrature(&z, 2.0, &q).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-10);
        let z2 = TaylorPolynomial::monomial(2, c(1.0, 0.0));
        let v = bergman_norm(&z2, 4.0, &q).unwrap();
        assert!((v - 0.2f64.powf(0.25)).abs() < 1e-13);
        assert!((v - 0.6687403050).abs() < 1e-10);
    }

    #[test]
    fn p2_quadrature_agrees_with_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = DiscQuadrature::new(64, 256).unwrap();
        for _ in 0..20 {
            let f = random_poly(&mut rng, 40);
            let a = bergman_norm_quadrature(&f, 2.0, &q).unwrap();
            let b = f.bergman_l2_norm_sq().sqrt();
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn hardy_norm_examples() {
        let g = CircleGrid::new(256).unwrap();
        for n in 0..5 {
            let zn = TaylorPolynomial::monomial(n, c(1.0, 0.0));
            for p in [0.5, 1.5, 2.0, 4.0, f64::INFINITY] {
                assert!((hardy_norm(&zn, p, &g).unwrap() - 1.0).abs() < 1e-14);
            }
        }
        let f = TaylorPolynomial::from_real(&[1.0, 1.0]);
        assert!((hardy_norm(&f, 2.0, &g).unwrap() - std::f64::consts::SQRT_2).abs() < 1e-10);
        assert!((hardy_norm(&f, 4.0, &g).unwrap() - 1.5650845801).abs() < 1e-10);
        assert!((hardy_norm(&f, f64::INFINITY, &g).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn hardy_p2_is_parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = CircleGrid::new(256).unwrap();
        for _ in 0..20 {
            let f = random_poly(&mut rng, 40);
            let a = hardy_norm(&f, 2.0, &g).unwrap();
            assert!((a - f.hardy_l2_norm_sq().sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn integral_mean_examples() {
        let g = CircleGrid::new(64).unwrap();
        let z = TaylorPolynomial::monomial(1, c(1.0, 0.0));
        assert!((integral_mean(&z, 2.0, 0.5, &g).unwrap() - 0.5).abs() < 1e-15);
        let f = TaylorPolynomial::new(vec![c(0.3, -0.4), c(1.0, 1.0), c(-2.0, 0.0)]);
        assert!((integral_mean(&f, 3.0, 0.0, &g).unwrap() - 0.5).abs() < 1e-15);
        assert!(integral_mean(&f, 3.0, 1.5, &g).is_err());
    }

    #[test]
    fn integral_means_increase_with_radius() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = CircleGrid::new(256).unwrap();
        for _ in 0..30 {
            let f = random_poly(&mut rng, 10);
            for p in [1.0, 1.5, 3.0] {
                let inner = integral_mean(&f, p, 0.3, &g).unwrap();
                let outer = integral_mean(&f, p, 0.9, &g).unwrap();
                assert!(inner <= outer + 1e-12);
            }
        }
    }

    #[test]
    fn bergman_below_hardy() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let q = DiscQuadrature::new(64, 256).unwrap();
        let g = CircleGrid::new(1024).unwrap();
        for _ in 0..30 {
            let f = random_poly(&mut rng, 10);
            for p in [1.3, 2.0, 3.0, 4.0] {
                let a = bergman_norm(&f, p, &q).unwrap();
                let h = hardy_norm(&f, p, &g).unwrap();
                assert!(a <= h + 1e-10, "p={p}: {a} > {h}");
            }
        }
    }

    #[test]
    fn doubling_the_rule_changes_little() {
        // |f|^3 is not smooth at zeros of f, so agreement is algebraic there
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let q = DiscQuadrature::new(64, 256).unwrap();
        let fine = q.refined();
        for _ in 0..10 {
            let f = random_poly(&mut rng, 10);
            for p in [2.0, 3.0, 4.0] {
                let a = bergman_norm_quadrature(&f, p, &q).unwrap();
                let b = bergman_norm_quadrature(&f, p, &fine).unwrap();
                assert!(((a - b) / b).abs() < 1e-8, "p={p}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn phi_examples() {
        let z = TaylorPolynomial::monomial(1, c(1.0, 0.0));
        let one = TaylorPolynomial::from_real(&[1.0]);
        assert_eq!(phi_apply(&z, &z), c(0.5, 0.0));
        assert_eq!(phi_apply(&z, &one), c(0.0, 0.0));
        let k = TaylorPolynomial::from_real(&[1.0, 1.0]);
        let f = TaylorPolynomial::from_real(&[2.0, 4.0]);
        assert_eq!(phi_apply(&k, &f), c(4.0, 0.0));
    }

    #[test]
    fn phi_matches_quadrature() {
        let q = DiscQuadrature::new(32, 64).unwrap();
        let k = TaylorPolynomial::new(vec![c(0.2, 1.0), c(-0.5, 0.1), c(0.0, 0.3)]);
        let f = TaylorPolynomial::new(vec![c(1.0, 0.0), c(0.3, -0.7), c(0.4, 0.4), c(1.0, 1.0)]);
        let sf = q.sample(&f);
        let sk = q.sample(&k);
        let prod = DiscSamples::new(
            sf.values().iter().zip(sk.values()).map(|(a, b)| a * b.conj()).collect(),
            32,
            64,
        )
        .unwrap();
        let quad = disc_integral(&prod, &q).unwrap();
        assert!((quad - phi_apply(&k, &f)).norm() < 1e-14);
    }

    #[test]
    fn functional_records_conjugate_exponent() {
        let k = TaylorPolynomial::from_real(&[1.0]);
        for p in [1.3, 1.5, 2.0, 2.5, 3.0, 4.0] {
            let phi = FunctionalPhi::new(k.clone(), p).unwrap();
            assert!((1.0 / phi.p + 1.0 / phi.q - 1.0).abs() < 1e-15);
        }
        assert!(FunctionalPhi::new(k, 1.0).is_err());
    }

    #[test]
    fn overflow_is_reported() {
        let q = DiscQuadrature::new(16, 32).unwrap();
        let f = TaylorPolynomial::from_real(&[1e300, 1e300]);
        assert!(matches!(bergman_norm(&f, 3.0, &q), Err(Error::NonFinite(_))));
    }
}
