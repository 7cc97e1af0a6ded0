//! Cross-checks the surrogate Newton solver against a second optimizer that
//! works directly on the unit sphere of `A^p`.

use bergex::norms::{bergman_norm, phi_apply};
use bergex::solver::{recover_kernel, solve, ExtremalProblem, SolverOptions};
use bergex::{DiscQuadrature, TaylorPolynomial};
use num_complex::Complex64;

/// Maximizes `Re phi(f)` over `||f||_{A^p} = 1`, `deg f <= degree`, by
/// projected gradient ascent preconditioned with the `A^2` Gram inverse
/// `diag(n + 1)`. Returns the maximizer and `Re phi` at it.
fn sphere_oracle(kernel: &TaylorPolynomial, p: f64, degree: usize, tol: f64) -> (TaylorPolynomial, f64) {
    let quad = DiscQuadrature::for_degree(2 * degree + 8);
    let target: Vec<Complex64> = (0..=degree).map(|n| kernel.coeff(n) / (n + 1) as f64).collect();
    let normalize = |c: Vec<Complex64>| -> TaylorPolynomial {
        let f = TaylorPolynomial::new(c);
        let norm = bergman_norm(&f, p, &quad).unwrap();
        f.scale_real(1.0 / norm)
    };
    let value = |f: &TaylorPolynomial| phi_apply(kernel, f).re;

    let state = |f: &TaylorPolynomial| -> (f64, Vec<Complex64>, f64) {
        // conjugate moments of |f|^{p-2} f: the gradient of ||f||^p / p
        let samples = quad.sample(f).map(|v| if v.norm() > 0.0 { v * v.norm().powf(p - 2.0) } else { v });
        let moments = quad.conjugate_moments(&samples, degree).unwrap();
        let lambda = value(f);
        let defect: Vec<Complex64> = target.iter().zip(&moments).map(|(t, m)| t - m * lambda).collect();
        let size = defect.iter().map(|d| d.norm()).fold(0.0, f64::max);
        (lambda, defect, size)
    };

    let mut f = normalize(kernel.padded(degree + 1));
    let mut current = state(&f);
    let mut step = 1.0;
    for _ in 0..20_000 {
        let (lambda, defect, size) = &current;
        if *size < tol {
            return (f, *lambda);
        }
        let direction: Vec<Complex64> = defect.iter().enumerate().map(|(n, d)| d * (n + 1) as f64).collect();
        let base = f.padded(degree + 1);
        loop {
            let trial = normalize(base.iter().zip(&direction).map(|(c, d)| c + d * step).collect());
            let gain = value(&trial) - lambda;
            // once gains drown in rounding, judge by the defect
            let next = (gain > -1e-15 * lambda).then(|| state(&trial));
            if let Some(next) = next.filter(|s| gain > 1e-13 * lambda || s.2 < *size) {
                f = trial;
                current = next;
                step *= 1.5;
                break;
            }
            step *= 0.5;
            assert!(step > 1e-14, "oracle line search stalled at defect {size:e}");
        }
    }
    panic!("oracle did not converge");
}

#[test]
fn newton_matches_sphere_oracle_for_p3_one_plus_z() {
    let k = TaylorPolynomial::from_real(&[1.0, 1.0]);
    let p = 3.0;
    let (oracle, oracle_phi) = sphere_oracle(&k, p, 160, 1e-10);
    let sol = solve(&ExtremalProblem::new(k.clone(), p).unwrap(), &SolverOptions::default()).unwrap();
    assert!((sol.phi_norm - oracle_phi).abs() < 1e-6, "{} vs {}", sol.phi_norm, oracle_phi);
    let err = sol.f.max_abs_diff(&oracle);
    assert!(err < 1e-6, "coefficient mismatch {err}");
}

#[test]
fn newton_matches_sphere_oracle_for_p1_5_kernel() {
    let k = TaylorPolynomial::new(vec![Complex64::new(0.3, 0.2), Complex64::new(1.0, 0.0), Complex64::new(0.0, -0.5)]);
    let p = 1.5;
    let (oracle, oracle_phi) = sphere_oracle(&k, p, 96, 1e-10);
    let sol = solve(&ExtremalProblem::new(k.clone(), p).unwrap(), &SolverOptions::default()).unwrap();
    assert!((sol.phi_norm - oracle_phi).abs() < 1e-6, "{} vs {}", sol.phi_norm, oracle_phi);
    assert!(sol.f.max_abs_diff(&oracle) < 1e-6);
}

#[test]
fn kernel_recovered_from_p3_solution() {
    let k = TaylorPolynomial::from_real(&[1.0, 1.0]);
    let sol = solve(&ExtremalProblem::new(k.clone(), 3.0).unwrap(), &SolverOptions::default()).unwrap();
    let quad = sol.quadrature(1);
    let recovered = recover_kernel(&sol.f, 3.0, &quad, sol.degree).unwrap();
    let expected = k.scale_real(1.0 / sol.phi_norm);
    assert!(recovered.max_abs_diff(&expected) < 1e-5);
}
