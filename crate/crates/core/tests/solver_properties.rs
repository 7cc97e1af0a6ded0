use std::f64::consts::PI;

use bergex::harness::solve_instance;
use bergex::norms::{bergman_norm, phi_apply};
use bergex::solver::{DegreeChoice, ExtremalProblem, SolverOptions};
use bergex::{DiscQuadrature, TaylorPolynomial};
use num_complex::Complex64;
use proptest::prelude::*;

fn kernel_strategy() -> impl Strategy<Value = TaylorPolynomial> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..=4)
        .prop_filter_map("nonzero kernel", |c| {
            let k = TaylorPolynomial::new(c.into_iter().map(|(re, im)| Complex64::new(re, im)).collect());
            (k.bergman_l2_norm_sq() > 1e-2).then_some(k)
        })
}

fn fixed(degree: usize) -> SolverOptions {
    SolverOptions::default().with_degree(DegreeChoice::Fixed(degree))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn positive_scaling_leaves_f_unchanged(
        k in kernel_strategy(),
        p in prop::sample::select(vec![1.5, 2.5, 3.0]),
        c in 0.1f64..10.0,
    ) {
        let opts = fixed(48);
        let a = solve_instance(&ExtremalProblem::new(k.clone(), p).unwrap(), &opts).unwrap();
        let b = solve_instance(&ExtremalProblem::new(k.scale_real(c), p).unwrap(), &opts).unwrap();
        prop_assert!(a.f.max_abs_diff(&b.f) < 1e-8);
        prop_assert!((b.phi_norm - c * a.phi_norm).abs() < 1e-8 * b.phi_norm);
    }

    // Extremal functions with zeros on the circle have algebraically decaying
    // coefficients; at the degree cap they are accurate only to about the
    // reported tail, and the comparison is held to that.
    #[test]
    fn rotation_is_equivariant(
        k in kernel_strategy(),
        p in prop::sample::select(vec![1.5, 3.0, 4.0]),
        alpha in 0.0f64..(2.0 * PI),
    ) {
        let opts = SolverOptions::default();
        let a = solve_instance(&ExtremalProblem::new(k.clone(), p).unwrap(), &opts).unwrap();
        let b = solve_instance(&ExtremalProblem::new(k.rotate(alpha), p).unwrap(), &opts).unwrap();
        let d = a.f.rotate(alpha).max_abs_diff(&b.f);
        let resolved = a.degree_converged && b.degree_converged;
        let bound = if resolved { 1e-8 } else { 1e-8 + 10.0 * a.tail.max(b.tail) };
        prop_assert!(d < bound, "diff {d:e} p={p} tails {:e} {:e}", a.tail, b.tail);
        prop_assert!((a.phi_norm - b.phi_norm).abs() < 1e-10);
    }

    #[test]
    fn solutions_satisfy_sandwich_and_normalization(
        k in kernel_strategy(),
        p in prop::sample::select(vec![1.3, 2.0, 2.5, 4.0]),
    ) {
        let prob = ExtremalProblem::new(k.clone(), p).unwrap();
        let sol = solve_instance(&prob, &fixed(64)).unwrap();
        let quad = DiscQuadrature::for_degree(64 + k.degree());
        let norm = bergman_norm(&sol.f, p, &quad).unwrap();
        prop_assert!((norm - 1.0).abs() < 1e-9);
        let re_phi = phi_apply(&k, &sol.f).re;
        prop_assert!(re_phi > 0.0);
        prop_assert!((re_phi - sol.phi_norm).abs() < 10.0 * sol.residual.max(1e-9));
        let kq = bergman_norm(&k, prob.q, &DiscQuadrature::for_degree(4 * k.degree() + 16)).unwrap();
        prop_assert!(sol.phi_norm <= kq + 1e-8);
        prop_assert!(kq <= PI / (PI / p).sin() * sol.phi_norm);
    }
}

#[test]
fn monomial_family_has_closed_form() {
    let opts = SolverOptions::default();
    for p in [1.5, 2.0, 3.0, 4.0] {
        for n in 0..=4usize {
            let k = TaylorPolynomial::monomial(n, Complex64::new(1.0, 0.0));
            let sol = solve_instance(&ExtremalProblem::new(k, p).unwrap(), &opts).unwrap();
            let c = (n as f64 * p / 2.0 + 1.0).powf(1.0 / p);
            let expected = TaylorPolynomial::monomial(n, Complex64::new(c, 0.0));
            assert!(sol.f.max_abs_diff(&expected) < 1e-8, "p={p} n={n}");
            assert!((sol.phi_norm - c / (n + 1) as f64).abs() < 1e-8, "p={p} n={n}");
        }
    }
}

#[test]
fn nonconvergence_carries_the_solution() {
    let k = TaylorPolynomial::from_real(&[1.0, 1.0]);
    let opts = SolverOptions::default().with_degree(DegreeChoice::Fixed(4)).with_tol(1e-12);
    let prob = ExtremalProblem::new(k, 3.0).unwrap();
    match bergex::solve(&prob, &opts) {
        Err(bergex::Error::NonConvergence { residual, solution, .. }) => {
            assert!(residual > 1e-12);
            assert_eq!(solution.degree, 4);
            assert!(solution.phi_norm > 0.0);
        }
        other => panic!("expected NonConvergence, got {other:?}"),
    }
}
