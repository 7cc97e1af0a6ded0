//! Seeded kernel corpora.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::poly::TaylorPolynomial;

pub const DEFAULT_SEED: u64 = 7;

/// Exponents of the standard sweep.
pub const CORPUS_P_VALUES: [f64; 6] = [1.3, 1.5, 2.0, 2.5, 3.0, 4.0];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusKernel {
    pub label: String,
    pub kernel: TaylorPolynomial,
}

/// Degree-`degree` polynomial with coefficients uniform in `[-1, 1]^2`.
pub fn random_kernel<R: Rng>(rng: &mut R, degree: usize) -> TaylorPolynomial {
    let coeffs = (0..=degree)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    TaylorPolynomial::new(coeffs)
}

pub fn seeded_kernel(seed: u64, degree: usize) -> TaylorPolynomial {
    random_kernel(&mut ChaCha8Rng::seed_from_u64(seed), degree)
}

/// `z^0, ..., z^max_n`.
pub fn monomial_kernels(max_n: usize) -> Vec<CorpusKernel> {
    (0..=max_n)
        .map(|n| CorpusKernel {
            label: format!("z^{n}"),
            kernel: TaylorPolynomial::monomial(n, Complex64::new(1.0, 0.0)),
        })
        .collect()
}

/// `count` kernels with degrees uniform in `1..=max_degree`.
pub fn random_kernels(seed: u64, count: usize, max_degree: usize) -> Vec<CorpusKernel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let degree = rng.gen_range(1..=max_degree.max(1));
            CorpusKernel { label: format!("rand{seed}-{i:02}"), kernel: random_kernel(&mut rng, degree) }
        })
        .collect()
}

/// The monomials `z^0..z^4` followed by 20 random kernels of degree at most 6.
pub fn standard_corpus(seed: u64) -> Vec<CorpusKernel> {
    let mut corpus = monomial_kernels(4);
    corpus.extend(random_kernels(seed, 20, 6));
    corpus
}
