//! Seeded random test functions.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::coefficients::DirichletPolynomial;
use crate::function::AnalyticFunction;

/// Independent stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `count` polynomials of degree uniform in `1..=max_degree` with
/// coefficients uniform in the unit square `[0, 1]²`. Polynomial `k` only
/// depends on `(seed, k)`.
pub fn random_polynomials(seed: u64, count: usize, max_degree: usize) -> Vec<AnalyticFunction> {
    (0..count as u64)
        .map(|k| {
            let mut rng = stream_rng(seed, k);
            let degree = rng.random_range(1..=max_degree.max(1));
            let coeffs = (0..=degree)
                .map(|_| Complex64::new(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)))
                .collect();
            AnalyticFunction::polynomial(coeffs).expect("random coefficients are finite")
        })
        .collect()
}

/// `count` Dirichlet polynomials of length uniform in `2..=max_len` with
/// coefficients uniform in `[-1, 1]²`.
pub fn random_dirichlet(seed: u64, count: usize, max_len: usize) -> Vec<DirichletPolynomial> {
    (0..count as u64)
        .map(|k| {
            let mut rng = stream_rng(seed ^ 0xd1c4_1e70, k);
            let n = rng.random_range(2..=max_len.max(2));
            let coeffs = (0..n)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            DirichletPolynomial::new(coeffs).expect("random coefficients are finite")
        })
        .collect()
}

/// Point uniform on the unit sphere of `R^n`.
pub fn unit_sphere<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n)
            .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// First 16 hex digits of the SHA-256 of `text`.
pub fn digest(text: &str) -> String {
    let hash = Sha256::digest(text.as_bytes());
    hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
}
