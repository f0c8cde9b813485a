//! Binomial weights `c_β(n)`, the weighted coefficient inequality for `H^p`,
//! divisor-type weights `d_β(n)` and Dirichlet polynomials.

mod dirichlet;
mod divisor;

pub use dirichlet::{
    dirichlet_hp_norm, dirichlet_inequality_margin, BohrConfig, DirichletPolynomial, LineAverage,
    NormMethod, NormReport,
};
pub use divisor::{d_beta_table, smallest_prime_factors, DivisorWeightTable};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::function::{taylor_coeffs, AnalyticFunction};
use crate::norms::{hardy_norm, QuadratureConfig};

/// `c_β(0..=N)`, the Taylor coefficients of `(1 - x)^{-β}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffWeightTable {
    beta: f64,
    values: Vec<f64>,
}

impl CoeffWeightTable {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, n: usize) -> f64 {
        self.values[n]
    }
}

pub fn c_beta_table(beta: f64, n: usize) -> CoeffWeightTable {
    let mut values = Vec::with_capacity(n + 1);
    let mut c = 1.0;
    values.push(c);
    for k in 1..=n {
        let kf = k as f64;
        c *= (kf + beta - 1.0) / kf;
        values.push(c);
    }
    CoeffWeightTable { beta, values }
}

pub fn c_beta(beta: f64, n: usize) -> f64 {
    let mut c = 1.0;
    for k in 1..=n {
        let kf = k as f64;
        c *= (kf + beta - 1.0) / kf;
    }
    c
}

/// `Σ |a_n|² / c_{2/p}(n)`.
pub fn coeff_functional(a: &[Complex64], p: f64) -> f64 {
    let table = c_beta_table(2.0 / p, a.len().saturating_sub(1));
    crate::numeric::compensated_sum(
        a.iter()
            .zip(table.values())
            .map(|(c, w)| c.norm_sqr() / w),
    )
}

/// Target for the neglected part of the coefficient sum.
pub const COEFF_TAIL_TARGET: f64 = 1e-10;
const MAX_COEFF_TERMS: usize = 8192;

#[derive(Debug, Clone, PartialEq)]
pub struct CoeffMargin {
    pub norm_sq: f64,
    pub functional: f64,
    pub terms: usize,
    pub tail: f64,
}

impl CoeffMargin {
    pub fn margin(&self) -> f64 {
        self.norm_sq - self.functional
    }
}

/// `‖f‖²_{H^p} - Σ |a_n|²/c_{2/p}(n)`, with enough terms that the neglected
/// tail is below `COEFF_TAIL_TARGET`.
pub fn coeff_inequality_margin(
    f: &AnalyticFunction,
    p: f64,
    cfg: &QuadratureConfig,
) -> Result<CoeffMargin> {
    if !(p > 0.0 && p <= 2.0) {
        return Err(Error::InvalidParameter(format!(
            "coefficient inequality needs 0 < p <= 2, got {p}"
        )));
    }
    let norm = hardy_norm(f, p, cfg)?;
    let (functional, terms, tail) = match f.polynomial_coeffs() {
        Some(a) => (coeff_functional(&a, p), a.len(), 0.0),
        None => {
            let mut n = 32;
            loop {
                let a = taylor_coeffs(f, n)?;
                let table = c_beta_table(2.0 / p, n);
                let terms: Vec<f64> = a
                    .iter()
                    .zip(table.values())
                    .map(|(c, w)| c.norm_sqr() / w)
                    .collect();
                let tail = tail_estimate(&terms);
                if tail < COEFF_TAIL_TARGET {
                    break (crate::numeric::compensated_sum(terms), n + 1, tail);
                }
                if 2 * n > MAX_COEFF_TERMS {
                    return Err(Error::TailNotSummable {
                        terms: n + 1,
                        tail,
                        target: COEFF_TAIL_TARGET,
                    });
                }
                n *= 2;
            }
        }
    };
    Ok(CoeffMargin {
        norm_sq: norm * norm,
        functional,
        terms,
        tail,
    })
}

/// Geometric extrapolation of the sum beyond the last term, from the ratios
/// of the trailing terms.
fn tail_estimate(terms: &[f64]) -> f64 {
    let k = terms.len();
    if k < 9 {
        return f64::INFINITY;
    }
    let last = terms[k - 1];
    if terms[k - 8..].iter().all(|&t| t == 0.0) {
        return 0.0;
    }
    let mut q: f64 = 0.0;
    for pair in terms[k - 8..].windows(2) {
        if pair[0] > 0.0 {
            q = q.max(pair[1] / pair[0]);
        } else if pair[1] > 0.0 {
            return f64::INFINITY;
        }
    }
    if q >= 1.0 {
        return f64::INFINITY;
    }
    last * q / (1.0 - q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{DiskPoint, SpaceParams};

    #[test]
    fn c_beta_examples() {
        for n in 0..50 {
            assert_eq!(c_beta(1.0, n), 1.0);
            let want = (n + 1) as f64;
            assert!((c_beta(2.0, n) - want).abs() <= 1e-14 * want);
        }
        assert!((c_beta(2.0, 3) - 4.0).abs() < 1e-14);
        let table = c_beta_table(1.5, 30);
        for n in 0..=30 {
            assert_eq!(table.get(n), c_beta(1.5, n));
        }
        assert_eq!(table.get(0), 1.0);
    }

    #[test]
    fn generating_identity() {
        for &beta in &[0.5, 1.0, 1.5, 2.0, 4.0] {
            for &x in &[0.1f64, 0.4, 0.7] {
                let n = 400;
                let table = c_beta_table(beta, n);
                let partial: f64 = table
                    .values()
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c * x.powi(k as i32))
                    .sum();
                let exact = (1.0 - x).powf(-beta);
                assert!((partial - exact).abs() < 1e-10 * exact, "{beta} {x}");
            }
        }
    }

    #[test]
    fn functional_examples() {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        assert_eq!(coeff_functional(&[one], 1.0), 1.0);
        assert_eq!(coeff_functional(&[zero, one], 1.0), 0.5);
    }

    #[test]
    fn kernel_functional_is_one() {
        for &p in &[0.5, 1.0, 1.5, 2.0] {
            let sp = SpaceParams::hardy(p).unwrap();
            let f = AnalyticFunction::kernel(DiskPoint::new(0.4, -0.3).unwrap(), sp);
            let a = taylor_coeffs(&f, 200).unwrap();
            assert!((coeff_functional(&a, p) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn margin_examples() {
        let cfg = QuadratureConfig::default();
        let m = coeff_inequality_margin(&AnalyticFunction::constant(1.0), 1.0, &cfg).unwrap();
        assert!(m.margin().abs() < 1e-14);

        let f = AnalyticFunction::real_polynomial(&[1.0, 1.0]).unwrap();
        let m = coeff_inequality_margin(&f, 1.0, &cfg).unwrap();
        assert_eq!(m.functional, 1.5);
        let expected = (4.0 / std::f64::consts::PI).powi(2);
        assert!((m.norm_sq - expected).abs() < 1e-9, "{}", m.norm_sq);

        for &p in &[0.5, 1.0, 1.5] {
            let sp = SpaceParams::hardy(p).unwrap();
            let k = AnalyticFunction::kernel(DiskPoint::new(0.0, 0.8).unwrap(), sp);
            let m = coeff_inequality_margin(&k, p, &cfg).unwrap();
            assert!(m.margin().abs() < 1e-6, "p={p}: {m:?}");
            assert!(m.tail < COEFF_TAIL_TARGET);
        }
        assert!(coeff_inequality_margin(&f, 3.0, &cfg).is_err());
    }
}
