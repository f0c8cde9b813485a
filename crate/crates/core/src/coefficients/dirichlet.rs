use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::divisor::{factorize, smallest_prime_factors};
use super::d_beta_table;
use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, gauss_legendre_unit, KahanSum};

/// `Σ_{n=1}^N a_n n^{-s}`; `coeffs[0]` is `a_1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletPolynomial {
    coeffs: Vec<Complex64>,
}

impl DirichletPolynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter(
                "Dirichlet polynomial needs at least one coefficient".into(),
            ));
        }
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::InvalidParameter("non-finite coefficient".into()));
        }
        Ok(Self { coeffs })
    }

    /// Builds from sparse `(n, a_n)` pairs; repeated indices add up.
    pub fn from_pairs(pairs: &[(usize, Complex64)]) -> Result<Self> {
        let n_max = pairs.iter().map(|&(n, _)| n).max().unwrap_or(0);
        if n_max == 0 || pairs.iter().any(|&(n, _)| n == 0) {
            return Err(Error::InvalidParameter(
                "Dirichlet indices start at 1".into(),
            ));
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n_max];
        for &(n, a) in pairs {
            coeffs[n - 1] += a;
        }
        Self::new(coeffs)
    }

    /// Reads `n,re,im` rows; a header line is allowed.
    pub fn from_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut pairs = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::Parse(e.to_string()))?;
            if record.len() != 3 {
                return Err(Error::Parse(format!(
                    "line {}: expected n,re,im",
                    line + 1
                )));
            }
            let n = match record[0].parse::<usize>() {
                Ok(n) => n,
                Err(_) if line == 0 => continue,
                Err(e) => return Err(Error::Parse(format!("line {}: {e}", line + 1))),
            };
            let re: f64 = record[1]
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: {e}", line + 1)))?;
            let im: f64 = record[2]
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: {e}", line + 1)))?;
            pairs.push((n, Complex64::new(re, im)));
        }
        Self::from_pairs(&pairs)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `a_n` for `n >= 1`.
    pub fn coeff(&self, n: usize) -> Complex64 {
        self.coeffs[n - 1]
    }

    /// `f(it) = Σ a_n e^{-i t ln n}`.
    pub fn eval_line(&self, t: f64) -> Complex64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, a)| a * Complex64::from_polar(1.0, -t * ((k + 1) as f64).ln()))
            .sum()
    }
}

/// Vertical-line averages `(1/2T) ∫_{-T}^{T} |f(it)|^p dt` over a schedule of `T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineAverage {
    pub schedule: Vec<f64>,
    /// Width of each Gauss–Legendre panel.
    pub panel: f64,
    pub nodes_per_panel: usize,
    /// Largest accepted relative change between the last two schedule entries.
    pub settle: f64,
}

impl Default for LineAverage {
    fn default() -> Self {
        Self {
            schedule: vec![1250.0, 2500.0, 5000.0, 10000.0],
            panel: 1.0,
            nodes_per_panel: 8,
            settle: 0.05,
        }
    }
}

/// Torus quadrature after the substitution `q^{-it} ↦ z_q` for primes `q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BohrConfig {
    /// Nodes per dimension are `base · (max exponent + 1)`; the base doubles.
    pub initial_base: usize,
    /// Stop refining once the total tensor grid would exceed this size.
    pub max_total_nodes: usize,
    pub rel_tol: f64,
    pub max_primes: usize,
}

impl Default for BohrConfig {
    fn default() -> Self {
        Self {
            initial_base: 4,
            max_total_nodes: 1 << 22,
            rel_tol: 1e-4,
            max_primes: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NormMethod {
    LineAverage(LineAverage),
    BohrLift(BohrConfig),
}

impl Default for NormMethod {
    fn default() -> Self {
        NormMethod::BohrLift(BohrConfig::default())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormReport {
    /// `‖f‖_{ℋ^p}`.
    pub value: f64,
    /// `(T or grid size, p-th power mean)` for each refinement.
    pub trend: Vec<(f64, f64)>,
    /// Relative change of the p-th power mean over the last refinement.
    pub stability: f64,
}

pub fn dirichlet_hp_norm(
    f: &DirichletPolynomial,
    p: f64,
    method: &NormMethod,
) -> Result<NormReport> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("p must be positive, got {p}")));
    }
    match method {
        NormMethod::LineAverage(cfg) => line_average(f, p, cfg),
        NormMethod::BohrLift(cfg) => bohr_lift(f, p, cfg),
    }
}

/// `‖f‖²_{ℋ^p} - Σ |a_n|² / d_{2/p}(n)` together with the norm report.
pub fn dirichlet_inequality_margin(
    f: &DirichletPolynomial,
    p: f64,
    method: &NormMethod,
) -> Result<(f64, NormReport)> {
    let report = dirichlet_hp_norm(f, p, method)?;
    let d = d_beta_table(2.0 / p, f.len());
    let functional = compensated_sum(
        f.coeffs
            .iter()
            .enumerate()
            .map(|(k, a)| a.norm_sqr() / d.get(k + 1)),
    );
    Ok((report.value * report.value - functional, report))
}

fn abs_pow(v: Complex64, p: f64) -> f64 {
    if p == 2.0 {
        v.norm_sqr()
    } else if p == 1.0 {
        v.norm()
    } else {
        v.norm_sqr().powf(0.5 * p)
    }
}

fn line_average(f: &DirichletPolynomial, p: f64, cfg: &LineAverage) -> Result<NormReport> {
    if cfg.schedule.is_empty()
        || cfg.schedule.windows(2).any(|w| w[1] <= w[0])
        || cfg.schedule[0] <= 0.0
    {
        return Err(Error::InvalidParameter(
            "T schedule must be positive and increasing".into(),
        ));
    }
    let rule = gauss_legendre_unit(cfg.nodes_per_panel.max(1));
    let logs: Vec<f64> = (1..=f.len()).map(|n| (n as f64).ln()).collect();
    let panel_integral = |a: f64, b: f64| -> f64 {
        let h = b - a;
        let mut acc = 0.0;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let t = a + h * x;
            let mut v = Complex64::new(0.0, 0.0);
            for (c, l) in f.coeffs.iter().zip(&logs) {
                v += c * Complex64::from_polar(1.0, -t * l);
            }
            acc += w * abs_pow(v, p);
        }
        acc * h
    };

    let mut total = KahanSum::new();
    let mut reached = 0.0;
    let mut trend = Vec::with_capacity(cfg.schedule.len());
    for &t_end in &cfg.schedule {
        let panels = ((t_end - reached) / cfg.panel).ceil().max(1.0) as usize;
        let h = (t_end - reached) / panels as f64;
        let pieces: Vec<f64> = (0..panels)
            .into_par_iter()
            .map(|k| {
                let a = reached + h * k as f64;
                panel_integral(a, a + h) + panel_integral(-a - h, -a)
            })
            .collect();
        for v in pieces {
            total.add(v);
        }
        reached = t_end;
        trend.push((t_end, total.value() / (2.0 * t_end)));
    }
    let stability = relative_change(&trend);
    if stability > cfg.settle {
        return Err(Error::LineAverageNonConvergence { trend });
    }
    let mean = trend.last().unwrap().1;
    Ok(NormReport {
        value: mean.powf(1.0 / p),
        trend,
        stability,
    })
}

fn relative_change(trend: &[(f64, f64)]) -> f64 {
    match trend {
        [.., (_, a), (_, b)] => (b - a).abs() / b.abs().max(f64::MIN_POSITIVE),
        _ => 0.0,
    }
}

struct Monomial {
    coeff: Complex64,
    exps: Vec<usize>,
}

fn bohr_lift(f: &DirichletPolynomial, p: f64, cfg: &BohrConfig) -> Result<NormReport> {
    let spf = smallest_prime_factors(f.len());
    let mut primes: Vec<usize> = Vec::new();
    let mut factored = Vec::new();
    for (k, a) in f.coeffs.iter().enumerate() {
        if a.norm_sqr() == 0.0 {
            continue;
        }
        let fac = factorize(k + 1, &spf);
        for &(q, _) in &fac {
            if !primes.contains(&q) {
                primes.push(q);
            }
        }
        factored.push((*a, fac));
    }
    primes.sort_unstable();
    if primes.len() > cfg.max_primes {
        return Err(Error::DimensionCap {
            primes: primes.len(),
            cap: cfg.max_primes,
        });
    }
    let dims = primes.len();
    let monomials: Vec<Monomial> = factored
        .into_iter()
        .map(|(coeff, fac)| {
            let mut exps = vec![0usize; dims];
            for (q, k) in fac {
                let j = primes.iter().position(|&x| x == q).unwrap();
                exps[j] = k as usize;
            }
            Monomial { coeff, exps }
        })
        .collect();
    if monomials.is_empty() {
        return Ok(NormReport {
            value: 0.0,
            trend: vec![],
            stability: 0.0,
        });
    }
    if dims == 0 {
        let v = abs_pow(monomials[0].coeff, p);
        return Ok(NormReport {
            value: v.powf(1.0 / p),
            trend: vec![(1.0, v)],
            stability: 0.0,
        });
    }
    let max_exp: Vec<usize> = (0..dims)
        .map(|j| monomials.iter().map(|m| m.exps[j]).max().unwrap())
        .collect();
    let grid_size = |base: usize| -> usize {
        max_exp
            .iter()
            .map(|k| base * (k + 1))
            .fold(1usize, |acc, m| acc.saturating_mul(m))
    };

    let mut base = cfg.initial_base.max(2);
    while base > 2 && grid_size(base) > cfg.max_total_nodes {
        base /= 2;
    }
    let mut trend = Vec::new();
    loop {
        let sizes: Vec<usize> = max_exp.iter().map(|k| base * (k + 1)).collect();
        let mean = torus_mean(&monomials, &sizes, p);
        trend.push((grid_size(base) as f64, mean));
        let stability = relative_change(&trend);
        let done = trend.len() >= 2 && stability < cfg.rel_tol;
        if done || grid_size(2 * base) > cfg.max_total_nodes {
            let stability = if trend.len() >= 2 { stability } else { f64::NAN };
            return Ok(NormReport {
                value: mean.powf(1.0 / p),
                trend,
                stability,
            });
        }
        base *= 2;
    }
}

/// Mean of `|F|^p` over the tensor trapezoid grid; parallel over the first
/// dimension, summed in index order.
fn torus_mean(monomials: &[Monomial], sizes: &[usize], p: f64) -> f64 {
    let dims = sizes.len();
    // tables[j][k][i] = exp(i k θ_i) on dimension j.
    let tables: Vec<Vec<Vec<Complex64>>> = (0..dims)
        .map(|j| {
            let m = sizes[j];
            let kmax = monomials.iter().map(|mono| mono.exps[j]).max().unwrap();
            (0..=kmax)
                .map(|k| {
                    (0..m)
                        .map(|i| {
                            let idx = (k * i) % m;
                            Complex64::from_polar(
                                1.0,
                                2.0 * std::f64::consts::PI * idx as f64 / m as f64,
                            )
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let inner: usize = sizes[1..].iter().product();
    let partials: Vec<f64> = (0..sizes[0])
        .into_par_iter()
        .map(|i0| {
            // Coefficients after fixing the first variable.
            let fixed: Vec<Complex64> = monomials
                .iter()
                .map(|m| m.coeff * tables[0][m.exps[0]][i0])
                .collect();
            let mut acc = KahanSum::new();
            let mut idx = vec![0usize; dims];
            for _ in 0..inner {
                let mut v = Complex64::new(0.0, 0.0);
                for (c, m) in fixed.iter().zip(monomials) {
                    let mut term = *c;
                    for j in 1..dims {
                        let e = m.exps[j];
                        if e > 0 {
                            term *= tables[j][e][idx[j]];
                        }
                    }
                    v += term;
                }
                acc.add(abs_pow(v, p));
                for j in 1..dims {
                    idx[j] += 1;
                    if idx[j] < sizes[j] {
                        break;
                    }
                    idx[j] = 0;
                }
            }
            acc.value()
        })
        .collect();
    compensated_sum(partials) / (sizes[0] * inner) as f64
}
