//! Multistart maximization of `∫ G(u) dm` over normalized polynomials.
//!
//! All candidates and the reference `f ≡ 1` are evaluated on the same fixed
//! product rule, so quadrature bias cancels in the reported gap. For even
//! integer exponents the integrands are polynomials in `z`, `z̄` and the
//! rule is exact.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::c_beta_table;
use crate::corpus::{stream_rng, unit_sphere};
use crate::error::{Error, Result};
use crate::function::horner;
use crate::functional::{Functional, FunctionalSpec};
use crate::geometry::SpaceParams;
use crate::nelder_mead::{minimize, NelderMeadConfig};
use crate::norms::{DiskRule, QuadratureConfig};

fn default_restarts() -> usize {
    20
}

fn default_tolerance() -> f64 {
    1e-5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchProblem {
    pub sp: SpaceParams,
    pub functional: FunctionalSpec,
    pub degree: usize,
    /// Node counts of the fixed rule; tolerance and refinements are unused.
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    /// Objective evaluations per restart.
    pub budget: usize,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default)]
    pub seed: u64,
    /// Largest acceptable `best - reference`.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

impl SearchProblem {
    pub fn validate(&self) -> Result<()> {
        if self.degree < 1 {
            return Err(Error::InvalidParameter("degree must be at least 1".into()));
        }
        if self.budget < 100 {
            return Err(Error::InvalidParameter("budget must be at least 100".into()));
        }
        if self.restarts < 20 {
            return Err(Error::InvalidParameter("at least 20 restarts are required".into()));
        }
        self.quadrature.validate()
    }
}

/// Objective on a fixed rule: normalize, then integrate `G(u)`.
pub struct Evaluator {
    sp: SpaceParams,
    g: Functional,
    /// Exponent `σ` with `G(t) ~ t^σ`; `(1 - s)^{ασ - 2}` is in the weights.
    sigma: f64,
    rule: DiskRule,
    norm_rule: DiskRule,
}

impl Evaluator {
    pub fn new(sp: SpaceParams, g: &FunctionalSpec, quad: &QuadratureConfig) -> Result<Self> {
        quad.validate()?;
        let g = g.build()?;
        g.check_finite(sp.alpha())?;
        let sigma = g.weight_exponent(sp.alpha());
        let (nr, na) = (quad.radial_nodes, quad.angular_nodes);
        let rule = DiskRule::new(&[], sp.alpha() * sigma - 2.0, nr, na);
        let norm_rule = if sp.is_hardy() {
            // Only the angular part is used, on the unit circle.
            DiskRule::new(&[], 0.0, 1, na)
        } else {
            DiskRule::new(&[], sp.alpha() - 2.0, nr, na)
        };
        Ok(Self {
            sp,
            g,
            sigma,
            rule,
            norm_rule,
        })
    }

    /// `‖f‖^p` on the fixed rule.
    pub fn norm_pow(&self, coeffs: &[Complex64]) -> f64 {
        let p = self.sp.p();
        let abs_p = |z: Complex64| horner(coeffs, z).norm_sqr().powf(0.5 * p);
        if self.sp.is_hardy() {
            self.norm_rule.angular.iter().map(|&(e, w)| w * abs_p(e)).sum()
        } else {
            (self.sp.alpha() - 1.0) * self.norm_rule.integrate(|z, _| abs_p(z))
        }
    }

    /// `∫ G(u) dm` for `f / ‖f‖`.
    pub fn value(&self, coeffs: &[Complex64]) -> Result<f64> {
        let np = self.norm_pow(coeffs);
        if !(np > 0.0) {
            return Err(Error::ZeroFunction);
        }
        let (p, alpha) = (self.sp.p(), self.sp.alpha());
        Ok(match self.g.spec() {
            FunctionalSpec::Power { s } => {
                let s = *s;
                self.rule
                    .integrate(|z, _| horner(coeffs, z).norm_sqr().powf(0.5 * p * s))
                    / np.powf(s)
            }
            _ => self.rule.integrate(|z, s| {
                let w = (1.0 - s).powf(alpha);
                if w == 0.0 {
                    return 0.0;
                }
                let u = horner(coeffs, z).norm_sqr().powf(0.5 * p) * w / np;
                self.g.eval(u) / w.powf(self.sigma)
            }),
        })
    }
}

fn to_complex(x: &[f64]) -> Vec<Complex64> {
    x.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect()
}

/// The objective for one coefficient vector (convenience wrapper).
pub fn objective(coeffs: &[Complex64], problem: &SearchProblem) -> Result<f64> {
    Evaluator::new(problem.sp, &problem.functional, &problem.quadrature)?.value(coeffs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartTrace {
    pub restart: usize,
    pub value: f64,
    pub gap: f64,
    pub evals: usize,
    pub converged: bool,
    /// Distance of the normalized coefficients to the kernel orbit.
    pub orbit_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub best_value: f64,
    /// Value at `f ≡ 1` on the same rule.
    pub reference_value: f64,
    pub gap: f64,
    /// Coefficients of the best candidate, normalized in the space.
    pub best_coeffs: Vec<Complex64>,
    /// Some restart ran out of budget before converging.
    pub partial: bool,
    pub trace: Vec<RestartTrace>,
}

impl SearchReport {
    /// Largest gap among restarts farther than `threshold` from the kernel
    /// orbit, if any.
    pub fn best_off_orbit_gap(&self, threshold: f64) -> Option<f64> {
        self.trace
            .iter()
            .filter(|t| t.orbit_distance > threshold)
            .map(|t| t.gap)
            .reduce(f64::max)
    }

    /// CSV of the per-restart trace.
    pub fn write_trace_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Parse(e.to_string());
        w.write_record(["restart", "value", "gap", "evals", "converged", "orbit_distance"])
            .map_err(io)?;
        for t in &self.trace {
            w.write_record([
                t.restart.to_string(),
                t.value.to_string(),
                t.gap.to_string(),
                t.evals.to_string(),
                t.converged.to_string(),
                t.orbit_distance.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Parse(e.to_string()))
    }
}

pub fn multistart_search(problem: &SearchProblem) -> Result<SearchReport> {
    problem.validate()?;
    let eval = Evaluator::new(problem.sp, &problem.functional, &problem.quadrature)?;
    let reference = eval.value(&[Complex64::new(1.0, 0.0)])?;
    let dim = 2 * (problem.degree + 1);
    let nm = NelderMeadConfig {
        max_evals: problem.budget,
        ..Default::default()
    };
    let runs: Vec<(Vec<Complex64>, f64, usize, bool)> = (0..problem.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(problem.seed, r as u64);
            let x0 = unit_sphere(&mut rng, dim);
            let res = minimize(
                |x| match eval.value(&to_complex(x)) {
                    Ok(v) => -v,
                    Err(_) => f64::INFINITY,
                },
                &x0,
                &nm,
            );
            let mut coeffs = to_complex(&res.x);
            let scale = eval.norm_pow(&coeffs).powf(-1.0 / problem.sp.p());
            for c in &mut coeffs {
                *c *= scale;
            }
            (coeffs, -res.value, res.evals, res.converged)
        })
        .collect();
    let trace: Vec<RestartTrace> = runs
        .iter()
        .enumerate()
        .map(|(r, (coeffs, value, evals, converged))| RestartTrace {
            restart: r,
            value: *value,
            gap: value - reference,
            evals: *evals,
            converged: *converged,
            orbit_distance: kernel_orbit_distance(coeffs, problem.sp),
        })
        .collect();
    let best = (0..runs.len())
        .reduce(|a, b| if runs[b].1 > runs[a].1 { b } else { a })
        .unwrap();
    Ok(SearchReport {
        best_value: runs[best].1,
        reference_value: reference,
        gap: runs[best].1 - reference,
        best_coeffs: runs[best].0.clone(),
        partial: runs.iter().any(|r| !r.3),
        trace,
    })
}

fn unit(v: &[Complex64]) -> Vec<Complex64> {
    let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    v.iter().map(|c| c / n).collect()
}

/// `√(2 - 2 |⟨a, k_w⟩|)` for unit vectors, minimized over `w`: the truncated
/// kernel `k_w(n) = c_β(n) wⁿ`, `β = 2α/p`, is scanned on a 32 × 32 polar
/// grid of `|w| ≤ 0.95` and the best grid point polished by a local simplex.
pub fn kernel_orbit_distance(coeffs: &[Complex64], sp: SpaceParams) -> f64 {
    let a = unit(coeffs);
    let table = c_beta_table(sp.kernel_exponent(), a.len());
    let dist = |w: Complex64| -> f64 {
        if w.norm() >= 0.999 {
            return 2f64.sqrt();
        }
        let mut pow = Complex64::new(1.0, 0.0);
        let k: Vec<Complex64> = (0..a.len())
            .map(|n| {
                let v = pow * table.get(n);
                pow *= w;
                v
            })
            .collect();
        let k = unit(&k);
        let inner: Complex64 = a.iter().zip(&k).map(|(x, y)| x * y.conj()).sum();
        (2.0 - 2.0 * inner.norm()).max(0.0).sqrt()
    };
    let mut best = (dist(Complex64::new(0.0, 0.0)), Complex64::new(0.0, 0.0));
    for i in 1..32 {
        let r = 0.95 * i as f64 / 31.0;
        for j in 0..32 {
            let w = Complex64::from_polar(r, 2.0 * std::f64::consts::PI * j as f64 / 32.0);
            let d = dist(w);
            if d < best.0 {
                best = (d, w);
            }
        }
    }
    let polish = minimize(
        |x| dist(Complex64::new(x[0], x[1])),
        &[best.1.re, best.1.im],
        &NelderMeadConfig {
            initial_step: 0.02,
            max_evals: 400,
            f_tol: 1e-14,
            max_restarts: 1,
        },
    );
    polish.value.min(best.0)
}

/// Largest `objective(f0 + ε d) - objective(f0)` over `n_dirs` random
/// directions `d` (scaled to the coefficient norm of `f0`) and the given `ε`.
pub fn perturbation_test(
    f0: &[Complex64],
    problem: &SearchProblem,
    n_dirs: usize,
    eps_schedule: &[f64],
    seed: u64,
) -> Result<f64> {
    let mut coeffs = f0.to_vec();
    coeffs.resize(coeffs.len().max(problem.degree + 1), Complex64::new(0.0, 0.0));
    let eval = Evaluator::new(problem.sp, &problem.functional, &problem.quadrature)?;
    let base = eval.value(&coeffs)?;
    let scale = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let gains = (0..n_dirs)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(seed, k as u64);
            let d = to_complex(&unit_sphere(&mut rng, 2 * coeffs.len()));
            eps_schedule
                .iter()
                .map(|&eps| {
                    let trial: Vec<Complex64> = coeffs
                        .iter()
                        .zip(&d)
                        .map(|(c, dc)| c + dc * (eps * scale))
                        .collect();
                    Ok(eval.value(&trial)? - base)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(gains
        .into_iter()
        .flatten()
        .fold(f64::NEG_INFINITY, f64::max))
}
