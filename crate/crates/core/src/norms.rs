//! Hardy and Bergman norms by product quadrature on the disk.
//!
//! Radial integrals use the variable `s = |z|²`, in which the Bergman weight
//! becomes the Jacobi weight `(1 - s)^{α-2}`. Zeros of `f` make `|f|^p`
//! non-smooth, so the radial and angular rules are split into panels at the
//! moduli and arguments of the zeros.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{AnalyticFunction, PointwiseFunction};
use crate::geometry::SpaceParams;
use crate::levels::sup_u;
use crate::numeric::{compensated_sum, gauss_jacobi_unit, gauss_legendre_unit, KahanSum};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub radial_nodes: usize,
    pub angular_nodes: usize,
    /// Relative change between successive refinements that counts as converged.
    pub tolerance: f64,
    pub max_refinements: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            radial_nodes: 32,
            angular_nodes: 64,
            tolerance: 1e-10,
            max_refinements: 6,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.radial_nodes < 8 || self.angular_nodes < 8 {
            return Err(Error::InvalidParameter(
                "node counts must be at least 8".into(),
            ));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidParameter("tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Nodes and weights for `∫_0^1 (1 - s)^a mean_θ F(√s e^{iθ}) ds`.
#[derive(Debug, Clone)]
pub struct DiskRule {
    /// `(s, weight)`; weights include `(1 - s)^a`.
    pub radial: Vec<(f64, f64)>,
    /// `(e^{iθ}, weight)`; weights sum to one.
    pub angular: Vec<(Complex64, f64)>,
}

impl DiskRule {
    pub fn new(zeros: &[Complex64], a: f64, radial_nodes: usize, angular_nodes: usize) -> Self {
        Self {
            radial: radial_rule(zeros, a, radial_nodes),
            angular: angular_rule(zeros, angular_nodes),
        }
    }

    pub fn len(&self) -> usize {
        self.radial.len() * self.angular.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `h` receives the point `z` and `s = |z|²`.
    pub fn integrate<H>(&self, h: H) -> f64
    where
        H: Fn(Complex64, f64) -> f64 + Sync,
    {
        let circle = |&(s, w): &(f64, f64)| -> f64 {
            let r = s.sqrt();
            let mut acc = KahanSum::new();
            for &(e, v) in &self.angular {
                acc.add(v * h(e * r, s));
            }
            w * acc.value()
        };
        let parts: Vec<f64> = if self.len() >= 1 << 14 {
            self.radial.par_iter().map(circle).collect()
        } else {
            self.radial.iter().map(circle).collect()
        };
        compensated_sum(parts)
    }
}

fn radial_rule(zeros: &[Complex64], a: f64, n: usize) -> Vec<(f64, f64)> {
    let mut breaks: Vec<f64> = zeros
        .iter()
        .map(|z| z.norm_sqr())
        .filter(|&s| s > 1e-12 && s < 1.0 - 1e-9)
        .collect();
    breaks.sort_by(|x, y| x.partial_cmp(y).unwrap());
    breaks.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    let any_inside = zeros.iter().any(|z| z.norm_sqr() < 1.0 - 1e-9);
    if any_inside && breaks.is_empty() {
        // Zeros only at the origin: the substituted first panel handles them.
        breaks.push(0.5);
    }

    let mut out = Vec::with_capacity(n * (breaks.len() + 2));
    let legendre = gauss_legendre_unit(n);
    let weight = |s: f64| if a == 0.0 { 1.0 } else { (1.0 - s).powf(a) };
    let mut lo = 0.0;
    for (k, &hi) in breaks.iter().enumerate() {
        let h = hi - lo;
        for (&x, &w) in legendre.nodes.iter().zip(&legendre.weights) {
            let (y, dy) = smoothstep(x);
            if k == 0 {
                // s = hi·y² removes the |z|^p behaviour at the origin.
                let s = hi * y * y;
                out.push((s, w * 2.0 * hi * y * dy * weight(s)));
            } else {
                let s = lo + h * y;
                out.push((s, w * h * dy * weight(s)));
            }
        }
        lo = hi;
    }
    if !breaks.is_empty() {
        // Keep the zero away from the end of the Jacobi panel.
        let hi = 0.5 * (lo + 1.0);
        let h = hi - lo;
        for (&x, &w) in legendre.nodes.iter().zip(&legendre.weights) {
            let (y, dy) = smoothstep(x);
            let s = lo + h * y;
            out.push((s, w * h * dy * weight(s)));
        }
        lo = hi;
    }
    let jacobi = gauss_jacobi_unit(n, a);
    let h = 1.0 - lo;
    let scale = h.powf(a + 1.0);
    for (&x, &w) in jacobi.nodes.iter().zip(&jacobi.weights) {
        out.push((lo + h * x, w * scale));
    }
    out
}

/// `y = 3x² - 2x³` and `dy/dx`: clusters nodes at both panel ends, where
/// zeros of `f` make `|f|^p` non-smooth.
fn smoothstep(x: f64) -> (f64, f64) {
    (x * x * (3.0 - 2.0 * x), 6.0 * x * (1.0 - x))
}

fn angular_rule(zeros: &[Complex64], n: usize) -> Vec<(Complex64, f64)> {
    use std::f64::consts::PI;
    let mut cuts: Vec<f64> = zeros
        .iter()
        .filter(|z| z.norm() > 1e-9 && z.norm() < 1.5)
        .map(|z| z.arg().rem_euclid(2.0 * PI))
        .collect();
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-9);
    if cuts.is_empty() {
        return (0..n)
            .map(|k| {
                let th = 2.0 * PI * k as f64 / n as f64;
                (Complex64::from_polar(1.0, th), 1.0 / n as f64)
            })
            .collect();
    }
    let per_panel = n.div_ceil(cuts.len()).max(8);
    let legendre = gauss_legendre_unit(per_panel);
    let mut out = Vec::with_capacity(per_panel * cuts.len());
    for (k, &lo) in cuts.iter().enumerate() {
        let hi = if k + 1 < cuts.len() {
            cuts[k + 1]
        } else {
            cuts[0] + 2.0 * PI
        };
        let h = hi - lo;
        for (&x, &w) in legendre.nodes.iter().zip(&legendre.weights) {
            let (y, dy) = smoothstep(x);
            out.push((Complex64::from_polar(1.0, lo + h * y), w * h * dy / (2.0 * PI)));
        }
    }
    out
}

/// Points where `|f|^e` fails to be smooth: the zeros of `f`, unless `e` is
/// an even integer.
pub fn kinks(f: &AnalyticFunction, e: f64) -> Vec<Complex64> {
    if e.fract() == 0.0 && e % 2.0 == 0.0 {
        Vec::new()
    } else {
        f.zeros()
    }
}

/// `∫_0^1 (1 - s)^a mean_θ h(z, s) ds`, doubling both node counts until the
/// relative change drops below the tolerance.
pub fn integrate_disk<H>(
    kinks: &[Complex64],
    a: f64,
    cfg: &QuadratureConfig,
    h: H,
) -> Result<f64>
where
    H: Fn(Complex64, f64) -> f64 + Sync,
{
    cfg.validate()?;
    let mut previous = f64::NAN;
    for k in 0..=cfg.max_refinements {
        let rule = DiskRule::new(
            kinks,
            a,
            cfg.radial_nodes << k,
            cfg.angular_nodes << k,
        );
        let value = rule.integrate(&h);
        if k > 0 && (value - previous).abs() <= cfg.tolerance * value.abs().max(1e-300) {
            return Ok(value);
        }
        if k == cfg.max_refinements {
            return Err(Error::NonConvergence {
                refinements: k,
                previous,
                last: value,
            });
        }
        previous = value;
    }
    unreachable!()
}

fn abs_pow(v: Complex64, p: f64) -> f64 {
    if p == 2.0 {
        v.norm_sqr()
    } else {
        v.norm_sqr().powf(0.5 * p)
    }
}

/// Mean of `|f|^p` over the circle `|z| = r` (closed disk allowed).
pub fn circle_mean(f: &AnalyticFunction, p: f64, r: f64, cfg: &QuadratureConfig) -> Result<f64> {
    cfg.validate()?;
    let zeros = kinks(f, p);
    let mut previous = f64::NAN;
    for k in 0..=cfg.max_refinements {
        let rule = angular_rule(&zeros, cfg.angular_nodes << k);
        let value = compensated_sum(rule.iter().map(|&(e, w)| w * abs_pow(f.eval_closed(e * r), p)));
        if k > 0 && (value - previous).abs() <= cfg.tolerance * value.abs().max(1e-300) {
            return Ok(value);
        }
        if k == cfg.max_refinements {
            return Err(Error::NonConvergence {
                refinements: k,
                previous,
                last: value,
            });
        }
        previous = value;
    }
    unreachable!()
}

/// `‖f‖_{H^p}` from the boundary mean of `|f|^p`.
pub fn hardy_norm(f: &AnalyticFunction, p: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check_p(p)?;
    Ok(circle_mean(f, p, 1.0, cfg)?.powf(1.0 / p))
}

/// Hardy norm computed from the means on `r = 1 - 2^{-k}`, `k = 1..=levels`,
/// checking that they increase with `r`. Returns the boundary value and the
/// circle means.
pub fn hardy_norm_strict(
    f: &AnalyticFunction,
    p: f64,
    levels: usize,
    cfg: &QuadratureConfig,
) -> Result<(f64, Vec<f64>)> {
    check_p(p)?;
    let mut means = Vec::with_capacity(levels + 1);
    for k in 1..=levels {
        means.push(circle_mean(f, p, 1.0 - 0.5f64.powi(k as i32), cfg)?);
    }
    means.push(circle_mean(f, p, 1.0, cfg)?);
    for pair in means.windows(2) {
        if pair[1] < pair[0] * (1.0 - 10.0 * cfg.tolerance) {
            return Err(Error::Domain(format!(
                "circle means decrease with the radius: {} then {}",
                pair[0], pair[1]
            )));
        }
    }
    Ok((means.last().unwrap().powf(1.0 / p), means))
}

/// `‖f‖_{A^p_α}` for `α > 1`.
pub fn bergman_norm(f: &AnalyticFunction, sp: SpaceParams, cfg: &QuadratureConfig) -> Result<f64> {
    if sp.is_hardy() {
        return Err(Error::InvalidParameter(
            "Bergman norm needs alpha > 1".into(),
        ));
    }
    let p = sp.p();
    let alpha = sp.alpha();
    let value = integrate_disk(&kinks(f, p), alpha - 2.0, cfg, |z, _| {
        abs_pow(f.eval_closed(z), p)
    })?;
    Ok(((alpha - 1.0) * value).powf(1.0 / p))
}

pub fn norm(f: &AnalyticFunction, sp: SpaceParams, cfg: &QuadratureConfig) -> Result<f64> {
    if sp.is_hardy() {
        hardy_norm(f, sp.p(), cfg)
    } else {
        bergman_norm(f, sp, cfg)
    }
}

/// `‖f‖_{A^{rα}_α}` for each `α` (with `α = 1` the Hardy space `H^r`).
pub fn contraction_profile(
    f: &AnalyticFunction,
    r: f64,
    alphas: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Vec<f64>> {
    if alphas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("alphas must increase".into()));
    }
    alphas
        .iter()
        .map(|&alpha| norm(f, SpaceParams::new(r * alpha, alpha)?, cfg))
        .collect()
}

/// `‖f‖^p - sup_z |f(z)|^p (1 - |z|²)^α`; non-negative by the point-evaluation bound.
pub fn pointwise_bound_margin(
    f: &AnalyticFunction,
    sp: SpaceParams,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let n = norm(f, sp, cfg)?;
    let pf = PointwiseFunction::new(f.clone(), sp.p(), sp.alpha())?;
    let (t0, _) = sup_u(&pf);
    Ok(n.powf(sp.p()) - t0)
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("p must be positive, got {p}")))
    }
}
