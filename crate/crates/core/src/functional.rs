//! Integral functionals `∫ G(u) dm` of `u = |f|^p (1 - |z|²)^α`.
//!
//! Two independent evaluations are provided: the level path integrates
//! `μ(t) dG(t)` over a level profile, the direct path integrates `G(u)`
//! against the hyperbolic measure by product quadrature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{AnalyticFunction, PointwiseFunction};
use crate::geometry::SpaceParams;
use crate::levels::{integrate_profile, level_profile, LevelConfig, LevelProfile, PowerPiece};
use crate::norms::{integrate_disk, kinks, QuadratureConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionalSpec {
    /// `G(t) = t^s`.
    Power { s: f64 },
    /// Continuous piecewise-linear `G` with `G(0) = 0`; `slopes[i]` applies on
    /// `[knots[i], knots[i + 1])`, the last slope up to infinity.
    PiecewiseLinear { knots: Vec<f64>, slopes: Vec<f64> },
    /// Samples of `G` on an increasing grid starting at 0, interpolated
    /// linearly and continued with the last slope. `G(0)` is subtracted.
    Tabulated {
        grid: Vec<f64>,
        values: Vec<f64>,
        is_increasing: bool,
        is_convex: bool,
    },
}

/// Validated functional in piecewise form.
#[derive(Debug, Clone, PartialEq)]
pub struct Functional {
    spec: FunctionalSpec,
    shape: Shape,
    is_increasing: bool,
    is_convex: bool,
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Power(f64),
    Linear { knots: Vec<f64>, slopes: Vec<f64> },
}

impl FunctionalSpec {
    pub fn power(s: f64) -> Self {
        FunctionalSpec::Power { s }
    }

    pub fn build(&self) -> Result<Functional> {
        Functional::new(self.clone())
    }
}

fn check_knots(knots: &[f64], slopes: &[f64]) -> Result<()> {
    if knots.is_empty() || knots.len() != slopes.len() {
        return Err(Error::InvalidParameter(
            "piecewise-linear functional needs one slope per knot".into(),
        ));
    }
    if knots[0] != 0.0 {
        return Err(Error::InvalidParameter("first knot must be 0".into()));
    }
    if knots.windows(2).any(|w| !(w[1] > w[0])) || knots.iter().any(|k| !k.is_finite()) {
        return Err(Error::InvalidParameter("knots must increase".into()));
    }
    if slopes.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidParameter("slopes must be finite".into()));
    }
    Ok(())
}

impl Functional {
    pub fn new(spec: FunctionalSpec) -> Result<Self> {
        let (shape, inc, cvx) = match &spec {
            FunctionalSpec::Power { s } => {
                if !(*s > 0.0 && s.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "power exponent must be positive, got {s}"
                    )));
                }
                (Shape::Power(*s), true, *s >= 1.0)
            }
            FunctionalSpec::PiecewiseLinear { knots, slopes } => {
                check_knots(knots, slopes)?;
                let inc = slopes.iter().all(|&s| s >= 0.0);
                let cvx = slopes.windows(2).all(|w| w[1] >= w[0]);
                let shape = Shape::Linear {
                    knots: knots.clone(),
                    slopes: slopes.clone(),
                };
                (shape, inc, cvx)
            }
            FunctionalSpec::Tabulated {
                grid,
                values,
                is_increasing,
                is_convex,
            } => {
                if grid.len() < 2 || grid.len() != values.len() {
                    return Err(Error::InvalidParameter(
                        "tabulated functional needs at least two matching samples".into(),
                    ));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidParameter("tabulated values must be finite".into()));
                }
                let slopes: Vec<f64> = grid
                    .windows(2)
                    .zip(values.windows(2))
                    .map(|(g, v)| (v[1] - v[0]) / (g[1] - g[0]))
                    .collect();
                let knots = grid[..grid.len() - 1].to_vec();
                check_knots(&knots, &slopes)?;
                if !(grid[grid.len() - 1] > grid[grid.len() - 2]) {
                    return Err(Error::InvalidParameter("grid must increase".into()));
                }
                let eps = 1e-12 * slopes.iter().fold(1.0f64, |m, s| m.max(s.abs()));
                if *is_increasing && slopes.iter().any(|&s| s < -eps) {
                    return Err(Error::InvalidParameter(
                        "tabulated values are flagged increasing but decrease".into(),
                    ));
                }
                if *is_convex && slopes.windows(2).any(|w| w[1] < w[0] - eps) {
                    return Err(Error::InvalidParameter(
                        "tabulated values are flagged convex but are not".into(),
                    ));
                }
                (Shape::Linear { knots, slopes }, *is_increasing, *is_convex)
            }
        };
        Ok(Self {
            spec,
            shape,
            is_increasing: inc,
            is_convex: cvx,
        })
    }

    pub fn spec(&self) -> &FunctionalSpec {
        &self.spec
    }

    pub fn is_increasing(&self) -> bool {
        self.is_increasing
    }

    pub fn is_convex(&self) -> bool {
        self.is_convex
    }

    /// `G(t)` for `t ≥ 0`.
    pub fn eval(&self, t: f64) -> f64 {
        match &self.shape {
            Shape::Power(s) => t.max(0.0).powf(*s),
            Shape::Linear { knots, slopes } => {
                let mut acc = 0.0;
                for (i, (&k, &slope)) in knots.iter().zip(slopes).enumerate() {
                    if t <= k {
                        break;
                    }
                    let end = knots.get(i + 1).map_or(t, |&next| next.min(t));
                    acc += slope * (end - k);
                }
                acc
            }
        }
    }

    /// `G'` as power-law pieces.
    pub fn derivative_pieces(&self) -> Vec<PowerPiece> {
        match &self.shape {
            Shape::Power(s) => vec![PowerPiece {
                lo: 0.0,
                hi: f64::INFINITY,
                coeff: *s,
                exponent: s - 1.0,
            }],
            Shape::Linear { knots, slopes } => knots
                .iter()
                .enumerate()
                .filter(|&(i, _)| slopes[i] != 0.0)
                .map(|(i, &k)| PowerPiece {
                    lo: k,
                    hi: knots.get(i + 1).copied().unwrap_or(f64::INFINITY),
                    coeff: slopes[i],
                    exponent: 0.0,
                })
                .collect(),
        }
    }

    /// Exponent `σ` with `G(t) ~ c t^σ` as `t → 0`; `None` when `G` vanishes
    /// on a neighbourhood of 0.
    pub fn small_t_exponent(&self) -> Option<f64> {
        match &self.shape {
            Shape::Power(s) => Some(*s),
            Shape::Linear { slopes, .. } => (slopes[0] != 0.0).then_some(1.0),
        }
    }

    /// `σ` for which `G(u) / (1 - |z|²)^{ασ}` stays bounded near the circle:
    /// the small-`t` exponent, or `2/α` when `G` vanishes near 0.
    pub fn weight_exponent(&self, alpha: f64) -> f64 {
        self.small_t_exponent().unwrap_or(2.0 / alpha)
    }

    /// Checks that `∫ μ dG` can be finite when `μ(t) ~ C t^{-1/b}` near 0,
    /// i.e. that `G(t) / t^{1/b} → 0`: analytically from the small-`t`
    /// exponent and numerically on a dyadic grid near 0.
    pub fn check_finite(&self, b: f64) -> Result<()> {
        let gamma = 1.0 / b;
        if let Some(sigma) = self.small_t_exponent() {
            if sigma <= gamma {
                return Err(Error::Divergent(format!(
                    "G(t) ~ t^{sigma} is not o(t^{gamma}) as t -> 0"
                )));
            }
        }
        let ratios: Vec<f64> = (20..24)
            .map(|k| {
                let t = 0.5f64.powi(k);
                (self.eval(t) / t.powf(gamma)).abs()
            })
            .collect();
        let vanishing = ratios.iter().all(|&r| r == 0.0)
            || (ratios.windows(2).all(|w| w[1] <= w[0]) && ratios[3] < ratios[0]);
        if !vanishing {
            return Err(Error::Divergent(format!(
                "G(t)/t^{gamma} does not decrease to 0 on the grid: {ratios:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalConfig {
    pub quad: QuadratureConfig,
    pub levels: LevelConfig,
    pub n_levels: usize,
}

impl Default for FunctionalConfig {
    fn default() -> Self {
        Self {
            quad: QuadratureConfig::default(),
            levels: LevelConfig::default(),
            n_levels: 24,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalValue {
    /// `∫ μ dG` from the level profile.
    pub value: f64,
    /// `∫ G(u) dm` by quadrature.
    pub direct: f64,
    /// `value - direct`.
    pub discrepancy: f64,
}

/// Direct quadrature of `∫ G(u) dm` with `dm = dA / (π (1 - |z|²)²)`.
///
/// With `σ` the small-`t` exponent of `G`, the factor `(1 - s)^{ασ - 2}` is
/// taken into the radial Jacobi weight.
pub fn functional_direct(
    f: &AnalyticFunction,
    g: &Functional,
    sp: SpaceParams,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let (p, alpha) = (sp.p(), sp.alpha());
    g.check_finite(alpha)?;
    let sigma = g.weight_exponent(alpha);
    let a = alpha * sigma - 2.0;
    match g.shape {
        Shape::Power(s) => integrate_disk(&kinks(f, p * s), a, cfg, |z, _| {
            f.eval_closed(z).norm_sqr().powf(0.5 * p * s)
        }),
        Shape::Linear { .. } => {
            // Kinks of G(u) slow the product rule down; settle for less.
            let mut cfg = *cfg;
            cfg.tolerance = cfg.tolerance.max(1e-6);
            integrate_disk(&f.zeros(), a, &cfg, |z, s| {
                let w = (1.0 - s).powf(alpha);
                let u = f.eval_closed(z).norm_sqr().powf(0.5 * p) * w;
                if w == 0.0 {
                    0.0
                } else {
                    g.eval(u) / w.powf(sigma)
                }
            })
        }
    }
}

/// `∫ μ dG` over a level profile of `u`.
pub fn functional_from_profile(profile: &LevelProfile, g: &Functional) -> Result<f64> {
    g.check_finite(profile.b())?;
    integrate_profile(profile, &g.derivative_pieces())
}

/// Value of the functional for `f` (assumed of norm one in `sp`), by the
/// level path, with the direct quadrature attached as a cross-check.
pub fn functional_value(
    f: &AnalyticFunction,
    g: &Functional,
    sp: SpaceParams,
    cfg: &FunctionalConfig,
) -> Result<FunctionalValue> {
    let pf = PointwiseFunction::new(f.clone(), sp.p(), sp.alpha())?;
    g.check_finite(sp.alpha())?;
    let profile = level_profile(&pf, cfg.n_levels, &cfg.levels)?;
    let value = functional_from_profile(&profile, g)?;
    let direct = functional_direct(f, g, sp, &cfg.quad)?;
    Ok(FunctionalValue {
        value,
        direct,
        discrepancy: value - direct,
    })
}

/// The value at `f ≡ 1`, in closed form where available.
pub fn constant_value(g: &Functional, sp: SpaceParams, cfg: &QuadratureConfig) -> Result<f64> {
    match g.shape {
        // ∫_0^1 (1 - s)^{αs - 2} ds.
        Shape::Power(s) => {
            g.check_finite(sp.alpha())?;
            Ok(1.0 / (sp.alpha() * s - 1.0))
        }
        Shape::Linear { .. } => functional_direct(&AnalyticFunction::constant(1.0), g, sp, cfg),
    }
}
