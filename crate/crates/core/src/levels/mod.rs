//! Superlevel sets of `u(z) = |f(z)|^a (1 - |z|²)^b`: their hyperbolic
//! measure `μ(t)`, the profile `t ↦ μ(t)`, `g(t) = t^{1/b}(μ(t) + 1)`, level
//! curve lengths and the norm identities expressed through `μ`.

pub mod cells;
mod contour;

pub use cells::{build_tree, polar_point, Cell, CellTag, CellTree, LevelConfig};
pub use contour::{extract_contour, Contour};

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::function::PointwiseFunction;
use crate::geometry::DiskPoint;

/// A non-negative function on the disk whose superlevel sets are measured.
pub trait ScalarField: Sync {
    fn value(&self, z: Complex64) -> f64;

    /// Largest `|z|²` at which the value can exceed `t`.
    fn radial_limit(&self, _t: f64) -> f64 {
        1.0 - 1e-12
    }
}

impl ScalarField for PointwiseFunction {
    fn value(&self, z: Complex64) -> f64 {
        PointwiseFunction::value(self, z)
    }

    fn radial_limit(&self, t: f64) -> f64 {
        self.working_s_max(t)
    }
}

/// Maximum of a field: polar grid scan followed by compass search from the
/// best grid points.
pub fn field_sup<F: ScalarField + ?Sized>(field: &F) -> (f64, Complex64) {
    const NR: usize = 64;
    const NT: usize = 128;
    let mut samples: Vec<(f64, Complex64)> = Vec::with_capacity(NR * NT + 1);
    samples.push((field.value(Complex64::new(0.0, 0.0)), Complex64::new(0.0, 0.0)));
    for i in 0..NR {
        let r = (i as f64 + 0.5) / NR as f64;
        for j in 0..NT {
            let z = Complex64::from_polar(r, 2.0 * PI * j as f64 / NT as f64);
            samples.push((field.value(z), z));
        }
    }
    samples.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut best = samples[0];
    for &(v0, z0) in samples.iter().take(6) {
        let (v, z) = compass(field, z0, v0, 1.0 / NR as f64);
        if v > best.0 {
            best = (v, z);
        }
    }
    best
}

fn compass<F: ScalarField + ?Sized>(field: &F, mut z: Complex64, mut v: f64, mut step: f64) -> (f64, Complex64) {
    let dirs = [
        Complex64::new(1.0, 0.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(0.0, -1.0),
        Complex64::new(0.5f64.sqrt(), 0.5f64.sqrt()),
        Complex64::new(-(0.5f64.sqrt()), 0.5f64.sqrt()),
        Complex64::new(0.5f64.sqrt(), -(0.5f64.sqrt())),
        Complex64::new(-(0.5f64.sqrt()), -(0.5f64.sqrt())),
    ];
    while step > 1e-10 {
        let mut moved = false;
        for d in dirs {
            let cand = z + d * step;
            if cand.norm_sqr() >= 1.0 {
                continue;
            }
            let cv = field.value(cand);
            if cv > v {
                v = cv;
                z = cand;
                moved = true;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    (v, z)
}

/// `t0 = max u` and a maximizer.
pub fn sup_u(pf: &PointwiseFunction) -> (f64, DiskPoint) {
    let (t0, z) = field_sup(pf);
    let point = DiskPoint::from_complex(z).unwrap_or(DiskPoint::ORIGIN);
    (t0, point)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuEstimate {
    pub value: f64,
    pub err: f64,
    /// Measure of the cells certified inside by sampling.
    pub lower: f64,
    /// `lower` plus the measure of the boundary cells.
    pub upper: f64,
}

impl MuEstimate {
    const ZERO: MuEstimate = MuEstimate {
        value: 0.0,
        err: 0.0,
        lower: 0.0,
        upper: 0.0,
    };

    fn from_tree(tree: &CellTree) -> Self {
        let (lower, upper) = tree.bracket();
        Self {
            value: tree.value,
            err: tree.err,
            lower,
            upper,
        }
    }
}

/// `μ(t)` for a general field, restricted to `{|z|² <= s_max}`.
pub fn mu_field<F: ScalarField + ?Sized>(field: &F, t: f64, cfg: &LevelConfig) -> Result<MuEstimate> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!(
            "superlevel measure is infinite for t = {t}"
        )));
    }
    let tree = build_tree(field, t, field.radial_limit(t), cfg, false);
    Ok(MuEstimate::from_tree(&tree))
}

pub fn mu(pf: &PointwiseFunction, t: f64, cfg: &LevelConfig) -> Result<MuEstimate> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!(
            "superlevel measure is infinite for t = {t}"
        )));
    }
    let (t0, _) = sup_u(pf);
    if t >= t0 {
        return Ok(MuEstimate::ZERO);
    }
    mu_field(pf, t, cfg)
}

/// `μ` sampled on `t_i = t0 · 2^{-i/2}`, `i = 1..=n`.
#[derive(Debug, Clone)]
pub struct LevelProfile {
    pub pf: PointwiseFunction,
    pub t0: f64,
    pub ts: Vec<f64>,
    pub mus: Vec<f64>,
    pub err: Vec<f64>,
}

pub fn level_profile(pf: &PointwiseFunction, n_levels: usize, cfg: &LevelConfig) -> Result<LevelProfile> {
    if n_levels < 8 {
        return Err(Error::InvalidParameter(format!(
            "a profile needs at least 8 levels, got {n_levels}"
        )));
    }
    let (t0, _) = sup_u(pf);
    if !(t0 > 0.0) {
        return Err(Error::ZeroFunction);
    }
    let ts: Vec<f64> = (1..=n_levels)
        .map(|i| t0 * 0.5f64.powf(0.5 * i as f64))
        .collect();
    let estimates = ts
        .par_iter()
        .map(|&t| mu_field(pf, t, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(LevelProfile {
        pf: pf.clone(),
        t0,
        mus: estimates.iter().map(|e| e.value).collect(),
        err: estimates.iter().map(|e| e.err).collect(),
        ts,
    })
}

impl LevelProfile {
    pub fn b(&self) -> f64 {
        self.pf.b
    }

    /// CSV with columns `t, mu, err, g`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Parse(e.to_string());
        w.write_record(["t", "mu", "err", "g"]).map_err(io)?;
        for (i, g) in g_of_t(self).into_iter().enumerate() {
            w.write_record([
                self.ts[i].to_string(),
                self.mus[i].to_string(),
                self.err[i].to_string(),
                g.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Parse(e.to_string()))
    }
}

pub fn g_of_t(profile: &LevelProfile) -> Vec<f64> {
    let inv_b = 1.0 / profile.b();
    profile
        .ts
        .iter()
        .zip(&profile.mus)
        .map(|(t, m)| t.powf(inv_b) * (m + 1.0))
        .collect()
}

/// Error of `g(t_i)` propagated from the error of `μ(t_i)`.
pub fn g_errors(profile: &LevelProfile) -> Vec<f64> {
    let inv_b = 1.0 / profile.b();
    profile
        .ts
        .iter()
        .zip(&profile.err)
        .map(|(t, e)| t.powf(inv_b) * e)
        .collect()
}

/// One adjacent-pair check: `margin >= -tolerance` passes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCheck {
    pub t: f64,
    pub margin: f64,
    pub tolerance: f64,
}

impl PairCheck {
    pub fn passes(&self) -> bool {
        self.margin >= -self.tolerance
    }
}

/// `g(t_{i+1}) - g(t_i)` for `t_i > t_{i+1}` (non-negative when `g` decreases),
/// judged against twice the propagated error.
pub fn monotone_checks(profile: &LevelProfile) -> Vec<PairCheck> {
    let g = g_of_t(profile);
    let e = g_errors(profile);
    (0..g.len().saturating_sub(1))
        .map(|i| PairCheck {
            t: profile.ts[i],
            margin: g[i + 1] - g[i],
            tolerance: 2.0 * (e[i] + e[i + 1]) + 1e-12 * g[i].abs(),
        })
        .collect()
}

/// `max(1/t - 1, 0) - μ(t)` at each level, for a function normalized in `H^p`
/// with `a = p`, `b = 1`.
pub fn weak_type_checks(profile: &LevelProfile, tol: f64) -> Vec<PairCheck> {
    profile
        .ts
        .iter()
        .zip(profile.mus.iter().zip(&profile.err))
        .map(|(&t, (&m, &e))| PairCheck {
            t,
            margin: (1.0 / t - 1.0).max(0.0) - m,
            tolerance: e + tol,
        })
        .collect()
}

pub fn weak_type_margin(profile: &LevelProfile) -> f64 {
    weak_type_checks(profile, 0.0)
        .iter()
        .map(|c| c.margin)
        .fold(f64::INFINITY, f64::min)
}

/// Finite-difference form of `-μ'(t) >= (1 + μ(t)) / (b t)`.
pub fn differential_checks(profile: &LevelProfile) -> Vec<PairCheck> {
    let b = profile.b();
    (0..profile.ts.len().saturating_sub(1))
        .map(|i| {
            let (t1, t2) = (profile.ts[i], profile.ts[i + 1]);
            let slope = (profile.mus[i] - profile.mus[i + 1]) / (t1 - t2);
            let bound = -(1.0 + profile.mus[i]) / (b * t1);
            PairCheck {
                t: t1,
                margin: bound - slope,
                tolerance: (profile.err[i] + profile.err[i + 1]) / (t1 - t2)
                    + 1e-9 * bound.abs(),
            }
        })
        .collect()
}

/// `‖f‖_{H^p}` from `t(μ(t) + 1)`, which increases to `‖f‖^p` as `t → 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardyFromLevels {
    /// `(sup_i t_i(μ_i + 1))^{1/p}`.
    pub sup: f64,
    /// The same at the smallest grid level.
    pub smallest: f64,
    /// Linear extrapolation of `t(μ + 1)` from the two smallest levels to
    /// `t = 0`; the approach is linear in `t` for functions smooth up to the
    /// circle.
    pub extrapolated: f64,
}

pub fn hardy_norm_from_levels(profile: &LevelProfile, p: f64) -> HardyFromLevels {
    let vals = g_of_t(profile);
    let sup = vals.iter().copied().fold(0.0, f64::max);
    let k = vals.len();
    let last = vals[k - 1];
    let (t1, t2) = (profile.ts[k - 2], profile.ts[k - 1]);
    let limit = last + (last - vals[k - 2]) * t2 / (t1 - t2);
    HardyFromLevels {
        sup: sup.powf(1.0 / p),
        smallest: last.powf(1.0 / p),
        extrapolated: limit.max(0.0).powf(1.0 / p),
    }
}

/// `‖f‖_{A^{pr}_r} = (r(r-1) ∫_0^{t0} μ(t) t^{r-1} dt)^{1/(pr)}`.
pub fn bergman_norm_from_levels(profile: &LevelProfile, p: f64, r: f64) -> Result<f64> {
    if !(r > 1.0) {
        return Err(Error::InvalidParameter(format!("need r > 1, got {r}")));
    }
    let integral = integrate_profile(
        profile,
        &[PowerPiece {
            lo: 0.0,
            hi: f64::INFINITY,
            coeff: 1.0,
            exponent: r - 1.0,
        }],
    )?;
    Ok((r * (r - 1.0) * integral).powf(1.0 / (p * r)))
}

/// `G'(t) = coeff · t^exponent` on `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerPiece {
    pub lo: f64,
    pub hi: f64,
    pub coeff: f64,
    pub exponent: f64,
}

fn power_integral(lo: f64, hi: f64, e: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    if (e + 1.0).abs() < 1e-14 {
        (hi / lo).ln()
    } else {
        (hi.powf(e + 1.0) - lo.powf(e + 1.0)) / (e + 1.0)
    }
}

/// `∫_0^{t0} μ(t) G'(t) dt` with `μ + 1` interpolated by a power of `t`
/// between grid levels (exact when `g` is constant), `μ(t0) = 0`, and the
/// tail below the grid continued with `μ + 1 = g(t_min) t^{-1/b}`.
pub fn integrate_profile(profile: &LevelProfile, pieces: &[PowerPiece]) -> Result<f64> {
    let b = profile.b();
    // Knots in decreasing t with values of μ + 1.
    let mut knots = vec![(profile.t0, 1.0)];
    knots.extend(profile.ts.iter().zip(&profile.mus).map(|(&t, &m)| (t, m + 1.0)));
    let mut total = crate::numeric::KahanSum::new();
    for pair in knots.windows(2) {
        let ((hi, m_hi), (lo, m_lo)) = (pair[0], pair[1]);
        let gamma = (m_lo / m_hi).ln() / (hi / lo).ln();
        let amp = m_hi * hi.powf(gamma);
        total.add(segment_integral(lo, hi, amp, gamma, pieces));
    }
    let &(t_min, m_min) = knots.last().unwrap();
    let gamma = 1.0 / b;
    let amp = m_min * t_min.powf(gamma);
    for piece in pieces {
        let hi = piece.hi.min(t_min);
        if piece.lo < hi && piece.exponent - gamma <= -1.0 {
            return Err(Error::Divergent(format!(
                "integrand behaves like t^{} near 0",
                piece.exponent - gamma
            )));
        }
    }
    total.add(segment_integral(0.0, t_min, amp, gamma, pieces));
    Ok(total.value())
}

/// `∫_lo^hi (amp t^{-γ} - 1) G'(t) dt`.
fn segment_integral(lo: f64, hi: f64, amp: f64, gamma: f64, pieces: &[PowerPiece]) -> f64 {
    let mut acc = 0.0;
    for piece in pieces {
        let a = lo.max(piece.lo);
        let b = hi.min(piece.hi);
        if a >= b {
            continue;
        }
        acc += piece.coeff
            * (amp * power_integral(a, b, piece.exponent - gamma)
                - power_integral(a, b, piece.exponent));
    }
    acc
}

/// Hyperbolic length of `{u = t}` and its polylines.
pub fn boundary_length(pf: &PointwiseFunction, t: f64, cfg: &LevelConfig) -> Result<Contour> {
    Ok(contour_and_measure(pf, t, cfg)?.0)
}

fn contour_and_measure<F: ScalarField + ?Sized>(
    field: &F,
    t: f64,
    cfg: &LevelConfig,
) -> Result<(Contour, MuEstimate)> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("level must be positive, got {t}")));
    }
    let tree = build_tree(field, t, field.radial_limit(t), cfg, true);
    let contour = extract_contour(field, &tree)?;
    Ok((contour, MuEstimate::from_tree(&tree)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Isoperimetric {
    pub length: f64,
    pub mu: f64,
    /// `|∂A|² - 4πμ - 4πμ²`.
    pub residual: f64,
}

impl Isoperimetric {
    pub fn relative(&self) -> f64 {
        self.residual / (self.length * self.length).max(f64::MIN_POSITIVE)
    }
}

pub fn isoperimetric_residual(pf: &PointwiseFunction, t: f64, cfg: &LevelConfig) -> Result<Isoperimetric> {
    isoperimetric_field(pf, t, cfg)
}

pub fn isoperimetric_field<F: ScalarField + ?Sized>(
    field: &F,
    t: f64,
    cfg: &LevelConfig,
) -> Result<Isoperimetric> {
    let (contour, m) = contour_and_measure(field, t, cfg)?;
    let l = contour.length;
    Ok(Isoperimetric {
        length: l,
        mu: m.value,
        residual: l * l - 4.0 * PI * m.value - 4.0 * PI * m.value * m.value,
    })
}
