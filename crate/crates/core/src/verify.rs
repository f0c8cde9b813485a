//! Invariant suites behind `ke verify`.
//!
//! Every suite returns one [`Row`] per check. A row passes when
//! `margin >= -tolerance` (strict rows need `margin > 0`), so the margin is
//! always oriented so that larger is better.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::{
    c_beta_table, coeff_inequality_margin, d_beta_table, dirichlet_hp_norm,
    dirichlet_inequality_margin, LineAverage, NormMethod,
};
use crate::corpus::{digest, random_dirichlet, random_polynomials, stream_rng};
use crate::error::{Error, Result};
use crate::function::{mobius_shift, normalize, AnalyticFunction, PointwiseFunction};
use crate::functional::{functional_direct, FunctionalSpec};
use crate::geometry::{DiskPoint, SpaceParams};
use crate::levels::{
    bergman_norm_from_levels, differential_checks, hardy_norm_from_levels, isoperimetric_residual, level_profile, monotone_checks, sup_u,
    weak_type_checks, Isoperimetric, LevelConfig,
};
use crate::norms::{contraction_profile, hardy_norm, norm, pointwise_bound_margin, QuadratureConfig};
use crate::reduction::{
    a_of, c_prime, c_prime_check, lemma_counterexample_search, non_monotone_example,
    profile_reduction_integral, random_weaker_step, weaker_condition_exact, EnvelopeParams,
    StepFunction,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Monotone,
    Weaktype,
    Contraction,
    Functional,
    Isoperimetric,
    Lemma,
    Coeff,
    Dirichlet,
    All,
}

impl Suite {
    pub const EACH: [Suite; 8] = [
        Suite::Monotone,
        Suite::Weaktype,
        Suite::Contraction,
        Suite::Functional,
        Suite::Isoperimetric,
        Suite::Lemma,
        Suite::Coeff,
        Suite::Dirichlet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Monotone => "monotone",
            Suite::Weaktype => "weaktype",
            Suite::Contraction => "contraction",
            Suite::Functional => "functional",
            Suite::Isoperimetric => "isoperimetric",
            Suite::Lemma => "lemma",
            Suite::Coeff => "coeff",
            Suite::Dirichlet => "dirichlet",
            Suite::All => "all",
        }
    }

    /// The suites to run, `All` expanded.
    pub fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => Suite::EACH.to_vec(),
            s => vec![s],
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::EACH
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown suite {s:?}")))
    }
}

/// Level-set settings for the suites: coarser than the library default, with
/// errors that are still propagated into every tolerance.
pub fn suite_levels() -> LevelConfig {
    LevelConfig {
        init_radial: 8,
        init_angular: 16,
        min_depth: 1,
        rel_tol: 1e-5,
        ..LevelConfig::default()
    }
}

fn default_seed() -> u64 {
    42
}
fn default_corpus() -> usize {
    50
}
fn default_degree() -> usize {
    10
}
fn default_n_levels() -> usize {
    12
}
fn default_levels() -> LevelConfig {
    suite_levels()
}

/// Everything a verification run depends on. The worker count is not part of
/// it: reports do not depend on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Replaces the tolerance of every check.
    #[serde(default)]
    pub tol: Option<f64>,
    /// Random polynomials per suite.
    #[serde(default = "default_corpus")]
    pub corpus_size: usize,
    #[serde(default = "default_degree")]
    pub max_degree: usize,
    /// Levels per profile, `t_i = t0 · 2^{-i/2}`.
    #[serde(default = "default_n_levels")]
    pub n_levels: usize,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default = "default_levels")]
    pub levels: LevelConfig,
    /// Run the function-based suites on this function instead of the corpus.
    #[serde(default)]
    pub f: Option<AnalyticFunction>,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.corpus_size == 0 || self.max_degree == 0 {
            return Err(Error::InvalidParameter(
                "corpus size and degree must be positive".into(),
            ));
        }
        if let Some(t) = self.tol {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::InvalidParameter(format!("bad tolerance {t}")));
            }
        }
        if self.n_levels < 8 {
            return Err(Error::InvalidParameter("need at least 8 levels".into()));
        }
        self.quadrature.validate()
    }

    fn corpus(&self) -> Vec<AnalyticFunction> {
        match &self.f {
            Some(f) => vec![f.clone()],
            None => random_polynomials(self.seed, self.corpus_size, self.max_degree),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub suite: &'static str,
    pub check: &'static str,
    /// First 16 hex digits of the SHA-256 of the input description.
    pub inputs: String,
    pub margin: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip)]
    strict: bool,
}

impl Row {
    fn judge(&mut self) {
        self.pass = if self.strict {
            self.margin > 0.0
        } else {
            self.margin >= -self.tolerance
        };
    }
}

struct Rows {
    suite: Suite,
    rows: Vec<Row>,
}

impl Rows {
    fn new(suite: Suite) -> Self {
        Self {
            suite,
            rows: Vec::new(),
        }
    }

    fn add(&mut self, check: &'static str, inputs: &str, margin: f64, tolerance: f64) {
        self.push(check, inputs, margin, tolerance, false);
    }

    /// Passes only for a positive margin.
    fn strict(&mut self, check: &'static str, inputs: &str, margin: f64) {
        self.push(check, inputs, margin, 0.0, true);
    }

    /// `|value - exact| <= tolerance`.
    fn close(&mut self, check: &'static str, inputs: &str, value: f64, exact: f64, tolerance: f64) {
        self.add(check, inputs, -(value - exact).abs(), tolerance);
    }

    fn push(&mut self, check: &'static str, inputs: &str, margin: f64, tolerance: f64, strict: bool) {
        let mut row = Row {
            suite: self.suite.name(),
            check,
            inputs: digest(inputs),
            margin,
            tolerance,
            pass: false,
            strict,
        };
        row.judge();
        self.rows.push(row);
    }
}

/// Runs the suites in order.
pub fn run_suites(suite: Suite, cfg: &RunConfig) -> Result<Vec<Row>> {
    let mut out = Vec::new();
    for s in suite.expand() {
        out.extend(run_suite(s, cfg)?);
    }
    Ok(out)
}

pub fn run_suite(suite: Suite, cfg: &RunConfig) -> Result<Vec<Row>> {
    cfg.validate()?;
    let mut rows = Rows::new(suite);
    match suite {
        Suite::Monotone => monotone(cfg, &mut rows)?,
        Suite::Weaktype => weaktype(cfg, &mut rows)?,
        Suite::Contraction => contraction(cfg, &mut rows)?,
        Suite::Functional => functional(cfg, &mut rows)?,
        Suite::Isoperimetric => isoperimetric(cfg, &mut rows)?,
        Suite::Lemma => lemma(cfg, &mut rows)?,
        Suite::Coeff => coeff(cfg, &mut rows)?,
        Suite::Dirichlet => dirichlet(cfg, &mut rows)?,
        Suite::All => return run_suites(Suite::All, cfg),
    }
    let mut rows = rows.rows;
    override_tolerance(&mut rows, cfg.tol);
    Ok(rows)
}

fn override_tolerance(rows: &mut [Row], tol: Option<f64>) {
    if let Some(t) = tol {
        for r in rows {
            r.tolerance = t;
            r.judge();
        }
    }
}

/// CSV with columns `suite, check, inputs, margin, tolerance, pass`.
pub fn write_report<W: Write>(rows: &[Row], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Parse(e.to_string());
    w.write_record(["suite", "check", "inputs", "margin", "tolerance", "pass"])
        .map_err(io)?;
    for r in rows {
        w.write_record([
            r.suite.to_string(),
            r.check.to_string(),
            r.inputs.clone(),
            r.margin.to_string(),
            r.tolerance.to_string(),
            r.pass.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))
}

fn point(re: f64, im: f64) -> DiskPoint {
    DiskPoint::new(re, im).expect("fixed points lie in the disk")
}

fn sp(p: f64, alpha: f64) -> SpaceParams {
    SpaceParams::new(p, alpha).expect("fixed space parameters are valid")
}

const KERNEL_POINTS: [(f64, f64); 4] = [(0.0, 0.0), (0.3, 0.0), (0.0, 0.5), (-0.6, 0.2)];

fn monotone(cfg: &RunConfig, rows: &mut Rows) -> Result<()> {
    let corpus = cfg.corpus();
    let pairs = [(1.0, 1.0), (2.0, 1.0), (2.0, 2.0), (3.0, 1.5)];
    let jobs: Vec<(&AnalyticFunction, f64, f64)> = corpus
        .iter()
        .flat_map(|f| pairs.iter().map(move |&(a, b)| (f, a, b)))
        .collect();
    let profiles = jobs
        .par_iter()
        .map(|&(f, a, b)| level_profile(&PointwiseFunction::new(f.clone(), a, b)?, cfg.n_levels, &cfg.levels))
        .collect::<Result<Vec<_>>>()?;
    for (&(f, a, b), profile) in jobs.iter().zip(&profiles) {
        for c in monotone_checks(profile) {
            rows.add("g_nonincreasing", &format!("{f}|a={a}|b={b}|t={}", c.t), c.margin, c.tolerance);
        }
        // The first pair straddles the region near the maximum.
        for c in differential_checks(profile).into_iter().skip(1) {
            rows.add("mu_slope", &format!("{f}|a={a}|b={b}|t={}", c.t), c.margin, c.tolerance);
        }
    }
    Ok(())
}

fn weaktype(cfg: &RunConfig, rows: &mut Rows) -> Result<()> {
    let ps = [0.5, 1.0, 2.0, 3.0];
    let mut jobs: Vec<(AnalyticFunction, f64, bool)> = Vec::new();
    for f in cfg.corpus() {
        for &p in &ps {
            jobs.push((normalize(&f, SpaceParams::hardy(p)?, &cfg.quadrature)?, p, false));
        }
    }
    for &(re, im) in &KERNEL_POINTS {
        for &p in &ps {
            jobs.push((AnalyticFunction::kernel(point(re, im), SpaceParams::hardy(p)?), p, true));
        }
    }
    let q = &cfg.quadrature;
    let results = jobs
        .par_iter()
        .map(|(f, p, _)| {
            let pf = PointwiseFunction::new(f.clone(), *p, 1.0)?;
            let profile = level_profile(&pf, cfg.n_levels, &cfg.levels)?;
            // Norms rebuilt from the levels, with their quadrature values.
            let hardy = (hardy_norm_from_levels(&profile, *p).extrapolated, hardy_norm(f, *p, q)?);
            let bergman = (
                bergman_norm_from_levels(&profile, *p, 2.0)?,
                norm(f, SpaceParams::new(2.0 * p, 2.0)?, q)?,
            );
            Ok((profile, hardy, bergman))
        })
        .collect::<Result<Vec<_>>>()?;
    for ((f, p, kernel), (profile, hardy, bergman)) in jobs.iter().zip(&results) {
        for c in weak_type_checks(profile, 1e-6) {
            let inputs = format!("{f}|p={p}|t={}", c.t);
            if *kernel {
                rows.close("kernel_weak_type_equality", &inputs, c.margin, 0.0, 1e-4);
            } else {
                rows.add("weak_type", &inputs, c.margin, c.tolerance);
            }
        }
        let inputs = format!("{f}|p={p}");
        rows.add("hardy_norm_from_levels", &inputs, 0.02 - (hardy.0 / hardy.1 - 1.0).abs(), 0.0);
        let inputs = format!("{f}|p={}|alpha=2", 2.0 * p);
        rows.add("bergman_norm_from_levels", &inputs, 0.02 - (bergman.0 / bergman.1 - 1.0).abs(), 0.0);
    }
    Ok(())
}

fn contraction(cfg: &RunConfig, rows: &mut Rows) -> Result<()> {
    let corpus = cfg.corpus();
    let q = &cfg.quadrature;
    let alphas = [1.0, 1.25, 1.5, 2.0, 3.0, 4.0];
    let rs = [0.5, 1.0, 2.0];
    let jobs: Vec<(&AnalyticFunction, f64)> = corpus
        .iter()
        .flat_map(|f| rs.iter().map(move |&r| (f, r)))
        .collect();
    let profiles = jobs
        .par_iter()
        .map(|&(f, r)| contraction_profile(f, r, &alphas, q))
        .collect::<Result<Vec<_>>>()?;
    for (&(f, r), norms) in jobs.iter().zip(&profiles) {
        for i in 0..alphas.len() - 1 {
            let inputs = format!("{f}|r={r}|alpha={}", alphas[i]);
            rows.add("norm_nonincreasing", &inputs, norms[i] - norms[i + 1], 1e-6);
        }
    }

    let z = AnalyticFunction::identity();
    let anchors = [(1.0, 1.0), (2.0, 0.5f64.sqrt()), (4.0, 0.1f64.powf(0.25))];
    let norms = contraction_profile(&z, 1.0, &[1.0, 2.0, 4.0], q)?;
    for (&(alpha, exact), value) in anchors.iter().zip(norms) {
        rows.close("identity_norm_anchor", &format!("{z}|r=1|alpha={alpha}"), value, exact, 1e-6);
    }

    // Möbius shifts are isometries.
    let spaces = [sp(2.0, 1.0), sp(1.0, 2.0), sp(2.0, 2.0), sp(3.0, 1.5)];
    let shifts: Vec<(&AnalyticFunction, DiskPoint, SpaceParams)> = corpus
        .iter()
        .take(20)
        .enumerate()
        .map(|(k, f)| {
            let mut rng = stream_rng(cfg.seed, 1000 + k as u64);
            let w = DiskPoint::from_polar(0.5 * rng.random::<f64>().sqrt(), 2.0 * PI * rng.random::<f64>())
                .expect("radius below one");
            (f, w, spaces[k % spaces.len()])
        })
        .collect();
    let diffs = shifts
        .par_iter()
        .map(|&(f, w, s)| Ok((norm(&mobius_shift(f, w, s), s, q)?, norm(f, s, q)?)))
        .collect::<Result<Vec<_>>>()?;
    for (&(f, w, s), (shifted, plain)) in shifts.iter().zip(diffs) {
        let inputs = format!("{f}|w={},{}|p={}|alpha={}", w.re(), w.im(), s.p(), s.alpha());
        rows.close("mobius_norm_invariance", &inputs, shifted, plain, 1e-6);
    }

    let bounds = corpus
        .par_iter()
        .enumerate()
        .map(|(k, f)| pointwise_bound_margin(f, spaces[k % spaces.len()], q))
        .collect::<Result<Vec<_>>>()?;
    for (k, (f, m)) in corpus.iter().zip(bounds).enumerate() {
        let s = spaces[k % spaces.len()];
        rows.add("pointwise_bound", &format!("{f}|p={}|alpha={}", s.p(), s.alpha()), m, 1e-8);
    }

    // ‖f‖_{A^α_α} increases to ‖f‖_{H^1} as α decreases to 1.
    let limit_alphas: Vec<f64> = std::iter::once(1.0)
        .chain((1..=6).rev().map(|k| 1.0 + 0.5f64.powi(k)))
        .collect();
    let limits = corpus
        .par_iter()
        .take(10)
        .map(|f| contraction_profile(f, 1.0, &limit_alphas, q))
        .collect::<Result<Vec<_>>>()?;
    for (f, n) in corpus.iter().zip(&limits) {
        // n = [H, α = 1 + 2^-6, ..., 1 + 2^-1].
        for k in 1..n.len() - 1 {
            let (closer, farther) = (n[0] - n[k], n[0] - n[k + 1]);
            rows.add("hardy_limit_approach", &format!("{f}|alpha={}", limit_alphas[k]), farther - closer, 1e-6);
        }
    }
    Ok(())
}

fn functional(cfg: &RunConfig, rows: &mut Rows) -> Result<()> {
    let q = &cfg.quadrature;
    let spaces = [sp(1.0, 1.0), sp(2.0, 1.0), sp(2.0, 2.0), sp(1.0, 3.0)];
    let exps = [1.5, 2.0, 3.0];
    let one = AnalyticFunction::constant(1.0);
    for &s in &exps {
        for space in &spaces {
            let g = FunctionalSpec::power(s).build()?;
            let value = functional_direct(&one, &g, *space, q)?;
            let exact = 1.0 / (space.alpha() * s - 1.0);
            let inputs = format!("s={s}|p={}|alpha={}", space.p(), space.alpha());
            rows.close("constant_closed_form", &inputs, value, exact, 1e-5);
        }
    }

    let corpus = cfg.corpus();
    let mut jobs: Vec<(usize, FunctionalSpec, SpaceParams)> = Vec::new();
    for k in 0..corpus.len() {
        for &s in &exps {
            for space in &spaces {
                jobs.push((k, FunctionalSpec::power(s), *space));
            }
        }
    }
    let values = jobs
        .par_iter()
        .map(|(k, spec, space)| {
            let g = spec.build()?;
            let f = normalize(&corpus[*k], *space, q)?;
            Ok((functional_direct(&f, &g, *space, q)?, functional_direct(&one, &g, *space, q)?))
        })
        .collect::<Result<Vec<_>>>()?;
    for ((k, spec, space), (value, reference)) in jobs.iter().zip(values) {
        let inputs = format!(
            "{}|{}|p={}|alpha={}",
            corpus[*k],
            serde_json::to_string(spec).unwrap_or_default(),
            space.p(),
            space.alpha()
        );
        rows.add("constant_is_extremal", &inputs, reference - value, 1e-6);
    }
    Ok(())
}

/// Isoperimetric data at `t`, moving to the suggested level if the curve
/// passes through a critical point.
fn isoperimetric_at(pf: &PointwiseFunction, t: f64, levels: &LevelConfig) -> Result<(f64, Isoperimetric)> {
    match isoperimetric_residual(pf, t, levels) {
        Err(Error::DegenerateContour { suggestion, .. }) => {
            Ok((suggestion, isoperimetric_residual(pf, suggestion, levels)?))
        }
        other => Ok((t, other?)),
    }
}

fn isoperimetric(cfg: &RunConfig, rows: &mut Rows) -> Result<()> {
    let fractions = [0.8, 0.5, 0.25, 0.1];
    let mut jobs: Vec<(PointwiseFunction, bool)> = Vec::new();
    for f in cfg.corpus().into_iter().take(10) {
        for (a, b) in [(2.0, 1.0), (2.0, 2.0)] {
            jobs.push((PointwiseFunction::new(f.clone(), a, b)?, false));
        }
    }
    for &(re, im) in &KERNEL_POINTS {
        for space in [sp(2.0, 1.0), sp(2.0, 2.0), sp(1.0, 3.0)] {
            let k = AnalyticFunction::kernel(point(re, im), space);
            jobs.push((PointwiseFunction::new(k, space.p(), space.alpha())?, true));
        }
    }
    let levels: Vec<(usize, f64)> = jobs
        .iter()
        .enumerate()
        .flat_map(|(j, (pf, _))| {
            let (t0, _) = sup_u(pf);
            fractions.iter().map(move |&x| (j, x * t0))
        })
        .collect();
    let results = levels
        .par_iter()
        .map(|&(j, t)| isoperimetric_at(&jobs[j].0, t, &cfg.levels))
        .collect::<Result<Vec<_>>>()?;
    for (&(j, _), (t, iso)) in levels.iter().zip(results) {
        let (pf, equality) = &jobs[j];
        let inputs = format!("{}|a={}|b={}|t={t}", pf.f, pf.a, pf.b);
        rows.add("isoperimetric", &inputs, iso.relative(), 1e-4);
        if *equality {
            rows.close("isoperimetric_equality", &inputs, iso.relative(), 0.0, 1e-3);
        }
    }
    Ok(())
}

fn lemma(cfg: &RunConfig, rows: &mut Rows) -> Result<()> {
    let x_grid: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();
    let alphas = [1.5, 2.0, 3.0];

    let mut samples: Vec<StepFunction> = (0..10)
        .map(|k| random_weaker_step(&mut stream_rng(cfg.seed ^ 0x1e77a, k), 1.0))
        .collect();
    samples.push(non_monotone_example());
    for (k, s) in samples.iter().enumerate() {
        let inputs = format!("s={:?}|{:?}", s.breaks(), s.values());
        rows.add("weaker_condition", &inputs, weaker_condition_exact(s), 0.0);
        let outcome = lemma_counterexample_search(s, 1.0, 1.0, 1000, cfg.seed.wrapping_add(k as u64))?;
        rows.add("lemma_optimality", &inputs, outcome.gap(), 1e-12);
        let alpha = alphas[k % alphas.len()];
        let a = x_grid
            .iter()
            .map(|&x0| a_of(EnvelopeParams::new(alpha, x0)?, s))
            .collect::<Result<Vec<_>>>()?;
        for i in 0..a.len() - 1 {
            let inputs = format!("{inputs}|alpha={alpha}|x0={}", x_grid[i]);
            rows.add("envelope_nondecreasing", &inputs, a[i + 1] - a[i], 1e-12);
        }
    }

    // s(x) = G'(x^{α/(α-1)}) for G(t) = t^e, sampled at cell midpoints.
    for &e in &[1.5f64, 2.0, 3.0] {
        for &alpha in &[2.0f64, 3.0] {
            let s = StepFunction::from_fn(|x| e * x.powf(alpha / (alpha - 1.0) * (e - 1.0)), 1.0, 512)?;
            let a = x_grid
                .iter()
                .map(|&x0| a_of(EnvelopeParams::new(alpha, x0)?, &s))
                .collect::<Result<Vec<_>>>()?;
            for i in 0..a.len() - 1 {
                let inputs = format!("power={e}|alpha={alpha}|x0={}", x_grid[i]);
                rows.strict("envelope_strictly_increasing", &inputs, a[i + 1] - a[i]);
            }
        }
    }

    let one = StepFunction::constant(1.0, 1.0)?;
    for &alpha in &[1.5, 2.0, 3.0, 4.0] {
        for &x0 in &x_grid {
            let v = a_of(EnvelopeParams::new(alpha, x0)?, &one)?;
            rows.close("envelope_constant_s", &format!("alpha={alpha}|x0={x0}"), v, 1.0 / alpha, 1e-12);
        }
    }

    // Central differences agree with C' and their error halves twice per
    // halving of the step.
    for &alpha in &alphas {
        for &x0 in &[0.2, 0.5, 0.8] {
            let ep = EnvelopeParams::new(alpha, x0)?;
            let inputs = format!("alpha={alpha}|x0={x0}");
            let (e1, e2) = (c_prime_check(ep, 2e-3), c_prime_check(ep, 1e-3));
            let rel = c_prime_check(ep, 1e-4) / c_prime(ep).abs();
            rows.add("c_prime_difference", &inputs, -rel, 1e-6);
            rows.add("c_prime_second_order", &inputs, 0.5 - (e1 / e2 - 4.0).abs(), 0.0);
        }
    }

    // The level profile of a normalized Bergman function, after x = t^{1-1/α}.
    let mut fs: Vec<(AnalyticFunction, SpaceParams)> = vec![
        (AnalyticFunction::constant(1.0), sp(2.0, 2.0)),
        (AnalyticFunction::kernel(point(0.4, 0.0), sp(2.0, 2.0)), sp(2.0, 2.0)),
        (AnalyticFunction::constant(1.0), sp(2.0, 3.0)),
    ];
    for f in cfg.corpus().into_iter().take(3) {
        fs.push((normalize(&f, sp(2.0, 2.0), &cfg.quadrature)?, sp(2.0, 2.0)));
    }
    let results = fs
        .par_iter()
        .map(|(f, space)| {
            let pf = PointwiseFunction::new(f.clone(), space.p(), space.alpha())?;
            let profile = level_profile(&pf, 24, &cfg.levels)?;
            let value = profile_reduction_integral(&profile)?;
            Ok((value, reduction_tolerance(&profile)))
        })
        .collect::<Result<Vec<_>>>()?;
    for ((f, space), (value, tol)) in fs.iter().zip(results) {
        let inputs = format!("{f}|p={}|alpha={}", space.p(), space.alpha());
        rows.close("profile_reduction", &inputs, value, 1.0 / space.alpha(), tol);
    }
    Ok(())
}

/// Error of `(1 - 1/α) ∫ μ dt` from the level errors, plus a 1% allowance
/// for the tail below the grid.
fn reduction_tolerance(profile: &crate::levels::LevelProfile) -> f64 {
    let alpha = profile.b();
    let mut acc = 0.0;
    let mut prev = profile.t0;
    for (t, e) in profile.ts.iter().zip(&profile.err) {
        acc += e * (prev - t);
        prev = *t;
    }
    (1.0 - 1.0 / alpha) * acc + 1e-2 / alpha
}

fn coeff(cfg: &RunConfig, rows: &mut Rows) -> Result<()> {
    let q = &cfg.quadrature;
    let ps = [0.5, 1.0, 1.5];
    let corpus = cfg.corpus();
    let mut jobs: Vec<(AnalyticFunction, f64, bool)> = Vec::new();
    for f in &corpus {
        for &p in &ps {
            jobs.push((f.clone(), p, false));
        }
    }
    for &(re, im) in &KERNEL_POINTS[1..] {
        for &p in &ps {
            jobs.push((AnalyticFunction::kernel(point(re, im), SpaceParams::hardy(p)?), p, true));
        }
    }
    let margins = jobs
        .par_iter()
        .map(|(f, p, _)| coeff_inequality_margin(f, *p, q))
        .collect::<Result<Vec<_>>>()?;
    for ((f, p, kernel), m) in jobs.iter().zip(margins) {
        let inputs = format!("{f}|p={p}");
        if *kernel {
            rows.close("kernel_coeff_equality", &inputs, m.margin(), 0.0, 1e-6);
        } else {
            rows.add("coeff_inequality", &inputs, m.margin(), 1e-6);
        }
    }

    let f = AnalyticFunction::real_polynomial(&[1.0, 1.0])?;
    rows.close("one_plus_z_h1_norm", &format!("{f}|p=1"), hardy_norm(&f, 1.0, q)?, 4.0 / PI, 1e-6);

    // Partial sums of Σ c_β(n) xⁿ against (1 - x)^{-β}; the tail after 400
    // terms is far below the tolerance for x <= 0.7.
    for &beta in &[0.5, 1.0, 1.5, 2.0, 4.0] {
        let table = c_beta_table(beta, 400);
        for &x in &[0.3, 0.5, 0.7] {
            let mut pow = 1.0;
            let mut sum = crate::numeric::KahanSum::new();
            for &c in table.values() {
                sum.add(c * pow);
                pow *= x;
            }
            let exact = (1.0 - x).powf(-beta);
            let inputs = format!("beta={beta}|x={x}");
            rows.close("generating_identity", &inputs, sum.value() / exact, 1.0, 1e-12);
        }
    }
    Ok(())
}

fn divisor_count(n: usize) -> usize {
    (1..=n).filter(|d| n % d == 0).count()
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn dirichlet(cfg: &RunConfig, rows: &mut Rows) -> Result<()> {
    let polys = random_dirichlet(cfg.seed, 20, 12);
    let jobs: Vec<(usize, f64)> = (0..polys.len())
        .flat_map(|k| [1.0, 1.5].into_iter().map(move |p| (k, p)))
        .collect();
    let bohr = NormMethod::default();
    let margins = jobs
        .par_iter()
        .map(|&(k, p)| dirichlet_inequality_margin(&polys[k], p, &bohr))
        .collect::<Result<Vec<_>>>()?;
    let describe = |k: usize| serde_json::to_string(polys[k].coeffs()).unwrap_or_default();
    for (&(k, p), (m, _)) in jobs.iter().zip(&margins) {
        rows.add("dirichlet_inequality", &format!("{}|p={p}", describe(k)), *m, 1e-3);
    }

    let line = NormMethod::LineAverage(LineAverage::default());
    let averages = (0..5)
        .into_par_iter()
        .map(|k| dirichlet_hp_norm(&polys[k], 1.0, &line))
        .collect::<Result<Vec<_>>>()?;
    for (k, avg) in averages.iter().enumerate() {
        let lifted = margins[2 * k].1.value;
        let rel = (avg.value - lifted).abs() / lifted;
        rows.add("line_average_agreement", &format!("{}|p=1|T=10000", describe(k)), 0.01 - rel, 0.0);
    }

    let d2 = d_beta_table(2.0, 200);
    for n in 1..=200 {
        rows.close("divisor_function", &format!("n={n}"), d2.get(n), divisor_count(n) as f64, 0.0);
    }
    for &beta in &[0.5, 1.0, 3.0] {
        let d = d_beta_table(beta, 200);
        let mut worst = 0.0f64;
        for m in 2..=200 {
            for n in 2..=200 / m {
                if gcd(m, n) == 1 {
                    let rel = (d.get(m * n) - d.get(m) * d.get(n)).abs() / d.get(m * n);
                    worst = worst.max(rel);
                }
            }
        }
        rows.add("multiplicative", &format!("beta={beta}|N=200"), -worst, 1e-15);
    }
    Ok(())
}
