//! One-dimensional reduction of the Bergman extremal problem: step functions,
//! the weak monotonicity condition `∫_0^X s ≤ X s(X)`, the rearrangement
//! lemma and the envelope functions `C(x0)` and `A(x0)`.
//!
//! All integrals here are closed-form sums over pieces.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levels::{integrate_profile, LevelProfile, PowerPiece};
use crate::numeric::KahanSum;

/// Piecewise-constant function on `[0, X]`: `values[k]` on
/// `[breaks[k], breaks[k + 1])`, and the last value at `X` itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    breaks: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || breaks.len() != values.len() + 1 {
            return Err(Error::InvalidParameter(
                "a step function needs n + 1 breakpoints for n values".into(),
            ));
        }
        if breaks[0] != 0.0 {
            return Err(Error::InvalidParameter("first breakpoint must be 0".into()));
        }
        if breaks.windows(2).any(|w| !(w[1] > w[0])) || !breaks[breaks.len() - 1].is_finite() {
            return Err(Error::InvalidParameter("breakpoints must increase".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("values must be finite".into()));
        }
        Ok(Self { breaks, values })
    }

    pub fn constant(c: f64, end: f64) -> Result<Self> {
        Self::new(vec![0.0, end], vec![c])
    }

    /// `n` equal pieces on `[0, end]` with the value of `f` at each midpoint.
    pub fn from_fn<F: Fn(f64) -> f64>(f: F, end: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("need at least one piece".into()));
        }
        let breaks: Vec<f64> = (0..=n).map(|k| end * k as f64 / n as f64).collect();
        let values = breaks.windows(2).map(|w| f(0.5 * (w[0] + w[1]))).collect();
        Self::new(breaks, values)
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn end(&self) -> f64 {
        self.breaks[self.breaks.len() - 1]
    }

    fn piece(&self, x: f64) -> usize {
        let k = self.breaks.partition_point(|&b| b <= x);
        k.saturating_sub(1).min(self.values.len() - 1)
    }

    /// Right-continuous value; `x` is clamped to `[0, X]`.
    pub fn eval(&self, x: f64) -> f64 {
        self.values[self.piece(x)]
    }

    /// `S(x) = ∫_0^x s`.
    pub fn integral_to(&self, x: f64) -> f64 {
        self.power_integral_to(0.0, x)
    }

    pub fn integral(&self) -> f64 {
        self.integral_to(self.end())
    }

    /// `∫_0^x t^e s(t) dt` for `e > -1`.
    pub fn power_integral_to(&self, e: f64, x: f64) -> f64 {
        let x = x.min(self.end());
        let mut acc = KahanSum::new();
        for (k, &v) in self.values.iter().enumerate() {
            let (a, b) = (self.breaks[k], self.breaks[k + 1].min(x));
            if a >= b {
                break;
            }
            acc.add(v * (b.powf(e + 1.0) - a.powf(e + 1.0)) / (e + 1.0));
        }
        acc.value()
    }

    pub fn is_decreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0])
    }

    pub fn is_non_negative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    fn scale(&mut self, c: f64) {
        for v in &mut self.values {
            *v *= c;
        }
    }
}

/// `min_X [X s(X) - S(X)]` over the given points; the condition holds when
/// this is non-negative.
pub fn weaker_condition_margin(s: &StepFunction, xs: &[f64]) -> f64 {
    xs.iter()
        .map(|&x| x * s.eval(x) - s.integral_to(x))
        .fold(f64::INFINITY, f64::min)
}

/// `min` of `X s(X) - S(X)` over all `X ∈ [0, end]`.
///
/// On a piece `[x_k, x_{k+1})` with value `v_k` the expression equals
/// `x_k v_k - S(x_k)`, so the minimum is taken over the breakpoints. It is
/// at most 0 (the value at `X = 0`), so the condition holds iff it is 0.
pub fn weaker_condition_exact(s: &StepFunction) -> f64 {
    let mut min = 0.0f64;
    let mut acc = 0.0;
    for (k, &v) in s.values.iter().enumerate() {
        let x = s.breaks[k];
        min = min.min(x * v - acc);
        acc += v * (s.breaks[k + 1] - x);
    }
    min
}

/// `∫_0^{x0} s h` with `x0` the end of `h`.
pub fn lemma_value(s: &StepFunction, h: &StepFunction) -> f64 {
    let end = h.end().min(s.end());
    let mut acc = KahanSum::new();
    let (mut i, mut j) = (0, 0);
    let mut x = 0.0;
    while x < end {
        let next = s.breaks[i + 1].min(h.breaks[j + 1]).min(end);
        acc.add(s.values[i] * h.values[j] * (next - x));
        x = next;
        if i + 1 < s.values.len() && s.breaks[i + 1] <= x {
            i += 1;
        }
        if j + 1 < h.values.len() && h.breaks[j + 1] <= x {
            j += 1;
        }
    }
    acc.value()
}

/// Random non-negative decreasing step function on `[0, x0]` with
/// `∫ h = c`: between 1 and 32 uniform breakpoints, exponential jumps on top
/// of an exponential base value.
pub fn random_decreasing<R: Rng + ?Sized>(rng: &mut R, x0: f64, c: f64) -> StepFunction {
    let k = rng.random_range(1..=32usize);
    let mut breaks: Vec<f64> = (0..k - 1).map(|_| rng.random_range(0.0..x0)).collect();
    breaks.push(0.0);
    breaks.push(x0);
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup();
    let n = breaks.len() - 1;
    let mut values = vec![0.0; n];
    let mut level: f64 = Exp1.sample(rng);
    for v in values.iter_mut().rev() {
        *v = level;
        let jump: f64 = Exp1.sample(rng);
        level += jump;
    }
    let mut h = StepFunction { breaks, values };
    let total = h.integral();
    h.scale(c / total);
    h
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub best: f64,
    pub best_h: StepFunction,
    /// `(c / x0) S(x0)`, the value at the constant.
    pub constant: f64,
}

impl SearchOutcome {
    /// `constant - best`; the lemma says this is non-negative.
    pub fn gap(&self) -> f64 {
        self.constant - self.best
    }
}

/// Samples random decreasing `h` with `∫_0^{x0} h = c` and keeps the largest
/// `∫ s h`. Trial `k` draws from its own stream of `seed`, so the result does
/// not depend on the thread count.
pub fn lemma_counterexample_search(
    s: &StepFunction,
    x0: f64,
    c: f64,
    trials: usize,
    seed: u64,
) -> Result<SearchOutcome> {
    if !(x0 > 0.0 && x0 <= s.end()) {
        return Err(Error::InvalidParameter(format!(
            "x0 must lie in (0, {}], got {x0}",
            s.end()
        )));
    }
    if !(c > 0.0) || trials == 0 {
        return Err(Error::InvalidParameter("need c > 0 and at least one trial".into()));
    }
    let results: Vec<(f64, StepFunction)> = (0..trials as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k);
            let h = random_decreasing(&mut rng, x0, c);
            (lemma_value(s, &h), h)
        })
        .collect();
    // First index wins ties.
    let (best, best_h) = results
        .into_iter()
        .reduce(|a, b| if b.0 > a.0 { b } else { a })
        .unwrap();
    Ok(SearchOutcome {
        best,
        best_h,
        constant: c / x0 * s.integral_to(x0),
    })
}

/// Random step function on `[0, end]` satisfying the weak monotonicity
/// condition: an increasing sequence with occasional dips, kept only if the
/// exact margin is non-negative.
pub fn random_weaker_step<R: Rng + ?Sized>(rng: &mut R, end: f64) -> StepFunction {
    loop {
        let n = rng.random_range(2..=24usize);
        let mut breaks: Vec<f64> = (0..n - 1).map(|_| rng.random_range(0.0..end)).collect();
        breaks.push(0.0);
        breaks.push(end);
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        breaks.dedup();
        let mut level: f64 = rng.random_range(0.0..1.0);
        let values: Vec<f64> = (1..breaks.len())
            .map(|_| {
                level += rng.random_range(0.0..1.0);
                if rng.random_bool(0.3) {
                    (level - rng.random_range(0.0..0.3)).max(0.0)
                } else {
                    level
                }
            })
            .collect();
        let s = StepFunction { breaks, values };
        if weaker_condition_exact(&s) >= 0.0 {
            return s;
        }
    }
}

/// `1` on `[0, 0.5)`, `3` on `[0.5, 0.75)`, `2` on `[0.75, 1]`: satisfies the
/// weak condition without being monotone.
pub fn non_monotone_example() -> StepFunction {
    StepFunction {
        breaks: vec![0.0, 0.5, 0.75, 1.0],
        values: vec![1.0, 3.0, 2.0],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeParams {
    alpha: f64,
    x0: f64,
}

impl EnvelopeParams {
    pub fn new(alpha: f64, x0: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "alpha must exceed 1, got {alpha}"
            )));
        }
        if !(x0 > 0.0 && x0 <= 1.0) {
            return Err(Error::Domain(format!("x0 must lie in (0, 1], got {x0}")));
        }
        Ok(Self { alpha, x0 })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }
}

fn c_raw(alpha: f64, x0: f64) -> f64 {
    (1.0 / alpha + (alpha - 1.0) / alpha * x0.powf(alpha / (alpha - 1.0))) / x0
}

/// `C(x0) = (1/x0)(1/α + (α-1)/α · x0^{α/(α-1)})`.
pub fn c_of(ep: EnvelopeParams) -> f64 {
    c_raw(ep.alpha, ep.x0)
}

/// `C'(x0) = (x0^{α/(α-1)} - 1) / (α x0²)`.
pub fn c_prime(ep: EnvelopeParams) -> f64 {
    let (a, x) = (ep.alpha, ep.x0);
    (x.powf(a / (a - 1.0)) - 1.0) / (a * x * x)
}

/// `|central difference of C - C'|` with the given step.
pub fn c_prime_check(ep: EnvelopeParams, step: f64) -> f64 {
    let (a, x) = (ep.alpha, ep.x0);
    let fd = (c_raw(a, x + step) - c_raw(a, x - step)) / (2.0 * step);
    (fd - c_prime(ep)).abs()
}

/// `A(x0) = C(x0) S(x0) - ∫_0^{x0} x^{1/(α-1)} s(x) dx`.
pub fn a_of(ep: EnvelopeParams, s: &StepFunction) -> Result<f64> {
    if ep.x0 > s.end() {
        return Err(Error::InvalidParameter(format!(
            "s is defined on [0, {}] but x0 = {}",
            s.end(),
            ep.x0
        )));
    }
    Ok(c_of(ep) * s.integral_to(ep.x0) - s.power_integral_to(1.0 / (ep.alpha - 1.0), ep.x0))
}

/// `∫_0^{x0} (h(x) - x^{1/(α-1)}) dx` for the profile of a function
/// normalized in `A^p_α`, where `x = t^{1-1/α}` and `h(x) = g(t)`; this is
/// `(1 - 1/α) ∫ μ dt` and should equal `1/α`.
pub fn profile_reduction_integral(profile: &LevelProfile) -> Result<f64> {
    let alpha = profile.b();
    if !(alpha > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "the reduction needs b > 1, got {alpha}"
        )));
    }
    let unit = [PowerPiece {
        lo: 0.0,
        hi: f64::INFINITY,
        coeff: 1.0,
        exponent: 0.0,
    }];
    Ok((1.0 - 1.0 / alpha) * integrate_profile(profile, &unit)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(breaks: &[f64], values: &[f64]) -> StepFunction {
        StepFunction::new(breaks.to_vec(), values.to_vec()).unwrap()
    }

    #[test]
    fn construction_is_validated() {
        assert!(StepFunction::new(vec![0.0, 1.0], vec![1.0, 2.0]).is_err());
        assert!(StepFunction::new(vec![0.1, 1.0], vec![1.0]).is_err());
        assert!(StepFunction::new(vec![0.0, 0.5, 0.5], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn eval_and_integrals() {
        let s = step(&[0.0, 0.5, 1.0], &[1.0, 3.0]);
        assert_eq!(s.eval(0.0), 1.0);
        assert_eq!(s.eval(0.5), 3.0);
        assert_eq!(s.eval(1.0), 3.0);
        assert_eq!(s.integral_to(0.75), 0.5 + 0.75);
        assert_eq!(s.integral(), 2.0);
        // ∫_0^1 x s = 1·(1/8) + 3·(1/2 - 1/8)
        assert!((s.power_integral_to(1.0, 1.0) - (0.125 + 3.0 * 0.375)).abs() < 1e-15);
    }

    #[test]
    fn weaker_examples() {
        let grid: Vec<f64> = (1..=100).map(|k| k as f64 / 100.0).collect();
        let inc = StepFunction::from_fn(|x| x * x + 0.1, 1.0, 40).unwrap();
        assert!(weaker_condition_margin(&inc, &grid) >= 0.0);
        assert_eq!(weaker_condition_exact(&inc), 0.0);
        let one = StepFunction::constant(1.0, 1.0).unwrap();
        assert_eq!(weaker_condition_margin(&one, &grid), 0.0);
        let x = 0.8;
        let ind = step(&[0.0, x / 2.0, 1.0], &[2.0, 0.0]);
        let m = weaker_condition_margin(&ind, &[x]);
        assert!((m + x).abs() < 1e-15, "{m}");
        assert!(weaker_condition_exact(&ind) < 0.0);
        assert_eq!(weaker_condition_exact(&non_monotone_example()), 0.0);
    }

    #[test]
    fn lemma_examples() {
        let s = StepFunction::from_fn(|x| x, 1.0, 64).unwrap();
        let c = 0.7;
        let h = StepFunction::constant(c / 1.0, 1.0).unwrap();
        assert!((lemma_value(&s, &h) - c * s.integral()).abs() < 1e-15);
        let one = StepFunction::constant(1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let h = random_decreasing(&mut rng, 1.0, c);
            assert!(h.is_decreasing() && h.is_non_negative());
            assert!((h.integral() - c).abs() < 1e-14);
            assert!((lemma_value(&one, &h) - c).abs() < 1e-14);
        }
        // s(x) = x, h = 2(1 - x): ∫ 2x(1 - x) = 1/3, discretized exactly by
        // midpoint values.
        let h = StepFunction::from_fn(|x| 2.0 * (1.0 - x), 1.0, 64).unwrap();
        let v = lemma_value(&s, &h);
        let exact_discrete: f64 = (0..64)
            .map(|k| {
                let m = (k as f64 + 0.5) / 64.0;
                m * 2.0 * (1.0 - m) / 64.0
            })
            .sum();
        assert!((v - exact_discrete).abs() < 1e-15);
        assert!((v - 1.0 / 3.0).abs() < 1e-4);
        let constant = h.integral() * s.integral();
        assert!((constant - 0.5).abs() < 1e-14 && v < constant);
    }

    #[test]
    fn search_respects_lemma() {
        let s = StepFunction::from_fn(|x| x.sqrt(), 1.0, 50).unwrap();
        let out = lemma_counterexample_search(&s, 1.0, 1.0, 500, 11).unwrap();
        assert!(out.best <= out.constant + 1e-12, "{}", out.gap());
        let again = lemma_counterexample_search(&s, 1.0, 1.0, 500, 11).unwrap();
        assert_eq!(out.best, again.best);
        let one = StepFunction::constant(1.0, 1.0).unwrap();
        let out = lemma_counterexample_search(&one, 1.0, 2.0, 50, 1).unwrap();
        assert!((out.best - 2.0).abs() < 1e-14 && out.gap().abs() < 1e-14);
    }

    #[test]
    fn ties_when_margin_vanishes() {
        // Constant on [0, 0.5], larger after: any h living on [0, 0.5] ties
        // with the constant there, but the constant wins on [0, 1].
        let s = step(&[0.0, 0.5, 1.0], &[1.0, 2.0]);
        let c = 1.0;
        let short = StepFunction::constant(c / 0.5, 0.5).unwrap();
        let peaked = step(&[0.0, 0.1, 0.5], &[6.0, 1.0]);
        assert!((peaked.integral() - c).abs() < 1e-15);
        assert!((lemma_value(&s, &short) - lemma_value(&s, &peaked)).abs() < 1e-15);
        let full = StepFunction::constant(c, 1.0).unwrap();
        assert!(lemma_value(&s, &full) > lemma_value(&s, &short));
    }

    #[test]
    fn random_weaker_steps_qualify() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let s = random_weaker_step(&mut rng, 1.0);
            assert!(weaker_condition_exact(&s) >= 0.0 && s.is_non_negative());
        }
    }

    #[test]
    fn envelope_examples() {
        for &a in &[1.5, 2.0, 3.0, 7.0] {
            assert!((c_of(EnvelopeParams::new(a, 1.0).unwrap()) - 1.0).abs() < 1e-15);
            assert_eq!(c_prime(EnvelopeParams::new(a, 1.0).unwrap()), 0.0);
        }
        let ep = EnvelopeParams::new(2.0, 0.25).unwrap();
        assert!((c_of(ep) - 17.0 / 8.0).abs() < 1e-15);
        let half = EnvelopeParams::new(2.0, 0.5).unwrap();
        assert!((c_of(half) - 1.25).abs() < 1e-15);
        assert!((c_prime(half) + 1.5).abs() < 1e-15);
        assert!(c_prime_check(half, 1e-4) <= 1e-7);
        assert!(c_prime(EnvelopeParams::new(3.0, 0.8).unwrap()) <= 0.0);
        assert!(matches!(EnvelopeParams::new(2.0, 0.0), Err(Error::Domain(_))));
        assert!(EnvelopeParams::new(1.0, 0.5).is_err());
    }

    #[test]
    fn a_of_examples() {
        let one = StepFunction::constant(1.0, 1.0).unwrap();
        for &a in &[1.5, 2.0, 4.0] {
            for &x0 in &[0.1, 0.5, 0.9, 1.0] {
                let v = a_of(EnvelopeParams::new(a, x0).unwrap(), &one).unwrap();
                assert!((v - 1.0 / a).abs() < 1e-14, "{a} {x0} {v}");
            }
        }
        let s = StepFunction::from_fn(|x| x, 1.0, 128).unwrap();
        let lo = a_of(EnvelopeParams::new(2.0, 0.5).unwrap(), &s).unwrap();
        let hi = a_of(EnvelopeParams::new(2.0, 1.0).unwrap(), &s).unwrap();
        assert!(lo <= hi);
        // A(x0) -> s(0+)/α as x0 -> 0.
        let tiny = a_of(EnvelopeParams::new(2.0, 1e-9).unwrap(), &s).unwrap();
        assert!((tiny - s.values()[0] / 2.0).abs() < 1e-8, "{tiny}");
        let late = step(&[0.0, 0.5, 1.0], &[0.0, 1.0]);
        assert_eq!(a_of(EnvelopeParams::new(2.0, 1e-6).unwrap(), &late).unwrap(), 0.0);
        let short = StepFunction::constant(1.0, 0.5).unwrap();
        assert!(a_of(EnvelopeParams::new(2.0, 0.8).unwrap(), &short).is_err());
    }
}
