//! Quadrature rules, compensated summation and bracketed root finding.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = KahanSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// Nodes in `[0, 1]` and weights for `∫_0^1 (1 - s)^a F(s) ds`.
#[derive(Debug, Clone)]
pub struct JacobiRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl JacobiRule {
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        compensated_sum(self.nodes.iter().zip(&self.weights).map(|(&s, &w)| w * f(s)))
    }
}

type RuleKey = (usize, u64);

fn rule_cache() -> &'static Mutex<HashMap<RuleKey, Arc<JacobiRule>>> {
    static CACHE: OnceLock<Mutex<HashMap<RuleKey, Arc<JacobiRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Gauss rule for the weight `(1 - s)^a` on `[0, 1]`, `a > -1`.
///
/// Nodes come from the Golub–Welsch eigenproblem for the Jacobi
/// recurrence and are polished by Newton steps on `P_n^{(a,0)}`; weights use
/// the Christoffel formula, renormalized against the exact total mass.
pub fn gauss_jacobi_unit(n: usize, a: f64) -> Arc<JacobiRule> {
    assert!(n >= 1, "rule needs at least one node");
    assert!(a > -1.0, "weight exponent must exceed -1");
    let key = (n, a.to_bits());
    if let Some(rule) = rule_cache().lock().unwrap().get(&key) {
        return Arc::clone(rule);
    }
    let rule = Arc::new(build_jacobi(n, a));
    rule_cache()
        .lock()
        .unwrap()
        .insert(key, Arc::clone(&rule));
    rule
}

fn build_jacobi(n: usize, a: f64) -> JacobiRule {
    // Recurrence for weight (1 - x)^a on [-1, 1] (b = 0).
    let b = 0.0;
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    for (k, d) in diag.iter_mut().enumerate() {
        let kf = k as f64;
        let denom = (2.0 * kf + a + b) * (2.0 * kf + a + b + 2.0);
        *d = if denom.abs() < 1e-300 {
            (b - a) / (a + b + 2.0)
        } else {
            (b * b - a * a) / denom
        };
    }
    for (k, o) in off.iter_mut().enumerate() {
        let kf = k as f64 + 1.0;
        let s = 2.0 * kf + a + b;
        *o = (4.0 * kf * (kf + a) * (kf + b) * (kf + a + b) / (s * s * (s + 1.0) * (s - 1.0)))
            .sqrt();
    }
    let mut m = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        m[(k, k)] = diag[k];
        if k + 1 < n {
            m[(k, k + 1)] = off[k];
            m[(k + 1, k)] = off[k];
        }
    }
    let eig = m.symmetric_eigen();
    let mut xs: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    xs.sort_by(|x, y| x.partial_cmp(y).unwrap());

    let mut weights = Vec::with_capacity(n);
    for x in xs.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = jacobi_poly(n, a, b, *x);
            if dp != 0.0 {
                let step = p / dp;
                if step.is_finite() {
                    *x -= step;
                }
            }
        }
        let (_, dp) = jacobi_poly(n, a, b, *x);
        weights.push(1.0 / ((1.0 - *x * *x) * dp * dp));
    }
    // The Christoffel constant only fixes the scale; take it from the mass.
    let mass = 2f64.powf(a + 1.0) / (a + 1.0);
    let total = compensated_sum(weights.iter().copied());
    let unit_scale = 0.5f64.powf(a + 1.0);
    let nodes = xs.iter().map(|x| 0.5 * (1.0 + x)).collect();
    let weights = weights
        .iter()
        .map(|w| w * mass / total * unit_scale)
        .collect();
    JacobiRule { nodes, weights }
}

/// `P_n^{(a,b)}(x)` and its derivative via the three-term recurrence.
fn jacobi_poly(n: usize, a: f64, b: f64, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p1 = 0.5 * (a - b + (a + b + 2.0) * x);
    for k in 2..=n {
        let kf = k as f64;
        let c = 2.0 * kf + a + b;
        let a1 = 2.0 * kf * (kf + a + b) * (c - 2.0);
        let a2 = (c - 1.0) * (a * a - b * b);
        let a3 = (c - 2.0) * (c - 1.0) * c;
        let a4 = 2.0 * (kf + a - 1.0) * (kf + b - 1.0) * c;
        let p2 = ((a2 + a3 * x) * p1 - a4 * p0) / a1;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let c = 2.0 * nf + a + b;
    let dp = (nf * (a - b - c * x) * p1 + 2.0 * (nf + a) * (nf + b) * p0) / (c * (1.0 - x * x));
    (p1, dp)
}

/// Gauss–Legendre nodes/weights on `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> Arc<JacobiRule> {
    gauss_jacobi_unit(n, 0.0)
}

/// Kronrod 7-point extension of the 3-point Gauss rule on `[-1, 1]`.
pub const KRONROD7_NODES: [f64; 7] = [
    -0.960_491_268_708_020_3,
    -0.774_596_669_241_483_4,
    -0.434_243_749_346_802_6,
    0.0,
    0.434_243_749_346_802_6,
    0.774_596_669_241_483_4,
    0.960_491_268_708_020_3,
];
pub const KRONROD7_WEIGHTS: [f64; 7] = [
    0.104_656_226_026_467_3,
    0.268_488_089_868_333_4,
    0.401_397_414_775_962_2,
    0.450_916_538_658_474_1,
    0.401_397_414_775_962_2,
    0.268_488_089_868_333_4,
    0.104_656_226_026_467_3,
];
/// Gauss-3 weights aligned with `KRONROD7_NODES` (zero where unused).
pub const GAUSS3_WEIGHTS: [f64; 7] = [
    0.0,
    5.0 / 9.0,
    0.0,
    8.0 / 9.0,
    0.0,
    5.0 / 9.0,
    0.0,
];

/// Returns `(kronrod, gauss)` estimates of `∫_a^b f`.
pub fn kronrod7<F: FnMut(f64) -> f64>(a: f64, b: f64, mut f: F) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut k = 0.0;
    let mut g = 0.0;
    for i in 0..7 {
        let v = f(mid + half * KRONROD7_NODES[i]);
        k += KRONROD7_WEIGHTS[i] * v;
        g += GAUSS3_WEIGHTS[i] * v;
    }
    (k * half, g * half)
}

/// Brent's method for a root of `f` in `[a, b]` given a sign change.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, fa: f64, fb: f64, xtol: f64) -> f64 {
    let (mut fa, mut fb) = (fa, fb);
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    debug_assert!(fa.signum() != fb.signum());
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return b;
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    b
}
