//! Nelder–Mead simplex minimizer with dimension-adapted coefficients and
//! restarts from the best vertex when the simplex collapses.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadConfig {
    /// Edge length of the initial (and every restarted) simplex.
    pub initial_step: f64,
    /// Objective evaluations allowed in total.
    pub max_evals: usize,
    /// The simplex has collapsed when the spread of its values is below
    /// `f_tol · (1 + |f_best|)`.
    pub f_tol: f64,
    /// Restarts stop once a restart improves the best value by less than
    /// `f_tol · (1 + |f_best|)`.
    pub max_restarts: usize,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self {
            initial_step: 0.25,
            max_evals: 4000,
            f_tol: 1e-13,
            max_restarts: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    /// False when the evaluation budget ran out first.
    pub converged: bool,
}

struct Counter<F> {
    f: F,
    evals: usize,
    max: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counter<F> {
    fn call(&mut self, x: &[f64]) -> Option<f64> {
        if self.evals >= self.max {
            return None;
        }
        self.evals += 1;
        let v = (self.f)(x);
        Some(if v.is_nan() { f64::INFINITY } else { v })
    }
}

pub fn minimize<F: FnMut(&[f64]) -> f64>(f: F, x0: &[f64], cfg: &NelderMeadConfig) -> NelderMeadResult {
    let mut counter = Counter {
        f,
        evals: 0,
        max: cfg.max_evals.max(1),
    };
    let mut best_x = x0.to_vec();
    let mut best = match counter.call(x0) {
        Some(v) => v,
        None => unreachable!(),
    };
    let mut converged = false;
    for _ in 0..=cfg.max_restarts {
        let (x, v, done) = run_simplex(&mut counter, &best_x, best, cfg);
        let gain = best - v;
        if v < best {
            best = v;
            best_x = x;
        }
        if !done {
            converged = false;
            break;
        }
        converged = true;
        if gain <= cfg.f_tol * (1.0 + best.abs()) {
            break;
        }
    }
    NelderMeadResult {
        x: best_x,
        value: best,
        evals: counter.evals,
        converged,
    }
}

/// One simplex run from `x0`; returns the best vertex, its value and whether
/// the simplex collapsed (as opposed to running out of budget).
fn run_simplex<F: FnMut(&[f64]) -> f64>(
    counter: &mut Counter<F>,
    x0: &[f64],
    f0: f64,
    cfg: &NelderMeadConfig,
) -> (Vec<f64>, f64, bool) {
    let n = x0.len();
    let nf = n.max(2) as f64;
    let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);
    let mut pts: Vec<(Vec<f64>, f64)> = vec![(x0.to_vec(), f0)];
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += cfg.initial_step;
        match counter.call(&x) {
            Some(v) => pts.push((x, v)),
            None => return best_of(pts, false),
        }
    }
    loop {
        pts.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (lo, hi) = (pts[0].1, pts[n].1);
        if hi - lo <= cfg.f_tol * (1.0 + lo.abs()) {
            return best_of(pts, true);
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in &pts[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&pts[n].0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };
        let xr = along(alpha);
        let Some(fr) = counter.call(&xr) else {
            return best_of(pts, false);
        };
        if fr < pts[0].1 {
            let xe = along(alpha * beta);
            let Some(fe) = counter.call(&xe) else {
                pts[n] = (xr, fr);
                return best_of(pts, false);
            };
            pts[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < pts[n - 1].1 {
            pts[n] = (xr, fr);
            continue;
        }
        let (xc, outside) = if fr < pts[n].1 {
            (along(alpha * gamma), true)
        } else {
            (along(-gamma), false)
        };
        let Some(fc) = counter.call(&xc) else {
            return best_of(pts, false);
        };
        if (outside && fc <= fr) || (!outside && fc < pts[n].1) {
            pts[n] = (xc, fc);
            continue;
        }
        // Shrink towards the best vertex.
        let best = pts[0].0.clone();
        for p in pts.iter_mut().skip(1) {
            let x: Vec<f64> = best
                .iter()
                .zip(&p.0)
                .map(|(b, xi)| b + delta * (xi - b))
                .collect();
            let Some(v) = counter.call(&x) else {
                return best_of(pts, false);
            };
            *p = (x, v);
        }
    }
}

fn best_of(pts: Vec<(Vec<f64>, f64)>, done: bool) -> (Vec<f64>, f64, bool) {
    let (x, v) = pts
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    (x, v, done)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let target = [1.0, -2.0, 0.5, 3.0];
        let f = |x: &[f64]| -> f64 { x.iter().zip(&target).map(|(a, b)| (a - b) * (a - b)).sum() };
        let r = minimize(f, &[0.0; 4], &NelderMeadConfig::default());
        assert!(r.converged);
        assert!(r.value < 1e-12, "{r:?}");
        for (a, b) in r.x.iter().zip(&target) {
            assert!((a - b).abs() < 1e-5);
        }
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let cfg = NelderMeadConfig {
            max_evals: 5000,
            f_tol: 1e-15,
            ..Default::default()
        };
        let r = minimize(f, &[-1.2, 1.0], &cfg);
        assert!((r.x[0] - 1.0).abs() < 1e-4 && (r.x[1] - 1.0).abs() < 1e-4, "{r:?}");
    }

    #[test]
    fn budget_is_respected() {
        let mut calls = 0;
        let r = minimize(
            |x: &[f64]| {
                calls += 1;
                x.iter().map(|v| v.sin()).sum()
            },
            &[0.3; 6],
            &NelderMeadConfig {
                max_evals: 50,
                ..Default::default()
            },
        );
        assert!(!r.converged);
        assert_eq!(r.evals, 50);
        assert_eq!(calls, 50);
    }
}
