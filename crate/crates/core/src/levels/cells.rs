//! Adaptive polar cell tree for the hyperbolic measure of `{u > t}`.
//!
//! Cells live in `(v, θ)` with `v = -ln(1 - |z|²)`, where the hyperbolic
//! measure of a cell is exactly `(θ2 - θ1)/(2π) · (e^{v2} - e^{v1})`. Cells whose
//! samples clear the level by more than their variation are tagged inside or
//! outside; the rest are boundary cells. A boundary cell is measured by
//! integrating, over θ, the radial measure of the superlevel set along each
//! ray (roots located by Brent). The θ-integral is split where the level
//! curve crosses the cell's radial edges or is tangent to a ray, and a 7-point Kronrod / 3-point Gauss pair decides whether the
//! cell must be split further.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ScalarField;
use crate::numeric::{brent, kronrod7, KahanSum};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelConfig {
    pub init_radial: usize,
    pub init_angular: usize,
    /// Boundary cells are always split below this depth.
    pub min_depth: u32,
    pub max_depth: u32,
    /// Accepted integration error per cell, relative to the cell measure.
    pub rel_tol: f64,
    /// Samples along a ray segment or cell edge when bracketing roots.
    pub ray_samples: usize,
}

impl Default for LevelConfig {
    fn default() -> Self {
        Self {
            init_radial: 16,
            init_angular: 32,
            min_depth: 2,
            max_depth: 12,
            rel_tol: 1e-7,
            ray_samples: 9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellTag {
    Inside,
    Outside,
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub v1: f64,
    pub v2: f64,
    pub th1: f64,
    pub th2: f64,
    pub depth: u32,
    pub tag: CellTag,
}

impl Cell {
    pub fn measure(&self) -> f64 {
        (self.th2 - self.th1) / (2.0 * PI) * (self.v2.exp() - self.v1.exp())
    }

    fn children(&self) -> [Cell; 4] {
        let vm = 0.5 * (self.v1 + self.v2);
        let tm = 0.5 * (self.th1 + self.th2);
        let mk = |v1, v2, th1, th2| Cell {
            v1,
            v2,
            th1,
            th2,
            depth: self.depth + 1,
            tag: CellTag::Boundary,
        };
        [
            mk(self.v1, vm, self.th1, tm),
            mk(self.v1, vm, tm, self.th2),
            mk(vm, self.v2, self.th1, tm),
            mk(vm, self.v2, tm, self.th2),
        ]
    }
}

/// Point of the disk with coordinates `(v, θ)`.
pub fn polar_point(v: f64, th: f64) -> Complex64 {
    let r = (-(-v).exp_m1()).sqrt();
    Complex64::from_polar(r, th)
}

/// Leaves of the subdivision together with the measure estimates.
#[derive(Debug, Clone)]
pub struct CellTree {
    pub t: f64,
    pub v_max: f64,
    pub leaves: Vec<Cell>,
    pub inside: f64,
    pub boundary: f64,
    pub value: f64,
    pub err: f64,
}

impl CellTree {
    /// The bracket `[INSIDE, INSIDE + BOUNDARY]`. Set-theoretic bounds, widened by the rounding in the cell measures.
    pub fn bracket(&self) -> (f64, f64) {
        let slack = 1e-13 * (1.0 + self.inside + self.boundary);
        (self.inside - slack, self.inside + self.boundary + slack)
    }

    pub fn boundary_leaves(&self) -> impl Iterator<Item = &Cell> {
        self.leaves.iter().filter(|c| c.tag == CellTag::Boundary)
    }
}

struct Partial {
    inside: KahanSum,
    boundary: KahanSum,
    value: KahanSum,
    err: f64,
    leaves: Vec<Cell>,
}

impl Partial {
    fn new() -> Self {
        Self {
            inside: KahanSum::new(),
            boundary: KahanSum::new(),
            value: KahanSum::new(),
            err: 0.0,
            leaves: Vec::new(),
        }
    }
}

struct Builder<'a, F: ScalarField + ?Sized> {
    field: &'a F,
    t: f64,
    cfg: LevelConfig,
    keep_leaves: bool,
}

impl<F: ScalarField + ?Sized> Builder<'_, F> {
    fn g(&self, v: f64, th: f64) -> f64 {
        self.field.value(polar_point(v, th)) - self.t
    }

    fn visit(&self, cell: Cell, out: &mut Partial) {
        let vs = [cell.v1, 0.5 * (cell.v1 + cell.v2), cell.v2];
        let ts = [cell.th1, 0.5 * (cell.th1 + cell.th2), cell.th2];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in &vs {
            for &th in &ts {
                let g = self.g(v, th);
                lo = lo.min(g);
                hi = hi.max(g);
            }
        }
        let spread = hi - lo;
        let m = cell.measure();
        if lo > 0.0 && lo > spread {
            out.inside.add(m);
            out.value.add(m);
            self.keep(cell, CellTag::Inside, out);
            return;
        }
        if hi <= 0.0 && -hi > spread {
            self.keep(cell, CellTag::Outside, out);
            return;
        }
        if cell.depth < self.cfg.min_depth {
            for child in cell.children() {
                self.visit(child, out);
            }
            return;
        }
        let (est, err) = self.integrate_cell(&cell);
        if err <= self.cfg.rel_tol * m || cell.depth >= self.cfg.max_depth {
            out.boundary.add(m);
            out.value.add(est);
            out.err += err;
            self.keep(cell, CellTag::Boundary, out);
        } else {
            for child in cell.children() {
                self.visit(child, out);
            }
        }
    }

    fn keep(&self, mut cell: Cell, tag: CellTag, out: &mut Partial) {
        if self.keep_leaves {
            cell.tag = tag;
            out.leaves.push(cell);
        }
    }

    /// Roots of `g` on a segment where `g` is sampled at `n` points.
    fn roots<G: Fn(f64) -> f64>(&self, g: G, a: f64, b: f64, n: usize) -> Vec<f64> {
        let mut roots = Vec::new();
        let mut x0 = a;
        let mut g0 = g(a);
        for k in 1..n {
            let x1 = a + (b - a) * k as f64 / (n - 1) as f64;
            let g1 = g(x1);
            if (g0 > 0.0) != (g1 > 0.0) {
                roots.push(brent(&g, x0, x1, g0, g1, 1e-15 * (1.0 + x1.abs())));
            }
            x0 = x1;
            g0 = g1;
        }
        roots
    }

    /// `∫_{v1}^{v2} 1{u > t} d(e^v)` along the ray at angle `th`.
    fn ray_measure(&self, cell: &Cell, th: f64) -> f64 {
        let g = |v: f64| self.g(v, th);
        let n = self.cfg.ray_samples;
        let mut acc = 0.0;
        let mut inside = g(cell.v1) > 0.0;
        let mut start = cell.v1;
        for root in self.roots(g, cell.v1, cell.v2, n) {
            if inside {
                acc += root.exp() - start.exp();
            }
            inside = !inside;
            start = root;
        }
        if inside {
            acc += cell.v2.exp() - start.exp();
        }
        acc
    }

    /// Shape of the superlevel set along a ray: whether it starts inside and
    /// how many times it crosses the level.
    fn ray_signature(&self, cell: &Cell, th: f64) -> (bool, usize) {
        let g = |v: f64| self.g(v, th);
        (
            g(cell.v1) > 0.0,
            self.roots(g, cell.v1, cell.v2, self.cfg.ray_samples).len(),
        )
    }

    /// Angles in `(a, b)` where the ray becomes tangent to the level curve,
    /// located by bisection on the ray signature.
    fn tangencies(&self, cell: &Cell, a: f64, b: f64, out: &mut Vec<f64>) {
        const PROBES: usize = 16;
        let xs: Vec<f64> = (0..PROBES)
            .map(|k| a + (b - a) * (k as f64 + 0.5) / PROBES as f64)
            .collect();
        let sigs: Vec<_> = xs.iter().map(|&th| self.ray_signature(cell, th)).collect();
        for k in 1..PROBES {
            if sigs[k] == sigs[k - 1] {
                continue;
            }
            let (mut lo, mut hi) = (xs[k - 1], xs[k]);
            let s_lo = sigs[k - 1];
            while hi - lo > 1e-14 * (1.0 + hi.abs()) {
                let mid = 0.5 * (lo + hi);
                if self.ray_signature(cell, mid) == s_lo {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push(0.5 * (lo + hi));
        }
    }

    /// Returns the Kronrod estimate of the cell's share of `{u > t}` and a
    /// QUADPACK-style error estimate.
    ///
    /// The ray measure has square-root behaviour where a ray is tangent to
    /// the level curve, so the θ-range is cut there as well and each piece
    /// is integrated after the substitution `θ = a + (b - a)(3y² - 2y³)`.
    fn integrate_cell(&self, cell: &Cell) -> (f64, f64) {
        let n = self.cfg.ray_samples;
        let mut cuts = vec![cell.th1];
        for v in [cell.v1, cell.v2] {
            cuts.extend(self.roots(|th| self.g(v, th), cell.th1, cell.th2, n));
        }
        cuts.push(cell.th2);
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        let mut extra = Vec::new();
        for piece in cuts.windows(2) {
            self.tangencies(cell, piece[0], piece[1], &mut extra);
        }
        if !extra.is_empty() {
            cuts.extend(extra);
            cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        }

        let mut est = 0.0;
        let mut err = 0.0;
        for piece in cuts.windows(2) {
            let (a, b) = (piece[0], piece[1]);
            if b - a <= 0.0 {
                continue;
            }
            let (k, g) = kronrod7(0.0, 1.0, |y| {
                let th = a + (b - a) * y * y * (3.0 - 2.0 * y);
                6.0 * (b - a) * y * (1.0 - y) * self.ray_measure(cell, th)
            });
            let diff = (k - g).abs();
            let scale = (b - a) * (cell.v2.exp() - cell.v1.exp());
            let e = if diff == 0.0 {
                0.0
            } else {
                diff * (200.0 * diff / scale).powf(1.5).min(1.0)
            };
            est += k;
            err += e;
        }
        (est / (2.0 * PI), err / (2.0 * PI))
    }
}

/// Builds the cell tree over `{|z|² <= s_max}` for the level `t`.
pub fn build_tree<F: ScalarField + ?Sized>(
    field: &F,
    t: f64,
    s_max: f64,
    cfg: &LevelConfig,
    keep_leaves: bool,
) -> CellTree {
    let v_max = -(-s_max).ln_1p();
    if !(v_max > 0.0) {
        return CellTree {
            t,
            v_max: 0.0,
            leaves: Vec::new(),
            inside: 0.0,
            boundary: 0.0,
            value: 0.0,
            err: 0.0,
        };
    }
    let builder = Builder {
        field,
        t,
        cfg: *cfg,
        keep_leaves,
    };
    let nv = cfg.init_radial.max(1);
    let nt = cfg.init_angular.max(1);
    // Initial rings are uniform in |z| so that features of a fixed Euclidean
    // size are sampled alike everywhere.
    let ring = |i: usize| {
        if i == nv {
            return v_max;
        }
        let r = i as f64 / nv as f64;
        -(-s_max * r * r).ln_1p()
    };
    let roots: Vec<Cell> = (0..nv * nt)
        .map(|k| {
            let (i, j) = (k / nt, k % nt);
            Cell {
                v1: ring(i),
                v2: ring(i + 1),
                th1: 2.0 * PI * j as f64 / nt as f64,
                th2: 2.0 * PI * (j + 1) as f64 / nt as f64,
                depth: 0,
                tag: CellTag::Boundary,
            }
        })
        .collect();
    let parts: Vec<Partial> = roots
        .into_par_iter()
        .map(|cell| {
            let mut out = Partial::new();
            builder.visit(cell, &mut out);
            out
        })
        .collect();

    let mut inside = KahanSum::new();
    let mut boundary = KahanSum::new();
    let mut value = KahanSum::new();
    let mut err = 0.0;
    let mut leaves = Vec::new();
    for part in parts {
        inside.add(part.inside.value());
        boundary.add(part.boundary.value());
        value.add(part.value.value());
        err += part.err;
        leaves.extend(part.leaves);
    }
    let value = value.value();
    let inside = inside.value();
    let boundary = boundary.value();
    // Rounding in the root finder and the summation.
    let err = (err + 1e-12 * (1.0 + value)).min(boundary.max(1e-12 * (1.0 + value)));
    CellTree {
        t,
        v_max,
        leaves,
        inside,
        boundary,
        value,
        err,
    }
}
