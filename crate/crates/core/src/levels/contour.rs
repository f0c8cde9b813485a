//! Level curves `{u = t}` from the boundary cells of a [`CellTree`] and their
//! hyperbolic length.

use num_complex::Complex64;

use super::cells::{polar_point, Cell, CellTree};
use super::ScalarField;
use crate::error::{Error, Result};
use crate::geometry::length_density;
use crate::numeric::{brent, KahanSum};

/// Samples per cell edge when looking for crossings.
const EDGE_SAMPLES: usize = 9;
/// Chords are refined until the sagitta is this fraction of their length.
const SAGITTA_RATIO: f64 = 2e-4;
const MAX_REFINE_DEPTH: u32 = 24;

#[derive(Debug, Clone)]
pub struct Contour {
    /// Hyperbolic length `∫ |dz| / ((1 - |z|²) √π)`.
    pub length: f64,
    /// Curve pieces chained into polylines.
    pub polylines: Vec<Vec<Complex64>>,
    /// Crossings that could not be paired (an odd count on some cell).
    pub unpaired: usize,
}

struct Walker<'a, F: ScalarField + ?Sized> {
    field: &'a F,
    t: f64,
}

impl<F: ScalarField + ?Sized> Walker<'_, F> {
    fn g(&self, z: Complex64) -> f64 {
        self.field.value(z) - self.t
    }

    /// Crossings on the cell boundary traversed counter-clockwise in
    /// `(θ, v)`: bottom, right, top, left. Positions are in `[0, 4)`.
    fn crossings(&self, cell: &Cell) -> Vec<f64> {
        let mut out = Vec::new();
        for edge in 0..4 {
            let h = |x: f64| self.g(self.cycle_point(cell, edge as f64 + x));
            let mut x0 = 0.0;
            let mut g0 = h(0.0);
            for k in 1..EDGE_SAMPLES {
                let x1 = k as f64 / (EDGE_SAMPLES - 1) as f64;
                let g1 = h(x1);
                if (g0 > 0.0) != (g1 > 0.0) {
                    out.push(edge as f64 + brent(&h, x0, x1, g0, g1, 1e-15));
                }
                x0 = x1;
                g0 = g1;
            }
        }
        out
    }

    fn cycle_point(&self, cell: &Cell, pos: f64) -> Complex64 {
        let edge = (pos.floor() as usize).min(3);
        let x = pos - edge as f64;
        let (v, th) = match edge {
            0 => (cell.v1, cell.th1 + x * (cell.th2 - cell.th1)),
            1 => (cell.v1 + x * (cell.v2 - cell.v1), cell.th2),
            2 => (cell.v2, cell.th2 - x * (cell.th2 - cell.th1)),
            _ => (cell.v2 - x * (cell.v2 - cell.v1), cell.th1),
        };
        polar_point(v, th)
    }

    /// Moves the chord midpoint onto the curve along the chord normal.
    fn project(&self, p: Complex64, q: Complex64) -> Option<Complex64> {
        let d = q - p;
        let len = d.norm();
        let m = 0.5 * (p + q);
        let n = Complex64::new(-d.im, d.re) / len;
        let h = |lam: f64| self.g(m + n * lam);
        let h0 = h(0.0);
        if h0 == 0.0 {
            return Some(m);
        }
        // Search outwards on both sides for the nearest sign change.
        let mut prev = [(0.0, h0), (0.0, h0)];
        let mut step = 0.125 * len;
        while step <= 2.0 * len {
            for (side, sign) in [1.0, -1.0].into_iter().enumerate() {
                let lam = sign * step;
                let hl = h(lam);
                let (a, ha) = prev[side];
                if (ha > 0.0) != (hl > 0.0) {
                    let (lo, hi, glo, ghi) = if a < lam {
                        (a, lam, ha, hl)
                    } else {
                        (lam, a, hl, ha)
                    };
                    let root = brent(&h, lo, hi, glo, ghi, 1e-16 + 1e-13 * len);
                    return Some(m + n * root);
                }
                prev[side] = (lam, hl);
            }
            step *= 2.0;
        }
        None
    }

    /// Refines the chord `p → q` of the curve. Each accepted leaf is pushed as
    /// `(p, m, q)` with `m` the projected midpoint, so consecutive leaves
    /// share endpoints.
    fn trace(&self, p: Complex64, q: Complex64, depth: u32, leaves: &mut Vec<[Complex64; 3]>) {
        let len = (q - p).norm();
        let mid = 0.5 * (p + q);
        if len < 1e-13 || depth >= MAX_REFINE_DEPTH {
            leaves.push([p, mid, q]);
            return;
        }
        match self.project(p, q) {
            Some(m) => {
                let sagitta = (m - mid).norm();
                if sagitta <= SAGITTA_RATIO * len && depth >= 2 {
                    leaves.push([p, m, q]);
                } else {
                    self.trace(p, m, depth + 1, leaves);
                    self.trace(m, q, depth + 1, leaves);
                }
            }
            None => leaves.push([p, mid, q]),
        }
    }
}

/// Hyperbolic length of the quadratic arc through `p`, `m`, `q`
/// (parametrized on `[0, 1]` with `m` at `1/2`), by 5-point Gauss–Legendre.
fn arc_length(&[p, m, q]: &[Complex64; 3]) -> f64 {
    const X: [f64; 5] = [
        0.046910077030668,
        0.2307653449471585,
        0.5,
        0.7692346550528415,
        0.953089922969332,
    ];
    const W: [f64; 5] = [
        0.11846344252809454,
        0.2393143352496832,
        0.28444444444444444,
        0.2393143352496832,
        0.11846344252809454,
    ];
    // γ(τ) = p + τ b + τ² c with γ(1/2) = m, γ(1) = q.
    let b = 4.0 * m - 3.0 * p - q;
    let c = 2.0 * (p + q) - 4.0 * m;
    X.iter()
        .zip(W)
        .map(|(&x, w)| {
            let z = p + b * x + c * (x * x);
            w * length_density(z) * (b + 2.0 * x * c).norm()
        })
        .sum()
}

/// Extracts `{u = t}` from the tree's boundary leaves.
pub fn extract_contour<F: ScalarField + ?Sized>(field: &F, tree: &CellTree) -> Result<Contour> {
    let walker = Walker { field, t: tree.t };
    let mut pieces: Vec<Vec<Complex64>> = Vec::new();
    let mut length = KahanSum::new();
    let mut unpaired = 0;
    for cell in tree.boundary_leaves() {
        let xs = walker.crossings(cell);
        if xs.is_empty() {
            continue;
        }
        if xs.len() % 2 == 1 {
            unpaired += 1;
            continue;
        }
        let center = polar_point(0.5 * (cell.v1 + cell.v2), 0.5 * (cell.th1 + cell.th2));
        let gc = walker.g(center);
        if xs.len() >= 4 && gc.abs() <= 1e-9 * tree.t.abs().max(1e-300) {
            return Err(Error::DegenerateContour {
                t: tree.t,
                suggestion: tree.t * (1.0 + 1e-6),
            });
        }
        // Arcs of the cell boundary between consecutive crossings alternate
        // between the two sides; pair the ends of the arcs on the side
        // opposite to the center.
        let n = xs.len();
        let keep_inside_arcs = gc <= 0.0;
        for k in 0..n {
            let a = xs[k];
            let b = if k + 1 < n { xs[k + 1] } else { xs[0] + 4.0 };
            let mid = (0.5 * (a + b)).rem_euclid(4.0);
            let arc_inside = walker.g(walker.cycle_point(cell, mid)) > 0.0;
            if arc_inside == keep_inside_arcs {
                let p = walker.cycle_point(cell, a);
                let q = walker.cycle_point(cell, b.rem_euclid(4.0));
                let mut leaves = Vec::new();
                walker.trace(p, q, 0, &mut leaves);
                let mut pts = vec![p];
                for leaf in &leaves {
                    length.add(arc_length(leaf));
                    pts.extend_from_slice(&leaf[1..]);
                }
                pieces.push(pts);
            }
        }
    }
    Ok(Contour {
        length: length.value(),
        polylines: chain(pieces),
        unpaired,
    })
}

/// Joins pieces whose endpoints coincide.
fn chain(mut pieces: Vec<Vec<Complex64>>) -> Vec<Vec<Complex64>> {
    const TOL: f64 = 1e-9;
    let mut out: Vec<Vec<Complex64>> = Vec::new();
    while let Some(mut line) = pieces.pop() {
        loop {
            let tail = *line.last().unwrap();
            let head = line[0];
            let found = pieces.iter().position(|p| {
                (p[0] - tail).norm() < TOL
                    || (*p.last().unwrap() - tail).norm() < TOL
                    || (*p.last().unwrap() - head).norm() < TOL
                    || (p[0] - head).norm() < TOL
            });
            let Some(idx) = found else { break };
            let mut p = pieces.swap_remove(idx);
            if (p[0] - tail).norm() < TOL {
                line.extend(p.into_iter().skip(1));
            } else if (*p.last().unwrap() - tail).norm() < TOL {
                p.reverse();
                line.extend(p.into_iter().skip(1));
            } else if (*p.last().unwrap() - head).norm() < TOL {
                p.pop();
                p.extend(line);
                line = p;
            } else {
                p.reverse();
                p.pop();
                p.extend(line);
                line = p;
            }
        }
        out.push(line);
    }
    out.sort_by(|a, b| {
        (a[0].re, a[0].im)
            .partial_cmp(&(b[0].re, b[0].im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    out
}
