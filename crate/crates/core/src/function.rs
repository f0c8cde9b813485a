//! Disk-analytic functions built from polynomials, normalized kernels and
//! Möbius-weighted compositions.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coefficients::c_beta_table;
use crate::error::{Error, Result};
use crate::geometry::{kernel_eval_closed, DiskPoint, MobiusMap, SpaceParams};
use crate::norms::{norm, QuadratureConfig};

/// Immutable expression tree of an analytic function on the disk.
///
/// Every variant is continuous up to the unit circle, so evaluation is also
/// offered on the closed disk for boundary quadrature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AnalyticFunction {
    #[serde(rename = "poly")]
    Polynomial { coeffs: Vec<Complex64> },
    Kernel {
        w: DiskPoint,
        #[serde(flatten)]
        sp: SpaceParams,
    },
    #[serde(rename = "mobius")]
    MobiusWeighted {
        base: Box<AnalyticFunction>,
        w: DiskPoint,
        #[serde(flatten)]
        sp: SpaceParams,
    },
    Scaled {
        base: Box<AnalyticFunction>,
        c: Complex64,
    },
}

impl AnalyticFunction {
    pub fn polynomial(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter(
                "polynomial needs at least one coefficient".into(),
            ));
        }
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::InvalidParameter("non-finite coefficient".into()));
        }
        Ok(Self::Polynomial { coeffs })
    }

    pub fn real_polynomial(coeffs: &[f64]) -> Result<Self> {
        Self::polynomial(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn constant(c: f64) -> Self {
        Self::Polynomial {
            coeffs: vec![Complex64::new(c, 0.0)],
        }
    }

    pub fn identity() -> Self {
        Self::Polynomial {
            coeffs: vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        }
    }

    pub fn kernel(w: DiskPoint, sp: SpaceParams) -> Self {
        Self::Kernel { w, sp }
    }

    pub fn scaled(self, c: Complex64) -> Self {
        Self::Scaled {
            base: Box::new(self),
            c,
        }
    }

    pub fn eval(&self, z: DiskPoint) -> Complex64 {
        self.eval_closed(z.to_complex())
    }

    /// Evaluation on the closed disk `|z| <= 1`.
    pub fn eval_closed(&self, z: Complex64) -> Complex64 {
        match self {
            Self::Polynomial { coeffs } => horner(coeffs, z),
            Self::Kernel { w, sp } => kernel_eval_closed(*w, *sp, z),
            Self::MobiusWeighted { base, w, sp } => {
                let inner = MobiusMap::new(*w).apply_closed(z);
                base.eval_closed(inner) * kernel_eval_closed(*w, *sp, z)
            }
            Self::Scaled { base, c } => *c * base.eval_closed(z),
        }
    }

    /// An upper bound for `sup_{|z| < 1} |f(z)|`.
    pub fn sup_modulus_bound(&self) -> f64 {
        match self {
            Self::Polynomial { coeffs } => coeffs.iter().map(|c| c.norm()).sum(),
            Self::Kernel { w, sp } => kernel_sup(*w, *sp),
            Self::MobiusWeighted { base, w, sp } => base.sup_modulus_bound() * kernel_sup(*w, *sp),
            Self::Scaled { base, c } => c.norm() * base.sup_modulus_bound(),
        }
    }

    pub fn is_zero_polynomial(&self) -> bool {
        matches!(self, Self::Polynomial { coeffs } if coeffs.iter().all(|c| c.norm() == 0.0))
    }

    /// Finite zeros in the plane (for kernels there are none). Used to place
    /// quadrature breakpoints where `|f|^p` is not smooth.
    pub fn zeros(&self) -> Vec<Complex64> {
        match self {
            Self::Polynomial { coeffs } => polynomial_roots(coeffs),
            Self::Kernel { .. } => Vec::new(),
            Self::MobiusWeighted { base, w, .. } => {
                // f(φ_w(z)) = 0 iff z = φ_{-w}(ζ) for a zero ζ of f.
                let inv = MobiusMap::new(w.neg());
                base.zeros()
                    .into_iter()
                    .map(|zeta| inv.apply_closed(zeta))
                    .filter(|z| z.re.is_finite() && z.im.is_finite())
                    .collect()
            }
            Self::Scaled { base, c } => {
                if c.norm() == 0.0 {
                    Vec::new()
                } else {
                    base.zeros()
                }
            }
        }
    }

    /// Coefficients when the function is (a scaled) polynomial.
    pub fn polynomial_coeffs(&self) -> Option<Vec<Complex64>> {
        match self {
            Self::Polynomial { coeffs } => Some(coeffs.clone()),
            Self::Scaled { base, c } => base
                .polynomial_coeffs()
                .map(|v| v.into_iter().map(|a| a * c).collect()),
            _ => None,
        }
    }
}

fn kernel_sup(w: DiskPoint, sp: SpaceParams) -> f64 {
    let beta = sp.kernel_exponent();
    let r = w.abs();
    (1.0 - r * r).powf(0.5 * beta) / (1.0 - r).powf(beta)
}

pub fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

/// Roots of `Σ c_k z^k` from the companion matrix eigenvalues, polished by
/// Newton steps.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let Some(deg) = coeffs.iter().rposition(|c| c.norm() > 0.0) else {
        return Vec::new();
    };
    let trailing = coeffs.iter().take_while(|c| c.norm() == 0.0).count();
    let mut roots = vec![Complex64::new(0.0, 0.0); trailing];
    let reduced = &coeffs[trailing..=deg];
    let n = reduced.len() - 1;
    if n == 0 {
        return roots;
    }
    let lead = reduced[n];
    let mut companion = DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n {
        companion[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..n {
        companion[(i, n - 1)] = -reduced[i] / lead;
    }
    let eig = companion
        .clone()
        .schur()
        .unpack()
        .1
        .diagonal();
    let deriv: Vec<Complex64> = reduced
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * k as f64)
        .collect();
    for mut z in eig.iter().copied() {
        for _ in 0..3 {
            let d = horner(&deriv, z);
            if d.norm() == 0.0 {
                break;
            }
            let step = horner(reduced, z) / d;
            if !(step.re.is_finite() && step.im.is_finite()) {
                break;
            }
            z -= step;
        }
        roots.push(z);
    }
    roots
}

pub fn eval(f: &AnalyticFunction, z: DiskPoint) -> Complex64 {
    f.eval(z)
}

/// `f ↦ f(φ_w(z)) · k_w(z)`: the isometry of `A^p_α` induced by a disk automorphism.
pub fn mobius_shift(f: &AnalyticFunction, w: DiskPoint, sp: SpaceParams) -> AnalyticFunction {
    AnalyticFunction::MobiusWeighted {
        base: Box::new(f.clone()),
        w,
        sp,
    }
}

/// First `n + 1` Taylor coefficients.
pub fn taylor_coeffs(f: &AnalyticFunction, n: usize) -> Result<Vec<Complex64>> {
    match f {
        AnalyticFunction::Polynomial { coeffs } => {
            let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
            for (slot, c) in out.iter_mut().zip(coeffs) {
                *slot = *c;
            }
            Ok(out)
        }
        AnalyticFunction::Kernel { w, sp } => {
            let beta = sp.kernel_exponent();
            let scale = (1.0 - w.norm_sqr()).powf(0.5 * beta);
            let weights = c_beta_table(beta, n);
            let wc = w.to_complex();
            let mut power = Complex64::new(1.0, 0.0);
            let mut out = Vec::with_capacity(n + 1);
            for c in weights.values() {
                out.push(power * (scale * c));
                power *= wc;
            }
            Ok(out)
        }
        AnalyticFunction::Scaled { base, c } => {
            Ok(taylor_coeffs(base, n)?.into_iter().map(|a| a * c).collect())
        }
        AnalyticFunction::MobiusWeighted { w, .. } => {
            let rho = 0.5 + 0.4 * (1.0 - w.abs());
            let nodes = (8 * n).max(256);
            let (coeffs, errors) = cauchy_coeffs(f, n, rho, nodes);
            let scale = coeffs.iter().map(|c| c.norm()).fold(1.0, f64::max);
            if let Some((k, e)) = errors
                .iter()
                .enumerate()
                .find(|(_, &e)| e > 1e-8 * scale)
            {
                return Err(Error::CoefficientPrecision {
                    requested: k.max(n),
                    achieved: *e,
                });
            }
            Ok(coeffs)
        }
    }
}

/// Taylor coefficients by the trapezoid rule on `|z| = rho`, with a
/// per-coefficient rounding-error estimate `ε · max|f| / ρ^k`.
pub fn cauchy_coeffs(
    f: &AnalyticFunction,
    n: usize,
    rho: f64,
    nodes: usize,
) -> (Vec<Complex64>, Vec<f64>) {
    assert!(nodes > n, "need more nodes than coefficients");
    let samples: Vec<Complex64> = (0..nodes)
        .map(|k| {
            let theta = 2.0 * PI * k as f64 / nodes as f64;
            f.eval_closed(Complex64::from_polar(rho, theta))
        })
        .collect();
    let fmax = samples.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut coeffs = Vec::with_capacity(n + 1);
    let mut errors = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let mut re = crate::numeric::KahanSum::new();
        let mut im = crate::numeric::KahanSum::new();
        for (k, v) in samples.iter().enumerate() {
            // e^{-i j θ_k}, with the index reduced to keep the angle small.
            let idx = (j * k) % nodes;
            let phase = Complex64::from_polar(1.0, -2.0 * PI * idx as f64 / nodes as f64);
            let term = v * phase;
            re.add(term.re);
            im.add(term.im);
        }
        let scale = rho.powi(-(j as i32)) / nodes as f64;
        coeffs.push(Complex64::new(re.value(), im.value()) * scale);
        errors.push(4.0 * f64::EPSILON * fmax * rho.powi(-(j as i32)) * (nodes as f64).sqrt());
    }
    (coeffs, errors)
}

/// Returns `c · f` with real `c > 0` so that `‖c f‖_sp = 1`.
pub fn normalize(
    f: &AnalyticFunction,
    sp: SpaceParams,
    cfg: &QuadratureConfig,
) -> Result<AnalyticFunction> {
    if f.is_zero_polynomial() {
        return Err(Error::ZeroFunction);
    }
    let value = norm(f, sp, cfg)?;
    if !(value > 0.0 && value.is_finite()) {
        return Err(Error::ZeroFunction);
    }
    Ok(f.clone().scaled(Complex64::new(1.0 / value, 0.0)))
}

/// `u(z) = |f(z)|^a (1 - |z|²)^b`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointwiseFunction {
    pub f: AnalyticFunction,
    pub a: f64,
    pub b: f64,
}

impl PointwiseFunction {
    pub fn new(f: AnalyticFunction, a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "exponents must be positive, got a = {a}, b = {b}"
            )));
        }
        Ok(Self { f, a, b })
    }

    pub fn value(&self, z: Complex64) -> f64 {
        let s = z.norm_sqr();
        if s >= 1.0 {
            return 0.0;
        }
        let m = self.f.eval_closed(z).norm_sqr();
        let fa = if self.a == 2.0 { m } else { m.powf(0.5 * self.a) };
        let w = if self.b == 1.0 {
            1.0 - s
        } else {
            (1.0 - s).powf(self.b)
        };
        fa * w
    }

    /// A `|z|²` beyond which `u` cannot exceed `t`, with a small margin so
    /// that the level curve never sits on the cut.
    pub fn working_s_max(&self, t: f64) -> f64 {
        let bound = self.f.sup_modulus_bound().powf(self.a);
        if bound <= t {
            return 0.0;
        }
        (1.0 - 0.999 * (t / bound).powf(1.0 / self.b)).min(1.0 - 1e-15)
    }
}

impl fmt::Display for AnalyticFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", serde_json::to_string(self).map_err(|_| fmt::Error)?)
    }
}

/// Inline syntax used on the command line: `poly:c0,c1,…` (each `c` real or
/// `a+bi`), `kernel:w_re,w_im,p,alpha`, or a JSON document.
impl FromStr for AnalyticFunction {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if spec.starts_with('{') {
            return serde_json::from_str(spec).map_err(|e| Error::Parse(e.to_string()));
        }
        let (kind, rest) = spec
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected kind:args, got {spec:?}")))?;
        match kind {
            "poly" => {
                let coeffs = rest
                    .split(',')
                    .map(parse_complex)
                    .collect::<Result<Vec<_>>>()?;
                AnalyticFunction::polynomial(coeffs)
            }
            "kernel" => {
                let vals = rest
                    .split(',')
                    .map(|v| {
                        v.trim()
                            .parse::<f64>()
                            .map_err(|e| Error::Parse(format!("{v:?}: {e}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                if vals.len() != 4 {
                    return Err(Error::Parse(
                        "kernel spec needs w_re,w_im,p,alpha".into(),
                    ));
                }
                Ok(AnalyticFunction::kernel(
                    DiskPoint::new(vals[0], vals[1])?,
                    SpaceParams::new(vals[2], vals[3])?,
                ))
            }
            other => Err(Error::Parse(format!("unknown function kind {other:?}"))),
        }
    }
}

/// Parses `1.5`, `-2i`, `0.3+0.4i`, `1e-3-2e-1i`.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let t = text.trim();
    let bad = || Error::Parse(format!("cannot parse complex number {t:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    if let Some(body) = t.strip_suffix('i') {
        // Split at the last sign that is not part of an exponent.
        let bytes = body.as_bytes();
        let mut split = None;
        for i in (1..bytes.len()).rev() {
            if (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E') {
                split = Some(i);
                break;
            }
        }
        let (re, im) = match split {
            Some(i) => (&body[..i], &body[i..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => "1",
            "-" => "-1",
            s => s,
        };
        let re: f64 = re.parse().map_err(|_| bad())?;
        let im: f64 = im.parse().map_err(|_| bad())?;
        Ok(Complex64::new(re, im))
    } else {
        Ok(Complex64::new(t.parse().map_err(|_| bad())?, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pt(re: f64, im: f64) -> DiskPoint {
        DiskPoint::new(re, im).unwrap()
    }

    fn grid() -> Vec<DiskPoint> {
        let mut pts = Vec::new();
        for i in 0..10 {
            for j in 0..10 {
                let r = 0.95 * (i as f64 + 0.5) / 10.0;
                let th = 2.0 * PI * j as f64 / 10.0 + 0.1 * i as f64;
                pts.push(DiskPoint::from_polar(r, th).unwrap());
            }
        }
        pts
    }

    #[test]
    fn eval_examples() {
        let one = AnalyticFunction::constant(1.0);
        assert_eq!(one.eval(pt(0.5, -0.3)), c(1.0, 0.0));
        assert_eq!(AnalyticFunction::identity().eval(pt(0.3, 0.4)), c(0.3, 0.4));
        let k = AnalyticFunction::kernel(pt(0.5, 0.0), SpaceParams::new(2.0, 1.0).unwrap());
        let v = k.eval(DiskPoint::ORIGIN);
        assert!((v.re - 0.75f64.sqrt()).abs() < 1e-15);
        assert!((v.re - 0.8660254037844386).abs() < 1e-15);
    }

    #[test]
    fn shift_of_constant_is_kernel() {
        let sp = SpaceParams::new(1.5, 2.5).unwrap();
        let w = pt(-0.35, 0.6);
        let shifted = mobius_shift(&AnalyticFunction::constant(1.0), w, sp);
        let k = AnalyticFunction::kernel(w, sp);
        for z in grid() {
            assert!((shifted.eval(z) - k.eval(z)).norm() < 1e-12);
        }
    }

    #[test]
    fn shift_by_zero_is_identity() {
        let f = AnalyticFunction::polynomial(vec![c(0.2, 0.1), c(-1.0, 0.5), c(0.3, 0.0)]).unwrap();
        let g = mobius_shift(&f, DiskPoint::ORIGIN, SpaceParams::new(2.0, 3.0).unwrap());
        for z in grid() {
            assert!((g.eval(z) - f.eval(z)).norm() < 1e-14);
        }
    }

    #[test]
    fn shift_group_law() {
        let f = AnalyticFunction::polynomial(vec![c(0.2, 0.1), c(-1.0, 0.5), c(0.3, -0.7)]).unwrap();
        let sp = SpaceParams::new(0.8, 1.0).unwrap();
        let w = pt(0.45, -0.3);
        let back = mobius_shift(&mobius_shift(&f, w, sp), w.neg(), sp);
        for z in grid() {
            let ratio = back.eval(z) / f.eval(z);
            assert!((ratio.norm() - 1.0).abs() < 1e-10);
            assert!((back.eval(z) - f.eval(z)).norm() < 1e-10);
        }
    }

    #[test]
    fn shift_definitional_identity() {
        let f = AnalyticFunction::polynomial(vec![c(1.0, 0.0), c(0.0, 2.0)]).unwrap();
        let sp = SpaceParams::new(3.0, 2.0).unwrap();
        let w = pt(0.1, 0.7);
        let g = mobius_shift(&f, w, sp);
        for z in grid() {
            let expected =
                f.eval(MobiusMap::new(w).apply(z)) * crate::geometry::kernel_eval(w, sp, z);
            assert!((g.eval(z) - expected).norm() <= 1e-14 * expected.norm().max(1.0));
        }
    }

    #[test]
    fn taylor_examples() {
        let f = AnalyticFunction::polynomial(vec![c(3.0, 0.0), c(0.0, 0.0), c(0.0, 2.0)]).unwrap();
        assert_eq!(
            taylor_coeffs(&f, 4).unwrap(),
            vec![c(3.0, 0.0), c(0.0, 0.0), c(0.0, 2.0), c(0.0, 0.0), c(0.0, 0.0)]
        );
        let sp = SpaceParams::new(2.0, 1.0).unwrap();
        let w = pt(0.3, 0.4);
        let a = taylor_coeffs(&AnalyticFunction::kernel(w, sp), 6).unwrap();
        let scale = (1.0 - 0.25f64).sqrt();
        let mut power = c(1.0, 0.0);
        for coeff in a {
            assert!((coeff - power * scale).norm() < 1e-15);
            power *= w.to_complex();
        }
        let trivial = taylor_coeffs(&AnalyticFunction::kernel(DiskPoint::ORIGIN, sp), 3).unwrap();
        assert_eq!(trivial, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    }

    #[test]
    fn kernel_series_matches_cauchy_quadrature() {
        for &(wr, wi) in &[(0.8, 0.0), (0.0, -0.7), (0.3, 0.5), (-0.56, 0.56)] {
            for &(p, alpha) in &[(2.0, 1.0), (1.0, 1.0), (0.5, 2.0), (3.0, 1.7)] {
                let w = pt(wr, wi);
                let f = AnalyticFunction::kernel(w, SpaceParams::new(p, alpha).unwrap());
                let series = taylor_coeffs(&f, 20).unwrap();
                let rho = 0.5 + 0.4 * (1.0 - w.abs());
                let (quad, _) = cauchy_coeffs(&f, 20, rho, 256);
                for (s, q) in series.iter().zip(&quad) {
                    assert!((s - q).norm() < 1e-9, "{s} vs {q}");
                }
            }
        }
    }

    #[test]
    fn mobius_taylor_via_cauchy() {
        // Shifting the constant gives the kernel, whose series is known.
        let sp = SpaceParams::new(2.0, 2.0).unwrap();
        let w = pt(0.2, -0.4);
        let g = mobius_shift(&AnalyticFunction::constant(1.0), w, sp);
        let got = taylor_coeffs(&g, 12).unwrap();
        let expected = taylor_coeffs(&AnalyticFunction::kernel(w, sp), 12).unwrap();
        for (a, b) in got.iter().zip(&expected) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn mobius_taylor_precision_flag() {
        let sp = SpaceParams::new(2.0, 1.0).unwrap();
        let g = mobius_shift(&AnalyticFunction::identity(), pt(0.9, 0.0), sp);
        match taylor_coeffs(&g, 200) {
            Err(Error::CoefficientPrecision { achieved, .. }) => assert!(achieved > 1e-8),
            other => panic!("expected a precision error, got {other:?}"),
        }
    }

    #[test]
    fn json_roundtrip_and_inline_parse() {
        let sp = SpaceParams::new(2.0, 1.0).unwrap();
        let f = mobius_shift(
            &AnalyticFunction::polynomial(vec![c(1.0, 0.0), c(0.5, -0.5)]).unwrap(),
            pt(0.1, 0.2),
            sp,
        )
        .scaled(c(2.0, 0.0));
        let text = serde_json::to_string(&f).unwrap();
        let back: AnalyticFunction = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f);

        let poly: AnalyticFunction =
            serde_json::from_str(r#"{"kind":"poly","coeffs":[[1,0],[0,2]]}"#).unwrap();
        assert_eq!(poly, AnalyticFunction::polynomial(vec![c(1.0, 0.0), c(0.0, 2.0)]).unwrap());
        let k: AnalyticFunction =
            serde_json::from_str(r#"{"kind":"kernel","w":[0.5,0],"p":2,"alpha":1}"#).unwrap();
        assert_eq!(k, AnalyticFunction::kernel(pt(0.5, 0.0), sp));
        assert!(serde_json::from_str::<AnalyticFunction>(
            r#"{"kind":"kernel","w":[1.5,0],"p":2,"alpha":1}"#
        )
        .is_err());

        assert_eq!("poly:1".parse::<AnalyticFunction>().unwrap(), AnalyticFunction::constant(1.0));
        assert_eq!(
            "poly:0.3+0.4i,-2i,1e-1-1e-2i".parse::<AnalyticFunction>().unwrap(),
            AnalyticFunction::polynomial(vec![c(0.3, 0.4), c(0.0, -2.0), c(0.1, -0.01)]).unwrap()
        );
        assert_eq!(
            "kernel:0.5,0,2,1".parse::<AnalyticFunction>().unwrap(),
            AnalyticFunction::kernel(pt(0.5, 0.0), sp)
        );
        assert!("spline:1,2".parse::<AnalyticFunction>().is_err());
    }

    #[test]
    fn uniform_vanishing_at_boundary() {
        let sp = SpaceParams::new(2.0, 1.0).unwrap();
        let fs = [
            AnalyticFunction::polynomial(vec![c(1.0, 0.5), c(-0.3, 0.0), c(0.0, 0.8)]).unwrap(),
            AnalyticFunction::kernel(pt(0.6, 0.3), sp),
            mobius_shift(&AnalyticFunction::identity(), pt(-0.5, 0.1), sp),
        ];
        for f in fs {
            let u = PointwiseFunction::new(f, 2.0, 1.0).unwrap();
            let band_max = |eps: f64| {
                (0..720)
                    .map(|k| {
                        let th = 2.0 * PI * k as f64 / 720.0;
                        u.value(Complex64::from_polar(1.0 - eps, th))
                    })
                    .fold(0.0, f64::max)
            };
            let m1 = band_max(1e-2);
            let m2 = band_max(1e-4);
            let m3 = band_max(1e-6);
            assert!(m2 < m1 && m3 < m2 && m3 < 1e-4);
        }
    }

    #[test]
    fn sup_bound_dominates_samples() {
        let sp = SpaceParams::new(1.0, 1.0).unwrap();
        let f = mobius_shift(
            &AnalyticFunction::polynomial(vec![c(0.2, 0.0), c(0.9, -0.1), c(0.0, 0.4)]).unwrap(),
            pt(0.7, 0.0),
            sp,
        );
        let bound = f.sup_modulus_bound();
        for k in 0..1000 {
            let z = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 1000.0);
            assert!(f.eval_closed(z).norm() <= bound);
        }
    }
}
