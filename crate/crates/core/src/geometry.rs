//! Points of the unit disk, Möbius maps, the hyperbolic measure
//! `dm = dx dy / (π (1 - |z|²)²)` and normalized reproducing kernels.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points with `|z| >= 1 - BOUNDARY_MARGIN` are rejected.
pub const BOUNDARY_MARGIN: f64 = 1e-15;

/// A point strictly inside the unit disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct DiskPoint {
    re: f64,
    im: f64,
}

impl DiskPoint {
    pub const ORIGIN: DiskPoint = DiskPoint { re: 0.0, im: 0.0 };

    pub fn new(re: f64, im: f64) -> Result<Self> {
        if !(re.is_finite() && im.is_finite()) {
            return Err(Error::Domain(format!("non-finite disk point ({re}, {im})")));
        }
        if re.hypot(im) >= 1.0 - BOUNDARY_MARGIN {
            return Err(Error::Domain(format!(
                "point ({re}, {im}) is not strictly inside the unit disk"
            )));
        }
        Ok(Self { re, im })
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        Self::new(z.re, z.im)
    }

    pub fn from_polar(r: f64, theta: f64) -> Result<Self> {
        Self::new(r * theta.cos(), r * theta.sin())
    }

    pub fn re(&self) -> f64 {
        self.re
    }

    pub fn im(&self) -> f64 {
        self.im
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn abs(&self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn neg(self) -> Self {
        Self {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl TryFrom<[f64; 2]> for DiskPoint {
    type Error = Error;

    fn try_from(v: [f64; 2]) -> Result<Self> {
        DiskPoint::new(v[0], v[1])
    }
}

impl From<DiskPoint> for [f64; 2] {
    fn from(p: DiskPoint) -> Self {
        [p.re, p.im]
    }
}

/// The pair `(p, α)` naming `A^p_α`; `α = 1` is the Hardy space `H^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpaceParams")]
pub struct SpaceParams {
    p: f64,
    alpha: f64,
}

#[derive(Deserialize)]
struct RawSpaceParams {
    p: f64,
    alpha: f64,
}

impl TryFrom<RawSpaceParams> for SpaceParams {
    type Error = Error;

    fn try_from(raw: RawSpaceParams) -> Result<Self> {
        SpaceParams::new(raw.p, raw.alpha)
    }
}

impl SpaceParams {
    pub fn new(p: f64, alpha: f64) -> Result<Self> {
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::InvalidParameter(format!("p must be positive, got {p}")));
        }
        if !(alpha.is_finite() && alpha >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be at least 1, got {alpha}"
            )));
        }
        Ok(Self { p, alpha })
    }

    pub fn hardy(p: f64) -> Result<Self> {
        Self::new(p, 1.0)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn is_hardy(&self) -> bool {
        self.alpha == 1.0
    }

    /// `r = p / α`, constant along a contraction chain.
    pub fn ratio(&self) -> f64 {
        self.p / self.alpha
    }

    /// Exponent `2α/p` of `(1 - zw)` in the kernel denominator.
    pub fn kernel_exponent(&self) -> f64 {
        2.0 * self.alpha / self.p
    }
}

/// `z ↦ (z - w̄) / (1 - z w)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobiusMap {
    pub w: DiskPoint,
}

impl MobiusMap {
    pub fn new(w: DiskPoint) -> Self {
        Self { w }
    }

    pub fn inverse(&self) -> Self {
        Self { w: self.w.neg() }
    }

    pub fn apply(&self, z: DiskPoint) -> DiskPoint {
        let image = self.apply_closed(z.to_complex());
        // |image| < 1 analytically; clamp the rounding excursion for points
        // already at the margin.
        let r = image.norm();
        if r >= 1.0 - BOUNDARY_MARGIN {
            let scaled = image * ((1.0 - 2.0 * BOUNDARY_MARGIN) / r);
            DiskPoint {
                re: scaled.re,
                im: scaled.im,
            }
        } else {
            DiskPoint {
                re: image.re,
                im: image.im,
            }
        }
    }

    /// The same formula on the closed disk; maps the unit circle onto itself.
    pub fn apply_closed(&self, z: Complex64) -> Complex64 {
        let w = self.w.to_complex();
        (z - w.conj()) / (Complex64::new(1.0, 0.0) - z * w)
    }
}

pub fn mobius_apply(m: &MobiusMap, z: DiskPoint) -> DiskPoint {
    m.apply(z)
}

/// Hyperbolic measure of the centered disk `{|z| < radius}`: `R²/(1 - R²)`.
pub fn hyperbolic_area_of_disk(radius: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&radius) {
        return Err(Error::Domain(format!(
            "radius must lie in [0, 1), got {radius}"
        )));
    }
    let s = radius * radius;
    Ok(s / (1.0 - s))
}

/// Hyperbolic measure of the polar cell `{s1 < |z|² < s2, θ1 < arg z < θ2}`.
pub fn polar_cell_measure(s1: f64, s2: f64, dtheta: f64) -> f64 {
    dtheta / (2.0 * std::f64::consts::PI) * (area_coordinate(s2) - area_coordinate(s1))
}

/// `σ(s) = s / (1 - s)`: hyperbolic measure of `{|z|² < s}`.
pub fn area_coordinate(s: f64) -> f64 {
    s / (1.0 - s)
}

/// Density of the hyperbolic length element, `1 / ((1 - |z|²) √π)`.
pub fn length_density(z: Complex64) -> f64 {
    1.0 / ((1.0 - z.norm_sqr()) * std::f64::consts::PI.sqrt())
}

/// Normalized kernel `(1 - |w|²)^{α/p} (1 - z w)^{-2α/p}` (principal branch).
pub fn kernel_eval(w: DiskPoint, sp: SpaceParams, z: DiskPoint) -> Complex64 {
    kernel_eval_closed(w, sp, z.to_complex())
}

pub fn kernel_eval_closed(w: DiskPoint, sp: SpaceParams, z: Complex64) -> Complex64 {
    if w.re == 0.0 && w.im == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let beta = sp.kernel_exponent();
    let scale = (1.0 - w.norm_sqr()).powf(0.5 * beta);
    let base = Complex64::new(1.0, 0.0) - z * w.to_complex();
    // 1 - zw lies in the right half-plane, so ln is continuous there.
    scale * (-beta * base.ln()).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(re: f64, im: f64) -> DiskPoint {
        DiskPoint::new(re, im).unwrap()
    }

    #[test]
    fn rejects_boundary_points() {
        assert!(DiskPoint::new(1.0, 0.0).is_err());
        assert!(DiskPoint::new(0.6, 0.8).is_err());
        assert!(DiskPoint::new(f64::NAN, 0.0).is_err());
        assert!(DiskPoint::new(0.6, 0.79).is_ok());
    }

    #[test]
    fn disk_area_closed_form() {
        assert_eq!(hyperbolic_area_of_disk(0.0).unwrap(), 0.0);
        let r = 0.5f64.sqrt();
        assert!((hyperbolic_area_of_disk(r).unwrap() - 1.0).abs() < 1e-15);
        for t in [0.1, 0.3, 0.77] {
            let r = (1.0f64 - t).sqrt();
            let m = hyperbolic_area_of_disk(r).unwrap();
            assert!((m - (1.0 / t - 1.0)).abs() < 1e-12);
        }
        assert!(hyperbolic_area_of_disk(1.0).is_err());
        assert!(hyperbolic_area_of_disk(-0.1).is_err());
    }

    #[test]
    fn disk_area_matches_polar_integration() {
        // 2 ∫_0^R r (1 - r²)^{-2} dr by composite Simpson.
        let radius = 0.5f64.sqrt();
        let n = 2000;
        let h = radius / n as f64;
        let f = |r: f64| 2.0 * r / (1.0 - r * r).powi(2);
        let mut acc = f(0.0) + f(radius);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(i as f64 * h);
        }
        let integral = acc * h / 3.0;
        assert!((integral - 1.0).abs() < 1e-10);
    }

    #[test]
    fn disk_area_increasing() {
        let mut prev = -1.0;
        for i in 0..1000 {
            let r = i as f64 / 1000.0;
            let m = hyperbolic_area_of_disk(r).unwrap();
            assert!(m > prev);
            prev = m;
        }
        assert!(hyperbolic_area_of_disk(1.0 - 1e-12).unwrap() > 1e11);
    }

    #[test]
    fn mobius_examples() {
        let z = pt(0.3, -0.2);
        assert_eq!(MobiusMap::new(DiskPoint::ORIGIN).apply(z), z);
        let w = pt(0.4, 0.25);
        let zero = MobiusMap::new(w).apply(pt(0.4, -0.25));
        assert!(zero.abs() < 1e-16);
        let half = MobiusMap::new(pt(0.5, 0.0)).apply(pt(0.5, 0.0));
        assert!(half.abs() < 1e-16);
    }

    #[test]
    fn mobius_inverse_roundtrip() {
        let m = MobiusMap::new(pt(-0.6, 0.3));
        let z = pt(0.1, 0.85);
        let back = m.inverse().apply(m.apply(z));
        assert!((back.to_complex() - z.to_complex()).norm() < 1e-13);
    }

    #[test]
    fn kernel_examples() {
        let sp = SpaceParams::new(2.0, 1.0).unwrap();
        let z = pt(0.2, 0.7);
        assert_eq!(kernel_eval(DiskPoint::ORIGIN, sp, z), Complex64::new(1.0, 0.0));
        let w = pt(0.3, -0.4);
        let at_origin = kernel_eval(w, sp, DiskPoint::ORIGIN);
        assert!((at_origin.re - (1.0 - 0.25f64).powf(0.5)).abs() < 1e-15);
        assert!(at_origin.im.abs() < 1e-15);
        let v = kernel_eval(pt(0.5, 0.0), sp, pt(0.5, 0.0));
        // (3/4)^{1/2} / (3/4) evaluated independently as 2/√3.
        assert!((v.re - 2.0 / 3.0f64.sqrt()).abs() < 1e-14);
        assert!((v.re - 1.1547005383792515).abs() < 1e-14);
    }

    #[test]
    fn kernel_fractional_exponent_branch() {
        // (1 - zw)^{-β} agrees with the real power when 1 - zw is real.
        let sp = SpaceParams::new(0.7, 1.3).unwrap();
        let beta = sp.kernel_exponent();
        let w = pt(0.6, 0.0);
        let z = pt(-0.9, 0.0);
        let expected = (1.0f64 - 0.36).powf(beta / 2.0) * (1.0f64 + 0.54).powf(-beta);
        let got = kernel_eval(w, sp, z);
        assert!((got.re - expected).abs() < 1e-13 && got.im.abs() < 1e-13);
    }

    #[test]
    fn space_params_validation() {
        assert!(SpaceParams::new(0.0, 1.0).is_err());
        assert!(SpaceParams::new(1.0, 0.5).is_err());
        let sp = SpaceParams::new(3.0, 1.5).unwrap();
        assert_eq!(sp.ratio(), 2.0);
        assert!(!sp.is_hardy());
        assert!(SpaceParams::hardy(2.0).unwrap().is_hardy());
    }
}
