//! Concrete immersions: affine patches, closures and surfaces of revolution.

use core::f64::consts::TAU;
#[allow(unused_imports)]
use num_traits::Float;

use crate::geometry::{Domain, Immersion, Jet};
use crate::linalg::Vec4;
use crate::rotational::{slope_jet, RotationalProfile};

/// `F(x₁, x₂) = origin + x₁ u + x₂ v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffinePatch {
    pub origin: Vec4,
    pub u: Vec4,
    pub v: Vec4,
    pub domain: Domain,
    pub beta: f64,
}

impl AffinePatch {
    pub fn new(u: Vec4, v: Vec4, domain: Domain, beta: f64) -> Self {
        AffinePatch { origin: Vec4::ZERO, u, v, domain, beta }
    }
}

impl Immersion for AffinePatch {
    fn jet(&self, p: [f64; 2]) -> Jet {
        Jet {
            pos: self.origin + self.u * p[0] + self.v * p[1],
            d: [self.u, self.v],
            dd: [[Vec4::ZERO; 2]; 2],
        }
    }
    fn domain(&self) -> Domain {
        self.domain
    }
    fn beta(&self) -> f64 {
        self.beta
    }
}

/// Immersion backed by a jet-valued closure.
#[derive(Clone, Copy)]
pub struct FnImmersion<F> {
    pub eval: F,
    pub domain: Domain,
    pub beta: f64,
}

impl<F: Fn([f64; 2]) -> Jet> FnImmersion<F> {
    pub fn new(eval: F, domain: Domain, beta: f64) -> Self {
        FnImmersion { eval, domain, beta }
    }
}

impl<F: Fn([f64; 2]) -> Jet> Immersion for FnImmersion<F> {
    fn jet(&self, p: [f64; 2]) -> Jet {
        (self.eval)(p)
    }
    fn domain(&self) -> Domain {
        self.domain
    }
    fn beta(&self) -> f64 {
        self.beta
    }
}

/// Profile curves `f, g` of a surface of revolution with two derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RadialJet {
    pub f: f64,
    pub g: f64,
    pub fp: f64,
    pub gp: f64,
    pub fpp: f64,
    pub gpp: f64,
}

/// A radial profile defined on `[lo, hi]` with `lo > 0`.
pub trait Radial {
    fn radial(&self, r: f64) -> RadialJet;
    fn range(&self) -> [f64; 2];
}

impl<T: Radial + ?Sized> Radial for &T {
    fn radial(&self, r: f64) -> RadialJet {
        (**self).radial(r)
    }
    fn range(&self) -> [f64; 2] {
        (**self).range()
    }
}

/// `F(r, θ) = (r cos θ, r sin θ, f(r), g(r))` on `[lo, hi] × [0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationalSurface<R> {
    pub radial: R,
    pub beta: f64,
    pub domain: Domain,
}

impl<R: Radial> RotationalSurface<R> {
    pub fn new(radial: R, beta: f64) -> Self {
        let [lo, hi] = radial.range();
        let domain = Domain { lo: [lo, 0.0], hi: [hi, TAU], periodic: [false, true] };
        RotationalSurface { radial, beta, domain }
    }

    /// Same surface restricted to `r ∈ [lo, hi]`.
    pub fn with_radii(mut self, lo: f64, hi: f64) -> Self {
        self.domain.lo[0] = lo;
        self.domain.hi[0] = hi;
        self
    }
}

impl<R: Radial> Immersion for RotationalSurface<R> {
    fn jet(&self, p: [f64; 2]) -> Jet {
        let [r, theta] = p;
        let (s, c) = theta.sin_cos();
        let q = self.radial.radial(r);
        Jet {
            pos: Vec4::new(r * c, r * s, q.f, q.g),
            d: [Vec4::new(c, s, q.fp, q.gp), Vec4::new(-r * s, r * c, 0.0, 0.0)],
            dd: [
                [Vec4::new(0.0, 0.0, q.fpp, q.gpp), Vec4::new(-s, c, 0.0, 0.0)],
                [Vec4::new(-s, c, 0.0, 0.0), Vec4::new(-r * c, -r * s, 0.0, 0.0)],
            ],
        }
    }
    fn domain(&self) -> Domain {
        self.domain
    }
    fn beta(&self) -> f64 {
        self.beta
    }
}

/// Radial data of a solved profile: exact slopes from the first integrals,
/// Hermite-interpolated heights. Yields NaN where the slope equation has no
/// root.
#[derive(Debug, Clone, Copy)]
pub struct ProfileRadial<'a> {
    pub profile: &'a RotationalProfile,
}

impl<'a> ProfileRadial<'a> {
    pub fn new(profile: &'a RotationalProfile) -> Self {
        ProfileRadial { profile }
    }
}

impl Radial for ProfileRadial<'_> {
    fn radial(&self, r: f64) -> RadialJet {
        let p = self.profile;
        match slope_jet(r, p.beta, p.c1, p.c2) {
            Ok(s) => {
                let (f, g) = p.interpolate(r);
                RadialJet { f, g, fp: s.fp, gp: s.gp, fpp: s.fpp, gpp: s.gpp }
            }
            Err(_) => RadialJet {
                f: f64::NAN,
                g: f64::NAN,
                fp: f64::NAN,
                gp: f64::NAN,
                fpp: f64::NAN,
                gpp: f64::NAN,
            },
        }
    }
    fn range(&self) -> [f64; 2] {
        let r = &self.profile.r;
        [r[0], r[r.len() - 1]]
    }
}

/// Radial profile given by a closure.
#[derive(Clone, Copy)]
pub struct ClosureRadial<F> {
    pub eval: F,
    pub range: [f64; 2],
}

impl<F: Fn(f64) -> RadialJet> ClosureRadial<F> {
    pub fn new(eval: F, range: [f64; 2]) -> Self {
        ClosureRadial { eval, range }
    }
}

impl<F: Fn(f64) -> RadialJet> Radial for ClosureRadial<F> {
    fn radial(&self, r: f64) -> RadialJet {
        (self.eval)(r)
    }
    fn range(&self) -> [f64; 2] {
        self.range
    }
}

/// Adds `amplitude · (sin(k r), cos(k r))` to the heights of another
/// profile; used to build non-critical neighbours of critical surfaces.
#[derive(Debug, Clone, Copy)]
pub struct Perturbed<R> {
    pub base: R,
    pub amplitude: f64,
    pub wavenumber: f64,
}

impl<R: Radial> Radial for Perturbed<R> {
    fn radial(&self, r: f64) -> RadialJet {
        let b = self.base.radial(r);
        let (a, k) = (self.amplitude, self.wavenumber);
        let (s, c) = (k * r).sin_cos();
        RadialJet {
            f: b.f + a * s,
            g: b.g + a * c,
            fp: b.fp + a * k * c,
            gp: b.gp - a * k * s,
            fpp: b.fpp - a * k * k * s,
            gpp: b.gpp - a * k * k * c,
        }
    }
    fn range(&self) -> [f64; 2] {
        self.base.range()
    }
}

/// The `β = 0` solution `f = c₁ cosh⁻¹(r/c)`, `g = c₂ cosh⁻¹(r/c)`,
/// `c = √(c₁² + c₂²)`, on `[lo, hi]` with `lo > c`.
pub fn catenoid_radial(c1: f64, c2: f64, range: [f64; 2]) -> ClosureRadial<impl Fn(f64) -> RadialJet + Copy> {
    let c = c1.hypot(c2);
    ClosureRadial::new(
        move |r: f64| {
            let s = (r * r - c * c).sqrt();
            let h = (r / c).acosh();
            let k = -r / (s * s * s);
            RadialJet { f: c1 * h, g: c2 * h, fp: c1 / s, gp: c2 / s, fpp: c1 * k, gpp: c2 * k }
        },
        range,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{evaluate_geometry, mean_curvature};

    #[test]
    fn rotational_jet_matches_tangent_formulas() {
        let radial = ClosureRadial::new(
            |r: f64| RadialJet { f: r, g: r, fp: 1.0 / 2f64.sqrt(), gp: 1.0 / 2f64.sqrt(), fpp: 0.0, gpp: 0.0 },
            [0.5, 2.0],
        );
        let surface = RotationalSurface::new(radial, 2.0);
        let geo = evaluate_geometry(&surface, [1.0, 0.3]).unwrap();
        assert!((geo.det_g - 2.0).abs() < 1e-14);
        assert!((geo.cos_alpha - 0.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn catenoid_is_minimal() {
        let surface = RotationalSurface::new(catenoid_radial(1.0, 1.0, [1.5, 20.0]), 0.0);
        for r in [1.5, 2.0, 7.0, 19.0] {
            let h = mean_curvature(&surface, [r, 1.1]).unwrap();
            assert!(h.norm() < 1e-12, "r = {r}: {}", h.norm());
        }
    }
}
