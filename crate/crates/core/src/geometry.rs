//! Pointwise differential geometry of a parametric surface in ℂ² = ℝ⁴.
//!
//! Everything here is evaluated from a second-order [`Jet`] of the
//! immersion at a single parameter point. Tangential quantities use the
//! Gram-Schmidt frame `ε₁, ε₂` of the coordinate tangents; the normal frame
//! `e₃, e₄` comes from projecting fixed seed vectors and is oriented so that
//! `(ε₁, ε₂, e₃, e₄)` is positive, which gives `⟨J e₃, e₄⟩ = +cos α`.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::complex::ComplexStructure;
use crate::error::{Error, Result};
use crate::linalg::{det4, mat2_inverse, Mat2, Vec4};
use crate::tolerances::Tolerances;

const J: ComplexStructure = ComplexStructure::standard();

/// Position and partial derivatives of an immersion at one parameter point.
///
/// `d[k] = ∂F/∂x_k`, `dd[k][l] = ∂²F/∂x_k∂x_l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub pos: Vec4,
    pub d: [Vec4; 2],
    pub dd: [[Vec4; 2]; 2],
}

impl Jet {
    /// `|∂₁∂₂F − ∂₂∂₁F|_∞`; should be below 1e-10 for a valid evaluator.
    pub fn symmetry_defect(&self) -> f64 {
        (self.dd[0][1] - self.dd[1][0]).max_abs()
    }
}

/// Parameter rectangle `[lo₁, hi₁] × [lo₂, hi₂]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    /// Directions in which the immersion is periodic with period `hi − lo`.
    pub periodic: [bool; 2],
}

impl Domain {
    pub fn rect(lo: [f64; 2], hi: [f64; 2]) -> Self {
        Domain { lo, hi, periodic: [false, false] }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        (0..2).all(|k| p[k] >= self.lo[k] && p[k] <= self.hi[k])
    }

    pub fn is_inside(&self, inner: &Domain) -> bool {
        (0..2).all(|k| {
            if self.periodic[k] && inner.lo[k] == self.lo[k] && inner.hi[k] == self.hi[k] {
                true
            } else {
                inner.lo[k] > self.lo[k] && inner.hi[k] < self.hi[k]
            }
        })
    }
}

/// A parametric surface in ℝ⁴ with the functional exponent `β` attached.
///
/// Implementations must be pure: the same point always yields the same jet.
pub trait Immersion {
    fn jet(&self, p: [f64; 2]) -> Jet;
    fn domain(&self) -> Domain;
    fn beta(&self) -> f64;
}

impl<T: Immersion + ?Sized> Immersion for &T {
    fn jet(&self, p: [f64; 2]) -> Jet {
        (**self).jet(p)
    }
    fn domain(&self) -> Domain {
        (**self).domain()
    }
    fn beta(&self) -> f64 {
        (**self).beta()
    }
}

/// Pointwise geometric state of an immersed surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceGeometry {
    pub point: [f64; 2],
    pub beta: f64,
    pub position: Vec4,
    /// Coordinate tangents `∂F/∂x₁`, `∂F/∂x₂`.
    pub e1: Vec4,
    pub e2: Vec4,
    pub g: Mat2,
    pub g_inv: Mat2,
    pub det_g: f64,
    /// Orthonormal tangent frame `ε₁, ε₂` obtained by Gram-Schmidt.
    pub frame: [Vec4; 2],
    /// `ε_i = Σ_k to_frame[i][k] ∂F/∂x_k`.
    pub to_frame: Mat2,
    pub e3: Vec4,
    pub e4: Vec4,
    /// Second derivatives `∂²F(ε_i, ε_j)` along the orthonormal frame.
    pub hessian: [[Vec4; 2]; 2],
    /// `h[a][i][j] = ⟨∂²F(ε_i, ε_j), e_{a+3}⟩`.
    pub h: [[[f64; 2]; 2]; 2],
    pub mean_curvature: Vec4,
    pub cos_alpha: f64,
    /// `⟨J ε₁, e₃⟩` and `⟨J ε₁, e₄⟩`.
    pub y: f64,
    pub z: f64,
    /// Set when `cos α` is below the symplectic threshold.
    pub lagrangian: bool,
}

impl SurfaceGeometry {
    pub fn normal_frame(&self) -> [Vec4; 2] {
        [self.e3, self.e4]
    }

    /// Projection onto the normal plane through the normal frame.
    pub fn normal_part(&self, v: &Vec4) -> Vec4 {
        self.e3 * v.dot(&self.e3) + self.e4 * v.dot(&self.e4)
    }

    pub fn tangent_part(&self, v: &Vec4) -> Vec4 {
        self.frame[0] * v.dot(&self.frame[0]) + self.frame[1] * v.dot(&self.frame[1])
    }

    pub fn sin_alpha(&self) -> f64 {
        (1.0 - self.cos_alpha * self.cos_alpha).max(0.0).sqrt()
    }

    /// Area element `√det g`.
    pub fn area_element(&self) -> f64 {
        self.det_g.sqrt()
    }

    /// Directional derivatives along `ε₁, ε₂` from coordinate partials.
    pub fn to_frame_derivative(&self, coord: [f64; 2]) -> [f64; 2] {
        let b = &self.to_frame;
        [
            b[0][0] * coord[0] + b[0][1] * coord[1],
            b[1][0] * coord[0] + b[1][1] * coord[1],
        ]
    }

    /// Same for vector-valued partials.
    pub fn to_frame_vector(&self, coord: &[Vec4; 2]) -> [Vec4; 2] {
        let b = &self.to_frame;
        [
            coord[0] * b[0][0] + coord[1] * b[0][1],
            coord[0] * b[1][0] + coord[1] * b[1][1],
        ]
    }

    /// Largest violation of the frame, metric and angle invariants.
    pub fn invariant_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        let vs = [self.frame[0], self.frame[1], self.e3, self.e4];
        for a in 0..4 {
            for b in 0..4 {
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((vs[a].dot(&vs[b]) - target).abs());
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                let prod: f64 = (0..2).map(|k| self.g[i][k] * self.g_inv[k][j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((prod - target).abs());
            }
        }
        let hn = self.mean_curvature.norm().max(1.0);
        worst = worst.max(self.mean_curvature.dot(&self.frame[0]).abs() / hn);
        worst = worst.max(self.mean_curvature.dot(&self.frame[1]).abs() / hn);
        let c = self.cos_alpha;
        worst.max((c * c + self.y * self.y + self.z * self.z - 1.0).abs())
    }

    /// Copy of `self` with the normal frame replaced and `h`, `y`, `z`
    /// recomputed.
    pub fn with_normal_frame(&self, e3: Vec4, e4: Vec4) -> SurfaceGeometry {
        let mut out = *self;
        out.e3 = e3;
        out.e4 = e4;
        out.h = second_fundamental_form(&self.hessian, &[e3, e4]);
        let je1 = J.apply(&self.frame[0]);
        out.y = je1.dot(&e3);
        out.z = je1.dot(&e4);
        out
    }
}

/// `(cos α, det g)` from the two coordinate tangents.
pub fn kahler_cos_from_tangents(d: &[Vec4; 2]) -> (f64, f64) {
    let g00 = d[0].norm2();
    let g01 = d[0].dot(&d[1]);
    let g11 = d[1].norm2();
    let det = g00 * g11 - g01 * g01;
    (J.omega(&d[0], &d[1]) / det.sqrt(), det)
}

fn second_fundamental_form(hess: &[[Vec4; 2]; 2], normals: &[Vec4; 2]) -> [[[f64; 2]; 2]; 2] {
    let mut h = [[[0.0; 2]; 2]; 2];
    for a in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                h[a][i][j] = hess[i][j].dot(&normals[a]);
            }
        }
    }
    h
}

/// Default seed order for the normal frame: `E₃, E₄`, then `E₁, E₂`.
pub const NORMAL_SEEDS: [Vec4; 4] = [
    Vec4::basis(2),
    Vec4::basis(3),
    Vec4::basis(0),
    Vec4::basis(1),
];

pub fn geometry_from_jet(jet: &Jet, p: [f64; 2], beta: f64, tol: &Tolerances) -> Result<SurfaceGeometry> {
    geometry_from_jet_with_seeds(jet, p, beta, &NORMAL_SEEDS, tol)
}

/// Geometry with a caller-chosen seed list for the normal frame.
///
/// Seeds are projected onto the normal plane in order; a seed is accepted
/// when its remaining projection is at least `tol.seed_projection` long.
pub fn geometry_from_jet_with_seeds(
    jet: &Jet,
    p: [f64; 2],
    beta: f64,
    seeds: &[Vec4],
    tol: &Tolerances,
) -> Result<SurfaceGeometry> {
    let [t1, t2] = jet.d;
    let g = [[t1.norm2(), t1.dot(&t2)], [t1.dot(&t2), t2.norm2()]];
    let det_g = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    if !(det_g >= tol.degenerate_det) {
        return Err(Error::DegenerateImmersion { det_g });
    }
    let g_inv = mat2_inverse(&g).ok_or(Error::DegenerateImmersion { det_g })?;

    let n1 = t1.norm();
    let eps1 = t1 * (1.0 / n1);
    let proj = t2.dot(&eps1);
    let w = t2 - eps1 * proj;
    let nw = w.norm();
    let eps2 = w * (1.0 / nw);
    let to_frame = [[1.0 / n1, 0.0], [-proj / (n1 * nw), 1.0 / nw]];
    let frame = [eps1, eps2];

    let mut normals: Vec<Vec4> = Vec::with_capacity(2);
    for seed in seeds {
        let mut v = *seed - eps1 * seed.dot(&eps1) - eps2 * seed.dot(&eps2);
        for n in &normals {
            v -= *n * v.dot(n);
        }
        // second pass keeps the projection orthogonal to working precision
        v = v - eps1 * v.dot(&eps1) - eps2 * v.dot(&eps2);
        for n in &normals {
            v -= *n * v.dot(n);
        }
        let len = v.norm();
        if len >= tol.seed_projection {
            normals.push(v * (1.0 / len));
            if normals.len() == 2 {
                break;
            }
        }
    }
    if normals.len() < 2 {
        return Err(Error::InvalidInput("seed vectors do not span the normal plane"));
    }
    let e3 = normals[0];
    let mut e4 = normals[1];
    if det4([eps1, eps2, e3, e4]) < 0.0 {
        e4 = -e4;
    }

    let b = &to_frame;
    let mut hessian = [[Vec4::ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = Vec4::ZERO;
            for k in 0..2 {
                for l in 0..2 {
                    acc += jet.dd[k][l] * (b[i][k] * b[j][l]);
                }
            }
            hessian[i][j] = acc;
        }
    }
    let h = second_fundamental_form(&hessian, &[e3, e4]);
    let mean_curvature = e3 * (h[0][0][0] + h[0][1][1]) + e4 * (h[1][0][0] + h[1][1][1]);

    let je1 = J.apply(&eps1);
    let cos_alpha = je1.dot(&eps2);
    Ok(SurfaceGeometry {
        point: p,
        beta,
        position: jet.pos,
        e1: t1,
        e2: t2,
        g,
        g_inv,
        det_g,
        frame,
        to_frame,
        e3,
        e4,
        hessian,
        h,
        mean_curvature,
        cos_alpha,
        y: je1.dot(&e3),
        z: je1.dot(&e4),
        lagrangian: cos_alpha < tol.lagrangian_cos,
    })
}

pub fn evaluate_geometry<I: Immersion + ?Sized>(imm: &I, p: [f64; 2]) -> Result<SurfaceGeometry> {
    evaluate_geometry_with(imm, p, &Tolerances::default())
}

pub fn evaluate_geometry_with<I: Immersion + ?Sized>(
    imm: &I,
    p: [f64; 2],
    tol: &Tolerances,
) -> Result<SurfaceGeometry> {
    geometry_from_jet(&imm.jet(p), p, imm.beta(), tol)
}

/// `cos α = ⟨J ∂₁F, ∂₂F⟩ / √det g`, from the coordinate tangents.
pub fn kahler_angle(geo: &SurfaceGeometry) -> f64 {
    J.omega(&geo.e1, &geo.e2) / geo.det_g.sqrt()
}

/// Mean curvature `H = g^{ij}(∂ᵢ∂ⱼF − g^{kl}⟨∂ᵢ∂ⱼF, ∂_lF⟩ ∂_kF)`.
pub fn mean_curvature<I: Immersion + ?Sized>(imm: &I, p: [f64; 2]) -> Result<Vec4> {
    mean_curvature_from_jet(&imm.jet(p), &Tolerances::default())
}

pub fn mean_curvature_from_jet(jet: &Jet, tol: &Tolerances) -> Result<Vec4> {
    let d = &jet.d;
    let g = [[d[0].norm2(), d[0].dot(&d[1])], [d[1].dot(&d[0]), d[1].norm2()]];
    let det_g = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    if !(det_g >= tol.degenerate_det) {
        return Err(Error::DegenerateImmersion { det_g });
    }
    let gi = mat2_inverse(&g).ok_or(Error::DegenerateImmersion { det_g })?;
    let mut out = Vec4::ZERO;
    for i in 0..2 {
        for j in 0..2 {
            let fij = jet.dd[i][j];
            let mut tangential = Vec4::ZERO;
            for k in 0..2 {
                for l in 0..2 {
                    tangential += d[k] * (gi[k][l] * fij.dot(&d[l]));
                }
            }
            out += (fij - tangential) * gi[i][j];
        }
    }
    Ok(out)
}

/// Coordinate partials of `cos α`, differentiated exactly from the jet.
pub fn cos_gradient_exact(jet: &Jet) -> [f64; 2] {
    let d = &jet.d;
    let (c, det) = kahler_cos_from_tangents(d);
    let sq = det.sqrt();
    let g00 = d[0].norm2();
    let g01 = d[0].dot(&d[1]);
    let g11 = d[1].norm2();
    let mut out = [0.0; 2];
    for k in 0..2 {
        let a = jet.dd[k][0];
        let b = jet.dd[k][1];
        let domega = J.omega(&a, &d[1]) + J.omega(&d[0], &b);
        let dg00 = 2.0 * a.dot(&d[0]);
        let dg11 = 2.0 * b.dot(&d[1]);
        let dg01 = a.dot(&d[1]) + d[0].dot(&b);
        let ddet = dg00 * g11 + g00 * dg11 - 2.0 * g01 * dg01;
        out[k] = domega / sq - 0.5 * c * ddet / det;
    }
    out
}

/// Central-difference coordinate partials of `cos α` with step
/// `h_k = max(s, s·|p_k|)`, `s = tol.fd_relative_step`.
pub fn cos_gradient_fd<I: Immersion + ?Sized>(imm: &I, p: [f64; 2], tol: &Tolerances) -> Result<[f64; 2]> {
    let mut out = [0.0; 2];
    for k in 0..2 {
        let step = tol.fd_relative_step.max(tol.fd_relative_step * p[k].abs());
        let mut plus = p;
        let mut minus = p;
        plus[k] += step;
        minus[k] -= step;
        let (cp, detp) = kahler_cos_from_tangents(&imm.jet(plus).d);
        let (cm, detm) = kahler_cos_from_tangents(&imm.jet(minus).d);
        for det_g in [detp, detm] {
            if !(det_g >= tol.degenerate_det) {
                return Err(Error::DegenerateImmersion { det_g });
            }
        }
        out[k] = (cp - cm) / ((plus[k] - p[k]) + (p[k] - minus[k]));
    }
    Ok(out)
}

/// The Euler-Lagrange operator in its two equivalent forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElResidual {
    /// `P = cos²α H − β (J(∇_{ε₁}cos α ε₂ − ∇_{ε₂}cos α ε₁))^⊥`.
    pub p: Vec4,
    /// `cos³α H − β (J (J ∇cos α)^⊤)^⊥`, equal to `cos α · P`.
    pub cleared: Vec4,
    /// Coordinate partials of `cos α` used for both forms.
    pub grad_cos: [f64; 2],
}

impl ElResidual {
    pub fn norm(&self) -> f64 {
        self.p.norm()
    }

    /// `|cleared − cos α · P| / max(|cleared|, |cos α · P|, tiny)`.
    pub fn form_mismatch(&self, cos_alpha: f64) -> f64 {
        let scaled = self.p * cos_alpha;
        let scale = self.cleared.norm().max(scaled.norm()).max(f64::MIN_POSITIVE);
        (self.cleared - scaled).norm() / scale
    }
}

/// Both forms of the operator from a geometry and coordinate partials of
/// `cos α`.
pub fn el_terms(geo: &SurfaceGeometry, grad_cos: [f64; 2]) -> ElResidual {
    let c = geo.cos_alpha;
    let beta = geo.beta;
    let [dc1, dc2] = geo.to_frame_derivative(grad_cos);
    let [eps1, eps2] = geo.frame;
    let inner = J.apply(&(eps2 * dc1 - eps1 * dc2));
    let p = geo.mean_curvature * (c * c) - geo.normal_part(&inner) * beta;

    let grad = eps1 * dc1 + eps2 * dc2;
    let jt = geo.tangent_part(&J.apply(&grad));
    let cleared = geo.mean_curvature * (c * c * c) - geo.normal_part(&J.apply(&jt)) * beta;
    ElResidual { p, cleared, grad_cos }
}

pub fn el_residual<I: Immersion + ?Sized>(imm: &I, p: [f64; 2]) -> Result<ElResidual> {
    el_residual_with(imm, p, &Tolerances::default())
}

/// Euler-Lagrange residual with `∇cos α` from central differences.
pub fn el_residual_with<I: Immersion + ?Sized>(imm: &I, p: [f64; 2], tol: &Tolerances) -> Result<ElResidual> {
    let geo = evaluate_geometry_with(imm, p, tol)?;
    if geo.lagrangian {
        return Err(Error::LagrangianPoint { cos_alpha: geo.cos_alpha });
    }
    let grad = cos_gradient_fd(imm, p, tol)?;
    Ok(el_terms(&geo, grad))
}

/// As [`el_residual_with`] with `∇cos α` differentiated exactly from the jet.
pub fn el_residual_exact<I: Immersion + ?Sized>(imm: &I, p: [f64; 2], tol: &Tolerances) -> Result<ElResidual> {
    let jet = imm.jet(p);
    let geo = geometry_from_jet(&jet, p, imm.beta(), tol)?;
    if geo.lagrangian {
        return Err(Error::LagrangianPoint { cos_alpha: geo.cos_alpha });
    }
    Ok(el_terms(&geo, cos_gradient_exact(&jet)))
}

/// Rotates the normal frame so that `⟨J ε₁, e₃⟩ = sin α`, `⟨J ε₁, e₄⟩ = 0`.
///
/// `e₃ = (J ε₁)^⊥ / sin α`, `e₄ = −(J ε₂)^⊥ / sin α`; then
/// `⟨J ε₂, e₄⟩ = −sin α` and `⟨J e₃, e₄⟩ = cos α`.
pub fn adapted_frame(geo: &SurfaceGeometry) -> Result<SurfaceGeometry> {
    adapted_frame_with(geo, &Tolerances::default())
}

pub fn adapted_frame_with(geo: &SurfaceGeometry, tol: &Tolerances) -> Result<SurfaceGeometry> {
    let n1 = geo.normal_part(&J.apply(&geo.frame[0]));
    let n2 = geo.normal_part(&J.apply(&geo.frame[1]));
    let s = n1.norm();
    if !(s > tol.complex_sin) {
        return Err(Error::ComplexPoint { sin_alpha: s });
    }
    Ok(geo.with_normal_frame(n1 * (1.0 / s), n2 * (-1.0 / s)))
}

/// Terms of the adapted-frame identity `H = β tan²α V`,
/// `V = ∇_{ε₂}α e₃ + ∇_{ε₁}α e₄`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalIdentity {
    pub mean_curvature: Vec4,
    /// `V` with `∇α = −∇cos α / sin α` from central differences.
    pub v: Vec4,
    /// `V` with `∇_{ε₁}α = −(h⁴₁₁ + h³₁₂)`, `∇_{ε₂}α = −(h⁴₁₂ + h³₂₂)`.
    pub v_from_h: Vec4,
    /// `|H − β tan²α V|`.
    pub residual: f64,
}

pub fn critical_identity<I: Immersion + ?Sized>(imm: &I, p: [f64; 2]) -> Result<CriticalIdentity> {
    critical_identity_with(imm, p, &Tolerances::default())
}

pub fn critical_identity_with<I: Immersion + ?Sized>(
    imm: &I,
    p: [f64; 2],
    tol: &Tolerances,
) -> Result<CriticalIdentity> {
    let geo = evaluate_geometry_with(imm, p, tol)?;
    if geo.lagrangian {
        return Err(Error::LagrangianPoint { cos_alpha: geo.cos_alpha });
    }
    let ad = adapted_frame_with(&geo, tol)?;
    let s = ad.y;
    let c = ad.cos_alpha;
    let [d1, d2] = ad.to_frame_derivative(cos_gradient_fd(imm, p, tol)?);
    let (a1, a2) = (-d1 / s, -d2 / s);
    let v = ad.e3 * a2 + ad.e4 * a1;
    let h = &ad.h;
    let b1 = -(h[1][0][0] + h[0][0][1]);
    let b2 = -(h[1][0][1] + h[0][1][1]);
    let v_from_h = ad.e3 * b2 + ad.e4 * b1;
    let residual = (ad.mean_curvature - v * (ad.beta * s * s / (c * c))).norm();
    Ok(CriticalIdentity {
        mean_curvature: ad.mean_curvature,
        v,
        v_from_h,
        residual,
    })
}

/// Reduced Laplace-Beltrami operator of an S¹-invariant function on a
/// surface of revolution with radial metric factor `A(r)`:
///
/// ```text
/// Δu = (1 / (r √A)) d/dr (r u′ / √A)
/// ```
///
/// Flux-form central differences on the (possibly non-uniform) grid; the
/// result holds the interior nodes `1..n-1`.
pub fn laplace_beltrami_radial(r: &[f64], u: &[f64], a: &[f64]) -> Result<Vec<f64>> {
    let n = r.len();
    if u.len() != n || a.len() != n {
        return Err(Error::InvalidInput("grid, values and metric factor differ in length"));
    }
    if n < 5 {
        return Err(Error::GridTooCoarse { nodes: n, required: 5 });
    }
    let sa: Vec<f64> = a.iter().map(|x| x.sqrt()).collect();
    let flux = |i: usize| {
        let h = r[i + 1] - r[i];
        let rm = 0.5 * (r[i + 1] + r[i]);
        let sm = 0.5 * (sa[i + 1] + sa[i]);
        rm * (u[i + 1] - u[i]) / (h * sm)
    };
    let mut out = Vec::with_capacity(n - 2);
    let mut left = flux(0);
    for i in 1..n - 1 {
        let right = flux(i);
        let width = 0.5 * (r[i + 1] - r[i - 1]);
        out.push((right - left) / (width * r[i] * sa[i]));
        left = right;
    }
    Ok(out)
}
