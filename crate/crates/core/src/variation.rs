//! `L_β` and its first and second variations along straight-line families
//! `φ_t = F + tX` in flat ℂ².
//!
//! Every quantity is computed along at least two independent routes so the
//! routes can be compared:
//!
//! * first variation: the post-Stokes formula `−(β+1)∫⟨X, cos³α H − βW⟩/cos^{β+3}α`
//!   with `W = (J(J∇cos α)^⊤)^⊥`, the pre-Stokes derivative of the density,
//!   and central differences of `t ↦ L_β(F + tX)`;
//! * second variation: the normal-field formula, the mixed bilinear form,
//!   the `∂̄`-form for the pair `X, −J_ν X`, and second differences.
//!
//! Since the families are straight lines, `∂²φ/∂t∂s ≡ 0` and the ambient
//! curvature terms vanish identically.

use alloc::vec::Vec;
use core::f64::consts::TAU;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::complex::ComplexStructure;
use crate::error::{Error, Result};
use crate::geometry::{
    adapted_frame_with, cos_gradient_exact, el_terms, geometry_from_jet, kahler_cos_from_tangents, Domain, Immersion,
    Jet, SurfaceGeometry,
};
use crate::linalg::{mat2_inverse, Vec4};
use crate::quadrature::{CompensatedSum, QuadSpec, Rule2d};
use crate::symbol::random_unit_vec4;
use crate::tolerances::Tolerances;

const J: ComplexStructure = ComplexStructure::standard();

/// Value and first coordinate partials of a vector field along the surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldJet {
    pub value: Vec4,
    pub d: [Vec4; 2],
}

impl FieldJet {
    pub const ZERO: FieldJet = FieldJet { value: Vec4::ZERO, d: [Vec4::ZERO; 2] };

    pub fn scaled(&self, s: f64) -> FieldJet {
        FieldJet { value: self.value * s, d: [self.d[0] * s, self.d[1] * s] }
    }
}

/// A compactly supported variation field `X`.
pub trait VariationField {
    fn jet(&self, p: [f64; 2]) -> Result<FieldJet>;
    /// Rectangle outside of which `X` vanishes.
    fn support(&self) -> Domain;
    /// Whether `X` is pointwise normal to the surface.
    fn is_normal(&self) -> bool;
}

impl<T: VariationField + ?Sized> VariationField for &T {
    fn jet(&self, p: [f64; 2]) -> Result<FieldJet> {
        (**self).jet(p)
    }
    fn support(&self) -> Domain {
        (**self).support()
    }
    fn is_normal(&self) -> bool {
        (**self).is_normal()
    }
}

/// `w(s) = (1 − s²)³` on `[−1, 1]`, zero outside, with `w′`.
pub fn bump(s: f64) -> (f64, f64) {
    if s.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let q = 1.0 - s * s;
    (q * q * q, -6.0 * s * q * q)
}

/// `P_T w` and its coordinate partials, given `w` and `∂w`.
///
/// With `T = (∂₁F, ∂₂F)`, `a = g⁻¹Tᵀw`: `∂(P_T w) = ∂T a + T ∂a`,
/// `∂a = g⁻¹(∂(Tᵀw) − ∂g a)`.
pub fn tangent_projection(jet: &Jet, w: &Vec4, dw: &[Vec4; 2]) -> Result<(Vec4, [Vec4; 2])> {
    let t = &jet.d;
    let g = [[t[0].norm2(), t[0].dot(&t[1])], [t[1].dot(&t[0]), t[1].norm2()]];
    let gi = mat2_inverse(&g).ok_or(Error::DegenerateImmersion { det_g: g[0][0] * g[1][1] - g[0][1] * g[1][0] })?;
    let b = [t[0].dot(w), t[1].dot(w)];
    let a = [gi[0][0] * b[0] + gi[0][1] * b[1], gi[1][0] * b[0] + gi[1][1] * b[1]];
    let value = t[0] * a[0] + t[1] * a[1];
    let mut d = [Vec4::ZERO; 2];
    for k in 0..2 {
        let db = [
            jet.dd[0][k].dot(w) + t[0].dot(&dw[k]),
            jet.dd[1][k].dot(w) + t[1].dot(&dw[k]),
        ];
        let mut dg = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                dg[i][j] = jet.dd[i][k].dot(&t[j]) + t[i].dot(&jet.dd[j][k]);
            }
        }
        let rhs = [
            db[0] - dg[0][0] * a[0] - dg[0][1] * a[1],
            db[1] - dg[1][0] * a[0] - dg[1][1] * a[1],
        ];
        let da = [gi[0][0] * rhs[0] + gi[0][1] * rhs[1], gi[1][0] * rhs[0] + gi[1][1] * rhs[1]];
        d[k] = jet.dd[0][k] * a[0] + jet.dd[1][k] * a[1] + t[0] * da[0] + t[1] * da[1];
    }
    Ok((value, d))
}

/// Which part of the constant direction a [`BumpField`] keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projection {
    Normal,
    Tangential,
    Ambient,
}

/// `X = a · w(s₁) · m(x₂) · Π v` for a constant `v`, where `m` is
/// `cos(k x₂ + φ)` if the support is a full period in `x₂` and a second bump
/// otherwise, and `Π` is the chosen projection.
#[derive(Debug, Clone, Copy)]
pub struct BumpField<'a, I: ?Sized> {
    pub imm: &'a I,
    pub support: Domain,
    pub direction: Vec4,
    pub mode: u32,
    pub phase: f64,
    pub amplitude: f64,
    pub projection: Projection,
}

impl<'a, I: Immersion + ?Sized> BumpField<'a, I> {
    /// Normal field `w(r) P^⊥ v` on `[lo, hi]` in the first parameter and the
    /// full range of the second.
    pub fn normal(imm: &'a I, lo: f64, hi: f64, direction: Vec4) -> Self {
        let mut support = imm.domain();
        support.lo[0] = lo;
        support.hi[0] = hi;
        if !support.periodic[1] {
            let d = imm.domain();
            let pad = 0.1 * (d.hi[1] - d.lo[1]);
            support.lo[1] = d.lo[1] + pad;
            support.hi[1] = d.hi[1] - pad;
        }
        BumpField {
            imm,
            support,
            direction,
            mode: 0,
            phase: 0.0,
            amplitude: 1.0,
            projection: Projection::Normal,
        }
    }

    pub fn with_projection(mut self, projection: Projection) -> Self {
        self.projection = projection;
        self
    }

    pub fn with_mode(mut self, mode: u32, phase: f64) -> Self {
        self.mode = mode;
        self.phase = phase;
        self
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    fn profile(&self, p: [f64; 2]) -> (f64, [f64; 2]) {
        let s = &self.support;
        let mut value = self.amplitude;
        let mut grad = [self.amplitude; 2];
        for k in 0..2 {
            let len = s.hi[k] - s.lo[k];
            let (v, dv) = if s.periodic[k] {
                let arg = self.mode as f64 * TAU * (p[k] - s.lo[k]) / len + self.phase;
                let (sn, cs) = arg.sin_cos();
                (cs, -sn * self.mode as f64 * TAU / len)
            } else {
                let (w, dw) = bump((2.0 * p[k] - s.lo[k] - s.hi[k]) / len);
                (w, dw * 2.0 / len)
            };
            grad[k] *= dv;
            grad[1 - k] *= v;
            value *= v;
        }
        (value, grad)
    }
}

impl<I: Immersion + ?Sized> VariationField for BumpField<'_, I> {
    fn jet(&self, p: [f64; 2]) -> Result<FieldJet> {
        let (phi, dphi) = self.profile(p);
        if phi == 0.0 && dphi == [0.0, 0.0] {
            return Ok(FieldJet::ZERO);
        }
        let v = self.direction;
        let (w, dw) = match self.projection {
            Projection::Ambient => (v, [Vec4::ZERO; 2]),
            Projection::Tangential | Projection::Normal => {
                let (pt, dpt) = tangent_projection(&self.imm.jet(p), &v, &[Vec4::ZERO; 2])?;
                if self.projection == Projection::Tangential {
                    (pt, dpt)
                } else {
                    (v - pt, [-dpt[0], -dpt[1]])
                }
            }
        };
        Ok(FieldJet {
            value: w * phi,
            d: [w * dphi[0] + dw[0] * phi, w * dphi[1] + dw[1] * phi],
        })
    }
    fn support(&self) -> Domain {
        self.support
    }
    fn is_normal(&self) -> bool {
        self.projection == Projection::Normal
    }
}

/// `Y = −(J X)^⊥ / cos α`, which for normal `X = x₃e₃ + x₄e₄` in the adapted
/// frame is `x₄e₃ − x₃e₄`.
#[derive(Debug, Clone, Copy)]
pub struct PairField<'a, I: ?Sized, F> {
    pub imm: &'a I,
    pub field: F,
}

impl<'a, I: Immersion + ?Sized, F: VariationField> PairField<'a, I, F> {
    pub fn new(imm: &'a I, field: F) -> Self {
        PairField { imm, field }
    }
}

impl<I: Immersion + ?Sized, F: VariationField> VariationField for PairField<'_, I, F> {
    fn jet(&self, p: [f64; 2]) -> Result<FieldJet> {
        let x = self.field.jet(p)?;
        if x == FieldJet::ZERO {
            return Ok(x);
        }
        let jet = self.imm.jet(p);
        let (c, _) = kahler_cos_from_tangents(&jet.d);
        let dc = cos_gradient_exact(&jet);
        let jx = J.apply(&x.value);
        let djx = [J.apply(&x.d[0]), J.apply(&x.d[1])];
        let (pt, dpt) = tangent_projection(&jet, &jx, &djx)?;
        let n = jx - pt;
        let dn = [djx[0] - dpt[0], djx[1] - dpt[1]];
        Ok(FieldJet {
            value: n * (-1.0 / c),
            d: [
                dn[0] * (-1.0 / c) + n * (dc[0] / (c * c)),
                dn[1] * (-1.0 / c) + n * (dc[1] / (c * c)),
            ],
        })
    }
    fn support(&self) -> Domain {
        self.field.support()
    }
    fn is_normal(&self) -> bool {
        self.field.is_normal()
    }
}

/// Seeded random normal (or tangential) bump fields with supports inside
/// the immersion domain: centre in the middle 60 %, half-width 5-15 % of the
/// first parameter range, unit direction, angular mode 0-3.
pub fn random_bump_fields<I: Immersion + ?Sized>(
    imm: &I,
    count: usize,
    seed: u64,
    projection: Projection,
) -> Vec<BumpField<'_, I>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = imm.domain();
    let len = d.hi[0] - d.lo[0];
    (0..count)
        .map(|_| {
            let centre = d.lo[0] + len * rng.gen_range(0.2..0.8);
            let half = len * rng.gen_range(0.05..0.15);
            let v = random_unit_vec4(&mut rng);
            let mode = rng.gen_range(0..4u32);
            let phase = rng.gen_range(0.0..TAU);
            BumpField::normal(imm, centre - half, centre + half, v)
                .with_mode(mode, phase)
                .with_projection(projection)
        })
        .collect()
}

/// Per-node data shared by all integrands.
#[derive(Debug, Clone, Copy)]
pub struct Node {
    pub geo: SurfaceGeometry,
    /// Coordinate partials of `cos α`.
    pub grad_cos: [f64; 2],
    /// `∇_{ε₁}cos α`, `∇_{ε₂}cos α`.
    pub dc: [f64; 2],
    pub x: Vec4,
    /// `∇̄_{εᵢ}X`.
    pub dx: [Vec4; 2],
}

impl Node {
    pub fn div(&self) -> f64 {
        self.dx[0].dot(&self.geo.frame[0]) + self.dx[1].dot(&self.geo.frame[1])
    }

    /// `ω(∇̄_{ε₁}X, ε₂) + ω(ε₁, ∇̄_{ε₂}X)`.
    pub fn omega_x(&self) -> f64 {
        let [e1, e2] = self.geo.frame;
        J.omega(&self.dx[0], &e2) + J.omega(&e1, &self.dx[1])
    }
}

fn node_at<I, F>(imm: &I, field: &F, p: [f64; 2], tol: &Tolerances) -> Result<Node>
where
    I: Immersion + ?Sized,
    F: VariationField + ?Sized,
{
    let jet = imm.jet(p);
    let geo = geometry_from_jet(&jet, p, imm.beta(), tol)?;
    if geo.lagrangian {
        return Err(Error::LagrangianPoint { cos_alpha: geo.cos_alpha });
    }
    let grad_cos = cos_gradient_exact(&jet);
    let fj = field.jet(p)?;
    Ok(Node {
        dc: geo.to_frame_derivative(grad_cos),
        dx: geo.to_frame_vector(&fj.d),
        x: fj.value,
        grad_cos,
        geo,
    })
}

fn support_rule<I, F>(imm: &I, field: &F, quad: &QuadSpec) -> Result<Rule2d>
where
    I: Immersion + ?Sized,
    F: VariationField + ?Sized,
{
    let support = field.support();
    if !imm.domain().is_inside(&support) {
        return Err(Error::InvalidInput("field support must lie strictly inside the domain"));
    }
    Rule2d::new(&support, quad)
}

/// `∫ f(node) dμ` over the support of the field.
fn integrate_nodes<I, F, G>(imm: &I, field: &F, quad: &QuadSpec, tol: &Tolerances, mut f: G) -> Result<f64>
where
    I: Immersion + ?Sized,
    F: VariationField + ?Sized,
    G: FnMut(&Node) -> Result<f64>,
{
    let rule = support_rule(imm, field, quad)?;
    rule.integrate(|p| {
        let n = node_at(imm, field, p, tol)?;
        Ok(f(&n)? * n.geo.area_element())
    })
}

/// Lagrangian density `det^{(β+1)/2} g / ω^β(∂₁φ, ∂₂φ) = cos^{−β}α √det g`.
pub fn density(d: &[Vec4; 2], beta: f64, tol: &Tolerances) -> Result<f64> {
    let (c, det) = kahler_cos_from_tangents(d);
    if !(det >= tol.degenerate_det) {
        return Err(Error::DegenerateImmersion { det_g: det });
    }
    if !(c > tol.lagrangian_cos) {
        return Err(Error::LagrangianPoint { cos_alpha: c });
    }
    Ok(det.sqrt() * c.powf(-beta))
}

/// `L_β = ∫ cos^{−β}α dμ` over the whole parameter domain.
pub fn functional<I: Immersion + ?Sized>(imm: &I, quad: &QuadSpec) -> Result<f64> {
    functional_with(imm, quad, &Tolerances::default())
}

pub fn functional_with<I: Immersion + ?Sized>(imm: &I, quad: &QuadSpec, tol: &Tolerances) -> Result<f64> {
    let beta = imm.beta();
    Rule2d::new(&imm.domain(), quad)?.integrate(|p| density(&imm.jet(p).d, beta, tol))
}

/// `∫_supp X ν_β(F + tX)`, the part of `L_β(F + tX)` that depends on `t`.
pub fn support_functional<I, F>(imm: &I, field: &F, t: f64, quad: &QuadSpec, tol: &Tolerances) -> Result<f64>
where
    I: Immersion + ?Sized,
    F: VariationField + ?Sized,
{
    let beta = imm.beta();
    support_rule(imm, field, quad)?.integrate(|p| {
        let d = imm.jet(p).d;
        let x = field.jet(p)?;
        density(&[d[0] + x.d[0] * t, d[1] + x.d[1] * t], beta, tol)
    })
}

/// `−(β+1) ∫ ⟨X, cos³α H − β W⟩ / cos^{β+3}α dμ`, `W = (J(J∇cos α)^⊤)^⊥`.
pub fn first_variation_formula<I, F>(imm: &I, field: &F, quad: &QuadSpec, tol: &Tolerances) -> Result<f64>
where
    I: Immersion + ?Sized,
    F: VariationField + ?Sized,
{
    let beta = imm.beta();
    integrate_nodes(imm, field, quad, tol, |n| {
        let c = n.geo.cos_alpha;
        let e = el_terms(&n.geo, n.grad_cos);
        Ok(-(beta + 1.0) * n.x.dot(&e.cleared) / c.powf(beta + 3.0))
    })
}

/// Derivative of the density before any integration by parts:
///
/// ```text
/// (β+1) ∫ div_Σ X / cos^β α dμ − β ∫ [ω(∇̄_{ε₁}X, ε₂) + ω(ε₁, ∇̄_{ε₂}X)] / cos^{β+1}α dμ
/// ```
///
/// For normal `X`, `div_Σ X = −⟨X, H⟩`.
pub fn first_variation_prestokes<I, F>(imm: &I, field: &F, quad: &QuadSpec, tol: &Tolerances) -> Result<f64>
where
    I: Immersion + ?Sized,
    F: VariationField + ?Sized,
{
    let beta = imm.beta();
    integrate_nodes(imm, field, quad, tol, |n| {
        let c = n.geo.cos_alpha;
        Ok((beta + 1.0) * n.div() / c.powf(beta) - beta * n.omega_x() / c.powf(beta + 1.0))
    })
}

/// Central difference `(L(h) − L(−h)) / 2h`; with `richardson`, the
/// extrapolation `(4 D(h/2) − D(h)) / 3`.
pub fn first_variation_fd<I, F>(
    imm: &I,
    field: &F,
    h: f64,
    richardson: bool,
    quad: &QuadSpec,
    tol: &Tolerances,
) -> Result<f64>
where
    I: Immersion + ?Sized,
    F: VariationField + ?Sized,
{
    if !(h > 0.0) {
        return Err(Error::InvalidInput("finite-difference step must be positive"));
    }
    let central = |s: f64| -> Result<f64> {
        Ok((support_functional(imm, field, s, quad, tol)? - support_functional(imm, field, -s, quad, tol)?) / (2.0 * s))
    };
    let coarse = central(h)?;
    if richardson {
        Ok((4.0 * central(0.5 * h)? - coarse) / 3.0)
    } else {
        Ok(coarse)
    }
}

/// `(L(h) − 2L(0) + L(−h)) / h²`.
pub fn second_variation_fd<I, F>(imm: &I, field: &F, h: f64, quad: &QuadSpec, tol: &Tolerances) -> Result<f64>
where
    I: Immersion + ?Sized,
    F: VariationField + ?Sized,
{
    if !(h > 0.0) {
        return Err(Error::InvalidInput("finite-difference step must be positive"));
    }
    let lp = support_functional(imm, field, h, quad, tol)?;
    let l0 = support_functional(imm, field, 0.0, quad, tol)?;
    let lm = support_functional(imm, field, -h, quad, tol)?;
    Ok((lp - 2.0 * l0 + lm) / (h * h))
}

/// Largest `|P|` over the quadrature nodes of `support`, with `∇cos α` from
/// the exact jet.
pub fn criticality_residual<I: Immersion + ?Sized>(
    imm: &I,
    support: &Domain,
    quad: &QuadSpec,
    tol: &Tolerances,
) -> Result<f64> {
    let rule = Rule2d::new(support, quad)?;
    let mut worst = 0.0f64;
    for (p, _) in rule.points() {
        let jet = imm.jet(p);
        let geo = geometry_from_jet(&jet, p, imm.beta(), tol)?;
        if geo.lagrangian {
            return Err(Error::LagrangianPoint { cos_alpha: geo.cos_alpha });
        }
        worst = worst.max(el_terms(&geo, cos_gradient_exact(&jet)).norm());
    }
    Ok(worst)
}

fn require_critical<I, F>(imm: &I, field: &F, quad: &QuadSpec, tol: &Tolerances) -> Result<f64>
where
    I: Immersion + ?Sized,
    F: VariationField + ?Sized,
{
    let residual = criticality_residual(imm, &field.support(), quad, tol)?;
    if !(residual < tol.criticality) {
        return Err(Error::NotCritical { residual, tolerance: tol.criticality });
    }
    Ok(residual)
}

/// The six integrals of the normal-field second variation:
///
/// ```text
///   (β+1)  ∫ |∇^⊥X|² / c^β
/// − (β+1)  ∫ Σ ⟨X, A(εᵢ, εⱼ)⟩² / c^β
/// + (β+1)² ∫ ⟨X, H⟩² / c^β
/// + 2β(β+1) ∫ ⟨X, H⟩ ω_X / c^{β+1}
/// − β(β+1) ∫ [ω(X, ∇̄₂X) ∇₁c + ω(∇̄₁X, X) ∇₂c] / c^{β+2}
/// + β(β+1) ∫ ω_X² / c^{β+2}
/// ```
///
/// with `c = cos α`, `ω_X = ω(∇̄₁X, ε₂) + ω(ε₁, ∇̄₂X)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondVariationTerms {
    pub terms: [f64; 6],
}

impl SecondVariationTerms {
    pub fn total(&self) -> f64 {
        let mut acc = CompensatedSum::default();
        for t in self.terms {
            acc.add(t);
        }
        acc.value()
    }
}

fn second_variation_integrands(n: &Node, beta: f64) -> [f64; 6] {
    let geo = &n.geo;
    let c = geo.cos_alpha;
    let b1 = beta + 1.0;
    let cb = c.powf(-beta);
    let perp2 = geo.normal_part(&n.dx[0]).norm2() + geo.normal_part(&n.dx[1]).norm2();
    let mut a2 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            a2 += n.x.dot(&geo.normal_part(&geo.hessian[i][j])).powi(2);
        }
    }
    let xh = n.x.dot(&geo.mean_curvature);
    let wx = n.omega_x();
    let twist = J.omega(&n.x, &n.dx[1]) * n.dc[0] + J.omega(&n.dx[0], &n.x) * n.dc[1];
    [
        b1 * perp2 * cb,
        -b1 * a2 * cb,
        b1 * b1 * xh * xh * cb,
        2.0 * beta * b1 * xh * wx * cb / c,
        -beta * b1 * twist * cb / (c * c),
        beta * b1 * wx * wx * cb / (c * c),
    ]
}

/// Term-by-term normal second variation; requires a normal field and a
/// critical surface on the support.
pub fn second_variation_terms<I, F>(imm: &I, field: &F, quad: &QuadSpec, tol: &Tolerances) -> Result<SecondVariationTerms>
where
    I: Immersion + ?Sized,
    F: VariationField + ?Sized,
{
    if !field.is_normal() {
        return Err(Error::InvalidInput("normal second variation needs a normal field"));
    }
    require_critical(imm, field, quad, tol)?;
    let beta = imm.beta();
    let rule = support_rule(imm, field, quad)?;
    let mut acc = [CompensatedSum::default(); 6];
    for (p, w) in rule.points() {
        let n = node_at(imm, field, p, tol)?;
        let scale = w * n.geo.area_element();
        for (sum, v) in acc.iter_mut().zip(second_variation_integrands(&n, beta)) {
            sum.add(scale * v);
        }
    }
    Ok(SecondVariationTerms { terms: acc.map(|s| s.value()) })
}

pub fn second_variation_formula<I, F>(imm: &I, field: &F, quad: &QuadSpec, tol: &Tolerances) -> Result<f64>
where
    I: Immersion + ?Sized,
    F: VariationField + ?Sized,
{
    Ok(second_variation_terms(imm, field, quad, tol)?.total())
}

/// The `∂̄`-form of `II(X) + II(−J_ν X)` in the adapted frame:
///
/// ```text
/// (β+1) ∫ |∂̄X|² (2c² + βs²) / c^{β+2}
/// − (β+1) ∫ (2c² + βs²)(c² + βs²) / c^{β+4} · |X|² |∇α|²
/// ```
///
/// with `|∂̄X|² = (x₃₂ + x₄₁)² + (x₄₂ − x₃₁)²`, `x_{ai} = ⟨∇̄_{εᵢ}X, e_a⟩`.
pub fn second_variation_pair<I, F>(imm: &I, field: &F, quad: &QuadSpec, tol: &Tolerances) -> Result<f64>
where
    I: Immersion + ?Sized,
    F: VariationField + ?Sized,
{
    if !field.is_normal() {
        return Err(Error::InvalidInput("pair second variation needs a normal field"));
    }
    require_critical(imm, field, quad, tol)?;
    let beta = imm.beta();
    integrate_nodes(imm, field, quad, tol, |n| {
        let ad = adapted_frame_with(&n.geo, tol)?;
        let (c, s) = (ad.cos_alpha, ad.y);
        let x = |a: &Vec4, i: usize| n.dx[i].dot(a);
        let (x31, x32, x41, x42) = (x(&ad.e3, 0), x(&ad.e3, 1), x(&ad.e4, 0), x(&ad.e4, 1));
        let dbar = (x32 + x41).powi(2) + (x42 - x31).powi(2);
        let x2 = n.x.dot(&ad.e3).powi(2) + n.x.dot(&ad.e4).powi(2);
        let grad_alpha2 = (n.dc[0] * n.dc[0] + n.dc[1] * n.dc[1]) / (s * s);
        let (c2, s2) = (c * c, s * s);
        let k = 2.0 * c2 + beta * s2;
        Ok((beta + 1.0) * c.powf(-beta - 2.0) * (dbar * k - k * (c2 + beta * s2) / c2 * x2 * grad_alpha2))
    })
}

/// Both sides of the pair identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairIdentity {
    pub ii_x: f64,
    pub ii_y: f64,
    pub pair: f64,
}

impl PairIdentity {
    pub fn sum(&self) -> f64 {
        self.ii_x + self.ii_y
    }

    pub fn relative_error(&self) -> f64 {
        let scale = self.pair.abs().max(self.ii_x.abs()).max(self.ii_y.abs());
        if scale > 0.0 {
            (self.sum() - self.pair).abs() / scale
        } else {
            0.0
        }
    }
}

pub fn pair_identity<I, F>(imm: &I, field: &F, quad: &QuadSpec, tol: &Tolerances) -> Result<PairIdentity>
where
    I: Immersion + ?Sized,
    F: VariationField,
{
    let y = PairField::new(imm, field);
    Ok(PairIdentity {
        ii_x: second_variation_formula(imm, field, quad, tol)?,
        ii_y: second_variation_formula(imm, &y, quad, tol)?,
        pair: second_variation_pair(imm, field, quad, tol)?,
    })
}

fn intersect(a: &Domain, b: &Domain) -> Option<Domain> {
    let mut out = *a;
    for k in 0..2 {
        out.lo[k] = a.lo[k].max(b.lo[k]);
        out.hi[k] = a.hi[k].min(b.hi[k]);
        out.periodic[k] = a.periodic[k] && b.periodic[k] && out.lo[k] == a.lo[k] && out.hi[k] == a.hi[k];
        if !(out.hi[k] > out.lo[k]) {
            return None;
        }
    }
    Some(out)
}

struct Restricted<F> {
    field: F,
    support: Domain,
}

impl<F: VariationField> VariationField for Restricted<F> {
    fn jet(&self, p: [f64; 2]) -> Result<FieldJet> {
        self.field.jet(p)
    }
    fn support(&self) -> Domain {
        self.support
    }
    fn is_normal(&self) -> bool {
        self.field.is_normal()
    }
}

/// Mixed second variation `∂²/∂t∂s L(F + tX + sY)` with `Z = 0`, `K = 0`:
///
/// ```text
///   (β+1)  ∫ ⟨∇^⊥X, ∇^⊥Y⟩ / c^β
/// + (β+1)² ∫ div X div Y / c^β
/// − (β+1)  ∫ Σᵢⱼ ⟨εᵢ, ∇̄ⱼX⟩⟨εⱼ, ∇̄ᵢY⟩ / c^β
/// − β(β+1) ∫ [div X ω_Y + div Y ω_X] / c^{β+1}
/// − β      ∫ [ω(∇̄₁X, ∇̄₂Y) + ω(∇̄₁Y, ∇̄₂X)] / c^{β+1}
/// + β(β+1) ∫ ω_X ω_Y / c^{β+2}
/// ```
///
/// Valid for arbitrary (not necessarily normal) fields. Integrated over the
/// intersection of the supports, where every term lives.
pub fn bilinear_form<I, X, Y>(imm: &I, x: &X, y: &Y, quad: &QuadSpec, tol: &Tolerances) -> Result<f64>
where
    I: Immersion + ?Sized,
    X: VariationField,
    Y: VariationField,
{
    let Some(support) = intersect(&x.support(), &y.support()) else {
        return Ok(0.0);
    };
    let beta = imm.beta();
    let b1 = beta + 1.0;
    let xr = Restricted { field: x, support };
    integrate_nodes(imm, &xr, quad, tol, |nx| {
        let geo = &nx.geo;
        let yj = y.jet(geo.point)?;
        let ny = Node { x: yj.value, dx: geo.to_frame_vector(&yj.d), ..*nx };
        let c = geo.cos_alpha;
        let cb = c.powf(-beta);
        let perp: f64 = (0..2).map(|i| geo.normal_part(&nx.dx[i]).dot(&geo.normal_part(&ny.dx[i]))).sum();
        let mut cross = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                cross += geo.frame[i].dot(&nx.dx[j]) * geo.frame[j].dot(&ny.dx[i]);
            }
        }
        let (dx, dy) = (nx.div(), ny.div());
        let (wx, wy) = (nx.omega_x(), ny.omega_x());
        let mixed = J.omega(&nx.dx[0], &ny.dx[1]) + J.omega(&ny.dx[0], &nx.dx[1]);
        Ok(b1 * perp * cb + b1 * b1 * dx * dy * cb - b1 * cross * cb - beta * b1 * (dx * wy + dy * wx) * cb / c
            - beta * mixed * cb / c
            + beta * b1 * wx * wy * cb / (c * c))
    })
}

/// Four-point mixed difference of `(t, s) ↦ L(F + tX + sY)` on the common
/// support.
pub fn bilinear_fd<I, X, Y>(imm: &I, x: &X, y: &Y, h: f64, quad: &QuadSpec, tol: &Tolerances) -> Result<f64>
where
    I: Immersion + ?Sized,
    X: VariationField,
    Y: VariationField,
{
    let Some(support) = intersect(&x.support(), &y.support()) else {
        return Ok(0.0);
    };
    if !imm.domain().is_inside(&support) {
        return Err(Error::InvalidInput("field support must lie strictly inside the domain"));
    }
    let beta = imm.beta();
    let rule = Rule2d::new(&support, quad)?;
    rule.integrate(|p| {
        let d = imm.jet(p).d;
        let (xj, yj) = (x.jet(p)?, y.jet(p)?);
        let at = |t: f64, s: f64| {
            density(
                &[d[0] + xj.d[0] * t + yj.d[0] * s, d[1] + xj.d[1] * t + yj.d[1] * s],
                beta,
                tol,
            )
        };
        Ok((at(h, h)? - at(h, -h)? - at(-h, h)? + at(-h, -h)?) / (4.0 * h * h))
    })
}

/// `B(X, Y)`, `B(Y, X)` and their difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryReport {
    pub xy: f64,
    pub yx: f64,
}

impl SymmetryReport {
    pub fn defect(&self) -> f64 {
        (self.xy - self.yx).abs()
    }
}

pub fn bilinear_symmetry<I, X, Y>(imm: &I, x: &X, y: &Y, quad: &QuadSpec, tol: &Tolerances) -> Result<SymmetryReport>
where
    I: Immersion + ?Sized,
    X: VariationField,
    Y: VariationField,
{
    Ok(SymmetryReport {
        xy: bilinear_form(imm, x, y, quad, tol)?,
        yx: bilinear_form(imm, y, x, quad, tol)?,
    })
}

/// `max (|X| + |∂₁X| + |∂₂X|)` over the quadrature nodes of the support.
pub fn c1_norm<F: VariationField + ?Sized>(field: &F, quad: &QuadSpec) -> Result<f64> {
    let rule = Rule2d::new(&field.support(), quad)?;
    let mut worst = 0.0f64;
    for (p, _) in rule.points() {
        let j = field.jet(p)?;
        worst = worst.max(j.value.norm() + j.d[0].norm() + j.d[1].norm());
    }
    Ok(worst)
}

/// Largest `|⟨X, εᵢ⟩|` over the quadrature nodes of the support.
pub fn normality_defect<I, F>(imm: &I, field: &F, quad: &QuadSpec, tol: &Tolerances) -> Result<f64>
where
    I: Immersion + ?Sized,
    F: VariationField + ?Sized,
{
    let rule = Rule2d::new(&field.support(), quad)?;
    let mut worst = 0.0f64;
    for (p, _) in rule.points() {
        let geo = geometry_from_jet(&imm.jet(p), p, imm.beta(), tol)?;
        let x = field.jet(p)?.value;
        worst = worst.max(x.dot(&geo.frame[0]).abs()).max(x.dot(&geo.frame[1]).abs());
    }
    Ok(worst)
}

/// Largest `|X|`, `|∂X|` on the non-periodic edges of the support, sampled
/// at `samples` points per edge.
pub fn boundary_defect<F: VariationField + ?Sized>(field: &F, samples: usize) -> Result<f64> {
    let s = field.support();
    let mut worst = 0.0f64;
    for k in 0..2 {
        if s.periodic[k] {
            continue;
        }
        let other = 1 - k;
        for edge in [s.lo[k], s.hi[k]] {
            for i in 0..samples {
                let t = (i as f64 + 0.5) / samples as f64;
                let mut p = [0.0; 2];
                p[k] = edge;
                p[other] = s.lo[other] + t * (s.hi[other] - s.lo[other]);
                let j = field.jet(p)?;
                worst = worst.max(j.value.max_abs()).max(j.d[0].max_abs()).max(j.d[1].max_abs());
            }
        }
    }
    Ok(worst)
}

/// Steps and resolution for [`variation_report`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationOptions {
    pub quad: QuadSpec,
    pub first_step: f64,
    pub second_step: f64,
    pub richardson: bool,
}

impl Default for VariationOptions {
    fn default() -> Self {
        VariationOptions { quad: QuadSpec::default(), first_step: 1e-4, second_step: 1e-3, richardson: false }
    }
}

/// Functional value and all variation routes for one field.
///
/// The second-variation formulas are `None` when the surface fails the
/// criticality gate; the finite-difference value is always present.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationReport {
    pub l_value: f64,
    pub dl_formula: f64,
    pub dl_prestokes: f64,
    pub dl_fd: f64,
    pub d2l_formula: Option<f64>,
    /// `∂̄`-form of `II(X) + II(−J_ν X)`.
    pub d2l_pair: Option<f64>,
    /// `II(X) + II(−J_ν X)` from the term-by-term formula.
    pub d2l_pair_sum: Option<f64>,
    pub d2l_fd: f64,
    pub criticality_residual: f64,
}

/// Pairwise absolute differences, recomputed from the stored values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discrepancies {
    pub formula_prestokes: f64,
    pub formula_fd: f64,
    pub prestokes_fd: f64,
    pub second_formula_fd: Option<f64>,
    pub pair: Option<f64>,
}

impl VariationReport {
    pub fn discrepancies(&self) -> Discrepancies {
        Discrepancies {
            formula_prestokes: (self.dl_formula - self.dl_prestokes).abs(),
            formula_fd: (self.dl_formula - self.dl_fd).abs(),
            prestokes_fd: (self.dl_prestokes - self.dl_fd).abs(),
            second_formula_fd: self.d2l_formula.map(|v| (v - self.d2l_fd).abs()),
            pair: match (self.d2l_pair, self.d2l_pair_sum) {
                (Some(a), Some(b)) => Some((a - b).abs()),
                _ => None,
            },
        }
    }

    /// `|II_formula − II_fd| / |II_fd|`.
    pub fn second_relative(&self) -> Option<f64> {
        self.d2l_formula.map(|v| relative(v, self.d2l_fd))
    }

    /// `|pair − sum| / max(|pair|, |sum|)`.
    pub fn pair_relative(&self) -> Option<f64> {
        match (self.d2l_pair, self.d2l_pair_sum) {
            (Some(a), Some(b)) => Some(relative(b, a)),
            _ => None,
        }
    }
}

fn relative(value: f64, reference: f64) -> f64 {
    let scale = reference.abs().max(value.abs());
    if scale > 0.0 {
        (value - reference).abs() / scale
    } else {
        0.0
    }
}

pub fn variation_report<I, F>(imm: &I, field: &F, opts: &VariationOptions, tol: &Tolerances) -> Result<VariationReport>
where
    I: Immersion + ?Sized,
    F: VariationField,
{
    let quad = &opts.quad;
    let residual = criticality_residual(imm, &field.support(), quad, tol)?;
    let critical = residual < tol.criticality && field.is_normal();
    let (d2l_formula, d2l_pair, d2l_pair_sum) = if critical {
        let pair = pair_identity(imm, field, quad, tol)?;
        (Some(pair.ii_x), Some(pair.pair), Some(pair.sum()))
    } else {
        (None, None, None)
    };
    Ok(VariationReport {
        l_value: functional_with(imm, quad, tol)?,
        dl_formula: first_variation_formula(imm, field, quad, tol)?,
        dl_prestokes: first_variation_prestokes(imm, field, quad, tol)?,
        dl_fd: first_variation_fd(imm, field, opts.first_step, opts.richardson, quad, tol)?,
        d2l_formula,
        d2l_pair,
        d2l_pair_sum,
        d2l_fd: second_variation_fd(imm, field, opts.second_step, quad, tol)?,
        criticality_residual: residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surfaces::AffinePatch;

    #[test]
    fn bump_vanishes_to_second_order_at_edges() {
        assert_eq!(bump(1.0), (0.0, 0.0));
        assert_eq!(bump(0.0), (1.0, 0.0));
        let (w, dw) = bump(1.0 - 1e-4);
        assert!(w < 1e-11 && dw.abs() < 1e-6);
    }

    #[test]
    fn unit_square_has_unit_area() {
        let patch = AffinePatch::new(Vec4::basis(0), Vec4::basis(1), Domain::rect([0.0, 0.0], [1.0, 1.0]), 0.0);
        let area = functional(&patch, &QuadSpec { n: [9, 9] }).unwrap();
        assert!((area - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tangent_projection_of_tangent_is_identity() {
        let patch = AffinePatch::new(
            Vec4::new(1.0, 0.0, 0.3, 0.0),
            Vec4::new(0.0, 1.0, 0.0, 0.2),
            Domain::rect([0.0, 0.0], [1.0, 1.0]),
            1.0,
        );
        let jet = patch.jet([0.5, 0.5]);
        let (p, d) = tangent_projection(&jet, &jet.d[0], &[Vec4::ZERO; 2]).unwrap();
        assert!((p - jet.d[0]).max_abs() < 1e-15);
        assert!(d[0].max_abs() < 1e-15 && d[1].max_abs() < 1e-15);
    }
}
