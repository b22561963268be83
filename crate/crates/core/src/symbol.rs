//! Principal symbol of the linearized Euler-Lagrange operator.
//!
//! In the orthonormal tangent frame `ε₁, ε₂`, with `jgᵢ = ⟨G^⊥, J εᵢ⟩`,
//!
//! ```text
//! ⟨σ(ξ) G, G⟩ = (c²|G^⊥|² + β jg₂²) ξ₁² − 2β jg₁ jg₂ ξ₁ξ₂ + (c²|G^⊥|² + β jg₁²) ξ₂²
//! det O       = c²|G^⊥|² [c²|G^⊥|² + β (jg₁² + jg₂²)]
//! ```
//!
//! so `det O ≥ 0` for `β ≥ 0`, with equality exactly when `c |G^⊥| = 0`.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::complex::ComplexStructure;
use crate::error::{Error, Result};
use crate::geometry::{geometry_from_jet, Jet, SurfaceGeometry};
use crate::linalg::{mat2_det, Mat2, Vec4};
use crate::tolerances::Tolerances;

const J: ComplexStructure = ComplexStructure::standard();

/// Default seed of the sampled checks.
pub const DEFAULT_SEED: u64 = 42;

/// Coefficient matrix of the symbol for one direction `G`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolData {
    pub o: Mat2,
    /// `O₁₁ O₂₂ − O₁₂ O₂₁`.
    pub det_direct: f64,
    pub det_factored: f64,
    pub g_perp_norm2: f64,
    pub jg1: f64,
    pub jg2: f64,
}

impl SymbolData {
    /// `|det_direct − det_factored|` relative to `|O₁₁O₂₂| + O₁₂²`, the
    /// magnitude of the products that cancel in the direct route.
    pub fn factorization_error(&self) -> f64 {
        let scale = (self.o[0][0] * self.o[1][1]).abs() + self.o[0][1] * self.o[0][1];
        let diff = (self.det_direct - self.det_factored).abs();
        if scale > 0.0 {
            diff / scale
        } else {
            diff
        }
    }

    pub fn quadratic(&self, xi: [f64; 2]) -> f64 {
        let o = &self.o;
        o[0][0] * xi[0] * xi[0] + (o[0][1] + o[1][0]) * xi[0] * xi[1] + o[1][1] * xi[1] * xi[1]
    }
}

fn normal_data(geo: &SurfaceGeometry, g: &Vec4) -> (Vec4, f64, f64, f64) {
    let gp = geo.normal_part(g);
    let jg1 = gp.dot(&J.apply(&geo.frame[0]));
    let jg2 = gp.dot(&J.apply(&geo.frame[1]));
    (gp, gp.norm2(), jg1, jg2)
}

/// `⟨σ(DP)(x, ξ) G, G⟩` evaluated term by term before the tangential parts
/// of `J εᵢ` are cancelled:
///
/// ```text
/// c²|ξ|²|G^⊥|² − β { (−jg₂⟨Jε₂,G⟩ − c G₁ jg₂) ξ₁²
///                  + (−jg₁⟨Jε₁,G⟩ + c G₂ jg₁) ξ₂²
///                  + (jg₂⟨Jε₁,G⟩ + jg₁⟨Jε₂,G⟩ + c G₁ jg₁ − c G₂ jg₂) ξ₁ξ₂ }
/// ```
///
/// with `Gᵢ = ⟨G, εᵢ⟩`.
pub fn symbol_quadratic(geo: &SurfaceGeometry, g: &Vec4, xi: [f64; 2]) -> f64 {
    let c = geo.cos_alpha;
    let (_, gp2, jg1, jg2) = normal_data(geo, g);
    let je1g = J.apply(&geo.frame[0]).dot(g);
    let je2g = J.apply(&geo.frame[1]).dot(g);
    let g1 = g.dot(&geo.frame[0]);
    let g2 = g.dot(&geo.frame[1]);
    let [x1, x2] = xi;
    let bracket = (-jg2 * je2g - c * g1 * jg2) * x1 * x1
        + (-jg1 * je1g + c * g2 * jg1) * x2 * x2
        + (jg2 * je1g + jg1 * je2g + c * g1 * jg1 - c * g2 * jg2) * x1 * x2;
    c * c * (x1 * x1 + x2 * x2) * gp2 - geo.beta * bracket
}

pub fn symbol_matrix(geo: &SurfaceGeometry, g: &Vec4) -> SymbolData {
    let c2 = geo.cos_alpha * geo.cos_alpha;
    let beta = geo.beta;
    let (_, gp2, jg1, jg2) = normal_data(geo, g);
    let diag = c2 * gp2;
    let off = -beta * jg1 * jg2;
    let o = [[diag + beta * jg2 * jg2, off], [off, diag + beta * jg1 * jg1]];
    SymbolData {
        o,
        det_direct: mat2_det(&o),
        det_factored: diag * (diag + beta * (jg1 * jg1 + jg2 * jg2)),
        g_perp_norm2: gp2,
        jg1,
        jg2,
    }
}

/// Uniform sample on the unit sphere of ℝ⁴ by rejection from the cube.
pub fn random_unit_vec4<R: Rng + ?Sized>(rng: &mut R) -> Vec4 {
    loop {
        let v = Vec4::new(
            rng.gen_range(-1.0..=1.0),
            rng.gen_range(-1.0..=1.0),
            rng.gen_range(-1.0..=1.0),
            rng.gen_range(-1.0..=1.0),
        );
        let n2 = v.norm2();
        if n2 > 1e-4 && n2 <= 1.0 {
            return v * (1.0 / n2.sqrt());
        }
    }
}

/// Outcome of a sampled ellipticity sweep at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticityVerdict {
    pub samples: usize,
    pub beta: f64,
    pub cos_alpha: f64,
    pub min_det: f64,
    /// Smallest `det O / (c|G^⊥|)⁴` over samples with `c|G^⊥| ≥ 1e-6`;
    /// the factorization bounds it below by 1.
    pub min_normalized_det: f64,
    pub max_factorization_error: f64,
    /// Largest `|ξᵀOξ − symbol_quadratic|` over the paired random `ξ`.
    pub max_quadratic_mismatch: f64,
    /// Samples with `det O ≤ 0` although `c|G^⊥| ≥ 1e-6`.
    pub strictness_failures: usize,
    pub elliptic: bool,
}

/// Draws `samples` seeded unit directions `G` (and covectors `ξ`) and checks
/// the sign, factorization and quadratic-form identities of the symbol.
pub fn ellipticity_check(geo: &SurfaceGeometry, samples: usize, seed: u64, tol: &Tolerances) -> Result<EllipticityVerdict> {
    if !(geo.beta >= 0.0) {
        return Err(Error::InvalidBeta(geo.beta));
    }
    if samples == 0 {
        return Err(Error::InvalidInput("ellipticity check needs at least one sample"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = geo.cos_alpha;
    let mut verdict = EllipticityVerdict {
        samples,
        beta: geo.beta,
        cos_alpha: c,
        min_det: f64::INFINITY,
        min_normalized_det: f64::INFINITY,
        max_factorization_error: 0.0,
        max_quadratic_mismatch: 0.0,
        strictness_failures: 0,
        elliptic: true,
    };
    for _ in 0..samples {
        let g = random_unit_vec4(&mut rng);
        let xi = [rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)];
        let data = symbol_matrix(geo, &g);
        let det = data.det_direct;
        if det < -tol.ellipticity_violation {
            return Err(Error::EllipticityViolation { det });
        }
        verdict.min_det = verdict.min_det.min(det);
        verdict.max_factorization_error = verdict.max_factorization_error.max(data.factorization_error());
        let mismatch = (data.quadratic(xi) - symbol_quadratic(geo, &g, xi)).abs();
        verdict.max_quadratic_mismatch = verdict.max_quadratic_mismatch.max(mismatch);
        let weight = c.abs() * data.g_perp_norm2.sqrt();
        if weight >= 1e-6 {
            verdict.min_normalized_det = verdict.min_normalized_det.min(det / weight.powi(4));
            if !(det > 0.0) {
                verdict.strictness_failures += 1;
            }
        }
    }
    verdict.elliptic = verdict.min_det >= -1e-12 && verdict.strictness_failures == 0;
    Ok(verdict)
}

/// Tangent directions `a ε₁ + b ε₂` for seeded random `(a, b)`.
pub fn random_tangent_directions(geo: &SurfaceGeometry, count: usize, seed: u64) -> Vec<Vec4> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let t: f64 = rng.gen_range(0.0..core::f64::consts::TAU);
            let (s, c) = t.sin_cos();
            geo.frame[0] * c + geo.frame[1] * s
        })
        .collect()
}

/// Summary of [`symbol_sweep`].
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSweep {
    pub beta: f64,
    pub pairs: usize,
    pub min_cos_alpha: f64,
    pub min_det: f64,
    pub max_factorization_error: f64,
    pub max_quadratic_mismatch: f64,
    /// Largest `|det O|` for a tangent `G` at the same points.
    pub max_tangent_det: f64,
    /// Pairs with `det O ≤ 0` although `cos α > 1e-6` and `|G^⊥| > 1e-6`.
    pub strictness_failures: usize,
}

/// Random oriented tangent plane with `cos α ≥ 0`.
pub fn random_plane<R: Rng + ?Sized>(rng: &mut R) -> [Vec4; 2] {
    loop {
        let u = random_unit_vec4(rng);
        let mut v = random_unit_vec4(rng);
        let w = v - u * v.dot(&u);
        if w.norm2() < 1e-6 {
            continue;
        }
        if J.apply(&u).dot(&w) < 0.0 {
            v = -v;
        }
        return [u, v];
    }
}

/// Draws `pairs` seeded (tangent plane, unit `G`) pairs and checks the
/// factorization, the sign of the determinant and its vanishing on tangent
/// directions.
pub fn symbol_sweep(beta: f64, pairs: usize, seed: u64, tol: &Tolerances) -> Result<SymbolSweep> {
    if !(beta >= 0.0) {
        return Err(Error::InvalidBeta(beta));
    }
    if pairs == 0 {
        return Err(Error::InvalidInput("symbol sweep needs at least one pair"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = SymbolSweep {
        beta,
        pairs,
        min_cos_alpha: f64::INFINITY,
        min_det: f64::INFINITY,
        max_factorization_error: 0.0,
        max_quadratic_mismatch: 0.0,
        max_tangent_det: 0.0,
        strictness_failures: 0,
    };
    for _ in 0..pairs {
        let d = random_plane(&mut rng);
        let jet = Jet { pos: Vec4::ZERO, d, dd: [[Vec4::ZERO; 2]; 2] };
        let geo = geometry_from_jet(&jet, [0.0, 0.0], beta, tol)?;
        let g = random_unit_vec4(&mut rng);
        let xi = [rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)];
        let t: f64 = rng.gen_range(0.0..core::f64::consts::TAU);
        let data = symbol_matrix(&geo, &g);
        let det = data.det_direct;
        if det < -tol.ellipticity_violation {
            return Err(Error::EllipticityViolation { det });
        }
        out.min_cos_alpha = out.min_cos_alpha.min(geo.cos_alpha);
        out.min_det = out.min_det.min(det);
        out.max_factorization_error = out.max_factorization_error.max(data.factorization_error());
        let mismatch = (data.quadratic(xi) - symbol_quadratic(&geo, &g, xi)).abs();
        out.max_quadratic_mismatch = out.max_quadratic_mismatch.max(mismatch);
        if geo.cos_alpha > 1e-6 && data.g_perp_norm2.sqrt() > 1e-6 && !(det > 0.0) {
            out.strictness_failures += 1;
        }
        let (s, c) = t.sin_cos();
        let tangent = geo.frame[0] * c + geo.frame[1] * s;
        out.max_tangent_det = out.max_tangent_det.max(symbol_matrix(&geo, &tangent).det_direct.abs());
    }
    Ok(out)
}
