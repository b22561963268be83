//! Rotationally symmetric critical surfaces `F(r, θ) = (r cos θ, r sin θ, f(r), g(r))`.
//!
//! The Euler-Lagrange system integrates once to the first integrals
//!
//! ```text
//! r f′ A^{(β−1)/2} = c₁,   r g′ A^{(β−1)/2} = c₂,   A = 1 + f′² + g′².
//! ```
//!
//! With `ρ = √(f′² + g′²)` and `c = √(c₁² + c₂²)` both reduce to the scalar
//! equation `m(ρ) = ρ (1 + ρ²)^{(β−1)/2} = c / r`, whose left side is strictly
//! increasing for `β ≥ 0`. Slopes then split as `f′ = c₁ρ/c`, `g′ = c₂ρ/c`.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::{el_residual_exact, el_residual_with, laplace_beltrami_radial};
use crate::linalg::Vec4;
use crate::quadrature::adaptive_simpson;
use crate::surfaces::{ProfileRadial, RotationalSurface};
use crate::tolerances::Tolerances;

const SQRT2: f64 = core::f64::consts::SQRT_2;

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidBeta(beta))
    }
}

/// `ln(1 + ρ²)` without overflow for large `ρ`.
fn ln_one_plus_sq(rho: f64) -> f64 {
    if rho > 1.0 {
        2.0 * rho.ln() + (1.0 / (rho * rho)).ln_1p()
    } else {
        (rho * rho).ln_1p()
    }
}

/// `m(ρ) = ρ (1 + ρ²)^{(β−1)/2}`.
pub fn slope_map(rho: f64, beta: f64) -> f64 {
    rho * (0.5 * (beta - 1.0) * ln_one_plus_sq(rho)).exp()
}

/// Unique root `ρ ≥ 0` of `r m(ρ) = c_norm`.
///
/// Bracket growth by doubling from 1, bisection to relative width 1e-13,
/// then Newton polishing on `ln ρ + (β−1)/2 ln(1+ρ²) − ln(c_norm / r)`.
pub fn slope_magnitude(r: f64, beta: f64, c_norm: f64) -> Result<f64> {
    check_beta(beta)?;
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidInput("radius must be positive and finite"));
    }
    if !(c_norm >= 0.0) || !c_norm.is_finite() {
        return Err(Error::InvalidInput("first integral must be finite"));
    }
    if c_norm == 0.0 {
        return Ok(0.0);
    }
    let target = c_norm / r;
    if beta == 0.0 && target >= 1.0 {
        return Err(Error::NoSolution { r, target });
    }
    let ln_t = target.ln();
    let k = 0.5 * (beta - 1.0);
    let phi = |rho: f64| rho.ln() + k * ln_one_plus_sq(rho) - ln_t;

    let (mut lo, mut hi) = if phi(1.0) < 0.0 {
        let mut hi = 2.0;
        let mut steps = 0;
        while phi(hi) < 0.0 {
            hi *= 2.0;
            steps += 1;
            if steps > 1100 || !hi.is_finite() {
                return Err(Error::NoSolution { r, target });
            }
        }
        (0.5 * hi, hi)
    } else {
        let mut lo = 0.5;
        let mut steps = 0;
        while phi(lo) > 0.0 {
            lo *= 0.5;
            steps += 1;
            if steps > 1100 || lo == 0.0 {
                return Err(Error::NoSolution { r, target });
            }
        }
        (lo, 2.0 * lo)
    };
    while hi - lo > 1e-13 * hi {
        let mid = 0.5 * (lo + hi);
        if phi(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut rho = 0.5 * (lo + hi);
    for _ in 0..3 {
        let r2 = rho * rho;
        let dphi = (1.0 + beta * r2) / (rho * (1.0 + r2));
        let next = rho - phi(rho) / dphi;
        if !(next > 0.0) || (next - rho).abs() > (hi - lo) {
            break;
        }
        rho = next;
    }
    Ok(rho)
}

/// Slopes `(f′, g′)` of the critical profile with first integrals `(c₁, c₂)`.
pub fn solve_slope(r: f64, beta: f64, c1: f64, c2: f64) -> Result<(f64, f64)> {
    let c = c1.hypot(c2);
    let rho = slope_magnitude(r, beta, c)?;
    if c == 0.0 {
        return Ok((0.0, 0.0));
    }
    Ok((c1 * rho / c, c2 * rho / c))
}

/// `ρ′ = −ρ (1 + ρ²) / (r (1 + β ρ²))`, from differentiating `r m(ρ) = c`.
pub fn slope_magnitude_derivative(r: f64, rho: f64, beta: f64) -> f64 {
    let r2 = rho * rho;
    -rho * (1.0 + r2) / (r * (1.0 + beta * r2))
}

/// First and second derivatives of a profile at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeJet {
    pub fp: f64,
    pub gp: f64,
    pub fpp: f64,
    pub gpp: f64,
}

impl SlopeJet {
    pub fn a(&self) -> f64 {
        1.0 + self.fp * self.fp + self.gp * self.gp
    }
}

pub fn slope_jet(r: f64, beta: f64, c1: f64, c2: f64) -> Result<SlopeJet> {
    let c = c1.hypot(c2);
    let rho = slope_magnitude(r, beta, c)?;
    if c == 0.0 {
        return Ok(SlopeJet { fp: 0.0, gp: 0.0, fpp: 0.0, gpp: 0.0 });
    }
    let drho = slope_magnitude_derivative(r, rho, beta);
    Ok(SlopeJet {
        fp: c1 * rho / c,
        gp: c2 * rho / c,
        fpp: c1 * drho / c,
        gpp: c2 * drho / c,
    })
}

/// Inputs of [`solve_profile`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileParams {
    pub beta: f64,
    pub c1: f64,
    pub c2: f64,
    /// Anchor radius where `f = f0`, `g = g0`.
    pub eps: f64,
    pub r_max: f64,
    pub n: usize,
    pub f0: f64,
    pub g0: f64,
}

impl Default for ProfileParams {
    fn default() -> Self {
        ProfileParams {
            beta: 2.0,
            c1: 1.0,
            c2: 1.0,
            eps: 0.01,
            r_max: 1000.0,
            n: 4097,
            f0: 0.0,
            g0: 0.0,
        }
    }
}

/// Radial grid: geometric when `r_max / eps > 100`, uniform otherwise.
pub fn radial_grid(eps: f64, r_max: f64, n: usize) -> Result<Vec<f64>> {
    if !(eps > 0.0) || !(r_max > eps) || !r_max.is_finite() {
        return Err(Error::InvalidInput("need 0 < eps < r_max"));
    }
    if n < 9 {
        return Err(Error::GridTooCoarse { nodes: n, required: 9 });
    }
    let last = (n - 1) as f64;
    let mut grid: Vec<f64> = if r_max / eps > 100.0 {
        let ratio = (r_max / eps).ln();
        (0..n).map(|i| eps * (ratio * i as f64 / last).exp()).collect()
    } else {
        let h = (r_max - eps) / last;
        (0..n).map(|i| eps + h * i as f64).collect()
    };
    grid[0] = eps;
    grid[n - 1] = r_max;
    Ok(grid)
}

/// Sampled solution of the first-integral system for one `(β, c₁, c₂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationalProfile {
    pub beta: f64,
    pub c1: f64,
    pub c2: f64,
    pub eps: f64,
    pub f0: f64,
    pub g0: f64,
    pub r: Vec<f64>,
    pub fp: Vec<f64>,
    pub gp: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub cos_alpha: Vec<f64>,
}

/// Solves the slopes nodewise and integrates `f`, `g` from the anchor.
///
/// Each grid interval is integrated with adaptive Simpson on the exact slope
/// map, so the accuracy of `f` does not depend on the grid near a catenoid
/// neck.
pub fn solve_profile(params: &ProfileParams) -> Result<RotationalProfile> {
    check_beta(params.beta)?;
    let r = radial_grid(params.eps, params.r_max, params.n)?;
    let (beta, c1, c2) = (params.beta, params.c1, params.c2);
    let c = c1.hypot(c2);
    let n = r.len();
    let mut rho = Vec::with_capacity(n);
    for &ri in &r {
        rho.push(slope_magnitude(ri, beta, c)?);
    }
    let mut integral = Vec::with_capacity(n);
    integral.push(0.0);
    let mut running = 0.0;
    if c > 0.0 {
        let mut slope = |x: f64| slope_magnitude(x, beta, c);
        for i in 0..n - 1 {
            let (a, b) = (r[i], r[i + 1]);
            let mid = slope_magnitude(0.5 * (a + b), beta, c)?;
            let rough = (b - a) / 6.0 * (rho[i] + 4.0 * mid + rho[i + 1]);
            let tol = 1e-15 * rough.abs().max(f64::MIN_POSITIVE);
            running += adaptive_simpson(&mut slope, a, b, tol, 40)?;
            integral.push(running);
        }
    } else {
        integral.resize(n, 0.0);
    }
    let (uf, ug) = if c > 0.0 { (c1 / c, c2 / c) } else { (0.0, 0.0) };
    let fp: Vec<f64> = rho.iter().map(|p| uf * p).collect();
    let gp: Vec<f64> = rho.iter().map(|p| ug * p).collect();
    let f = integral.iter().map(|s| params.f0 + uf * s).collect();
    let g = integral.iter().map(|s| params.g0 + ug * s).collect();
    let cos_alpha = rho.iter().map(|p| 1.0 / (1.0 + p * p).sqrt()).collect();
    Ok(RotationalProfile {
        beta,
        c1,
        c2,
        eps: params.eps,
        f0: params.f0,
        g0: params.g0,
        r,
        fp,
        gp,
        f,
        g,
        cos_alpha,
    })
}

impl RotationalProfile {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn params(&self) -> ProfileParams {
        ProfileParams {
            beta: self.beta,
            c1: self.c1,
            c2: self.c2,
            eps: self.eps,
            r_max: *self.r.last().unwrap_or(&self.eps),
            n: self.r.len(),
            f0: self.f0,
            g0: self.g0,
        }
    }

    /// Largest relative first-integral residual `|r f′ A^{(β−1)/2} − c|/|c|`
    /// over nodes and both components (absolute where `c = 0`).
    pub fn first_integral_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.r.len() {
            let a = 1.0 + self.fp[i] * self.fp[i] + self.gp[i] * self.gp[i];
            let factor = self.r[i] * (0.5 * (self.beta - 1.0) * a.ln()).exp();
            for (slope, c) in [(self.fp[i], self.c1), (self.gp[i], self.c2)] {
                let res = (slope * factor - c).abs();
                worst = worst.max(if c != 0.0 { res / c.abs() } else { res });
            }
        }
        worst
    }

    /// Largest `|c₂ f′ − c₁ g′|`.
    pub fn proportionality_defect(&self) -> f64 {
        self.fp
            .iter()
            .zip(&self.gp)
            .map(|(f, g)| (self.c2 * f - self.c1 * g).abs())
            .fold(0.0, f64::max)
    }

    /// Largest `|cos α − 1/√A|`, or infinity if some `cos α ∉ (0, 1]`.
    pub fn cos_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.r.len() {
            let c = self.cos_alpha[i];
            if !(c > 0.0 && c <= 1.0) {
                return f64::INFINITY;
            }
            let a = 1.0 + self.fp[i] * self.fp[i] + self.gp[i] * self.gp[i];
            worst = worst.max((c - 1.0 / a.sqrt()).abs());
        }
        worst
    }

    /// Cubic Hermite interpolation of `(f, g)` between nodes.
    pub fn interpolate(&self, x: f64) -> (f64, f64) {
        let n = self.r.len();
        let i = match self.r.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(i) => return (self.f[i], self.g[i]),
            Err(0) => 0,
            Err(i) if i >= n => n - 2,
            Err(i) => i - 1,
        };
        let (x0, x1) = (self.r[i], self.r[i + 1]);
        let h = x1 - x0;
        let t = (x - x0) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let herm = |y: &[f64], dy: &[f64]| h00 * y[i] + h10 * h * dy[i] + h01 * y[i + 1] + h11 * h * dy[i + 1];
        (herm(&self.f, &self.fp), herm(&self.g, &self.gp))
    }
}

/// `f − f₀` for `β = 1`: `c₁ ln(r / ε)`.
pub fn log_solution(r: f64, c: f64, eps: f64) -> f64 {
    c * (r / eps).ln()
}

/// `(f′, g′)` of the `β = 0` solution: `f′ = c₁ / √(r² − c²)`.
pub fn catenoid_slope(r: f64, c1: f64, c2: f64) -> Result<(f64, f64)> {
    let c = c1.hypot(c2);
    if r <= c {
        return Err(Error::NoSolution { r, target: c / r });
    }
    let s = (r * r - c * c).sqrt();
    Ok((c1 / s, c2 / s))
}

/// `f − f₀` of the `β = 0` solution: `c₁ (cosh⁻¹(r/c) − cosh⁻¹(ε/c))`.
pub fn catenoid_solution(r: f64, c1: f64, c2: f64, eps: f64) -> Result<f64> {
    let c = c1.hypot(c2);
    if eps <= c || r <= c {
        return Err(Error::NoSolution { r: r.min(eps), target: c / r.min(eps) });
    }
    Ok(c1 * ((r / c).acosh() - (eps / c).acosh()))
}

/// Largest deviation of `f` and `g` from the closed forms at `β ∈ {0, 1}`;
/// `None` for other exponents.
pub fn closed_form_deviation(profile: &RotationalProfile) -> Result<Option<f64>> {
    let (c1, c2, eps) = (profile.c1, profile.c2, profile.eps);
    let mut worst = 0.0f64;
    if profile.beta == 1.0 {
        for i in 0..profile.len() {
            let r = profile.r[i];
            worst = worst
                .max((profile.f[i] - profile.f0 - log_solution(r, c1, eps)).abs())
                .max((profile.g[i] - profile.g0 - log_solution(r, c2, eps)).abs());
        }
        Ok(Some(worst))
    } else if profile.beta == 0.0 {
        for i in 0..profile.len() {
            let r = profile.r[i];
            worst = worst
                .max((profile.f[i] - profile.f0 - catenoid_solution(r, c1, c2, eps)?).abs())
                .max((profile.g[i] - profile.g0 - catenoid_solution(r, c2, c1, eps)?).abs());
        }
        Ok(Some(worst))
    } else {
        Ok(None)
    }
}

fn rotational_normals(theta: f64, s: &SlopeJet) -> (Vec4, Vec4) {
    let (st, ct) = theta.sin_cos();
    (
        Vec4::new(-s.fp * ct, -s.fp * st, 1.0, 0.0),
        Vec4::new(-s.gp * ct, -s.gp * st, 0.0, 1.0),
    )
}

/// Mean curvature of a surface of revolution from its slope jet:
///
/// ```text
/// H = [r(1+g′²)f″ − r f′g′g″ + A f′] / (r A²) · e₃
///   + [r(1+f′²)g″ − r f′g′f″ + A g′] / (r A²) · e₄
/// ```
///
/// with the non-normalized normals `e₃ = (−f′cos θ, −f′sin θ, 1, 0)`,
/// `e₄ = (−g′cos θ, −g′sin θ, 0, 1)`.
pub fn mean_curvature_closed_form(r: f64, theta: f64, s: &SlopeJet) -> Vec4 {
    let a = s.a();
    let (e3, e4) = rotational_normals(theta, s);
    let k = 1.0 / (r * a * a);
    let h3 = r * (1.0 + s.gp * s.gp) * s.fpp - r * s.fp * s.gp * s.gpp + a * s.fp;
    let h4 = r * (1.0 + s.fp * s.fp) * s.gpp - r * s.fp * s.gp * s.fpp + a * s.gp;
    e3 * (k * h3) + e4 * (k * h4)
}

/// `(J (J ∇cos α)^⊤)^⊥ = −(f′f″ + g′g″) / A^{7/2} · (f′ e₃ + g′ e₄)`.
pub fn angle_term_closed_form(theta: f64, s: &SlopeJet) -> Vec4 {
    let a = s.a();
    let (e3, e4) = rotational_normals(theta, s);
    let k = -(s.fp * s.fpp + s.gp * s.gpp) / a.powf(3.5);
    (e3 * s.fp + e4 * s.gp) * k
}

/// Largest Euler-Lagrange residual `|P|` over the interior nodes at `θ = 0`,
/// with `∇cos α` from the jet (`exact`) and from central differences (`fd`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElClosure {
    pub exact: f64,
    pub fd: f64,
    /// Radius of the largest `fd` residual.
    pub fd_worst_r: f64,
}

pub fn el_closure(profile: &RotationalProfile, tol: &Tolerances) -> Result<ElClosure> {
    let surface = RotationalSurface::new(ProfileRadial::new(profile), profile.beta);
    let mut out = ElClosure { exact: 0.0, fd: 0.0, fd_worst_r: profile.r[0] };
    for &r in &profile.r[1..profile.len() - 1] {
        out.exact = out.exact.max(el_residual_exact(&surface, [r, 0.0], tol)?.norm());
        let fd = el_residual_with(&surface, [r, 0.0], tol)?.norm();
        if fd > out.fd {
            out.fd = fd;
            out.fd_worst_r = r;
        }
    }
    Ok(out)
}

/// Two-term far expansion `f′ ≈ 1/r − (β−1)/r³` (`c₁ = c₂ = 1`).
pub fn asymptotic_far(r: f64, beta: f64) -> f64 {
    1.0 / r - (beta - 1.0) / (r * r * r)
}

/// Leading coefficient exponent pair of the near expansion: `p₀(r)`.
fn near_leading(r: f64, beta: f64) -> f64 {
    (0.5 * (1.0 - beta) / beta * core::f64::consts::LN_2 - r.ln() / beta).exp()
}

/// Coefficient of `r^{1/β}` in the near expansion:
/// `−((β−1)/β) 2^{−(3β+1)/(2β)}`.
pub fn near_coefficient(beta: f64) -> f64 {
    -((beta - 1.0) / beta) * (-(3.0 * beta + 1.0) / (2.0 * beta) * core::f64::consts::LN_2).exp()
}

/// Two-term near expansion
/// `f′ ≈ 2^{(1−β)/(2β)} r^{−1/β} − ((β−1)/β) 2^{−(3β+1)/(2β)} r^{1/β}`.
pub fn asymptotic_near(r: f64, beta: f64) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidBeta(beta));
    }
    Ok(near_leading(r, beta) + near_coefficient(beta) * (r.ln() / beta).exp())
}

fn newton<F: Fn(f64) -> (f64, f64)>(mut x: f64, f: F) -> f64 {
    for _ in 0..60 {
        let (v, dv) = f(x);
        let step = v / dv;
        if !step.is_finite() {
            break;
        }
        x -= step;
        if step.abs() <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    x
}

/// One probe of the far expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FarProbe {
    pub r: f64,
    pub fp: f64,
    pub truncation: f64,
    /// `E_far = r³ (f′ − 1/r + (β−1)/r³)`.
    pub remainder: f64,
}

/// Far remainder, resolved beyond double precision of `f′`.
///
/// Writing `f′ = (1 + v)/r`, the slope equation becomes
/// `ln(1+v) + (β−1)/2 · ln(1 + 2(1+v)²/r²) = 0`, solved for `v` directly;
/// then `E_far = r² v + (β − 1)`.
pub fn far_probe(r: f64, beta: f64) -> Result<FarProbe> {
    let (fp, _) = solve_slope(r, beta, 1.0, 1.0)?;
    let k = 0.5 * (beta - 1.0);
    let r2 = r * r;
    let v = newton(r * fp - 1.0, |v| {
        let w = 2.0 * (1.0 + v) * (1.0 + v) / r2;
        let val = v.ln_1p() + k * w.ln_1p();
        let der = 1.0 / (1.0 + v) + k * (4.0 * (1.0 + v) / r2) / (1.0 + w);
        (val, der)
    });
    Ok(FarProbe {
        r,
        fp,
        truncation: asymptotic_far(r, beta),
        remainder: r2 * v + (beta - 1.0),
    })
}

/// One probe of the near expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearProbe {
    pub r: f64,
    pub fp: f64,
    pub truncation: f64,
    /// `|f′ − truncation| / f′`.
    pub relative_error: f64,
    /// `(f′ − truncation) / (coefficient · r^{1/β})`, zero at `β = 1`.
    pub remainder: f64,
    /// `(f′ − p₀) / r^{1/β}`, the numerically fitted second coefficient.
    pub fitted_coefficient: f64,
}

/// Near-origin probe with `f′ = p₀ (1 + u)`, `p₀ = 2^{(1−β)/(2β)} r^{−1/β}`.
///
/// `u` solves `β ln(1+u) + (β−1)/2 · ln(1 + q/(1+u)²) = 0`, `q = 1/(2p₀²)`,
/// and the two-term truncation is `u₂ = −(β−1) q / (2β)`.
pub fn near_probe(r: f64, beta: f64) -> Result<NearProbe> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidBeta(beta));
    }
    let (fp, _) = solve_slope(r, beta, 1.0, 1.0)?;
    let p0 = near_leading(r, beta);
    let q = 0.5 / (p0 * p0);
    let k = 0.5 * (beta - 1.0);
    let u = newton(fp / p0 - 1.0, |u| {
        let s = (1.0 + u) * (1.0 + u);
        let w = q / s;
        let val = beta * u.ln_1p() + k * w.ln_1p();
        let der = beta / (1.0 + u) - k * (2.0 * q / (s * (1.0 + u))) / (1.0 + w);
        (val, der)
    });
    let u2 = -(beta - 1.0) * q / (2.0 * beta);
    let remainder = if beta == 1.0 { 0.0 } else { (u - u2) / u2 };
    let scale = (r.ln() / beta).exp();
    Ok(NearProbe {
        r,
        fp,
        truncation: p0 * (1.0 + u2),
        relative_error: (u - u2).abs() / (1.0 + u),
        remainder,
        fitted_coefficient: p0 * u / scale,
    })
}

/// Both expansion checks for a `c₁ = c₂ = 1` profile.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticReport {
    pub beta: f64,
    /// Probes at `R/4, R/2, R`, `R = max(r_max, 10³)`; empty when skipped.
    pub far: Vec<FarProbe>,
    /// Probes at `10 ρ, √10 ρ, ρ`, `ρ = min(ε, 10⁻³)`; empty when skipped.
    pub near: Vec<NearProbe>,
    pub far_decreasing: bool,
    /// `|E_far(R)| < tol.far_remainder`; vacuous for `β > 5`.
    pub far_bound: bool,
    pub near_decreasing: bool,
    /// Relative error at the outermost near probe below `tol.near_relative`.
    pub near_bound: bool,
    /// Coefficient of `r^{1/β}` as stated by the expansion.
    pub near_coefficient: Option<f64>,
    /// The same coefficient fitted at the innermost probe.
    pub fitted_near_coefficient: Option<f64>,
}

impl AsymptoticReport {
    pub fn passed(&self) -> bool {
        self.far_decreasing && self.far_bound && self.near_decreasing && self.near_bound
    }
}

fn decreasing(values: &[f64]) -> bool {
    let all_zero = values.iter().all(|v| v.abs() <= 1e-12);
    all_zero || values.windows(2).all(|w| w[1].abs() < w[0].abs())
}

/// Builds the report. The far check runs when `r_max ≥ 100`, the near check
/// when `ε ≤ 10⁻²` and `β > 0`; probes use the slope map of the same
/// solution, so they need not coincide with grid nodes.
pub fn asymptotic_report(profile: &RotationalProfile, tol: &Tolerances) -> Result<AsymptoticReport> {
    if profile.c1 != 1.0 || profile.c2 != 1.0 {
        return Err(Error::InvalidInput("asymptotic expansions assume c1 = c2 = 1"));
    }
    let beta = profile.beta;
    let r_max = *profile.r.last().ok_or(Error::InvalidInput("empty profile"))?;
    let mut far = Vec::new();
    if r_max >= 100.0 {
        let big = r_max.max(1e3);
        for r in [0.25 * big, 0.5 * big, big] {
            far.push(far_probe(r, beta)?);
        }
    }
    let mut near = Vec::new();
    if profile.eps <= 1e-2 && beta > 0.0 {
        let small = profile.eps.min(1e-3);
        for r in [10.0 * small, 10f64.sqrt() * small, small] {
            near.push(near_probe(r, beta)?);
        }
    }
    if far.is_empty() && near.is_empty() {
        return Err(Error::InvalidInput("grid reaches neither asymptotic regime"));
    }
    let far_rem: Vec<f64> = far.iter().map(|p| p.remainder).collect();
    let near_rem: Vec<f64> = near.iter().map(|p| p.remainder).collect();
    let near_rel: Vec<f64> = near.iter().map(|p| p.relative_error).collect();
    Ok(AsymptoticReport {
        beta,
        far_decreasing: decreasing(&far_rem),
        far_bound: beta > 5.0 || far.last().map_or(true, |p| p.remainder.abs() < tol.far_remainder),
        near_decreasing: decreasing(&near_rem) && decreasing(&near_rel),
        near_bound: near.first().map_or(true, |p| p.relative_error < tol.near_relative),
        near_coefficient: (!near.is_empty()).then(|| near_coefficient(beta)),
        fitted_near_coefficient: near.last().map(|p| p.fitted_coefficient),
        far,
        near,
    })
}

/// As [`asymptotic_report`], failing with `AsymptoticMismatch` on the first
/// violated check.
pub fn verify_asymptotics(profile: &RotationalProfile, tol: &Tolerances) -> Result<AsymptoticReport> {
    let report = asymptotic_report(profile, tol)?;
    if let Some(last) = report.far.last() {
        if !report.far_decreasing {
            return Err(Error::AsymptoticMismatch {
                r: last.r,
                value: last.remainder,
                detail: "far remainder is not decreasing",
            });
        }
        if !report.far_bound {
            return Err(Error::AsymptoticMismatch {
                r: last.r,
                value: last.remainder,
                detail: "far remainder exceeds its bound",
            });
        }
    }
    if let Some(first) = report.near.first() {
        if !report.near_decreasing {
            let last = report.near.last().unwrap_or(first);
            return Err(Error::AsymptoticMismatch {
                r: last.r,
                value: last.remainder,
                detail: "near remainder is not decreasing",
            });
        }
        if !report.near_bound {
            return Err(Error::AsymptoticMismatch {
                r: first.r,
                value: first.relative_error,
                detail: "near relative error exceeds its bound",
            });
        }
    }
    Ok(report)
}

/// Residuals of the two angle identities on a profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdeReport {
    /// `max |Δcos α − (2β sin²α / (cos α (cos²α + β sin²α)) − 2 cos α) |∇α|²|`.
    pub cos_residual: f64,
    /// `max |Δ(1/cos α) − 2|∇α|² / (cos α (cos²α + β sin²α))|`.
    pub inverse_cos_residual: f64,
    pub interior_nodes: usize,
}

impl PdeReport {
    pub fn max_residual(&self) -> f64 {
        self.cos_residual.max(self.inverse_cos_residual)
    }
}

/// Checks both identities at the interior nodes with the reduced
/// Laplace-Beltrami operator; `|∇α|² = α′² / A`, `α = atan ρ`.
pub fn angle_pde_check(profile: &RotationalProfile) -> Result<PdeReport> {
    let n = profile.len();
    let beta = profile.beta;
    let c_norm = profile.c1.hypot(profile.c2);
    let mut a = Vec::with_capacity(n);
    let mut inv = Vec::with_capacity(n);
    for i in 0..n {
        let ai = 1.0 + profile.fp[i] * profile.fp[i] + profile.gp[i] * profile.gp[i];
        a.push(ai);
        inv.push(ai.sqrt());
    }
    let lap_cos = laplace_beltrami_radial(&profile.r, &profile.cos_alpha, &a)?;
    let lap_inv = laplace_beltrami_radial(&profile.r, &inv, &a)?;
    let mut cos_residual = 0.0f64;
    let mut inverse_cos_residual = 0.0f64;
    for i in 1..n - 1 {
        let r = profile.r[i];
        let rho = profile.fp[i].hypot(profile.gp[i]);
        let drho = if c_norm > 0.0 { slope_magnitude_derivative(r, rho, beta) } else { 0.0 };
        let dalpha = drho / (1.0 + rho * rho);
        let grad2 = dalpha * dalpha / a[i];
        let c = profile.cos_alpha[i];
        let s2 = rho * rho / (1.0 + rho * rho);
        let denom = c * (c * c + beta * s2);
        let rhs_cos = 2.0 * beta * s2 / denom * grad2 - 2.0 * c * grad2;
        let rhs_inv = 2.0 * grad2 / denom;
        cos_residual = cos_residual.max((lap_cos[i - 1] - rhs_cos).abs());
        inverse_cos_residual = inverse_cos_residual.max((lap_inv[i - 1] - rhs_inv).abs());
    }
    Ok(PdeReport { cos_residual, inverse_cos_residual, interior_nodes: n - 2 })
}

/// Entry of the `β → ∞` bound `f′ ≤ ((β−1) r)^{−1/3}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LargeBetaEntry {
    pub beta: f64,
    /// `max f′ / bound` over the interval nodes.
    pub worst_ratio: f64,
    pub worst_r: f64,
}

/// Entry of the `β → 0` comparison with the catenoid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallBetaEntry {
    pub beta: f64,
    /// `sup |f′_β − f′_catenoid|` over the interval nodes.
    pub sup_distance: f64,
    /// `max (f′_β)²` over the interval nodes.
    pub max_fp_sq: f64,
    /// `3 / (A² − 2)` with `A` the left end of the interval.
    pub bound: f64,
    /// `f′_β(r₀)` at the divergence probe `r₀ ≤ √2`.
    pub fp_at_r0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitReport {
    pub interval: [f64; 2],
    pub r0: f64,
    pub large: Vec<LargeBetaEntry>,
    /// Ordered by decreasing `β`.
    pub small: Vec<SmallBetaEntry>,
    pub large_ok: bool,
    pub small_bound_ok: bool,
    pub small_converging: bool,
    pub diverging_at_r0: bool,
}

impl LimitReport {
    pub fn passed(&self) -> bool {
        self.large_ok && self.small_bound_ok && self.small_converging && self.diverging_at_r0
    }
}

/// Limit bounds for `c₁ = c₂ = 1` profiles on `nodes` uniform points of
/// `interval`. Exponents above 1 enter the large-β bound, exponents in
/// `[0, 1)` the catenoid comparison; the latter needs `interval[0] > √2`.
pub fn limit_bounds_report(betas: &[f64], interval: [f64; 2], nodes: usize, r0: f64) -> Result<LimitReport> {
    let [lo, hi] = interval;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidInput("interval must satisfy 0 < A < B"));
    }
    if nodes < 2 {
        return Err(Error::GridTooCoarse { nodes, required: 2 });
    }
    if !(r0 > 0.0 && r0 <= SQRT2) {
        return Err(Error::InvalidInput("divergence probe must lie in (0, sqrt 2]"));
    }
    let grid: Vec<f64> = (0..nodes)
        .map(|i| lo + (hi - lo) * i as f64 / (nodes - 1) as f64)
        .collect();
    let mut large = Vec::new();
    let mut small = Vec::new();
    for &beta in betas {
        check_beta(beta)?;
        if beta > 1.0 {
            let mut entry = LargeBetaEntry { beta, worst_ratio: 0.0, worst_r: lo };
            for &r in &grid {
                let (fp, _) = solve_slope(r, beta, 1.0, 1.0)?;
                let ratio = fp / ((beta - 1.0) * r).cbrt().recip();
                if ratio > entry.worst_ratio {
                    entry.worst_ratio = ratio;
                    entry.worst_r = r;
                }
            }
            large.push(entry);
        } else if beta < 1.0 {
            if lo <= SQRT2 {
                return Err(Error::InvalidInput("catenoid comparison needs A > sqrt 2"));
            }
            let mut sup_distance = 0.0f64;
            let mut max_fp_sq = 0.0f64;
            for &r in &grid {
                let (fp, _) = solve_slope(r, beta, 1.0, 1.0)?;
                let (cat, _) = catenoid_slope(r, 1.0, 1.0)?;
                sup_distance = sup_distance.max((fp - cat).abs());
                max_fp_sq = max_fp_sq.max(fp * fp);
            }
            let fp_at_r0 = if beta > 0.0 { solve_slope(r0, beta, 1.0, 1.0)?.0 } else { f64::INFINITY };
            small.push(SmallBetaEntry {
                beta,
                sup_distance,
                max_fp_sq,
                bound: 3.0 / (lo * lo - 2.0),
                fp_at_r0,
            });
        }
    }
    small.sort_by(|a, b| b.beta.total_cmp(&a.beta));
    let large_ok = large.iter().all(|e| e.worst_ratio <= 1.0);
    let small_bound_ok = small.iter().all(|e| e.max_fp_sq <= e.bound);
    let small_converging = small.windows(2).all(|w| w[1].sup_distance < w[0].sup_distance);
    let diverging_at_r0 = small.windows(2).all(|w| w[1].fp_at_r0 > w[0].fp_at_r0);
    Ok(LimitReport {
        interval,
        r0,
        large,
        small,
        large_ok,
        small_bound_ok,
        small_converging,
        diverging_at_r0,
    })
}

/// As [`limit_bounds_report`], failing with `BoundViolation` on the first
/// violated bound.
pub fn limit_bounds_check(betas: &[f64], interval: [f64; 2], nodes: usize, r0: f64) -> Result<LimitReport> {
    let report = limit_bounds_report(betas, interval, nodes, r0)?;
    for e in &report.large {
        if e.worst_ratio > 1.0 {
            let bound = ((e.beta - 1.0) * e.worst_r).cbrt().recip();
            return Err(Error::BoundViolation {
                beta: e.beta,
                r: e.worst_r,
                value: e.worst_ratio * bound,
                bound,
            });
        }
    }
    for e in &report.small {
        if e.max_fp_sq > e.bound {
            return Err(Error::BoundViolation {
                beta: e.beta,
                r: interval[0],
                value: e.max_fp_sq,
                bound: e.bound,
            });
        }
    }
    for w in report.small.windows(2) {
        if w[1].sup_distance >= w[0].sup_distance {
            return Err(Error::BoundViolation {
                beta: w[1].beta,
                r: interval[0],
                value: w[1].sup_distance,
                bound: w[0].sup_distance,
            });
        }
        if w[1].fp_at_r0 <= w[0].fp_at_r0 {
            return Err(Error::BoundViolation {
                beta: w[1].beta,
                r: report.r0,
                value: w[0].fp_at_r0,
                bound: w[1].fp_at_r0,
            });
        }
    }
    Ok(report)
}

/// Profiles along a β-grid sharing one radial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaSweep {
    pub profiles: Vec<RotationalProfile>,
    /// `sup_r |f′_{β_{k+1}} − f′_{β_k}|` for consecutive exponents.
    pub continuity: Vec<f64>,
}

impl BetaSweep {
    pub fn max_continuity(&self) -> f64 {
        self.continuity.iter().copied().fold(0.0, f64::max)
    }
}

pub fn beta_sweep(betas: &[f64], params: &ProfileParams) -> Result<BetaSweep> {
    if betas.is_empty() {
        return Err(Error::InvalidInput("empty beta grid"));
    }
    if betas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("beta grid must be strictly increasing"));
    }
    let mut profiles = Vec::with_capacity(betas.len());
    for &beta in betas {
        profiles.push(solve_profile(&ProfileParams { beta, ..*params })?);
    }
    let continuity = profiles
        .windows(2)
        .map(|w| {
            w[0].fp
                .iter()
                .zip(&w[1].fp)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(BetaSweep { profiles, continuity })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_case_slope_is_c_over_r() {
        let (f, g) = solve_slope(2.0, 1.0, 1.0, 1.0).unwrap();
        assert!((f - 0.5).abs() < 1e-15 && (g - 0.5).abs() < 1e-15);
    }

    #[test]
    fn quartic_case_slope() {
        let (f, _) = solve_slope(1.0, 2.0, 1.0, 1.0).unwrap();
        assert!((f - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn minimal_case_inside_neck_has_no_solution() {
        let err = solve_slope(1.0, 0.0, 1.0, 1.0).unwrap_err();
        assert_eq!(err.name(), "NoSolution");
        assert_eq!(solve_slope(1.0, -0.5, 1.0, 1.0).unwrap_err(), Error::InvalidBeta(-0.5));
    }

    #[test]
    fn zero_integrals_give_a_plane() {
        assert_eq!(solve_slope(3.0, 2.0, 0.0, 0.0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn huge_slopes_do_not_overflow() {
        let rho = slope_magnitude(1e-100, 0.5, 1.0).unwrap();
        assert!((rho.ln() / 1e200f64.ln() - 1.0).abs() < 1e-12);
        let t = 1.0 - 1e-12;
        let rho = slope_magnitude(1.0, 0.0, t).unwrap();
        let exact = t / (1.0 - t * t).sqrt();
        assert!((rho - exact).abs() / exact < 1e-3);
    }

    #[test]
    fn grid_switches_to_geometric_spacing() {
        let uniform = radial_grid(1.0, 10.0, 9).unwrap();
        assert!((uniform[1] - uniform[0] - (uniform[8] - uniform[7])).abs() < 1e-12);
        let geometric = radial_grid(0.01, 1000.0, 9).unwrap();
        assert!((geometric[1] / geometric[0] - geometric[8] / geometric[7]).abs() < 1e-9);
        assert!(radial_grid(1.0, 10.0, 8).is_err());
    }

    #[test]
    fn far_and_near_collapse_at_beta_one() {
        assert_eq!(far_probe(100.0, 1.0).unwrap().remainder, 0.0);
        assert_eq!(near_probe(0.01, 1.0).unwrap().remainder, 0.0);
        assert_eq!(asymptotic_near(0.5, 1.0).unwrap(), 2.0);
        assert_eq!(asymptotic_near(0.5, 0.0).unwrap_err(), Error::InvalidBeta(0.0));
    }
}
