#![no_std]

//! Numerical laboratory for β-symplectic critical surfaces in ℂ².
//!
//! A surface Σ ⊂ ℂ² = ℝ⁴ is symplectic when its Kähler angle α satisfies
//! `cos α > 0`. For `β ≥ 0` the functional
//!
//! ```text
//! L_β(Σ) = ∫_Σ cos^{-β} α dμ
//! ```
//!
//! has the Euler-Lagrange equation `cos³α H = β (J (J ∇cos α)^⊤)^⊥`.
//! This crate evaluates every ingredient of that theory pointwise and in
//! integrated form:
//!
//! * [`geometry`]: frames, metric, second fundamental form, mean curvature,
//!   Kähler angle and the Euler-Lagrange operator of a parametric immersion.
//! * [`symbol`]: the principal symbol of the linearized operator and its
//!   determinant factorization.
//! * [`variation`]: quadrature of `L_β` and of its first and second
//!   variations, each computed along several independent routes.
//! * [`rotational`]: the rotationally symmetric solution family
//!   `F(r, θ) = (r cos θ, r sin θ, f(r), g(r))` with its first integrals,
//!   closed forms, asymptotics and β-limits.
//!
//! The crate is `no_std` and only needs `alloc`; IO lives in the `beta-lab`
//! companion crate.

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod complex;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod quadrature;
pub mod rotational;
pub mod surfaces;
pub mod symbol;
pub mod tolerances;
pub mod variation;

pub use complex::ComplexStructure;
pub use error::{Error, Result};
pub use geometry::{Domain, Immersion, Jet, SurfaceGeometry};
pub use linalg::Vec4;
pub use tolerances::Tolerances;
