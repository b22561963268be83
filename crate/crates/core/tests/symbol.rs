use std::f64::consts::FRAC_PI_3;

use beta_lab_core::geometry::{evaluate_geometry, geometry_from_jet, Jet};
use beta_lab_core::rotational::{solve_profile, ProfileParams};
use beta_lab_core::surfaces::{ProfileRadial, RotationalSurface};
use beta_lab_core::symbol::*;
use beta_lab_core::{Error, Tolerances, Vec4};

fn plane(u: Vec4, v: Vec4, beta: f64) -> beta_lab_core::SurfaceGeometry {
    let jet = Jet { pos: Vec4::ZERO, d: [u, v], dd: [[Vec4::ZERO; 2]; 2] };
    geometry_from_jet(&jet, [0.0, 0.0], beta, &Tolerances::default()).unwrap()
}

#[test]
fn tilted_plane_by_hand() {
    // ε₁ = e₁, ε₂ = cos t e₂ + sin t e₃; G = e₄ gives jg₁ = 0, jg₂ = sin t
    let (s, c) = FRAC_PI_3.sin_cos();
    let geo = plane(Vec4::basis(0), Vec4::new(0.0, c, s, 0.0), 2.0);
    assert!((geo.cos_alpha - 0.5).abs() < 1e-15);
    let data = symbol_matrix(&geo, &Vec4::basis(3));
    assert!((data.o[0][0] - 1.75).abs() < 1e-15);
    assert!((data.o[1][1] - 0.25).abs() < 1e-15);
    assert!(data.o[0][1].abs() < 1e-15);
    assert!((data.det_direct - 0.4375).abs() < 1e-15);
    assert!((data.det_factored - 0.4375).abs() < 1e-15);
    assert!((symbol_quadratic(&geo, &Vec4::basis(3), [1.0, 2.0]) - 2.75).abs() < 1e-14);
}

#[test]
fn hundred_seeded_pairs() {
    let tol = Tolerances::default();
    for beta in [0.0, 0.5, 2.0, 10.0] {
        let s = symbol_sweep(beta, 100, DEFAULT_SEED, &tol).unwrap();
        assert!(s.max_factorization_error <= 1e-12, "beta = {beta}");
        assert_eq!(s.strictness_failures, 0);
        assert!(s.max_tangent_det < 1e-12);
        assert!(s.min_det > 0.0);
        assert!(s.max_quadratic_mismatch < 1e-13 * (1.0 + beta));
    }
}

#[test]
fn seeds_change_the_sample() {
    let tol = Tolerances::default();
    let a = symbol_sweep(2.0, 10, 1, &tol).unwrap();
    let b = symbol_sweep(2.0, 10, 2, &tol).unwrap();
    assert_ne!(a.min_det, b.min_det);
}

#[test]
fn elliptic_along_a_solved_profile() {
    let p = solve_profile(&ProfileParams { eps: 0.05, r_max: 50.0, n: 513, ..Default::default() }).unwrap();
    let surf = RotationalSurface::new(ProfileRadial::new(&p), 2.0);
    let tol = Tolerances::default();
    for r in [0.1, 1.0, 10.0] {
        let geo = evaluate_geometry(&surf, [r, 0.4]).unwrap();
        let v = ellipticity_check(&geo, 200, DEFAULT_SEED, &tol).unwrap();
        assert!(v.elliptic);
        assert!(v.min_normalized_det >= 1.0 - 1e-12);
        for g in random_tangent_directions(&geo, 5, 3) {
            assert!(symbol_matrix(&geo, &g).det_direct.abs() < 1e-12);
        }
    }
}

#[test]
fn lagrangian_plane_is_degenerate() {
    let geo = plane(Vec4::basis(0), Vec4::basis(2), 3.0);
    let v = ellipticity_check(&geo, 50, 5, &Tolerances::default()).unwrap();
    assert!(v.min_det.abs() < 1e-12);
    assert_eq!(v.strictness_failures, 0);
}

#[test]
fn invalid_arguments() {
    let geo = plane(Vec4::basis(0), Vec4::basis(1), -1.0);
    let tol = Tolerances::default();
    assert_eq!(ellipticity_check(&geo, 10, 1, &tol).unwrap_err(), Error::InvalidBeta(-1.0));
    assert_eq!(symbol_sweep(-0.5, 10, 1, &tol).unwrap_err(), Error::InvalidBeta(-0.5));
    assert!(symbol_sweep(1.0, 0, 1, &tol).is_err());
}
