use beta_lab_core::quadrature::QuadSpec;
use beta_lab_core::rotational::{solve_profile, ProfileParams, RotationalProfile};
use beta_lab_core::surfaces::{catenoid_radial, Perturbed, ProfileRadial, RotationalSurface};
use beta_lab_core::variation::*;
use beta_lab_core::{Error, Tolerances, Vec4};

fn quartic() -> RotationalProfile {
    solve_profile(&ProfileParams { eps: 2.0, r_max: 6.0, n: 4097, ..Default::default() }).unwrap()
}

fn spread(a: f64, b: f64, c: f64) -> f64 {
    (a - b).abs().max((a - c).abs()).max((b - c).abs())
}

#[test]
fn first_variation_vanishes_on_the_critical_profile() {
    let p = quartic();
    let surf = RotationalSurface::new(ProfileRadial::new(&p), 2.0);
    let quad = QuadSpec::default();
    let tol = Tolerances::default();
    for f in random_bump_fields(&surf, 4, 11, Projection::Normal) {
        let norm = c1_norm(&f, &quad).unwrap();
        let a = first_variation_formula(&surf, &f, &quad, &tol).unwrap();
        let b = first_variation_prestokes(&surf, &f, &quad, &tol).unwrap();
        let c = first_variation_fd(&surf, &f, 1e-4, false, &quad, &tol).unwrap();
        for v in [a, b, c] {
            assert!(v.abs() < 1e-6 * norm, "{v} vs {norm}");
        }
    }
}

#[test]
fn three_routes_agree_off_criticality() {
    let p = quartic();
    let surf = RotationalSurface::new(Perturbed { base: ProfileRadial::new(&p), amplitude: 0.05, wavenumber: 2.0 }, 2.0);
    let quad = QuadSpec::default();
    let tol = Tolerances::default();
    let mut largest = 0.0f64;
    for f in random_bump_fields(&surf, 4, 12, Projection::Normal) {
        let a = first_variation_formula(&surf, &f, &quad, &tol).unwrap();
        let b = first_variation_prestokes(&surf, &f, &quad, &tol).unwrap();
        let c = first_variation_fd(&surf, &f, 1e-4, false, &quad, &tol).unwrap();
        let scale = a.abs().max(b.abs()).max(c.abs());
        largest = largest.max(scale);
        assert!(spread(a, b, c) <= 1e-6f64.max(1e-4 * scale), "{a} {b} {c}");
        assert!((a - b).abs() < 1e-7 * scale.max(1.0), "{a} {b}");
    }
    // angular modes k ≥ 1 integrate to zero against a rotationally symmetric residual
    assert!(largest > 1e-3);
}

#[test]
fn richardson_tightens_the_difference_quotient() {
    let p = quartic();
    let surf = RotationalSurface::new(Perturbed { base: ProfileRadial::new(&p), amplitude: 0.05, wavenumber: 2.0 }, 2.0);
    let quad = QuadSpec { n: [129, 32] };
    let tol = Tolerances::default();
    let f = &random_bump_fields(&surf, 1, 3, Projection::Normal)[0];
    let exact = first_variation_formula(&surf, f, &quad, &tol).unwrap();
    let plain = first_variation_fd(&surf, f, 1e-2, false, &quad, &tol).unwrap();
    let rich = first_variation_fd(&surf, f, 1e-2, true, &quad, &tol).unwrap();
    assert!((rich - exact).abs() < 0.1 * (plain - exact).abs());
}

#[test]
fn tangential_fields_do_not_change_the_functional() {
    let p = quartic();
    let surf = RotationalSurface::new(Perturbed { base: ProfileRadial::new(&p), amplitude: 0.05, wavenumber: 2.0 }, 2.0);
    let quad = QuadSpec::default();
    let tol = Tolerances::default();
    for f in random_bump_fields(&surf, 2, 5, Projection::Tangential) {
        let scale = c1_norm(&f, &quad).unwrap();
        assert!(first_variation_formula(&surf, &f, &quad, &tol).unwrap().abs() < 1e-12 * scale);
        assert!(first_variation_prestokes(&surf, &f, &quad, &tol).unwrap().abs() < 1e-8 * scale);
        assert!(first_variation_fd(&surf, &f, 1e-4, false, &quad, &tol).unwrap().abs() < 1e-7 * scale);
    }
}

#[test]
fn second_variation_and_pair_identity() {
    let p = quartic();
    let quartic_surf = RotationalSurface::new(ProfileRadial::new(&p), 2.0);
    let catenoid = RotationalSurface::new(catenoid_radial(1.0, 1.0, [2.0, 6.0]), 0.0);
    let opts = VariationOptions::default();
    let tol = Tolerances::default();
    for f in random_bump_fields(&quartic_surf, 2, 21, Projection::Normal) {
        let rep = variation_report(&quartic_surf, &f, &opts, &tol).unwrap();
        assert!(rep.second_relative().unwrap() < 1e-3);
        assert!(rep.pair_relative().unwrap() < 1e-6);
    }
    for f in random_bump_fields(&catenoid, 2, 22, Projection::Normal) {
        let rep = variation_report(&catenoid, &f, &opts, &tol).unwrap();
        assert!(rep.second_relative().unwrap() < 1e-3);
        assert!(rep.pair_relative().unwrap() < 1e-6);
        assert!(rep.d2l_fd > 0.0, "catenoid band is stable under compact normal variations");
    }
}

#[test]
fn bilinear_form_is_symmetric_and_matches_mixed_differences() {
    let p = quartic();
    let surf = RotationalSurface::new(Perturbed { base: ProfileRadial::new(&p), amplitude: 0.05, wavenumber: 2.0 }, 2.0);
    let quad = QuadSpec { n: [129, 32] };
    let tol = Tolerances::default();
    let fs = random_bump_fields(&surf, 2, 31, Projection::Ambient);
    let s = bilinear_symmetry(&surf, &fs[0], &fs[1], &quad, &tol).unwrap();
    assert!(s.defect() < 1e-10);
    let x = BumpField::normal(&surf, 3.0, 4.5, Vec4::basis(2)).with_mode(1, 0.3);
    let y = BumpField::normal(&surf, 3.5, 5.0, Vec4::basis(3)).with_mode(1, 1.1);
    let b = bilinear_form(&surf, &x, &y, &quad, &tol).unwrap();
    let fd = bilinear_fd(&surf, &x, &y, 1e-3, &quad, &tol).unwrap();
    assert!((b - fd).abs() < 1e-4 * b.abs().max(1.0), "{b} {fd}");
}

#[test]
fn criticality_gate() {
    let p = quartic();
    let surf = RotationalSurface::new(Perturbed { base: ProfileRadial::new(&p), amplitude: 0.05, wavenumber: 2.0 }, 2.0);
    let f = &random_bump_fields(&surf, 1, 1, Projection::Normal)[0];
    let err = second_variation_formula(&surf, f, &QuadSpec::default(), &Tolerances::default()).unwrap_err();
    assert!(matches!(err, Error::NotCritical { .. }));
    let rep = variation_report(&surf, f, &VariationOptions::default(), &Tolerances::default()).unwrap();
    assert!(rep.d2l_formula.is_none() && rep.pair_relative().is_none());
}

#[test]
fn generated_fields_are_admissible() {
    let p = quartic();
    let surf = RotationalSurface::new(ProfileRadial::new(&p), 2.0);
    let quad = QuadSpec { n: [65, 16] };
    let tol = Tolerances::default();
    let fields = random_bump_fields(&surf, 5, 9, Projection::Normal);
    for f in &fields {
        assert!(normality_defect(&surf, f, &quad, &tol).unwrap() < 1e-14);
        assert!(boundary_defect(f, 16).unwrap() < 1e-20);
        assert!(surf.domain.is_inside(&f.support));
    }
    let again = random_bump_fields(&surf, 5, 9, Projection::Normal);
    assert!(fields.iter().zip(&again).all(|(a, b)| a.direction == b.direction && a.support == b.support));
}
