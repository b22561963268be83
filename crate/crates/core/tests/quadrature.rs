use std::f64::consts::PI;

use beta_lab_core::quadrature::{adaptive_simpson, midpoint, simpson, QuadSpec, Rule2d};
use beta_lab_core::rotational::{solve_profile, ProfileParams};
use beta_lab_core::surfaces::{catenoid_radial, ClosureRadial, ProfileRadial, RadialJet, RotationalSurface};
use beta_lab_core::variation::functional;
use beta_lab_core::Domain;

// 2π∫₂⁴ r²/√(r²−2) dr, area of a catenoid band
const CATENOID_AREA: f64 = 43.277134202705521178;
// 2π∫₁³ r A^{3/2} dr on the β = 2 profile, c₁ = c₂ = 1
const QUARTIC_L: f64 = 40.758656624219684661;
// 2π∫₁³ r (1 + 2/r²) dr
const LOG_L: f64 = 38.938310409611156553;

#[test]
fn rules_integrate_polynomials_and_trig_exactly() {
    let s = simpson(0.0, 2.0, 5).unwrap();
    let cubic: f64 = s.nodes.iter().zip(&s.weights).map(|(x, w)| w * x * x * x).sum();
    assert!((cubic - 4.0).abs() < 1e-14);
    let m = midpoint(0.0, 2.0 * PI, 8).unwrap();
    let trig: f64 = m.nodes.iter().zip(&m.weights).map(|(x, w)| w * (3.0 * x).cos().powi(2)).sum();
    assert!((trig - PI).abs() < 1e-14);
    assert!(simpson(0.0, 1.0, 4).is_err());
}

#[test]
fn tensor_rule_on_a_rectangle() {
    let rule = Rule2d::new(&Domain::rect([0.0, 0.0], [1.0, 2.0]), &QuadSpec { n: [9, 9] }).unwrap();
    let v = rule.integrate(|[x, y]| Ok(x * x * y)).unwrap();
    assert!((v - 2.0 / 3.0).abs() < 1e-14);
}

#[test]
fn adaptive_simpson_on_a_peak() {
    let mut f = |x: f64| Ok(1.0 / (1e-4 + x * x));
    let v = adaptive_simpson(&mut f, -1.0, 1.0, 1e-10, 50).unwrap();
    let exact = 2.0 * (1.0 / 1e-2) * (1.0f64 / 1e-2).atan();
    assert!((v - exact).abs() < 1e-8 * exact);
}

fn errors_at_three_resolutions<F: Fn(QuadSpec) -> f64>(value: F, exact: f64) -> [f64; 3] {
    [17, 33, 65].map(|n| (value(QuadSpec { n: [n, 8] }) - exact).abs())
}

fn assert_fourth_order(e: [f64; 3]) {
    assert!(e[0] / e[1] > 12.0 && e[1] / e[2] > 12.0, "{e:?}");
}

#[test]
fn catenoid_area_converges() {
    let surf = RotationalSurface::new(catenoid_radial(1.0, 1.0, [2.0, 4.0]), 0.0);
    let e = errors_at_three_resolutions(|q| functional(&surf, &q).unwrap(), CATENOID_AREA);
    assert_fourth_order(e);
    let v = functional(&surf, &QuadSpec::default()).unwrap();
    assert!((v - CATENOID_AREA).abs() < 1e-8, "{}", v - CATENOID_AREA);
}

#[test]
fn log_profile_functional_converges() {
    let radial = ClosureRadial::new(
        |r: f64| RadialJet { f: r.ln(), g: r.ln(), fp: 1.0 / r, gp: 1.0 / r, fpp: -1.0 / (r * r), gpp: -1.0 / (r * r) },
        [1.0, 3.0],
    );
    let surf = RotationalSurface::new(radial, 1.0);
    assert_fourth_order(errors_at_three_resolutions(|q| functional(&surf, &q).unwrap(), LOG_L));
}

#[test]
fn quartic_profile_functional_converges() {
    let p = solve_profile(&ProfileParams { eps: 0.5, r_max: 5.0, n: 1025, ..Default::default() }).unwrap();
    let surf = RotationalSurface::new(ProfileRadial::new(&p), 2.0).with_radii(1.0, 3.0);
    let e = errors_at_three_resolutions(|q| functional(&surf, &q).unwrap(), QUARTIC_L);
    assert_fourth_order(e);
    let fine = functional(&surf, &QuadSpec { n: [513, 8] }).unwrap();
    assert!((fine - QUARTIC_L).abs() < 1e-10 * QUARTIC_L);
}
