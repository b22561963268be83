use proptest::prelude::*;

use beta_lab_core::geometry::{geometry_from_jet, Jet};
use beta_lab_core::rotational::{radial_grid, solve_slope};
use beta_lab_core::symbol::symbol_matrix;
use beta_lab_core::{Tolerances, Vec4};

fn vec4() -> impl Strategy<Value = Vec4> {
    prop::array::uniform4(-2.0f64..2.0).prop_map(|[a, b, c, d]| Vec4::new(a, b, c, d))
}

fn jet() -> impl Strategy<Value = Jet> {
    (vec4(), vec4(), vec4(), vec4(), vec4())
        .prop_filter("tangents must span a plane", |(u, v, ..)| {
            let g01 = u.dot(v);
            u.norm2() * v.norm2() - g01 * g01 > 1e-3
        })
        .prop_map(|(u, v, a, b, c)| Jet { pos: Vec4::ZERO, d: [u, v], dd: [[a, b], [b, c]] })
}

proptest! {
    #[test]
    fn geometry_invariants(j in jet(), beta in 0.0f64..10.0) {
        let geo = geometry_from_jet(&j, [0.0, 0.0], beta, &Tolerances::default()).unwrap();
        prop_assert!(geo.invariant_defect() < 1e-9, "{}", geo.invariant_defect());
        prop_assert!(geo.cos_alpha.abs() <= 1.0 + 1e-12);
        prop_assert!(j.symmetry_defect() == 0.0);
    }

    #[test]
    fn symbol_determinant_factorizes(j in jet(), g in vec4(), beta in 0.0f64..20.0) {
        prop_assume!(g.norm2() > 1e-6);
        let geo = geometry_from_jet(&j, [0.0, 0.0], beta, &Tolerances::default()).unwrap();
        let data = symbol_matrix(&geo, &g);
        prop_assert!(data.factorization_error() <= 1e-12, "{}", data.factorization_error());
        prop_assert!(data.det_direct >= -1e-12 * (1.0 + beta) * g.norm2().powi(2));
    }

    #[test]
    fn slopes_satisfy_the_first_integral(r in 1e-3f64..1e3, beta in 0.05f64..20.0, c1 in -3.0f64..3.0, c2 in -3.0f64..3.0) {
        let (fp, gp) = solve_slope(r, beta, c1, c2).unwrap();
        let a = 1.0 + fp * fp + gp * gp;
        let k = r * a.powf(0.5 * (beta - 1.0));
        prop_assert!((k * fp - c1).abs() <= 1e-12 * c1.abs().max(1.0));
        prop_assert!((k * gp - c2).abs() <= 1e-12 * c2.abs().max(1.0));
    }

    #[test]
    fn slope_magnitude_decreases_in_beta(r in 0.1f64..100.0, beta in 0.05f64..10.0, step in 0.01f64..5.0) {
        let lo = solve_slope(r, beta, 1.0, 1.0).unwrap().0;
        let hi = solve_slope(r, beta + step, 1.0, 1.0).unwrap().0;
        prop_assert!(hi <= lo);
    }

    #[test]
    fn grids_are_increasing(eps in 1e-3f64..1.0, ratio in 1.5f64..1e6, n in 9usize..500) {
        let g = radial_grid(eps, eps * ratio, n).unwrap();
        prop_assert_eq!(g.len(), n);
        prop_assert_eq!(g[0], eps);
        prop_assert!(g.windows(2).all(|w| w[1] > w[0]));
    }
}
