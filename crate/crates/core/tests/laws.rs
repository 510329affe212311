mod common;

use common::small_instance as instance;
use msekit::conjfield::conjugate_form;
use msekit::geom::{Isometry2, Vec2};
use msekit::msesolve::{solve_dirichlet, SolverConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tight() -> SolverConfig {
    SolverConfig {
        tol: 1e-13,
        ..SolverConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn ordered_data_gives_ordered_solutions(seed in any::<u64>()) {
        let (dom, g1) = instance(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let g2: Vec<f64> = g1.iter().map(|x| x + rng.gen_range(0.0..0.5)).collect();
        let u1 = solve_dirichlet(&dom, &g1, &tight()).unwrap();
        let u2 = solve_dirichlet(&dom, &g2, &tight()).unwrap();
        let slack = u1.u.iter().zip(&u2.u).map(|(a, b)| a - b).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(slack <= 1e-10, "u1 - u2 reaches {slack}");
    }

    #[test]
    fn translating_the_domain_translates_the_solution(seed in any::<u64>(), tx in -3.0..3.0f64, ty in -3.0..3.0f64) {
        let (dom, g) = instance(seed);
        let moved = dom.transformed(&Isometry2::rotation(0.0, Vec2::new(tx, ty))).unwrap();
        let a = solve_dirichlet(&dom, &g, &tight()).unwrap();
        let b = solve_dirichlet(&moved, &g, &tight()).unwrap();
        let dev = a.u.iter().zip(&b.u).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(dev <= 1e-12, "deviation {dev}");
    }

    #[test]
    fn adding_a_constant_to_the_data_shifts_the_solution(seed in any::<u64>(), c in -5.0..5.0f64) {
        let (dom, g) = instance(seed);
        let gc: Vec<f64> = g.iter().map(|x| x + c).collect();
        let a = solve_dirichlet(&dom, &g, &tight()).unwrap();
        let b = solve_dirichlet(&dom, &gc, &tight()).unwrap();
        let dev = a.u.iter().zip(&b.u).map(|(x, y)| (x + c - y).abs()).fold(0.0, f64::max);
        prop_assert!(dev <= 1e-10, "deviation {dev}");
    }

    #[test]
    fn conjugate_form_ignores_constants_and_flips_with_u(seed in any::<u64>(), c in -5.0..5.0f64) {
        let (dom, g) = instance(seed);
        let sol = solve_dirichlet(&dom, &g, &tight()).unwrap();
        let base = conjugate_form(&dom, &sol, None).unwrap();
        let shifted = conjugate_form(&dom, &sol.shifted(c), None).unwrap();
        prop_assert_eq!(&base.edge_form, &shifted.edge_form);

        let neg: Vec<f64> = g.iter().map(|x| -x).collect();
        let nsol = solve_dirichlet(&dom, &neg, &tight()).unwrap();
        let flipped = conjugate_form(&dom, &nsol, None).unwrap();
        let dev = base.edge_form.iter().zip(&flipped.edge_form).map(|(a, b)| (a + b).abs()).fold(0.0, f64::max);
        prop_assert!(dev <= 1e-9, "dΨ(−u) + dΨ(u) reaches {dev}");
    }

    #[test]
    fn psi_is_lipschitz_on_gentle_data(seed in any::<u64>()) {
        let (dom, g) = instance(seed);
        let sol = solve_dirichlet(&dom, &g, &tight()).unwrap();
        let field = conjugate_form(&dom, &sol, None).unwrap();
        prop_assert!(field.lipschitz_excess(&dom) <= 10.0 * dom.h());
    }
}
