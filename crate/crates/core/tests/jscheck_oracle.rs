mod common;

use common::{brute_force_verdict, label_data, polygon_domain, random_convex_polygon, random_labels};
use msekit::geom::Vec2;
use msekit::jscheck::{check_solvability, Label, Status};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

fn regular(n: usize) -> Vec<Vec2> {
    (0..n)
        .map(|i| {
            let t = TAU * i as f64 / n as f64 + 0.1;
            Vec2::new(t.cos(), t.sin())
        })
        .collect()
}

fn library_status(pts: &[Vec2], labels: &[Label], sub: usize) -> Status {
    let dom = polygon_domain(pts, sub);
    check_solvability(&dom, &label_data(&dom, labels)).unwrap().status
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn random_convex_polygons_match_enumerator(seed in any::<u64>(), n in 3usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = random_convex_polygon(&mut rng, n);
        let labels = random_labels(&mut rng, n);
        prop_assert_eq!(library_status(&pts, &labels, 1), brute_force_verdict(&pts, &labels));
    }

    #[test]
    fn regular_polygons_match_enumerator(seed in any::<u64>(), n in 3usize..=6) {
        // equal side lengths make the α = β case reachable
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = regular(n);
        let labels = random_labels(&mut rng, n);
        prop_assert_eq!(library_status(&pts, &labels, 1), brute_force_verdict(&pts, &labels));
    }

    #[test]
    fn verdict_ignores_edge_subdivision(seed in any::<u64>(), n in 3usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = random_convex_polygon(&mut rng, n);
        let labels = random_labels(&mut rng, n);
        prop_assert_eq!(library_status(&pts, &labels, 1), library_status(&pts, &labels, 3));
    }
}

#[test]
fn alternating_square_is_solvable_up_to_constant() {
    let labels = [Label::A, Label::B, Label::A, Label::B];
    assert_eq!(library_status(&regular(4), &labels, 1), Status::SolvableUpToConstant);
    assert_eq!(brute_force_verdict(&regular(4), &labels), Status::SolvableUpToConstant);
}

#[test]
fn two_adjacent_infinite_sides_fail_the_triangle_test() {
    // on a square, two adjacent +∞ sides have 2α = 4 > γ = 2 + √2 for the cut triangle
    let labels = [Label::A, Label::A, Label::C, Label::C];
    assert_eq!(library_status(&regular(4), &labels, 2), Status::Unsolvable);
}

#[test]
fn all_finite_is_solvable() {
    for n in 3..=6 {
        let labels = vec![Label::C; n];
        assert_eq!(library_status(&regular(n), &labels, 1), Status::Solvable);
    }
}
