use msekit::flatgeom::{find_embedded_disk, flux_polygon_from_vectors, FluxPolygon};
use msekit::geom::Vec2;
use msekit::rnoid::{build_rnoid, exhaustion_solve_in, rnoid_from_run, ExhaustionSchedule, RnoidError, RnoidResult};

fn coarse() -> ExhaustionSchedule {
    ExhaustionSchedule::new(vec![1.0, 2.0, 3.0], 3.0, 0.15).unwrap()
}

fn result(poly: &FluxPolygon, sched: &ExhaustionSchedule) -> RnoidResult {
    match build_rnoid(poly, sched) {
        Ok(r) => r,
        Err(RnoidError::FluxMismatch { result, .. }) => *result,
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn coarse_trinoid_has_three_ends_and_balanced_fluxes() {
    let res = result(&FluxPolygon::regular(3, 1.0), &coarse());
    assert_eq!(res.r, 3);
    assert_eq!(res.ends, 3);
    assert_eq!(res.fluxes.len(), 3);
    // the end fluxes of a closed surface sum to zero
    assert!(res.flux_balance < 0.05, "balance {}", res.flux_balance);
    assert!(res.psi_corner_spread() <= 2.0 * res.h);
    assert!(res.planarity <= res.planarity_tol);
    // the lower half is the reflection of the upper half in the horizontal plane
    for (v, &m) in res.mirror.iter().enumerate() {
        assert!(m == v || m >= res.n_upper);
        assert_eq!(res.sigma.positions[m], res.sigma.positions[v].mirror_z());
    }
}

#[test]
fn quadrilateral_fluxes_give_four_ends() {
    let poly = flux_polygon_from_vectors(&[
        Vec2::new(1.0, 0.0),
        Vec2::new(0.0, 1.0),
        Vec2::new(-1.0, 0.0),
        Vec2::new(0.0, -1.0),
    ])
    .unwrap();
    let res = result(&poly, &coarse());
    assert_eq!(res.ends, 4);
    assert!(res.corner_flux_max() <= 2.0 * res.h);
}

#[test]
fn checkpoints_resume_to_the_same_surface() {
    let tmp = tempfile::tempdir().unwrap();
    let sched = coarse();
    let disk = find_embedded_disk(&FluxPolygon::regular(3, 1.0), sched.h).unwrap();
    let first = exhaustion_solve_in(&disk, &sched, Some(tmp.path())).unwrap();
    assert_eq!(std::fs::read_dir(tmp.path()).unwrap().count(), 3);
    let resumed = exhaustion_solve_in(&disk, &sched, Some(tmp.path())).unwrap();
    for (a, b) in first.levels.iter().zip(&resumed.levels) {
        assert_eq!(a.solution().u, b.solution().u);
    }
    let (ra, rb) = (rnoid_from_run(&first), rnoid_from_run(&resumed));
    let pos = |r: Result<RnoidResult, RnoidError>| match r {
        Ok(r) => r.sigma.positions,
        Err(RnoidError::FluxMismatch { result, .. }) => result.sigma.positions,
        Err(e) => panic!("{e}"),
    };
    assert_eq!(pos(ra), pos(rb));
}

#[test]
fn stale_checkpoints_are_ignored() {
    let tmp = tempfile::tempdir().unwrap();
    let sched = coarse();
    let disk = find_embedded_disk(&FluxPolygon::regular(3, 1.0), sched.h).unwrap();
    exhaustion_solve_in(&disk, &sched, Some(tmp.path())).unwrap();
    // a different ramp offset must not reuse the saved levels
    let other = ExhaustionSchedule::new(vec![1.0, 2.0, 3.0], 4.0, 0.15).unwrap();
    let fresh = exhaustion_solve_in(&disk, &other, None).unwrap();
    let cached = exhaustion_solve_in(&disk, &other, Some(tmp.path())).unwrap();
    assert_eq!(fresh.levels.last().unwrap().solution().u, cached.levels.last().unwrap().solution().u);
}

#[test]
fn degenerate_fluxes_are_rejected() {
    let poly = FluxPolygon {
        vectors: vec![Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0), Vec2::new(-3.0, 0.0)],
    };
    assert!(build_rnoid(&poly, &coarse()).is_err());
}
