//! Acceptance run: one PASS/FAIL line per criterion, tolerances fixed below.
//! Exits non-zero when any criterion fails.

mod common;

use msekit::cli::{boundary_data, build_domain, parse_problem, SCHERK_SIDE};
use msekit::conjfield::{arc_flux_ratio, conjugate_form, INTERIOR_DEPTH};
use msekit::divscan::{detect_divergence_lines, DivScanError, ScanOptions};
use msekit::flatgeom::{find_embedded_disk, flux_polygon_from_vectors, MultiDomain, StripDomain};
use msekit::geom::{Isometry2, Vec2};
use msekit::jscheck::{check_solvability, ArcData, BoundaryData, Label, Status};
use msekit::msesolve::{
    ramp_values, scherk_exact, solve_dirichlet, solve_ramped, strip_boundary_data, strip_gradient_check,
    DiscreteSolution, SolverConfig,
};
use msekit::rnoid::{build_rnoid, total_curvature_report, uniqueness_check, ExhaustionSchedule, RnoidError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

type Outcome = Result<(bool, String), String>;

fn specs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs")
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn scherk_square(h: f64) -> Result<(MultiDomain, BoundaryData), String> {
    let dom = MultiDomain::centered_square(PI, h).map_err(err)?;
    let data = BoundaryData::by_tag(
        &dom,
        |t| match t {
            "left" | "right" => Some(Label::A),
            _ => Some(Label::B),
        },
        0.0,
    );
    Ok((dom, data))
}

fn infinite_arcs(data: &BoundaryData) -> Vec<usize> {
    (0..data.arcs.len()).filter(|&a| !matches!(data.arcs[a], ArcData::Finite(_))).collect()
}

/// Interior max error and wall time (meshing included) of one Scherk solve.
fn scherk_error(h: f64) -> Result<(f64, f64, f64), String> {
    let t = Instant::now();
    let dom = MultiDomain::centered_square(SCHERK_SIDE, h).map_err(err)?;
    let data = BoundaryData::from_fn(&dom, |p| scherk_exact(p.x, p.y).unwrap_or(f64::NAN));
    let sol = solve_dirichlet(&dom, &ramp_values(&dom, &data, 0.0), &SolverConfig::default()).map_err(err)?;
    let secs = t.elapsed().as_secs_f64();
    let e = dom
        .interior_vertices()
        .map(|v| {
            let p = dom.position(v);
            (sol.u[v] - scherk_exact(p.x, p.y).unwrap()).abs()
        })
        .fold(0.0, f64::max);
    Ok((h, e, secs))
}

/// Least-squares slope of log e against log h.
fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.iter().map(|(h, e)| (h.ln(), e.ln())).unzip();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn criterion1() -> Outcome {
    let runs: Vec<(f64, f64, f64)> = [0.04, 0.02, 0.01].iter().map(|&h| scherk_error(h)).collect::<Result<_, _>>()?;
    let order = slope(&runs.iter().map(|r| (r.0, r.1)).collect::<Vec<_>>());
    let at_002 = runs[1].1;
    let slowest = runs.iter().map(|r| r.2).fold(0.0, f64::max);
    let ok = at_002 <= 0.01 && order >= 1.8 && slowest <= 60.0;
    Ok((ok, format!("error(h=0.02) {at_002:.2e} ≤ 1e-2, order {order:.2} ≥ 1.8, slowest solve {slowest:.1}s ≤ 60s")))
}

fn spec_verdict(name: &str) -> Result<(Status, Option<usize>), String> {
    let spec = parse_problem(&specs().join(name)).map_err(err)?;
    let dom = build_domain(&spec).map_err(err)?;
    let data = boundary_data(&spec, &dom).map_err(err)?;
    let v = check_solvability(&dom, &data).map_err(err)?;
    Ok((v.status, v.witness.map(|w| w.vertices.len())))
}

fn criterion2() -> Outcome {
    let (eq, witness) = spec_verdict("equality_square.json")?;
    let (sc, _) = spec_verdict("scherk_square.json")?;
    let (re, _) = spec_verdict("rectangle_plus_short.json")?;
    let named = eq == Status::Unsolvable && witness.is_some() && sc == Status::SolvableUpToConstant && re == Status::Solvable;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let trials = 500;
    let mut mismatches = 0;
    for i in 0..trials {
        let n = 3 + i % 4;
        let pts = common::random_convex_polygon(&mut rng, n);
        let labels = common::random_labels(&mut rng, n);
        let dom = common::polygon_domain(&pts, 1);
        let got = check_solvability(&dom, &common::label_data(&dom, &labels)).map_err(err)?.status;
        if got != common::brute_force_verdict(&pts, &labels) {
            mismatches += 1;
        }
    }
    Ok((
        named && mismatches == 0,
        format!("equality {eq:?} (witness {witness:?} vertices), Scherk {sc:?}, 1x2 {re:?}, brute force {mismatches}/{trials} mismatches"),
    ))
}

fn criterion3() -> Outcome {
    let h = 0.05;
    let (dom, data) = scherk_square(h)?;
    let seq = solve_ramped(&dom, &data, &[4.0, 6.0, 8.0], None, &SolverConfig::default()).map_err(err)?;
    let plus: Vec<usize> = (0..dom.arcs.len()).filter(|&a| data.arcs[a] == ArcData::PlusInf).collect();
    let mut ratios = Vec::new();
    let mut last = None;
    for sol in &seq {
        let field = conjugate_form(&dom, sol, None).map_err(err)?;
        let worst = plus
            .iter()
            .map(|&a| arc_flux_ratio(&field, &dom, a))
            .collect::<Result<Vec<_>, _>>()
            .map_err(err)?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        ratios.push(worst);
        last = Some(field);
    }
    let field = last.unwrap();
    let closed = field.closedness_ratio(INTERIOR_DEPTH);
    let lip = field.lipschitz_excess(&dom);
    let increasing = ratios.windows(2).all(|w| w[1] > w[0]);
    let top = *ratios.last().unwrap();
    let ok = closed <= 1.0 && lip <= 10.0 * h && increasing && top >= 0.9;
    Ok((
        ok,
        format!("loop/(h·len) {closed:.3} ≤ 1, Lipschitz excess {lip:.3} ≤ {:.2}, flux ratios {ratios:.3?} increasing, top ≥ 0.9", 10.0 * h),
    ))
}

fn criterion4() -> Outcome {
    let h = 0.05;
    let strip = StripDomain::new(1.0, 12.0, h).map_err(err)?;
    let data = strip_boundary_data(&strip);
    let seq = solve_ramped(&strip.domain, &data, &[2.0, 4.0, 8.0], None, &SolverConfig::default()).map_err(err)?;
    let (report, ok) = match strip_gradient_check(seq.last().unwrap(), &strip, 4.0, 11.0, h) {
        Ok(r) => (r, true),
        Err(e) => (e.0, false),
    };
    Ok((ok, format!("{} violations over {} centroids with 4 ≤ x ≤ 11 at M = 8", report.violations, report.checked)))
}

fn criterion5() -> Outcome {
    let spec = parse_problem(&specs().join("unsolvable_ramp.json")).map_err(err)?;
    let dom = build_domain(&spec).map_err(err)?;
    let data = boundary_data(&spec, &dom).map_err(err)?;
    let h = spec.h.ok_or("spec has no h")?;
    let levels = spec.ramp.clone().unwrap();
    let seq = solve_ramped(&dom, &data, &levels, None, &SolverConfig::default()).map_err(err)?;
    let rep = detect_divergence_lines(&dom, &seq, &ScanOptions::excluding(infinite_arcs(&data))).map_err(err)?;
    let straight = rep.lines.iter().map(|l| l.straightness).fold(0.0, f64::max);
    let spread = rep.lines.iter().map(|l| l.top_spread()).fold(0.0, f64::max);
    let sat = rep.lines.iter().map(|l| l.top_saturation()).fold(f64::INFINITY, f64::min);
    let lines_ok = !rep.lines.is_empty() && straight <= 2.0 * h && spread <= 10.0 && sat >= 0.9;

    let (sdom, sdata) = scherk_square(0.1)?;
    let sseq: Vec<DiscreteSolution> =
        solve_ramped(&sdom, &sdata, &[2.0, 4.0, 8.0, 16.0, 32.0], None, &SolverConfig::default()).map_err(err)?;
    let scherk = detect_divergence_lines(&sdom, &sseq, &ScanOptions::excluding(infinite_arcs(&sdata)));
    let none = matches!(scherk, Err(DivScanError::NoDivergence));
    Ok((
        lines_ok && none,
        format!(
            "{} lines, straightness {straight:.3} ≤ {:.2}, spread {spread:.2}° ≤ 10°, saturation {sat:.3} ≥ 0.9, Scherk {}",
            rep.lines.len(),
            2.0 * h,
            if none { "NoDivergence".to_string() } else { format!("{:?}", scherk.map(|r| r.lines.len())) }
        ),
    ))
}

fn trinoid() -> Result<(msekit::flatgeom::FluxPolygon, ExhaustionSchedule), String> {
    let spec = parse_problem(&specs().join("trinoid.json")).map_err(err)?;
    let poly = flux_polygon_from_vectors(spec.fluxes.as_ref().unwrap()).map_err(err)?;
    Ok((poly, spec.schedule.unwrap()))
}

fn criterion6() -> Outcome {
    let (poly, sched) = trinoid()?;
    let h = sched.h;
    let t = Instant::now();
    let res = match build_rnoid(&poly, &sched) {
        Ok(r) => r,
        Err(RnoidError::FluxMismatch { result, .. }) => *result,
        Err(e) => return Err(err(e)),
    };
    let secs = t.elapsed().as_secs_f64();
    let a = res.targets.iter().map(|v| v.norm() / 2.0).fold(0.0, f64::max);
    let curv = total_curvature_report(&res, a).map_err(err)?;
    let tail = curv.tail_ratios.first().copied().unwrap_or(f64::NAN);
    let degree = (curv.degree_estimate - curv.degree_oracle as f64).abs() / curv.degree_oracle.max(1) as f64;
    let parts = [
        ("time", secs <= 900.0, format!("{secs:.1}s ≤ 900s")),
        ("corner flux", res.corner_flux_max() <= 2.0 * h, format!("{:.4} ≤ {:.2}", res.corner_flux_max(), 2.0 * h)),
        ("Ψ corners", res.psi_corner_spread() <= 2.0 * h, format!("spread {:.4}", res.psi_corner_spread())),
        ("Ψ interior", res.psi_interior_min >= -2.0 * h, format!("min {:.4}", res.psi_interior_min)),
        ("planarity", res.planarity <= res.planarity_tol, format!("{:.4} ≤ {:.4}", res.planarity, res.planarity_tol)),
        ("end flux", res.flux_error <= 0.1, format!("error {:.3} ≤ 0.1", res.flux_error)),
        ("N₃", res.strong_symmetry.fraction >= 0.99, format!("{:.4} ≥ 0.99", res.strong_symmetry.fraction)),
        ("tail", tail <= 0.6, format!("{tail:.3} ≤ 0.6")),
        (
            "degree",
            degree <= 0.1,
            format!("{:.3} vs oracle {} ({:.1}%)", curv.degree_estimate, curv.degree_oracle, 100.0 * degree),
        ),
    ];
    let ok = parts.iter().all(|p| p.1);
    let text = parts
        .iter()
        .map(|(n, ok, d)| format!("{n}{} {d}", if *ok { "" } else { " [FAIL]" }))
        .collect::<Vec<_>>()
        .join("; ");
    Ok((ok, text))
}

fn criterion7() -> Outcome {
    let (poly, sched) = trinoid()?;
    let disk = find_embedded_disk(&poly, sched.h).map_err(err)?;
    let corner = disk.corners[0];
    let rep = uniqueness_check(&disk, &sched, corner).map_err(err)?;
    Ok((rep.ok, format!("anchors {:?}: deviation {:.2e} ≤ {:.3}", rep.anchors, rep.deviation, rep.bound)))
}

fn criterion8() -> Outcome {
    let cfg = SolverConfig {
        tol: 1e-13,
        ..SolverConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut slack, mut drift) = (f64::NEG_INFINITY, 0.0f64);
    for i in 0..50 {
        use rand::Rng;
        let (dom, g1) = common::small_instance(1000 + i);
        let g2: Vec<f64> = g1.iter().map(|x| x + rng.gen_range(0.0..0.5)).collect();
        let u1 = solve_dirichlet(&dom, &g1, &cfg).map_err(err)?;
        let u2 = solve_dirichlet(&dom, &g2, &cfg).map_err(err)?;
        slack = u1.u.iter().zip(&u2.u).map(|(a, b)| a - b).fold(slack, f64::max);
        let shift = Vec2::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let moved = dom.transformed(&Isometry2::rotation(0.0, shift)).map_err(err)?;
        let u3 = solve_dirichlet(&moved, &g1, &cfg).map_err(err)?;
        drift = u1.u.iter().zip(&u3.u).map(|(a, b)| (a - b).abs()).fold(drift, f64::max);
    }
    Ok((
        slack <= 1e-10 && drift <= 1e-12,
        format!("50 instances: max(u1 − u2) {slack:.1e} ≤ 1e-10, translation drift {drift:.1e} ≤ 1e-12"),
    ))
}

fn main() {
    let criteria: [(usize, fn() -> Outcome); 8] = [
        (1, criterion1),
        (2, criterion2),
        (3, criterion3),
        (4, criterion4),
        (5, criterion5),
        (6, criterion6),
        (7, criterion7),
        (8, criterion8),
    ];
    let mut failed = 0;
    for (n, f) in criteria {
        let t = Instant::now();
        let (ok, text) = match std::panic::catch_unwind(f) {
            Ok(Ok(r)) => r,
            Ok(Err(e)) => (false, format!("error: {e}")),
            Err(_) => (false, "panicked".to_string()),
        };
        if !ok {
            failed += 1;
        }
        println!("criterion {n}: {} ({:.1}s) {text}", if ok { "PASS" } else { "FAIL" }, t.elapsed().as_secs_f64());
    }
    println!("acceptance: {}/8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
