use msekit::divscan::{detect_divergence_lines, DivScanError, ScanOptions};
use msekit::flatgeom::MultiDomain;
use msekit::geom::Vec2;
use msekit::jscheck::{check_solvability, ArcData, BoundaryData, Label, Status};
use msekit::msesolve::{solve_ramped, SolverConfig};

fn square(h: f64, rule: impl Fn(&str) -> Option<Label>) -> (MultiDomain, BoundaryData) {
    let dom = MultiDomain::centered_square(1.0, h).unwrap();
    let data = BoundaryData::by_tag(&dom, rule, 0.0);
    (dom, data)
}

fn infinite(data: &BoundaryData) -> Vec<usize> {
    (0..data.arcs.len()).filter(|&a| !matches!(data.arcs[a], ArcData::Finite(_))).collect()
}

#[test]
fn opposite_plus_sides_diverge_along_a_line() {
    let h = 0.1;
    let (dom, data) = square(h, |t| matches!(t, "top" | "bottom").then_some(Label::A));
    assert_eq!(check_solvability(&dom, &data).unwrap().status, Status::Unsolvable);
    let seq = solve_ramped(&dom, &data, &[2.0, 4.0, 8.0, 16.0, 32.0], None, &SolverConfig::default()).unwrap();
    let rep = detect_divergence_lines(&dom, &seq, &ScanOptions::excluding(infinite(&data))).unwrap();
    assert!(!rep.lines.is_empty());
    for l in &rep.lines {
        assert!(l.straightness <= 2.0 * h);
        assert!(l.top_spread() <= 10.0);
        assert!(l.top_saturation() >= 0.9);
    }
}

#[test]
fn one_plus_side_stays_bounded() {
    let (dom, data) = square(0.1, |t| (t == "top").then_some(Label::A));
    assert_eq!(check_solvability(&dom, &data).unwrap().status, Status::Solvable);
    let seq = solve_ramped(&dom, &data, &[2.0, 4.0, 8.0, 16.0, 32.0], None, &SolverConfig::default()).unwrap();
    let r = detect_divergence_lines(&dom, &seq, &ScanOptions::excluding(infinite(&data)));
    assert!(matches!(r, Err(DivScanError::NoDivergence)), "{:?}", r.map(|r| r.lines.len()));
}

#[test]
fn rectangle_with_infinite_short_sides_stays_bounded() {
    let dom = MultiDomain::rectangle(Vec2::ZERO, 1.0, 2.0, 10, 20).unwrap();
    let data = BoundaryData::by_tag(&dom, |t| matches!(t, "top" | "bottom").then_some(Label::A), 0.0);
    let seq = solve_ramped(&dom, &data, &[2.0, 4.0, 8.0, 16.0, 32.0], None, &SolverConfig::default()).unwrap();
    let r = detect_divergence_lines(&dom, &seq, &ScanOptions::excluding(infinite(&data)));
    assert!(matches!(r, Err(DivScanError::NoDivergence)), "{:?}", r.map(|r| r.lines.len()));
}
