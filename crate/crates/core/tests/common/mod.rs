//! Shared oracles for the integration and acceptance tests.
#![allow(dead_code)]

use msekit::flatgeom::{ArcSpec, MultiDomain};
use msekit::geom::Vec2;
use msekit::jscheck::{ArcData, BoundaryData, Label, Status};
use rand::Rng;

/// Convex polygon meshed as a fan around its centroid, one arc per edge tagged `e{i}`.
/// Each edge is split into `sub` boundary segments.
pub fn polygon_domain(pts: &[Vec2], sub: usize) -> MultiDomain {
    let n = pts.len();
    let mut pos: Vec<Vec2> = Vec::new();
    let mut ring = Vec::new();
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        for k in 0..sub {
            ring.push(pos.len());
            pos.push(a + (b - a) * (k as f64 / sub as f64));
        }
    }
    let c = pts.iter().fold(Vec2::ZERO, |s, p| s + *p) * (1.0 / n as f64);
    let centre = pos.len();
    pos.push(c);
    let m = ring.len();
    let tris: Vec<[usize; 3]> = (0..m).map(|k| [ring[k], ring[(k + 1) % m], centre]).collect();
    let arcs: Vec<ArcSpec> = (0..n)
        .map(|i| {
            let chain: Vec<usize> = (0..=sub).map(|k| ring[(i * sub + k) % m]).collect();
            ArcSpec::chain(&chain, &format!("e{i}"), false)
        })
        .collect();
    MultiDomain::from_planar(pos, tris, &arcs).expect("convex polygon meshes")
}

/// Random convex polygon: sorted random angles on a random ellipse, no two vertices closer
/// than 0.35 rad in angle.
pub fn random_convex_polygon<R: Rng>(rng: &mut R, n: usize) -> Vec<Vec2> {
    loop {
        let mut th: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
        th.sort_by(f64::total_cmp);
        let gaps_ok = (0..n).all(|i| {
            let next = if i + 1 < n { th[i + 1] } else { th[0] + std::f64::consts::TAU };
            next - th[i] > 0.35
        });
        if !gaps_ok {
            continue;
        }
        let (ax, ay) = (rng.gen_range(0.6..1.6), rng.gen_range(0.6..1.6));
        return th.iter().map(|t| Vec2::new(ax * t.cos(), ay * t.sin())).collect();
    }
}

pub fn label_data(dom: &MultiDomain, labels: &[Label]) -> BoundaryData {
    BoundaryData::new(
        labels
            .iter()
            .zip(&dom.arcs)
            .map(|(l, a)| match l {
                Label::A => ArcData::PlusInf,
                Label::B => ArcData::MinusInf,
                Label::C => ArcData::Finite(vec![0.0; a.vertices.len()]),
            })
            .collect(),
    )
}

/// Brute-force verdict on a convex polygon with labelled edges. Points in convex position
/// admit one simple polygon per vertex subset (the cyclic order), so the polygonal
/// subdomains are exactly the subsets of at least three corners.
pub fn brute_force_verdict(pts: &[Vec2], labels: &[Label]) -> Status {
    let n = pts.len();
    let has_c = labels.contains(&Label::C);
    let len = |i: usize, j: usize| pts[i].dist(pts[j]);
    for mask in 0u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        if idx.len() < 3 {
            continue;
        }
        let whole = idx.len() == n;
        let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
        for k in 0..idx.len() {
            let (i, j) = (idx[k], idx[(k + 1) % idx.len()]);
            let l = len(i, j);
            gamma += l;
            // a polygon side is a domain edge exactly when its ends are cyclic neighbours
            if j == (i + 1) % n {
                match labels[i] {
                    Label::A => alpha += l,
                    Label::B => beta += l,
                    Label::C => {}
                }
            }
        }
        let tol = 1e-9 * gamma;
        if whole && !has_c {
            if (alpha - beta).abs() > tol {
                return Status::Unsolvable;
            }
            continue;
        }
        if 2.0 * alpha >= gamma - tol || 2.0 * beta >= gamma - tol {
            return Status::Unsolvable;
        }
    }
    if has_c {
        Status::Solvable
    } else {
        Status::SolvableUpToConstant
    }
}

pub fn random_labels<R: Rng>(rng: &mut R, n: usize) -> Vec<Label> {
    (0..n)
        .map(|_| match rng.gen_range(0..3) {
            0 => Label::A,
            1 => Label::B,
            _ => Label::C,
        })
        .collect()
}

/// Small rectangle (3–7 cells a side, unjittered so the discrete comparison principle
/// applies) with random boundary data in [−1, 1].
pub fn small_instance(seed: u64) -> (MultiDomain, Vec<f64>) {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0));
    let (nx, ny) = (rng.gen_range(3..8), rng.gen_range(3..8));
    let dom = MultiDomain::rectangle(Vec2::ZERO, w, h, nx, ny).unwrap();
    let g = (0..dom.n_vertices())
        .map(|v| if dom.is_boundary(v) { rng.gen_range(-1.0..1.0) } else { 0.0 })
        .collect();
    (dom, g)
}
