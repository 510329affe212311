//! Bounded-gradient regions and lines of divergence for sequences of solutions.

use crate::conjfield::psi_covectors;
use crate::flatgeom::MultiDomain;
use crate::geom::{barycentric, Vec2, Vec3};
use crate::msesolve::DiscreteSolution;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DivScanError {
    #[error("sequence has {0} solutions; at least 3 are needed")]
    TooShortSequence(usize),
    #[error("solution {0} does not live on the given mesh")]
    MeshMismatch(usize),
    #[error("no divergence detected")]
    NoDivergence,
}

/// Per-triangle unit normals N = (p, q, −1)/W.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalField {
    pub normals: Vec<Vec3>,
}

pub fn normal_field(sol: &DiscreteSolution) -> NormalField {
    NormalField {
        normals: sol
            .grad
            .iter()
            .zip(&sol.w)
            .map(|(g, w)| Vec3::new(g.x / w, g.y / w, -1.0 / w))
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexClass {
    Bounded,
    Divergent,
    /// On or next to an arc whose data is being ramped; growth there is the boundary value.
    Excluded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    /// Arcs carrying ramped ±∞ data.
    pub excluded_arcs: Vec<usize>,
    /// τ(n) = factor · median W at index n.
    pub threshold_factor: f64,
    /// Required ratio W(top) / W(top − 2) when the solutions carry no ramp level.
    pub growth: f64,
    /// Vertices within this many hops of an excluded arc are not classified.
    pub exclusion_hops: usize,
    /// Nor are vertices within this distance of one.
    pub exclusion_distance: f64,
    pub min_component: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            excluded_arcs: Vec::new(),
            threshold_factor: 10.0,
            growth: 1.25,
            exclusion_hops: 3,
            exclusion_distance: 0.0,
            min_component: 5,
        }
    }
}

impl ScanOptions {
    pub fn excluding(arcs: Vec<usize>) -> Self {
        ScanOptions {
            excluded_arcs: arcs,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub classes: Vec<VertexClass>,
    /// Star maximum of W at each vertex, per index.
    pub star_w: Vec<Vec<f64>>,
    /// Median W over non-excluded triangles, per index.
    pub median_w: Vec<f64>,
    /// sup over the last three indices of the star maximum of W.
    pub sup_w: Vec<f64>,
}

impl RegionReport {
    pub fn count(&self, c: VertexClass) -> usize {
        self.classes.iter().filter(|&&x| x == c).count()
    }
}

fn excluded_mask(dom: &MultiDomain, opts: &ScanOptions) -> Vec<bool> {
    let seeds: Vec<usize> = opts
        .excluded_arcs
        .iter()
        .flat_map(|&a| dom.arcs[a].vertices.iter().copied())
        .collect();
    let mut mask: Vec<bool> = dom
        .topo
        .hop_distance(seeds.iter().copied())
        .into_iter()
        .map(|d| d <= opts.exclusion_hops)
        .collect();
    if opts.exclusion_distance > 0.0 {
        let pts: Vec<Vec2> = seeds.iter().map(|&v| dom.position(v)).collect();
        for (v, m) in mask.iter_mut().enumerate() {
            let p = dom.position(v);
            if !*m && pts.iter().any(|q| q.dist(p) <= opts.exclusion_distance) {
                *m = true;
            }
        }
    }
    mask
}

/// Growth demanded over the last three indices: half of the ramp ratio when known.
fn growth_threshold(seq: &[DiscreteSolution], fallback: f64) -> f64 {
    let n = seq.len();
    match (seq[n - 3].ramp_level, seq[n - 1].ramp_level) {
        (Some(a), Some(c)) if a > 0.0 && c > a => 1.0 + 0.5 * (c / a - 1.0),
        _ => fallback,
    }
}

/// Largest W over the triangles around each vertex.
pub fn star_max_w(dom: &MultiDomain, sol: &DiscreteSolution) -> Vec<f64> {
    (0..dom.n_vertices())
        .map(|v| dom.topo.vertex_tris[v].iter().map(|&t| sol.w[t]).fold(1.0, f64::max))
        .collect()
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return 1.0;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn check_seq(dom: &MultiDomain, seq: &[DiscreteSolution]) -> Result<(), DivScanError> {
    if seq.len() < 3 {
        return Err(DivScanError::TooShortSequence(seq.len()));
    }
    for (i, s) in seq.iter().enumerate() {
        if s.u.len() != dom.n_vertices() || s.w.len() != dom.n_triangles() {
            return Err(DivScanError::MeshMismatch(i));
        }
    }
    Ok(())
}

/// A vertex is Divergent when its star W increases strictly across the last three
/// indices, grows by at least half the ramp ratio over them (or `growth` without levels), and either exceeds τ(n) at the last two
/// indices or the median itself grows at that rate (the whole field diverges).
pub fn bounded_region(dom: &MultiDomain, seq: &[DiscreteSolution], opts: &ScanOptions) -> Result<RegionReport, DivScanError> {
    check_seq(dom, seq)?;
    let mask = excluded_mask(dom, opts);
    let star_w: Vec<Vec<f64>> = seq.iter().map(|s| star_max_w(dom, s)).collect();
    let median_w: Vec<f64> = seq
        .iter()
        .map(|s| {
            let ws = dom
                .mesh
                .triangles
                .iter()
                .enumerate()
                .filter(|(_, tri)| tri.iter().all(|&v| !mask[v]))
                .map(|(t, _)| s.w[t])
                .collect();
            median(ws)
        })
        .collect();
    let n = seq.len();
    let (a, b, c) = (n - 3, n - 2, n - 1);
    let growth = growth_threshold(seq, opts.growth);
    let global = median_w[c] >= growth * median_w[a];
    let classes = (0..dom.n_vertices())
        .map(|v| {
            if mask[v] {
                return VertexClass::Excluded;
            }
            let (wa, wb, wc) = (star_w[a][v], star_w[b][v], star_w[c][v]);
            let increasing = wa < wb && wb < wc;
            let grows = wc >= growth * wa;
            let above = wb > opts.threshold_factor * median_w[b] && wc > opts.threshold_factor * median_w[c];
            if increasing && grows && (above || global) {
                VertexClass::Divergent
            } else {
                VertexClass::Bounded
            }
        })
        .collect();
    let sup_w = (0..dom.n_vertices())
        .map(|v| star_w[a..].iter().map(|w| w[v]).fold(1.0, f64::max))
        .collect();
    Ok(RegionReport {
        classes,
        star_w,
        median_w,
        sup_w,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceLine {
    pub vertices: Vec<usize>,
    pub base: Vec2,
    /// Unit direction of the total-least-squares fit.
    pub direction: Vec2,
    /// Extent of the component along the direction, measured from `base`.
    pub t_range: [f64; 2],
    /// Largest orthogonal deviation of component vertices from the line.
    pub straightness: f64,
    pub limit_normal: Vec3,
    /// Largest angle (degrees) between sampled normals and their mean, per index.
    pub normal_spread_deg: Vec<f64>,
    /// |∫ dΨ| / length on three interior sub-segments, per index.
    pub saturation: Vec<[f64; 3]>,
}

impl DivergenceLine {
    pub fn length(&self) -> f64 {
        self.t_range[1] - self.t_range[0]
    }

    pub fn point(&self, t: f64) -> Vec2 {
        self.base + self.direction * t
    }

    pub fn top_saturation(&self) -> f64 {
        self.saturation.last().map(|s| s.iter().copied().fold(f64::INFINITY, f64::min)).unwrap_or(0.0)
    }

    pub fn top_spread(&self) -> f64 {
        self.normal_spread_deg.last().copied().unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub region: RegionReport,
    pub lines: Vec<DivergenceLine>,
    /// Pairs of lines crossing at an interior point with distinct limit normals.
    pub crossing_violations: Vec<(usize, usize)>,
}

fn components(dom: &MultiDomain, member: &[bool]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; dom.n_vertices()];
    let mut out = Vec::new();
    for s in 0..dom.n_vertices() {
        if !member[s] || seen[s] {
            continue;
        }
        let mut comp = Vec::new();
        let mut queue = VecDeque::from([s]);
        seen[s] = true;
        while let Some(v) = queue.pop_front() {
            comp.push(v);
            for &n in &dom.topo.vertex_neighbors[v] {
                if member[n] && !seen[n] {
                    seen[n] = true;
                    queue.push_back(n);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Principal-axis fit: centroid and unit direction.
fn fit_line(pts: &[Vec2]) -> (Vec2, Vec2) {
    let n = pts.len() as f64;
    let c = pts.iter().fold(Vec2::ZERO, |a, &p| a + p) / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in pts {
        let d = *p - c;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    (c, Vec2::new(theta.cos(), theta.sin()))
}

/// Triangle among `candidates` that best contains `p`.
fn triangle_at(dom: &MultiDomain, p: Vec2, candidates: &[usize]) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for &t in candidates {
        let [a, b, c] = dom.mesh.corners(t);
        let l = barycentric(p, a, b, c);
        let m = l[0].min(l[1]).min(l[2]);
        if best.is_none_or(|(bm, _)| m > bm) {
            best = Some((m, t));
        }
    }
    best.filter(|(m, _)| *m > -1e-6).map(|(_, t)| t)
}

/// |∫ω| / length along the segment a→b using the triangles in `candidates`.
fn segment_saturation(dom: &MultiDomain, form: &[Vec2], a: Vec2, b: Vec2, candidates: &[usize]) -> f64 {
    let len = a.dist(b);
    if len == 0.0 {
        return 0.0;
    }
    let n = ((len / (0.125 * dom.h())).ceil() as usize).max(8);
    let d = (b - a) / n as f64;
    let mut acc = 0.0;
    let mut used = 0;
    for i in 0..n {
        let p = a + d * (i as f64 + 0.5);
        if let Some(t) = triangle_at(dom, p, candidates) {
            acc += form[t].dot(d);
            used += 1;
        }
    }
    if used == 0 {
        return 0.0;
    }
    (acc * n as f64 / used as f64).abs() / len
}

/// Fit lines to the Divergent components and measure normals and flux saturation.
pub fn detect_divergence_lines(
    dom: &MultiDomain,
    seq: &[DiscreteSolution],
    opts: &ScanOptions,
) -> Result<DivergenceReport, DivScanError> {
    let region = bounded_region(dom, seq, opts)?;
    let member: Vec<bool> = region.classes.iter().map(|&c| c == VertexClass::Divergent).collect();
    let mut comps: Vec<Vec<usize>> = components(dom, &member)
        .into_iter()
        .filter(|c| c.len() >= opts.min_component)
        .collect();
    if comps.is_empty() {
        return Err(DivScanError::NoDivergence);
    }
    let centroid = |c: &Vec<usize>| c.iter().fold(Vec2::ZERO, |a, &v| a + dom.position(v)) / c.len() as f64;
    comps.sort_by(|a, b| {
        let (ca, cb) = (centroid(a), centroid(b));
        ca.x.total_cmp(&cb.x).then(ca.y.total_cmp(&cb.y))
    });
    let forms: Vec<Vec<Vec2>> = seq.iter().map(psi_covectors).collect();
    let normals: Vec<NormalField> = seq.iter().map(normal_field).collect();
    let top = seq.len() - 1;
    let mut lines = Vec::new();
    for comp in comps {
        let pts: Vec<Vec2> = comp.iter().map(|&v| dom.position(v)).collect();
        let (base, dir) = fit_line(&pts);
        let ts: Vec<f64> = pts.iter().map(|&p| (p - base).dot(dir)).collect();
        let t0 = ts.iter().copied().fold(f64::INFINITY, f64::min);
        let t1 = ts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let straightness = pts.iter().map(|&p| (p - base).cross(dir).abs()).fold(0.0, f64::max);
        let len = t1 - t0;
        // candidate triangles: stars of the component and of its neighbours
        let mut cand: Vec<usize> = comp
            .iter()
            .flat_map(|&v| dom.topo.vertex_neighbors[v].iter().copied().chain(std::iter::once(v)))
            .flat_map(|v| dom.topo.vertex_tris[v].iter().copied())
            .collect();
        cand.sort_unstable();
        cand.dedup();
        let star: Vec<usize> = {
            let mut s: Vec<usize> = comp.iter().flat_map(|&v| dom.topo.vertex_tris[v].iter().copied()).collect();
            s.sort_unstable();
            s.dedup();
            s
        };
        let inner = |t: usize| {
            let tc = (dom.mesh.centroid(t) - base).dot(dir);
            tc >= t0 + 0.1 * len && tc <= t1 - 0.1 * len
        };
        let mut normal_spread_deg = Vec::with_capacity(seq.len());
        let mut limit_normal = Vec3::ZERO;
        for (n, s) in seq.iter().enumerate() {
            // the steep half of the star carries the limit normal
            let wmax = star.iter().map(|&t| s.w[t]).fold(1.0, f64::max);
            let sample: Vec<Vec3> = star
                .iter()
                .filter(|&&t| inner(t) && s.w[t] >= 0.5 * wmax)
                .map(|&t| normals[n].normals[t])
                .collect();
            if sample.is_empty() {
                normal_spread_deg.push(f64::NAN);
                continue;
            }
            let mean = sample.iter().fold(Vec3::ZERO, |a, &x| a + x).normalized();
            let spread = sample.iter().map(|x| x.angle(mean)).fold(0.0, f64::max).to_degrees();
            normal_spread_deg.push(spread);
            if n == top {
                limit_normal = mean;
            }
        }
        let a0 = t0 + 0.2 * len;
        let piece = 0.6 * len / 3.0;
        let saturation = forms
            .iter()
            .map(|f| {
                let mut out = [0.0; 3];
                for (j, o) in out.iter_mut().enumerate() {
                    let pa = base + dir * (a0 + piece * j as f64);
                    let pb = base + dir * (a0 + piece * (j + 1) as f64);
                    *o = segment_saturation(dom, f, pa, pb, &cand);
                }
                out
            })
            .collect();
        lines.push(DivergenceLine {
            vertices: comp,
            base,
            direction: dir,
            t_range: [t0, t1],
            straightness,
            limit_normal,
            normal_spread_deg,
            saturation,
        });
    }
    let mut crossing_violations = Vec::new();
    let margin = 2.0 * dom.h();
    for i in 0..lines.len() {
        for j in (i + 1)..lines.len() {
            let (li, lj) = (&lines[i], &lines[j]);
            let denom = li.direction.cross(lj.direction);
            if denom.abs() < 1e-9 {
                continue;
            }
            let d = lj.base - li.base;
            let ti = d.cross(lj.direction) / denom;
            let tj = d.cross(li.direction) / denom;
            let inside = |l: &DivergenceLine, t: f64| t > l.t_range[0] + margin && t < l.t_range[1] - margin;
            if inside(li, ti) && inside(lj, tj) && li.limit_normal.angle(lj.limit_normal).to_degrees() > 10.0 {
                crossing_violations.push((i, j));
            }
        }
    }
    Ok(DivergenceReport {
        region,
        lines,
        crossing_violations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiskCheck {
    pub vertex: usize,
    /// sup_n W_n at the vertex.
    pub m: f64,
    /// Largest radius with sup W_n ≤ 2M, per index.
    pub rho: Vec<f64>,
    pub boundary_distance: f64,
    pub min_rho: f64,
    /// inf ρ(n) is at least one mesh size.
    pub ok: bool,
}

/// Radius around `p` on which every W_n stays below twice its value at `p`.
pub fn two_m_disk_check(dom: &MultiDomain, seq: &[DiscreteSolution], p: usize) -> DiskCheck {
    let stars: Vec<Vec<f64>> = seq.iter().map(|s| star_max_w(dom, s)).collect();
    let m = stars.iter().map(|w| w[p]).fold(1.0, f64::max);
    let c = dom.position(p);
    let boundary_distance = dom
        .boundary
        .iter()
        .map(|&b| dom.position(b).dist(c))
        .fold(f64::INFINITY, f64::min);
    let rho: Vec<f64> = stars
        .iter()
        .map(|w| {
            (0..dom.n_vertices())
                .filter(|&v| w[v] > 2.0 * m)
                .map(|v| dom.position(v).dist(c))
                .fold(boundary_distance, f64::min)
        })
        .collect();
    let min_rho = rho.iter().copied().fold(f64::INFINITY, f64::min);
    DiskCheck {
        vertex: p,
        m,
        rho,
        boundary_distance,
        min_rho,
        ok: min_rho >= dom.h(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk() -> MultiDomain {
        MultiDomain::rectangle(Vec2::new(-1.0, -1.0), 2.0, 2.0, 12, 12).unwrap()
    }

    fn affine_seq(d: &MultiDomain, slopes: &[f64]) -> Vec<DiscreteSolution> {
        slopes
            .iter()
            .map(|&n| DiscreteSolution::from_values(d, d.mesh.positions.iter().map(|p| n * p.x).collect()))
            .collect()
    }

    #[test]
    fn normals_of_planes() {
        let d = disk();
        let s = affine_seq(&d, &[1.0]).remove(0);
        let f = normal_field(&s);
        let r = 0.5f64.sqrt();
        assert!(f.normals.iter().all(|n| n.dist(Vec3::new(r, 0.0, -r)) < 1e-12));
        assert!(f.normals.iter().all(|n| (n.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn constant_sequence_is_bounded() {
        let d = disk();
        let seq = affine_seq(&d, &[0.5, 0.5, 0.5]);
        let r = bounded_region(&d, &seq, &ScanOptions::default()).unwrap();
        assert_eq!(r.count(VertexClass::Bounded), d.n_vertices());
        assert_eq!(detect_divergence_lines(&d, &seq, &ScanOptions::default()), Err(DivScanError::NoDivergence));
        let c = two_m_disk_check(&d, &seq, d.central_vertex());
        assert!((c.min_rho - 1.0).abs() < 1e-12);
    }

    #[test]
    fn linear_blowup_is_divergent_everywhere() {
        let d = disk();
        let seq = affine_seq(&d, &[4.0, 8.0, 16.0, 32.0]);
        let r = bounded_region(&d, &seq, &ScanOptions::default()).unwrap();
        assert_eq!(r.count(VertexClass::Divergent), d.n_vertices());
        let rep = detect_divergence_lines(&d, &seq, &ScanOptions::default()).unwrap();
        assert_eq!(rep.lines.len(), 1);
        let l = &rep.lines[0];
        assert!(l.limit_normal.dist(Vec3::new(1.0, 0.0, 0.0)) < 0.05);
        assert!(l.top_spread() < 1e-6);
    }

    #[test]
    fn short_sequences_are_rejected() {
        let d = disk();
        let seq = affine_seq(&d, &[1.0, 2.0]);
        assert_eq!(
            bounded_region(&d, &seq, &ScanOptions::default()),
            Err(DivScanError::TooShortSequence(2))
        );
    }
}
