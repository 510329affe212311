//! Solvability of the Dirichlet problem with ±∞ boundary data: enumerate polygonal
//! subdomains drawn from the domain vertices and test 2α < γ, 2β < γ.

use crate::flatgeom::MultiDomain;
use crate::geom::{barycentric, Vec2};
use serde::{Deserialize, Serialize};

/// Exhaustive search bound on the number of domain vertices.
pub const MAX_DOMAIN_VERTICES: usize = 16;
const REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "values")]
pub enum ArcData {
    PlusInf,
    MinusInf,
    /// One value per arc vertex, in arc order.
    Finite(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    A,
    B,
    C,
}

impl ArcData {
    pub fn label(&self) -> Label {
        match self {
            ArcData::PlusInf => Label::A,
            ArcData::MinusInf => Label::B,
            ArcData::Finite(_) => Label::C,
        }
    }
}

/// Boundary condition per arc of a [`MultiDomain`], aligned with `dom.arcs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    pub arcs: Vec<ArcData>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum JsError {
    #[error("{found} domain vertices exceed the enumeration bound {max}")]
    TooManyVertices { found: usize, max: usize },
    #[error("boundary data has {found} arcs, domain has {expected}")]
    ArcCountMismatch { found: usize, expected: usize },
    #[error("finite data on arc {arc} has {found} values for {expected} vertices")]
    ValueCountMismatch { arc: usize, found: usize, expected: usize },
    #[error("infinite data on arc {0}, which is not a straight edge")]
    InfiniteOnNonStraightArc(usize),
    #[error("non-finite value on arc {0}")]
    NonFiniteValue(usize),
}

impl BoundaryData {
    pub fn new(arcs: Vec<ArcData>) -> Self {
        BoundaryData { arcs }
    }

    /// Finite data sampled from a function of developed position.
    pub fn from_fn(dom: &MultiDomain, f: impl Fn(Vec2) -> f64) -> Self {
        BoundaryData {
            arcs: dom
                .arcs
                .iter()
                .map(|a| ArcData::Finite(a.vertices.iter().map(|&v| f(dom.position(v))).collect()))
                .collect(),
        }
    }

    /// Assign by arc tag; arcs without a rule get `default`.
    pub fn by_tag(dom: &MultiDomain, rule: impl Fn(&str) -> Option<Label>, finite: f64) -> Self {
        BoundaryData {
            arcs: dom
                .arcs
                .iter()
                .map(|a| match rule(&a.tag) {
                    Some(Label::A) => ArcData::PlusInf,
                    Some(Label::B) => ArcData::MinusInf,
                    _ => ArcData::Finite(vec![finite; a.vertices.len()]),
                })
                .collect(),
        }
    }

    pub fn has_finite(&self) -> bool {
        self.arcs.iter().any(|a| matches!(a, ArcData::Finite(_)))
    }

    pub fn has_infinite(&self) -> bool {
        self.arcs.iter().any(|a| !matches!(a, ArcData::Finite(_)))
    }

    /// Exchange +∞ and −∞ and negate finite values.
    pub fn negated(&self) -> Self {
        BoundaryData {
            arcs: self
                .arcs
                .iter()
                .map(|a| match a {
                    ArcData::PlusInf => ArcData::MinusInf,
                    ArcData::MinusInf => ArcData::PlusInf,
                    ArcData::Finite(v) => ArcData::Finite(v.iter().map(|x| -x).collect()),
                })
                .collect(),
        }
    }

    pub fn validate(&self, dom: &MultiDomain) -> Result<(), JsError> {
        if self.arcs.len() != dom.arcs.len() {
            return Err(JsError::ArcCountMismatch {
                found: self.arcs.len(),
                expected: dom.arcs.len(),
            });
        }
        for (i, (d, arc)) in self.arcs.iter().zip(&dom.arcs).enumerate() {
            match d {
                ArcData::Finite(v) => {
                    if v.len() != arc.vertices.len() {
                        return Err(JsError::ValueCountMismatch {
                            arc: i,
                            found: v.len(),
                            expected: arc.vertices.len(),
                        });
                    }
                    if v.iter().any(|x| !x.is_finite()) {
                        return Err(JsError::NonFiniteValue(i));
                    }
                }
                _ => {
                    let inner = &arc.vertices[1..arc.vertices.len() - 1];
                    if arc.curved || arc.is_closed() || inner.iter().any(|v| dom.domain_vertices.contains(v)) {
                        return Err(JsError::InfiniteOnNonStraightArc(i));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A straight segment between domain vertices: either a straight boundary chain or an
/// intrinsic segment through the interior.
#[derive(Debug, Clone)]
pub struct PSegment {
    pub from: usize,
    pub to: usize,
    pub length: f64,
    /// Arc index when the segment is a boundary chain.
    pub arc: Option<usize>,
    /// Pieces `(triangle, start, end)` in developed coordinates.
    pub pieces: Vec<(usize, Vec2, Vec2)>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PolygonalSubdomain {
    /// Domain vertex ids, counter-clockwise.
    pub vertices: Vec<usize>,
    /// Each edge as `(from, to, boundary arc if any)`.
    pub edges: Vec<(usize, usize, Option<usize>)>,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// True when the subdomain is all of Ω.
    pub is_whole: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Solvable,
    SolvableUpToConstant,
    Unsolvable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolvabilityVerdict {
    pub status: Status,
    pub witness: Option<PolygonalSubdomain>,
    /// Which condition the witness breaks: `2alpha<gamma`, `2beta<gamma` or `alpha=beta`.
    pub violated: Option<String>,
    pub subdomains_checked: usize,
}

/// JSON shape of a verdict: `{status, witness_vertices, alpha, beta, gamma}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictJson {
    pub status: Status,
    pub witness_vertices: Option<Vec<usize>>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
}

impl SolvabilityVerdict {
    pub fn to_json(&self) -> VerdictJson {
        VerdictJson {
            status: self.status,
            witness_vertices: self.witness.as_ref().map(|w| w.vertices.clone()),
            alpha: self.witness.as_ref().map(|w| w.alpha),
            beta: self.witness.as_ref().map(|w| w.beta),
            gamma: self.witness.as_ref().map(|w| w.gamma),
        }
    }
}

fn wedge_contains(o: Vec2, a: Vec2, b: Vec2, d: Vec2, eps: f64) -> bool {
    // wedge at o spanned counter-clockwise from a to b (a triangle corner, angle < π)
    let (ea, eb, dn) = ((a - o).normalized(), (b - o).normalized(), d.normalized());
    ea.cross(dn) >= -eps && dn.cross(eb) >= -eps
}

/// Walk the straight segment from vertex `u` to vertex `v` starting in triangle `t0`.
fn walk(dom: &MultiDomain, u: usize, v: usize, t0: usize) -> Option<Vec<(usize, Vec2, Vec2)>> {
    let m = &dom.mesh;
    let p0 = m.positions[u];
    let p1 = m.positions[v];
    let d = p1 - p0;
    let len = d.norm();
    let eps = 1e-10;
    let mut t = t0;
    let mut entry = p0;
    let mut s_entry = 0.0;
    let mut pieces = Vec::new();
    for _ in 0..(4 * m.n_triangles() + 8) {
        let tri = m.triangles[t];
        let [a, b, c] = m.corners(t);
        if tri.contains(&v) {
            pieces.push((t, entry, p1));
            return Some(pieces);
        }
        // barycentric coordinates along the ray: λ(s) = λ0 + s λ1
        let l_entry = barycentric(entry, a, b, c);
        let l_far = barycentric(entry + d / len, a, b, c);
        let mut s_exit = f64::INFINITY;
        for i in 0..3 {
            let rate = l_far[i] - l_entry[i];
            if rate < -1e-14 {
                let s = -l_entry[i] / rate;
                s_exit = s_exit.min(s.max(0.0));
            }
        }
        if !s_exit.is_finite() || s_entry + s_exit >= len - eps * len {
            // the segment would end inside this triangle at a point that is not `v`
            return None;
        }
        let exit = entry + d * (s_exit / len);
        let l_exit = barycentric(exit, a, b, c);
        let zero: Vec<usize> = (0..3).filter(|&i| l_exit[i].abs() <= 1e-9).collect();
        pieces.push((t, entry, exit));
        if zero.len() >= 2 {
            // passing through a mesh vertex
            let k = (0..3).find(|i| !zero.contains(i)).unwrap();
            let w = tri[k];
            if w == v {
                return Some(pieces);
            }
            if dom.is_boundary(w) {
                return None;
            }
            let pw = m.positions[w];
            let next = dom.topo.vertex_tris[w].iter().copied().find(|&o| {
                if o == t {
                    return false;
                }
                let ot = m.triangles[o];
                let j = ot.iter().position(|&x| x == w).unwrap();
                let (pa, pb) = (m.positions[ot[(j + 1) % 3]], m.positions[ot[(j + 2) % 3]]);
                wedge_contains(pw, pa, pb, d, 1e-12)
            })?;
            t = next;
            entry = pw;
            s_entry = (pw - p0).norm();
            continue;
        }
        let i = *zero.first()?;
        // edge opposite corner i is local edge (i+1, i+2), i.e. tri_edges index (i+1)%3
        let nb = dom.topo.tri_neighbors[t][(i + 1) % 3]?;
        t = nb;
        entry = exit;
        s_entry += s_exit;
    }
    None
}

/// All straight segments usable as polygon edges.
pub fn candidate_segments(dom: &MultiDomain) -> Vec<PSegment> {
    let dv = &dom.domain_vertices;
    let m = &dom.mesh;
    let mut out = Vec::new();
    // boundary chains between consecutive domain vertices
    let nd = dv.len();
    for i in 0..nd {
        let (a, b) = (dv[i], dv[(i + 1) % nd]);
        if nd == 1 {
            break;
        }
        let chain = match dom.boundary_chain(a, b) {
            Some(c) => c,
            None => continue,
        };
        let arc = dom.arcs_at(chain[1]).iter().copied().find(|&ai| {
            let vs = &dom.arcs[ai].vertices;
            vs.windows(2).any(|w| w[0] == chain[0] && w[1] == chain[1])
        });
        let Some(arc) = arc else { continue };
        if dom.arcs[arc].curved {
            continue;
        }
        let mut pieces = Vec::new();
        let mut length = 0.0;
        for w in chain.windows(2) {
            let e = dom.topo.edge(w[0], w[1]).unwrap();
            let t = dom.topo.edge_tris[e][0];
            pieces.push((t, m.positions[w[0]], m.positions[w[1]]));
            length += m.positions[w[0]].dist(m.positions[w[1]]);
        }
        out.push(PSegment {
            from: a,
            to: b,
            length,
            arc: Some(arc),
            pieces,
        });
    }
    // interior segments
    for &u in dv {
        for &v in dv {
            if u >= v {
                continue;
            }
            let d = m.positions[v] - m.positions[u];
            if d.norm() <= 1e-14 {
                continue;
            }
            for &t in &dom.topo.vertex_tris[u] {
                let tri = m.triangles[t];
                let j = tri.iter().position(|&x| x == u).unwrap();
                let (pa, pb) = (m.positions[tri[(j + 1) % 3]], m.positions[tri[(j + 2) % 3]]);
                let pu = m.positions[u];
                let (ea, eb, dn) = ((pa - pu).normalized(), (pb - pu).normalized(), d.normalized());
                // strictly inside the wedge, or along an interior edge (the first wedge wins)
                let ca = ea.cross(dn);
                let cb = dn.cross(eb);
                if ca < -1e-12 || cb < -1e-12 {
                    continue;
                }
                let along_a = ca.abs() <= 1e-12 && ea.dot(dn) > 0.0;
                let along_b = cb.abs() <= 1e-12 && eb.dot(dn) > 0.0;
                if along_a || along_b {
                    let other = if along_a { tri[(j + 1) % 3] } else { tri[(j + 2) % 3] };
                    let e = dom.topo.edge(u, other).unwrap();
                    if dom.topo.is_boundary_edge(e) {
                        continue;
                    }
                    // take the edge only from the triangle where it is the wedge's first side
                    if along_b {
                        continue;
                    }
                }
                if let Some(pieces) = walk(dom, u, v, t) {
                    let dup = out.iter().any(|s: &PSegment| {
                        s.arc.is_none() && s.from == u && s.to == v && s.pieces[0].0 == pieces[0].0
                    });
                    if !dup {
                        out.push(PSegment {
                            from: u,
                            to: v,
                            length: d.norm(),
                            arc: None,
                            pieces,
                        });
                    }
                }
            }
        }
    }
    out
}

fn pieces_cross(s1: &PSegment, s2: &PSegment, shared: Option<usize>, dom: &MultiDomain) -> bool {
    let eps = 1e-9 * dom.h();
    let near_shared = |p: Vec2| shared.is_some_and(|w| p.dist(dom.position(w)) <= eps * 10.0);
    for &(t1, a1, b1) in &s1.pieces {
        for &(t2, a2, b2) in &s2.pieces {
            if t1 != t2 && !dom.mesh.triangles[t1].iter().any(|v| dom.mesh.triangles[t2].contains(v)) {
                continue;
            }
            if let Some(p) = segment_intersection(a1, b1, a2, b2, eps) {
                if !near_shared(p) {
                    return true;
                }
            }
        }
    }
    false
}

/// A representative intersection point of two closed segments, if they meet.
fn segment_intersection(a: Vec2, b: Vec2, c: Vec2, d: Vec2, eps: f64) -> Option<Vec2> {
    let r = b - a;
    let s = d - c;
    let den = r.cross(s);
    let qp = c - a;
    if den.abs() <= eps * r.norm() * s.norm() {
        if qp.cross(r).abs() > eps * r.norm().max(1e-300) {
            return None;
        }
        // collinear: report an overlap point if projections overlap
        let rr = r.norm2();
        let t0 = qp.dot(r) / rr;
        let t1 = (d - a).dot(r) / rr;
        let (lo, hi) = (t0.min(t1), t0.max(t1));
        if hi < -1e-12 || lo > 1.0 + 1e-12 {
            return None;
        }
        let mid = 0.5 * (lo.max(0.0) + hi.min(1.0));
        return Some(a + r * mid);
    }
    let t = qp.cross(s) / den;
    let u = qp.cross(r) / den;
    let tol = 1e-12;
    if t >= -tol && t <= 1.0 + tol && u >= -tol && u <= 1.0 + tol {
        Some(a + r * t)
    } else {
        None
    }
}

/// Every simple closed cycle of straight segments through domain vertices.
pub fn enumerate_polygonal_subdomains(
    dom: &MultiDomain,
    data: Option<&BoundaryData>,
) -> Result<Vec<PolygonalSubdomain>, JsError> {
    let nd = dom.domain_vertices.len();
    if nd > MAX_DOMAIN_VERTICES {
        return Err(JsError::TooManyVertices {
            found: nd,
            max: MAX_DOMAIN_VERTICES,
        });
    }
    let segs = candidate_segments(dom);
    let n = dom.n_vertices();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (i, s) in segs.iter().enumerate() {
        adj[s.from].push((s.to, i));
        adj[s.to].push((s.from, i));
    }
    // pairwise compatibility between segments
    let ns = segs.len();
    let mut crosses = vec![vec![false; ns]; ns];
    for i in 0..ns {
        for j in (i + 1)..ns {
            let (a, b) = (&segs[i], &segs[j]);
            let shared = [a.from, a.to].into_iter().find(|x| *x == b.from || *x == b.to);
            let both_shared = (a.from == b.from && a.to == b.to) || (a.from == b.to && a.to == b.from);
            let c = if both_shared { true } else { pieces_cross(a, b, shared, dom) };
            crosses[i][j] = c;
            crosses[j][i] = c;
        }
    }
    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let dvs = &dom.domain_vertices;
    for &start in dvs {
        let mut path_v = vec![start];
        let mut path_e: Vec<usize> = Vec::new();
        let mut on_path = vec![false; n];
        on_path[start] = true;
        dfs(
            start, start, &adj, &segs, &crosses, &mut path_v, &mut path_e, &mut on_path, &mut |pv, pe| {
                // canonical key: edges as a sorted set
                let mut key: Vec<usize> = pe.to_vec();
                key.sort_unstable();
                if seen.insert(key) {
                    out.push(make_subdomain(dom, &segs, pv, pe, data));
                }
            },
        );
    }
    out.sort_by(|a, b| {
        b.is_whole
            .cmp(&a.is_whole)
            .then(a.vertices.len().cmp(&b.vertices.len()))
            .then(a.vertices.cmp(&b.vertices))
    });
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    start: usize,
    cur: usize,
    adj: &[Vec<(usize, usize)>],
    segs: &[PSegment],
    crosses: &[Vec<bool>],
    path_v: &mut Vec<usize>,
    path_e: &mut Vec<usize>,
    on_path: &mut Vec<bool>,
    emit: &mut dyn FnMut(&[usize], &[usize]),
) {
    for &(next, e) in &adj[cur] {
        if next < start {
            continue;
        }
        // a new edge may touch its predecessor (shared vertex) but no earlier edge
        let ok = path_e.iter().all(|&pe| !crosses[pe][e]);
        if !ok {
            continue;
        }
        if next == start {
            if path_e.len() >= 2 && path_e[0] != e {
                path_e.push(e);
                emit(path_v, path_e);
                path_e.pop();
            }
            continue;
        }
        if on_path[next] {
            continue;
        }
        on_path[next] = true;
        path_v.push(next);
        path_e.push(e);
        dfs(start, next, adj, segs, crosses, path_v, path_e, on_path, emit);
        path_e.pop();
        path_v.pop();
        on_path[next] = false;
    }
}

fn make_subdomain(
    dom: &MultiDomain,
    segs: &[PSegment],
    pv: &[usize],
    pe: &[usize],
    data: Option<&BoundaryData>,
) -> PolygonalSubdomain {
    let p = &dom.mesh.positions;
    let area: f64 = (0..pv.len())
        .map(|i| p[pv[i]].cross(p[pv[(i + 1) % pv.len()]]))
        .sum();
    let (mut verts, mut edges): (Vec<usize>, Vec<usize>) = (pv.to_vec(), pe.to_vec());
    if area < 0.0 {
        verts = std::iter::once(verts[0]).chain(verts[1..].iter().rev().copied()).collect();
        edges.reverse();
    }
    let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
    let mut edge_list = Vec::with_capacity(edges.len());
    for (i, &e) in edges.iter().enumerate() {
        let s = &segs[e];
        gamma += s.length;
        if let (Some(arc), Some(d)) = (s.arc, data) {
            match d.arcs[arc].label() {
                Label::A => alpha += s.length,
                Label::B => beta += s.length,
                Label::C => {}
            }
        }
        edge_list.push((verts[i], verts[(i + 1) % verts.len()], s.arc));
    }
    let boundary_edges: usize = edges
        .iter()
        .filter(|&&e| segs[e].arc.is_some())
        .map(|&e| segs[e].pieces.len())
        .sum();
    let is_whole = edges.iter().all(|&e| segs[e].arc.is_some()) && boundary_edges == dom.boundary.len();
    PolygonalSubdomain {
        vertices: verts,
        edges: edge_list,
        alpha,
        beta,
        gamma,
        is_whole,
    }
}

/// Evaluate the Jenkins–Serrin conditions over all polygonal subdomains.
pub fn check_solvability(dom: &MultiDomain, data: &BoundaryData) -> Result<SolvabilityVerdict, JsError> {
    data.validate(dom)?;
    let subs = enumerate_polygonal_subdomains(dom, Some(data))?;
    Ok(verdict_from(&subs, data.has_finite()))
}

/// Verdict from precomputed subdomains (α, β, γ already filled in).
pub fn verdict_from(subs: &[PolygonalSubdomain], has_finite: bool) -> SolvabilityVerdict {
    let mut worst: Option<(f64, usize, &'static str)> = None;
    for (i, s) in subs.iter().enumerate() {
        if !has_finite && s.is_whole {
            continue;
        }
        let tol = REL_TOL * s.gamma;
        for (val, name) in [(s.alpha, "2alpha<gamma"), (s.beta, "2beta<gamma")] {
            if 2.0 * val >= s.gamma - tol {
                let ratio = 2.0 * val / s.gamma;
                if worst.is_none_or(|(r, _, _)| ratio > r) {
                    worst = Some((ratio, i, name));
                }
            }
        }
    }
    if !has_finite {
        match subs.iter().find(|s| s.is_whole) {
            Some(w) if (w.alpha - w.beta).abs() > REL_TOL * w.gamma => {
                return SolvabilityVerdict {
                    status: Status::Unsolvable,
                    witness: Some(w.clone()),
                    violated: Some("alpha=beta".into()),
                    subdomains_checked: subs.len(),
                };
            }
            None => {
                return SolvabilityVerdict {
                    status: Status::Unsolvable,
                    witness: None,
                    violated: Some("alpha=beta".into()),
                    subdomains_checked: subs.len(),
                };
            }
            _ => {}
        }
    }
    match worst {
        Some((_, i, name)) => SolvabilityVerdict {
            status: Status::Unsolvable,
            witness: Some(subs[i].clone()),
            violated: Some(name.into()),
            subdomains_checked: subs.len(),
        },
        None => SolvabilityVerdict {
            status: if has_finite {
                Status::Solvable
            } else {
                Status::SolvableUpToConstant
            },
            witness: None,
            violated: None,
            subdomains_checked: subs.len(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flatgeom::MultiDomain;
    use std::f64::consts::PI;

    fn labels(dom: &MultiDomain, a: &[&str], b: &[&str], c: f64) -> BoundaryData {
        BoundaryData::by_tag(
            dom,
            |t| {
                if a.contains(&t) {
                    Some(Label::A)
                } else if b.contains(&t) {
                    Some(Label::B)
                } else {
                    None
                }
            },
            c,
        )
    }

    #[test]
    fn unit_square_subdomains() {
        let dom = MultiDomain::rectangle(Vec2::ZERO, 1.0, 1.0, 4, 4).unwrap();
        let subs = enumerate_polygonal_subdomains(&dom, None).unwrap();
        assert_eq!(subs.len(), 5);
        assert!(subs[0].is_whole);
        assert!(subs[1..].iter().all(|s| s.vertices.len() == 3));
    }

    #[test]
    fn scherk_square_solvable_up_to_constant() {
        let dom = MultiDomain::rectangle(Vec2::new(-PI / 2.0, -PI / 2.0), PI, PI, 6, 6).unwrap();
        let d = labels(&dom, &["left", "right"], &["top", "bottom"], 0.0);
        let v = check_solvability(&dom, &d).unwrap();
        assert_eq!(v.status, Status::SolvableUpToConstant);
    }

    #[test]
    fn equality_square_unsolvable_with_whole_witness() {
        let dom = MultiDomain::rectangle(Vec2::ZERO, 1.0, 1.0, 4, 4).unwrap();
        let d = labels(&dom, &["top", "bottom"], &[], 0.0);
        let v = check_solvability(&dom, &d).unwrap();
        assert_eq!(v.status, Status::Unsolvable);
        let w = v.witness.unwrap();
        assert!(w.is_whole);
        assert!((2.0 * w.alpha - w.gamma).abs() < 1e-12);
    }

    #[test]
    fn long_rectangle_solvable() {
        let dom = MultiDomain::rectangle(Vec2::ZERO, 1.0, 2.0, 4, 8).unwrap();
        let d = labels(&dom, &["top", "bottom"], &[], 0.0);
        assert_eq!(check_solvability(&dom, &d).unwrap().status, Status::Solvable);
    }

    #[test]
    fn curved_arc_rejects_infinite_data() {
        let s = crate::flatgeom::SectorDomain::new(0.0, 1.0, 1.0, 0.2).unwrap();
        let d = BoundaryData::new(vec![
            ArcData::PlusInf,
            ArcData::PlusInf,
            ArcData::MinusInf,
        ]);
        assert_eq!(check_solvability(&s.domain, &d), Err(JsError::InfiniteOnNonStraightArc(1)));
    }
}
