//! Conjugate 1-form dΨ = (p/W)dy − (q/W)dx, the conformal parameters (ξ, η), the
//! conjugate surface and its reflection through the horizontal plane.
//!
//! Per-triangle covectors are integrated over the graph whose nodes are edge midpoints
//! and whose links join midpoints inside one triangle. For the discrete area minimizer
//! this nonconforming primitive of dΨ is exactly closed: the loop of midpoints around an
//! interior vertex sums to that vertex's Euler–Lagrange residual. Vertex values average
//! the per-triangle linear extensions.

use crate::flatgeom::MultiDomain;
use crate::geom::{Vec2, Vec3};
use crate::msesolve::DiscreteSolution;
use crate::sparse::{LinearSolveError, SpdSolver, SymmetricAssembly};
use crate::surface::Surface;
use serde::{Deserialize, Serialize};

/// Closedness ratio `|∮ω| / (h · len)` tolerated before a solve is flagged as bad.
pub const CLOSEDNESS_FLAG: f64 = 10.0;

/// A link loop is interior when its centre is at least this many hops from the boundary,
/// so that the loop itself avoids boundary vertices.
pub const INTERIOR_DEPTH: usize = 2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConjError {
    #[error("loop around vertex {vertex} has residual {residual:e} above {bound:e}")]
    ClosednessViolation { vertex: usize, residual: f64, bound: f64 },
    #[error("conjugate differentials have period residual {residual:e} above {bound:e}")]
    PeriodViolation { residual: f64, bound: f64 },
    #[error("glue curves leave the plane: max |x3| = {max:e} > {tol:e}")]
    NonPlanarBoundary { max: f64, tol: f64 },
    #[error("vertices {0} and {1} are not joined by a mesh edge")]
    NotAnEdge(usize, usize),
    #[error("no boundary curve tagged {0:?}")]
    UnknownCurve(String),
    #[error("solution does not match the domain ({0} values for {1} vertices)")]
    SizeMismatch(usize, usize),
    #[error(transparent)]
    Linear(#[from] LinearSolveError),
}

/// Loop integral around the link of an interior vertex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopResidual {
    pub vertex: usize,
    pub residual: f64,
    pub length: f64,
    /// Hop distance from the boundary.
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjugateField {
    pub psi: Vec<f64>,
    /// Per-triangle covector (coefficients of dx, dy).
    pub tri_form: Vec<Vec2>,
    /// Increment along each topology edge, oriented from the smaller to the larger index.
    pub edge_form: Vec<f64>,
    pub loops: Vec<LoopResidual>,
    /// Largest midpoint-loop sum (the discrete Euler–Lagrange residual).
    pub midpoint_residual: f64,
    pub root: usize,
    pub h: f64,
}

/// Result of integrating per-triangle forms.
#[derive(Debug, Clone)]
struct Integrated {
    vertex: Vec<Vec<f64>>,
    /// Per form, per vertex: midpoint-loop sum (0 on the boundary).
    loop_sum: Vec<Vec<f64>>,
    /// Per form, per vertex: largest covector norm on the star.
    scale: Vec<Vec<f64>>,
    loop_len: Vec<f64>,
}

impl Integrated {
    /// Largest `|loop sum|` over interior vertices, per form.
    fn max_loop(&self, dom: &MultiDomain) -> Vec<f64> {
        self.loop_sum
            .iter()
            .map(|l| dom.interior_vertices().map(|v| l[v].abs()).fold(0.0, f64::max))
            .collect()
    }

    /// Largest `|loop sum| / (h · len · |ω|)` over vertices at hop depth ≥ `min_depth`.
    fn relative_loop(&self, dom: &MultiDomain, depth: &[usize], min_depth: usize) -> f64 {
        let h = dom.h();
        let mut m: f64 = 0.0;
        for (k, l) in self.loop_sum.iter().enumerate() {
            for v in dom.interior_vertices().filter(|&v| depth[v] >= min_depth) {
                let s = self.scale[k][v].max(1e-300);
                m = m.max(l[v].abs() / (h * self.loop_len[v] * s));
            }
        }
        m
    }
}

/// Least-squares primitive of several per-triangle forms on the midpoint graph, each
/// triangle's links weighted by `weight[t]` (1 when absent).
fn integrate_forms(dom: &MultiDomain, forms: &[Vec<Vec2>], root: usize, weight: Option<&[f64]>) -> Result<Integrated, ConjError> {
    let wt = |t: usize| weight.map_or(1.0, |w| w[t]);
    let topo = &dom.topo;
    let mesh = &dom.mesh;
    let ne = topo.edges.len();
    let nv = dom.n_vertices();
    let mid: Vec<Vec2> = topo
        .edges
        .iter()
        .map(|e| (mesh.positions[e[0]] + mesh.positions[e[1]]) * 0.5)
        .collect();
    // one edge at the root is pinned to remove the constant
    let pinned = topo.edge(root, topo.vertex_neighbors[root][0]).unwrap();
    let idx = |e: usize| if e < pinned { e } else { e - 1 };
    let mut lap = SymmetricAssembly::with_capacity(ne - 1, 9 * mesh.n_triangles());
    let mut rhs = vec![vec![0.0; ne - 1]; forms.len()];
    for (t, te) in topo.tri_edges.iter().enumerate() {
        let w = wt(t);
        for i in 0..3 {
            let (a, b) = (te[i], te[(i + 1) % 3]);
            let d = mid[b] - mid[a];
            if a != pinned {
                lap.add(idx(a), idx(a), w);
            }
            if b != pinned {
                lap.add(idx(b), idx(b), w);
            }
            if a != pinned && b != pinned {
                lap.add(idx(a), idx(b), -w);
            }
            for (k, f) in forms.iter().enumerate() {
                let inc = w * f[t].dot(d);
                if b != pinned {
                    rhs[k][idx(b)] += inc;
                }
                if a != pinned {
                    rhs[k][idx(a)] -= inc;
                }
            }
        }
    }
    let refs: Vec<&[f64]> = rhs.iter().map(|r| r.as_slice()).collect();
    let sol = SpdSolver::new().solve_many(&lap, &refs)?;
    let mut vertex = Vec::with_capacity(forms.len());
    for (k, f) in forms.iter().enumerate() {
        let at = |e: usize| if e == pinned { 0.0 } else { sol[k][idx(e)] };
        // linear extension of triangle t's primitive from the midpoint of edge e to v
        let extend = |t: usize, e: usize, v: usize| at(e) + f[t].dot(mesh.positions[v] - mid[e]);
        let mut acc = vec![0.0; nv];
        let mut wsum = vec![0.0; nv];
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let te = &topo.tri_edges[t];
            for i in 0..3 {
                let v = tri[i];
                if dom.is_boundary(v) {
                    // boundary vertices only see their two boundary edges
                    for e in [te[i], te[(i + 2) % 3]] {
                        if topo.is_boundary_edge(e) {
                            acc[v] += wt(t) * extend(t, e, v);
                            wsum[v] += wt(t);
                        }
                    }
                } else {
                    let w = mesh.area(t) * wt(t);
                    let (e1, e2) = (te[i], te[(i + 2) % 3]);
                    acc[v] += w * 0.5 * (extend(t, e1, v) + extend(t, e2, v));
                    wsum[v] += w;
                }
            }
        }
        let mut vals: Vec<f64> = acc.iter().zip(&wsum).map(|(a, w)| a / w).collect();
        let r = vals[root];
        for x in &mut vals {
            *x -= r;
        }
        vertex.push(vals);
    }
    let mut loop_len = vec![0.0; nv];
    let mut loop_sum = vec![vec![0.0; nv]; forms.len()];
    let mut scale = vec![vec![0.0f64; nv]; forms.len()];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let te = &topo.tri_edges[t];
        for i in 0..3 {
            // counter-clockwise around vertex i: midpoint of (i, i+1) to midpoint of (i+2, i)
            let d = mid[te[(i + 2) % 3]] - mid[te[i]];
            loop_len[tri[i]] += d.norm();
            for (k, f) in forms.iter().enumerate() {
                loop_sum[k][tri[i]] += f[t].dot(d);
                scale[k][tri[i]] = scale[k][tri[i]].max(f[t].norm());
            }
        }
    }
    for v in 0..nv {
        if dom.is_boundary(v) {
            for l in &mut loop_sum {
                l[v] = 0.0;
            }
        }
    }
    Ok(Integrated {
        vertex,
        loop_sum,
        scale,
        loop_len,
    })
}

/// Average of the adjacent triangle covectors applied to each edge.
fn edge_increments(dom: &MultiDomain, form: &[Vec2]) -> Vec<f64> {
    let topo = &dom.topo;
    topo.edges
        .iter()
        .zip(&topo.edge_tris)
        .map(|(e, ts)| {
            let d = dom.position(e[1]) - dom.position(e[0]);
            let w = if ts[1] == usize::MAX {
                form[ts[0]]
            } else {
                (form[ts[0]] + form[ts[1]]) * 0.5
            };
            w.dot(d)
        })
        .collect()
}

/// Signed increment along the directed edge `a → b`.
fn directed(dom: &MultiDomain, edge_form: &[f64], a: usize, b: usize) -> Result<f64, ConjError> {
    let e = dom.topo.edge(a, b).ok_or(ConjError::NotAnEdge(a, b))?;
    Ok(if a < b { edge_form[e] } else { -edge_form[e] })
}

/// Link-loop integrals of an edge form around every interior vertex.
fn link_loops(dom: &MultiDomain, edge_form: &[f64]) -> Vec<LoopResidual> {
    let depth = dom.topo.hop_distance(dom.boundary.iter().copied());
    let mesh = &dom.mesh;
    let mut out = Vec::new();
    for v in dom.interior_vertices() {
        let mut res = 0.0;
        let mut len = 0.0;
        for &t in &dom.topo.vertex_tris[v] {
            let tri = mesh.triangles[t];
            let i = tri.iter().position(|&x| x == v).unwrap();
            let (a, b) = (tri[(i + 1) % 3], tri[(i + 2) % 3]);
            res += directed(dom, edge_form, a, b).unwrap_or(0.0);
            len += mesh.positions[a].dist(mesh.positions[b]);
        }
        out.push(LoopResidual {
            vertex: v,
            residual: res.abs(),
            length: len,
            depth: depth[v],
        });
    }
    out
}

fn check_size(dom: &MultiDomain, sol: &DiscreteSolution) -> Result<(), ConjError> {
    if sol.u.len() != dom.n_vertices() || sol.grad.len() != dom.n_triangles() {
        return Err(ConjError::SizeMismatch(sol.u.len(), dom.n_vertices()));
    }
    Ok(())
}

fn default_root(dom: &MultiDomain) -> usize {
    dom.domain_vertices.first().copied().unwrap_or(0)
}

/// dΨ per triangle: coefficients `(−q/W, p/W)`.
pub fn psi_covectors(sol: &DiscreteSolution) -> Vec<Vec2> {
    sol.grad.iter().zip(&sol.w).map(|(g, w)| Vec2::new(-g.y / w, g.x / w)).collect()
}

/// Integrate dΨ with Ψ(root) = 0; `root` defaults to the first domain vertex.
pub fn conjugate_form(dom: &MultiDomain, sol: &DiscreteSolution, root: Option<usize>) -> Result<ConjugateField, ConjError> {
    check_size(dom, sol)?;
    let root = root.unwrap_or_else(|| default_root(dom));
    let tri_form = psi_covectors(sol);
    let int = integrate_forms(dom, std::slice::from_ref(&tri_form), root, None)?;
    let edge_form = edge_increments(dom, &tri_form);
    let loops = link_loops(dom, &edge_form);
    let h = dom.h();
    let midpoint_residual = int.max_loop(dom)[0];
    let field = ConjugateField {
        psi: int.vertex.into_iter().next().unwrap(),
        tri_form,
        edge_form,
        loops,
        midpoint_residual,
        root,
        h,
    };
    if let Some(l) = field
        .loops
        .iter()
        .find(|l| l.depth >= INTERIOR_DEPTH && l.residual > CLOSEDNESS_FLAG * h * l.length)
    {
        return Err(ConjError::ClosednessViolation {
            vertex: l.vertex,
            residual: l.residual,
            bound: CLOSEDNESS_FLAG * h * l.length,
        });
    }
    Ok(field)
}

impl ConjugateField {
    /// Largest `|∮dΨ| / (h · len)` over link loops at hop depth ≥ `min_depth`.
    pub fn closedness_ratio(&self, min_depth: usize) -> f64 {
        self.loops
            .iter()
            .filter(|l| l.depth >= min_depth)
            .map(|l| l.residual / (self.h * l.length))
            .fold(0.0, f64::max)
    }

    /// Largest `|Ψ(a) − Ψ(b)| / |ab| − 1` over mesh edges.
    pub fn lipschitz_excess(&self, dom: &MultiDomain) -> f64 {
        dom.topo
            .edges
            .iter()
            .map(|e| (self.psi[e[0]] - self.psi[e[1]]).abs() / dom.position(e[0]).dist(dom.position(e[1])) - 1.0)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Sum of edge increments along a vertex chain, in the given orientation.
pub fn flux_along(field: &ConjugateField, dom: &MultiDomain, path: &[usize]) -> Result<f64, ConjError> {
    path.windows(2).map(|w| directed(dom, &field.edge_form, w[0], w[1])).sum()
}

/// Flux of dΨ along each arc divided by its length.
pub fn arc_flux_ratio(field: &ConjugateField, dom: &MultiDomain, arc: usize) -> Result<f64, ConjError> {
    let vs = &dom.arcs[arc].vertices;
    let len: f64 = vs.windows(2).map(|w| dom.position(w[0]).dist(dom.position(w[1]))).sum();
    Ok(flux_along(field, dom, vs)? / len)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformalMesh {
    /// (ξ, η) per vertex.
    pub phi: Vec<Vec2>,
    /// W + 2 + 1/W per triangle.
    pub jacobian: Vec<f64>,
    /// Area ratio of the integrated piecewise-linear map per triangle.
    pub det: Vec<f64>,
    pub closedness: f64,
    /// Largest midpoint-loop sum relative to `h · len · |ω|` on interior loops.
    pub period_ratio: f64,
    /// Largest relative deviation of `det` from `jacobian`.
    pub max_jacobian_error: f64,
    /// min over edges of |Φ(a) − Φ(b)| − |ab|.
    pub min_stretch: f64,
}

/// Per-triangle forms dξ and dη.
pub fn conformal_covectors(sol: &DiscreteSolution) -> (Vec<Vec2>, Vec<Vec2>) {
    sol.grad
        .iter()
        .zip(&sol.w)
        .map(|(g, &w)| {
            let (p, q) = (g.x, g.y);
            (
                Vec2::new(1.0 + (1.0 + p * p) / w, p * q / w),
                Vec2::new(p * q / w, 1.0 + (1.0 + q * q) / w),
            )
        })
        .unzip()
}

pub fn conformal_map(dom: &MultiDomain, sol: &DiscreteSolution) -> Result<ConformalMesh, ConjError> {
    check_size(dom, sol)?;
    let root = default_root(dom);
    let (dxi, deta) = conformal_covectors(sol);
    // steep triangles carry large, less consistent forms; keep them from steering the rest
    let weight: Vec<f64> = sol.w.iter().map(|w| 1.0 / (w * w)).collect();
    let int = integrate_forms(dom, &[dxi, deta], root, Some(&weight))?;
    let p0 = dom.position(root);
    let phi: Vec<Vec2> = (0..dom.n_vertices())
        .map(|v| Vec2::new(int.vertex[0][v], int.vertex[1][v]) + p0 * 2.0)
        .collect();
    let mesh = &dom.mesh;
    let jacobian: Vec<f64> = sol.w.iter().map(|w| w + 2.0 + 1.0 / w).collect();
    let det: Vec<f64> = mesh
        .triangles
        .iter()
        .enumerate()
        .map(|(t, tri)| crate::geom::signed_area(phi[tri[0]], phi[tri[1]], phi[tri[2]]) / mesh.area(t))
        .collect();
    let max_jacobian_error = det.iter().zip(&jacobian).map(|(d, j)| (d - j).abs() / j).fold(0.0, f64::max);
    let min_stretch = dom
        .topo
        .edges
        .iter()
        .map(|e| phi[e[0]].dist(phi[e[1]]) - dom.position(e[0]).dist(dom.position(e[1])))
        .fold(f64::INFINITY, f64::min);
    let closedness = int.max_loop(dom).into_iter().fold(0.0, f64::max);
    let depth = dom.topo.hop_distance(dom.boundary.iter().copied());
    let period_ratio = int.relative_loop(dom, &depth, INTERIOR_DEPTH);
    Ok(ConformalMesh {
        phi,
        jacobian,
        det,
        closedness,
        period_ratio,
        max_jacobian_error,
        min_stretch,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCurve {
    pub tag: String,
    pub vertices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjugateSurface {
    /// Same connectivity as the source mesh; vertex `v` corresponds to domain vertex `v`.
    pub surface: Surface,
    /// One curve per boundary arc, plus `corner{i}` curves through each domain vertex
    /// and its two boundary neighbours.
    pub curves: Vec<BoundaryCurve>,
    /// Largest midpoint-loop residual of the horizontal conjugate differentials.
    pub period_residual: f64,
    /// Largest relative edge-length change from the graph to the conjugate surface, over
    /// edges more than [`CORNER_HOPS`] hops from every domain vertex.
    pub max_length_distortion: f64,
    /// The same near domain vertices, where ramped data squeezes vertical lines into a
    /// few triangles.
    pub corner_length_distortion: f64,
}

/// Hop radius around domain vertices excluded from the isometry check.
pub const CORNER_HOPS: usize = 3;

/// Graph of `u` over the developed mesh.
pub fn graph_surface(dom: &MultiDomain, u: &[f64]) -> Surface {
    let positions = dom.mesh.positions.iter().zip(u).map(|(p, &z)| Vec3::new(p.x, p.y, z)).collect();
    Surface::new(positions, dom.mesh.triangles.clone())
}

/// x* = (η − y, x − ξ, Ψ): the integral of N × dX with N = (p, q, −1)/W.
pub fn conjugate_surface(
    dom: &MultiDomain,
    sol: &DiscreteSolution,
    field: &ConjugateField,
    cmesh: &ConformalMesh,
) -> Result<ConjugateSurface, ConjError> {
    check_size(dom, sol)?;
    let positions: Vec<Vec3> = (0..dom.n_vertices())
        .map(|v| {
            let p = dom.position(v);
            let f = cmesh.phi[v];
            Vec3::new(f.y - p.y, p.x - f.x, field.psi[v])
        })
        .collect();
    let surface = Surface::new(positions, dom.mesh.triangles.clone());
    let graph = graph_surface(dom, &sol.u);
    let near = dom.topo.hop_distance(dom.domain_vertices.iter().copied());
    let (mut max_length_distortion, mut corner_length_distortion) = (0.0f64, 0.0f64);
    for e in &dom.topo.edges {
        let l0 = graph.positions[e[0]].dist(graph.positions[e[1]]);
        let l1 = surface.positions[e[0]].dist(surface.positions[e[1]]);
        let r = (l1 - l0).abs() / l0;
        if near[e[0]].min(near[e[1]]) > CORNER_HOPS {
            max_length_distortion = max_length_distortion.max(r);
        } else {
            corner_length_distortion = corner_length_distortion.max(r);
        }
    }
    let mut curves: Vec<BoundaryCurve> = dom
        .arcs
        .iter()
        .map(|a| BoundaryCurve {
            tag: a.tag.clone(),
            vertices: a.vertices.clone(),
        })
        .collect();
    let n = dom.boundary.len();
    for (i, &d) in dom.domain_vertices.iter().enumerate() {
        let k = dom.boundary_index(d).unwrap();
        curves.push(BoundaryCurve {
            tag: format!("corner{i}"),
            vertices: vec![dom.boundary[(k + n - 1) % n], d, dom.boundary[(k + 1) % n]],
        });
    }
    if cmesh.period_ratio > CLOSEDNESS_FLAG {
        return Err(ConjError::PeriodViolation {
            residual: cmesh.period_ratio,
            bound: CLOSEDNESS_FLAG,
        });
    }
    Ok(ConjugateSurface {
        surface,
        curves,
        period_residual: cmesh.closedness,
        max_length_distortion,
        corner_length_distortion,
    })
}

impl ConjugateSurface {
    pub fn curve(&self, tag: &str) -> Result<&BoundaryCurve, ConjError> {
        self.curves
            .iter()
            .find(|c| c.tag == tag)
            .ok_or_else(|| ConjError::UnknownCurve(tag.to_string()))
    }

    /// max |x3*| over the curves with the given tags.
    pub fn max_height(&self, tags: &[&str]) -> Result<f64, ConjError> {
        let mut m: f64 = 0.0;
        for t in tags {
            for &v in &self.curve(t)?.vertices {
                m = m.max(self.surface.positions[v].z.abs());
            }
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReflectedSurface {
    pub surface: Surface,
    /// Number of vertices of the upper half; mirror of `v` is `mirror[v]`.
    pub n_upper: usize,
    pub mirror: Vec<usize>,
    pub glued: Vec<usize>,
    /// Every vertex already lies in the plane, so the union is a doubled sheet.
    pub degenerate: bool,
}

/// M* ∪ S(M*) with S the reflection through {x₃ = 0}, glued along the tagged curves.
/// Glue vertices are snapped onto the plane.
pub fn reflect_union(surface: &ConjugateSurface, glue: &[&str], tol: f64) -> Result<ReflectedSurface, ConjError> {
    let max = surface.max_height(glue)?;
    if max > tol {
        return Err(ConjError::NonPlanarBoundary { max, tol });
    }
    let s = &surface.surface;
    let n = s.n_vertices();
    let mut on_plane = vec![false; n];
    for t in glue {
        for &v in &surface.curve(t)?.vertices {
            on_plane[v] = true;
        }
    }
    let mut positions = s.positions.clone();
    let mut mirror = vec![0; n];
    let mut glued = Vec::new();
    for v in 0..n {
        if on_plane[v] {
            positions[v].z = 0.0;
            mirror[v] = v;
            glued.push(v);
        }
    }
    for v in 0..n {
        if !on_plane[v] {
            mirror[v] = positions.len();
            positions.push(s.positions[v].mirror_z());
        }
    }
    let mut triangles = s.triangles.clone();
    // reflection reverses orientation, so the winding is flipped to stay consistent
    triangles.extend(s.triangles.iter().map(|t| [mirror[t[0]], mirror[t[2]], mirror[t[1]]]));
    let degenerate = s.positions.iter().all(|p| p.z.abs() <= tol);
    Ok(ReflectedSurface {
        surface: Surface::new(positions, triangles),
        n_upper: n,
        mirror,
        glued,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::msesolve::{solve_dirichlet, SolverConfig};

    fn square() -> MultiDomain {
        MultiDomain::rectangle(Vec2::new(-1.0, -1.0), 2.0, 2.0, 8, 8).unwrap()
    }

    #[test]
    fn plane_u_equals_x() {
        let d = square();
        let u: Vec<f64> = d.mesh.positions.iter().map(|p| p.x).collect();
        let sol = DiscreteSolution::from_values(&d, u);
        let f = conjugate_form(&d, &sol, None).unwrap();
        let r = f.root;
        for v in 0..d.n_vertices() {
            let expect = (d.position(v).y - d.position(r).y) / 2f64.sqrt();
            assert!((f.psi[v] - expect).abs() < 1e-12);
        }
        let c = conformal_map(&d, &sol).unwrap();
        let s2 = 2f64.sqrt();
        for v in 0..d.n_vertices() {
            let dp = d.position(v) - d.position(r);
            let df = c.phi[v] - c.phi[r];
            assert!((df.x - (1.0 + 2.0 / s2) * dp.x).abs() < 1e-12);
            assert!((df.y - (1.0 + 1.0 / s2) * dp.y).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_solution_has_flat_conjugate() {
        let d = square();
        let sol = DiscreteSolution::from_values(&d, vec![0.0; d.n_vertices()]);
        let f = conjugate_form(&d, &sol, None).unwrap();
        assert!(f.psi.iter().all(|x| *x == 0.0));
        let c = conformal_map(&d, &sol).unwrap();
        let r = f.root;
        for v in 0..d.n_vertices() {
            assert!(((c.phi[v] - c.phi[r]) - (d.position(v) - d.position(r)) * 2.0).norm() < 1e-12);
        }
        let cs = conjugate_surface(&d, &sol, &f, &c).unwrap();
        assert!(cs.surface.positions.iter().all(|p| p.z == 0.0));
        assert!(cs.max_length_distortion < 1e-12);
    }

    #[test]
    fn curved_solution_laws() {
        let d = square();
        let vals: Vec<f64> = d.mesh.positions.iter().map(|p| (p.x * 1.3).sinh() * 0.7 + p.y * p.y).collect();
        let sol = solve_dirichlet(&d, &vals, &SolverConfig::default()).unwrap();
        let f = conjugate_form(&d, &sol, None).unwrap();
        assert!(f.midpoint_residual < 1e-9);
        assert!(f.lipschitz_excess(&d) < 10.0 * d.h());
        let c = conformal_map(&d, &sol).unwrap();
        assert!(c.min_stretch > -10.0 * d.h());
        let path: Vec<usize> = d.arcs[0].vertices.clone();
        let back: Vec<usize> = path.iter().rev().copied().collect();
        assert!((flux_along(&f, &d, &path).unwrap() + flux_along(&f, &d, &back).unwrap()).abs() < 1e-14);
    }
}
