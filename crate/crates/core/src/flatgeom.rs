//! Flat multi-domains: triangulations carrying a developing map, labeled boundary arcs,
//! sector domains, flux polygons, polygonal disks and the half-strip extension Ω(P).

use crate::geom::{polygon_signed_area, segments_intersect, signed_area, Isometry2, Vec2};
use crate::mesh::{subdivide_triangles, Topology, TopologyError, TriMesh};
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, VecDeque};
use std::f64::consts::PI;

const ISOMETRY_TOL: f64 = 1e-12;
const HOLONOMY_TOL: f64 = 1e-10;
const TURN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FlatGeomError {
    #[error("triangulation is not simply connected (Euler characteristic {chi}, {loops} boundary loops)")]
    NotSimplyConnected { chi: i64, loops: usize },
    #[error("boundary arc {arc} is not convex between edges ({a0},{a1}) and ({b0},{b1})")]
    NonConvexArc { arc: usize, a0: usize, a1: usize, b0: usize, b1: usize },
    #[error("inconsistent isometry at triangle {triangle}: residual {residual:e}")]
    InconsistentIsometry { triangle: usize, residual: f64 },
    #[error("triangle {0} is degenerate")]
    DegenerateTriangle(usize),
    #[error("triangulation is not orientable or mixes orientations")]
    NotOrientable,
    #[error("triangulation is disconnected ({0} components)")]
    Disconnected(usize),
    #[error("invalid boundary arcs: {0}")]
    InvalidArcs(String),
    #[error("degenerate polygon: {0}")]
    DegeneratePolygon(String),
    #[error("flux vectors do not balance: |sum| = {residual:e}")]
    UnbalancedFlux { residual: f64 },
    #[error("a flux polygon needs at least two vectors")]
    TooFewVectors,
    #[error("polygon edges {0} and {1} intersect")]
    SelfIntersecting(usize, usize),
    #[error("flux polygon is traversed clockwise; reverse the vector order")]
    Clockwise,
    #[error("disk boundary does not develop onto the flux polygon (residual {0:e})")]
    DiskMismatch(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

/// A triangle given in its own chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartTriangle {
    pub vertices: [usize; 3],
    pub coords: [Vec2; 3],
}

/// `map` sends coordinates of triangle `to`'s chart into triangle `from`'s chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
    pub map: Isometry2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcSpec {
    /// Boundary edges as vertex pairs, consecutive along the boundary.
    pub edges: Vec<[usize; 2]>,
    #[serde(default)]
    pub tag: String,
    #[serde(default)]
    pub curved: bool,
}

impl ArcSpec {
    pub fn chain(vertices: &[usize], tag: &str, curved: bool) -> Self {
        ArcSpec {
            edges: vertices.windows(2).map(|w| [w[0], w[1]]).collect(),
            tag: tag.to_string(),
            curved,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryArc {
    /// Vertex chain in boundary order (interior on the left).
    pub vertices: Vec<usize>,
    pub tag: String,
    pub curved: bool,
}

impl BoundaryArc {
    pub fn edges(&self) -> impl Iterator<Item = [usize; 2]> + '_ {
        self.vertices.windows(2).map(|w| [w[0], w[1]])
    }

    pub fn is_closed(&self) -> bool {
        self.vertices.len() > 2 && self.vertices.first() == self.vertices.last()
    }
}

/// A simply connected flat surface, triangulated and developed into the plane.
#[derive(Debug, Clone)]
pub struct MultiDomain {
    pub mesh: TriMesh,
    pub topo: Topology,
    pub arcs: Vec<BoundaryArc>,
    /// Boundary vertices where smoothness fails, in boundary order.
    pub domain_vertices: Vec<usize>,
    /// Boundary loop with the interior on the left.
    pub boundary: Vec<usize>,
    boundary_pos: HashMap<usize, usize>,
    arc_of_vertex: Vec<Vec<usize>>,
}

/// Develop per-triangle charts into the plane and validate a multi-domain.
pub fn build_multidomain(
    charts: &[ChartTriangle],
    transitions: &[Transition],
    arcs: &[ArcSpec],
) -> Result<MultiDomain, FlatGeomError> {
    let nv = charts
        .iter()
        .flat_map(|c| c.vertices)
        .max()
        .map_or(0, |m| m + 1);
    let triangles: Vec<[usize; 3]> = charts.iter().map(|c| c.vertices).collect();
    for (t, c) in charts.iter().enumerate() {
        let a = signed_area(c.coords[0], c.coords[1], c.coords[2]);
        let scale = (c.coords[1] - c.coords[0]).norm2().max((c.coords[2] - c.coords[0]).norm2());
        if a.abs() <= 1e-14 * scale || !a.is_finite() {
            return Err(FlatGeomError::DegenerateTriangle(t));
        }
    }
    // Orientation is fixed below once developed; adjacency ignores direction here.
    let mut edge_tris: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (t, tri) in triangles.iter().enumerate() {
        for i in 0..3 {
            let (a, b) = (tri[i], tri[(i + 1) % 3]);
            edge_tris.entry((a.min(b), a.max(b))).or_default().push(t);
        }
    }
    let mut trans: HashMap<(usize, usize), Isometry2> = HashMap::new();
    for tr in transitions {
        if tr.map.orthogonality_defect() > ISOMETRY_TOL {
            return Err(FlatGeomError::InconsistentIsometry {
                triangle: tr.to,
                residual: tr.map.orthogonality_defect(),
            });
        }
        trans.insert((tr.from, tr.to), tr.map);
        trans.insert((tr.to, tr.from), tr.map.inverse());
    }
    let nt = charts.len();
    let mut dev: Vec<Option<Isometry2>> = vec![None; nt];
    let mut pos: Vec<Option<Vec2>> = vec![None; nv];
    let mut order = Vec::with_capacity(nt);
    let mut components = 0;
    for root in 0..nt {
        if dev[root].is_some() {
            continue;
        }
        components += 1;
        dev[root] = Some(Isometry2::IDENTITY);
        let mut q = VecDeque::from([root]);
        while let Some(t) = q.pop_front() {
            order.push(t);
            let tri = triangles[t];
            for i in 0..3 {
                let (a, b) = (tri[i], tri[(i + 1) % 3]);
                for &o in &edge_tris[&(a.min(b), a.max(b))] {
                    if o != t && dev[o].is_none() {
                        let m = trans.get(&(t, o)).copied().unwrap_or(Isometry2::IDENTITY);
                        dev[o] = Some(dev[t].unwrap().compose(&m));
                        q.push_back(o);
                    }
                }
            }
        }
    }
    if components != 1 {
        return Err(FlatGeomError::Disconnected(components));
    }
    let mut scale: f64 = 0.0;
    for &t in &order {
        let map = dev[t].unwrap();
        let c = &charts[t];
        for k in 0..3 {
            let p = map.apply(c.coords[k]);
            scale = scale.max(p.norm());
            let v = c.vertices[k];
            match pos[v] {
                None => pos[v] = Some(p),
                Some(q) => {
                    let r = p.dist(q);
                    if r > HOLONOMY_TOL * (1.0 + q.norm()) {
                        return Err(FlatGeomError::InconsistentIsometry { triangle: t, residual: r });
                    }
                }
            }
        }
    }
    let positions: Vec<Vec2> = pos
        .iter()
        .enumerate()
        .map(|(v, p)| p.ok_or(TopologyError::IsolatedVertex(v)))
        .collect::<Result<_, _>>()?;
    // per-triangle isometry residual of the developed image
    for (t, c) in charts.iter().enumerate() {
        for i in 0..3 {
            let j = (i + 1) % 3;
            let intrinsic = c.coords[i].dist(c.coords[j]);
            let developed = positions[c.vertices[i]].dist(positions[c.vertices[j]]);
            let r = (intrinsic - developed).abs();
            if r > ISOMETRY_TOL * (1.0 + intrinsic) {
                return Err(FlatGeomError::InconsistentIsometry { triangle: t, residual: r });
            }
        }
    }
    let mesh = TriMesh::new(positions, triangles);
    MultiDomain::from_mesh(mesh, arcs)
}

impl MultiDomain {
    /// Build from an already developed triangulation. Triangles may be given in either
    /// orientation as long as it is consistent.
    pub fn from_mesh(mut mesh: TriMesh, arcs: &[ArcSpec]) -> Result<MultiDomain, FlatGeomError> {
        let signs: Vec<f64> = (0..mesh.n_triangles()).map(|t| mesh.area(t)).collect();
        let min_area = 1e-14 * mesh.max_edge_length().powi(2);
        for (t, a) in signs.iter().enumerate() {
            if a.abs() <= min_area {
                return Err(FlatGeomError::DegenerateTriangle(t));
            }
        }
        let pos = signs.iter().filter(|a| **a > 0.0).count();
        if pos != 0 && pos != signs.len() {
            return Err(FlatGeomError::NotOrientable);
        }
        if pos == 0 {
            for t in &mut mesh.triangles {
                t.swap(1, 2);
            }
        }
        let topo = mesh.topology().map_err(|e| match e {
            TopologyError::InconsistentOrientation(..) => FlatGeomError::NotOrientable,
            other => FlatGeomError::Topology(other),
        })?;
        let ncomp = topo.n_components(mesh.n_triangles());
        if ncomp != 1 {
            return Err(FlatGeomError::Disconnected(ncomp));
        }
        let chi = topo.euler_characteristic(mesh.n_vertices(), mesh.n_triangles());
        if chi != 1 || topo.boundary_loops.len() != 1 {
            return Err(FlatGeomError::NotSimplyConnected {
                chi,
                loops: topo.boundary_loops.len(),
            });
        }
        let boundary = topo.boundary_loops[0].clone();
        let boundary_pos: HashMap<usize, usize> =
            boundary.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let nb = boundary.len();
        let next_of = |v: usize| boundary[(boundary_pos[&v] + 1) % nb];

        let specs: Vec<ArcSpec> = if arcs.is_empty() {
            let mut chain = boundary.clone();
            chain.push(boundary[0]);
            vec![ArcSpec::chain(&chain, "boundary", false)]
        } else {
            arcs.to_vec()
        };
        let mut covered: HashMap<usize, usize> = HashMap::new();
        let mut out_arcs = Vec::with_capacity(specs.len());
        for (ai, spec) in specs.iter().enumerate() {
            if spec.edges.is_empty() {
                return Err(FlatGeomError::InvalidArcs(format!("arc {ai} has no edges")));
            }
            // orient every edge along the boundary
            let mut directed = Vec::with_capacity(spec.edges.len());
            for &[a, b] in &spec.edges {
                if !boundary_pos.contains_key(&a) || !boundary_pos.contains_key(&b) {
                    return Err(FlatGeomError::InvalidArcs(format!(
                        "edge ({a},{b}) of arc {ai} is not on the boundary"
                    )));
                }
                if next_of(a) == b {
                    directed.push((a, b));
                } else if next_of(b) == a {
                    directed.push((b, a));
                } else {
                    return Err(FlatGeomError::InvalidArcs(format!(
                        "edge ({a},{b}) of arc {ai} is not a boundary edge"
                    )));
                }
                if let Some(prev) = covered.insert(boundary_pos[&directed.last().unwrap().0], ai) {
                    return Err(FlatGeomError::InvalidArcs(format!(
                        "boundary edge ({a},{b}) belongs to arcs {prev} and {ai}"
                    )));
                }
            }
            // sort edges into one chain following the boundary
            let set: HashMap<usize, usize> = directed.iter().copied().collect();
            let heads: std::collections::HashSet<usize> = directed.iter().map(|&(_, b)| b).collect();
            let start = directed
                .iter()
                .map(|&(a, _)| a)
                .find(|a| !heads.contains(a))
                .unwrap_or(directed[0].0);
            let mut chain = vec![start];
            let mut cur = start;
            while let Some(&n) = set.get(&cur) {
                chain.push(n);
                cur = n;
                if cur == start || chain.len() > directed.len() + 1 {
                    break;
                }
            }
            if chain.len() != directed.len() + 1 {
                return Err(FlatGeomError::InvalidArcs(format!("arc {ai} is not a connected chain")));
            }
            out_arcs.push(BoundaryArc {
                vertices: chain,
                tag: spec.tag.clone(),
                curved: spec.curved,
            });
        }
        if covered.len() != nb {
            return Err(FlatGeomError::InvalidArcs(format!(
                "arcs cover {} of {} boundary edges",
                covered.len(),
                nb
            )));
        }
        // order arcs along the boundary, starting from the arc containing boundary[0]'s edge
        out_arcs.sort_by_key(|a| boundary_pos[&a.vertices[0]]);
        let p = &mesh.positions;
        let turn = |a: usize, b: usize, c: usize| {
            let (e0, e1) = (p[b] - p[a], p[c] - p[b]);
            e0.cross(e1) / (e0.norm() * e1.norm())
        };
        for (ai, arc) in out_arcs.iter().enumerate() {
            let mut vs = arc.vertices.clone();
            if arc.is_closed() {
                vs.push(vs[1]);
            }
            for w in vs.windows(3) {
                if turn(w[0], w[1], w[2]) < -TURN_TOL {
                    return Err(FlatGeomError::NonConvexArc {
                        arc: ai,
                        a0: w[0],
                        a1: w[1],
                        b0: w[1],
                        b1: w[2],
                    });
                }
            }
        }
        let mut is_dv = vec![false; mesh.n_vertices()];
        for arc in &out_arcs {
            if !arc.is_closed() {
                is_dv[arc.vertices[0]] = true;
                is_dv[*arc.vertices.last().unwrap()] = true;
            }
            if !arc.curved {
                let mut vs = arc.vertices.clone();
                if arc.is_closed() {
                    vs.push(vs[1]);
                }
                for w in vs.windows(3) {
                    if turn(w[0], w[1], w[2]).abs() > TURN_TOL {
                        is_dv[w[1]] = true;
                    }
                }
            }
        }
        let domain_vertices: Vec<usize> = boundary.iter().copied().filter(|&v| is_dv[v]).collect();
        let mut arc_of_vertex = vec![Vec::new(); mesh.n_vertices()];
        for (ai, arc) in out_arcs.iter().enumerate() {
            for &v in &arc.vertices {
                if !arc_of_vertex[v].contains(&ai) {
                    arc_of_vertex[v].push(ai);
                }
            }
        }
        Ok(MultiDomain {
            mesh,
            topo,
            arcs: out_arcs,
            domain_vertices,
            boundary,
            boundary_pos,
            arc_of_vertex,
        })
    }

    /// Planar triangulation with the identity developing map.
    pub fn from_planar(
        positions: Vec<Vec2>,
        triangles: Vec<[usize; 3]>,
        arcs: &[ArcSpec],
    ) -> Result<MultiDomain, FlatGeomError> {
        MultiDomain::from_mesh(TriMesh::new(positions, triangles), arcs)
    }

    /// Axis-aligned rectangle `[x0, x0+w] × [y0, y0+h]` with arcs tagged
    /// `bottom`, `right`, `top`, `left` in boundary order.
    pub fn rectangle(origin: Vec2, w: f64, h: f64, nx: usize, ny: usize) -> Result<MultiDomain, FlatGeomError> {
        if nx == 0 || ny == 0 || w <= 0.0 || h <= 0.0 {
            return Err(FlatGeomError::InvalidParameter("rectangle needs positive size and cell counts".into()));
        }
        let mesh = crate::mesh::rectangle_grid(origin, w, h, nx, ny);
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        let bottom: Vec<usize> = (0..=nx).map(|i| id(i, 0)).collect();
        let right: Vec<usize> = (0..=ny).map(|j| id(nx, j)).collect();
        let top: Vec<usize> = (0..=nx).rev().map(|i| id(i, ny)).collect();
        let left: Vec<usize> = (0..=ny).rev().map(|j| id(0, j)).collect();
        MultiDomain::from_mesh(
            mesh,
            &[
                ArcSpec::chain(&bottom, "bottom", false),
                ArcSpec::chain(&right, "right", false),
                ArcSpec::chain(&top, "top", false),
                ArcSpec::chain(&left, "left", false),
            ],
        )
    }

    /// Square of side `side` centered at the origin with about `side / h` cells per side.
    pub fn centered_square(side: f64, h: f64) -> Result<MultiDomain, FlatGeomError> {
        let n = (side / h).round().max(1.0) as usize;
        MultiDomain::rectangle(Vec2::new(-side / 2.0, -side / 2.0), side, side, n, n)
    }

    pub fn n_vertices(&self) -> usize {
        self.mesh.n_vertices()
    }

    pub fn n_triangles(&self) -> usize {
        self.mesh.n_triangles()
    }

    pub fn position(&self, v: usize) -> Vec2 {
        self.mesh.positions[v]
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.topo.is_boundary_vertex[v]
    }

    pub fn interior_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_vertices()).filter(|&v| !self.is_boundary(v))
    }

    /// Indices of arcs that contain `v`.
    pub fn arcs_at(&self, v: usize) -> &[usize] {
        &self.arc_of_vertex[v]
    }

    pub fn arc_index(&self, tag: &str) -> Option<usize> {
        self.arcs.iter().position(|a| a.tag == tag)
    }

    /// Position of `v` along the boundary loop, if it is a boundary vertex.
    pub fn boundary_index(&self, v: usize) -> Option<usize> {
        self.boundary_pos.get(&v).copied()
    }

    /// Boundary vertices from `a` to `b` following the boundary orientation.
    pub fn boundary_chain(&self, a: usize, b: usize) -> Option<Vec<usize>> {
        let ia = self.boundary_index(a)?;
        self.boundary_index(b)?;
        let n = self.boundary.len();
        let mut out = vec![a];
        let mut i = ia;
        loop {
            i = (i + 1) % n;
            out.push(self.boundary[i]);
            if self.boundary[i] == b {
                return Some(out);
            }
            if i == ia {
                return None;
            }
        }
    }

    /// Mesh size: the longest edge.
    pub fn h(&self) -> f64 {
        self.mesh.max_edge_length()
    }

    /// Largest distance between developed vertex images.
    pub fn diameter(&self) -> f64 {
        let b = &self.boundary;
        let p = &self.mesh.positions;
        let mut d: f64 = 0.0;
        for i in 0..b.len() {
            for j in (i + 1)..b.len() {
                d = d.max(p[b[i]].dist(p[b[j]]));
            }
        }
        d
    }

    /// Vertex closest to the area centroid (developed coordinates).
    pub fn central_vertex(&self) -> usize {
        let m = &self.mesh;
        let mut c = Vec2::ZERO;
        let mut area = 0.0;
        for t in 0..m.n_triangles() {
            let a = m.area(t);
            c += m.centroid(t) * a;
            area += a;
        }
        let c = c / area;
        (0..m.n_vertices())
            .min_by(|&a, &b| {
                let da = m.positions[a].dist(c) + if self.is_boundary(a) { 1e9 } else { 0.0 };
                let db = m.positions[b].dist(c) + if self.is_boundary(b) { 1e9 } else { 0.0 };
                da.total_cmp(&db)
            })
            .unwrap_or(0)
    }

    /// Charts for re-serialization: one chart per triangle in developed coordinates.
    pub fn charts(&self) -> Vec<ChartTriangle> {
        self.mesh
            .triangles
            .iter()
            .map(|t| ChartTriangle {
                vertices: *t,
                coords: t.map(|v| self.mesh.positions[v]),
            })
            .collect()
    }

    pub fn arc_specs(&self) -> Vec<ArcSpec> {
        self.arcs
            .iter()
            .map(|a| ArcSpec::chain(&a.vertices, &a.tag, a.curved))
            .collect()
    }

    /// Apply a rigid motion to the developed coordinates.
    pub fn transformed(&self, iso: &Isometry2) -> Result<MultiDomain, FlatGeomError> {
        let positions = self.mesh.positions.iter().map(|p| iso.apply(*p)).collect();
        MultiDomain::from_mesh(TriMesh::new(positions, self.mesh.triangles.clone()), &self.arc_specs())
    }

    pub fn scaled(&self, s: f64) -> Result<MultiDomain, FlatGeomError> {
        let positions = self.mesh.positions.iter().map(|p| *p * s).collect();
        MultiDomain::from_mesh(TriMesh::new(positions, self.mesh.triangles.clone()), &self.arc_specs())
    }

    /// Locate the triangle containing a developed point (first match; ambiguous on overlaps).
    pub fn locate(&self, p: Vec2) -> Option<(usize, [f64; 3])> {
        let m = &self.mesh;
        for t in 0..m.n_triangles() {
            let [a, b, c] = m.corners(t);
            let l = crate::geom::barycentric(p, a, b, c);
            if l.iter().all(|&x| x >= -1e-10) {
                return Some((t, l));
            }
        }
        None
    }
}

/// Sector Ω_{β₁}^{β₂}(R) with polar coordinates per vertex.
#[derive(Debug, Clone)]
pub struct SectorDomain {
    pub beta1: f64,
    pub beta2: f64,
    pub radius: f64,
    pub domain: MultiDomain,
    /// `(r, θ)` per vertex; the apex has `r = 0` and `θ = (β₁+β₂)/2`.
    pub polar: Vec<(f64, f64)>,
}

impl SectorDomain {
    /// Arcs in boundary order: `L1` (ray at β₁, outward), `arc` (curved), `L2` (ray at β₂, inward).
    /// The mesh is mirror symmetric under θ ↦ β₁+β₂−θ.
    pub fn new(beta1: f64, beta2: f64, radius: f64, h: f64) -> Result<SectorDomain, FlatGeomError> {
        if !(beta1 < beta2) || radius <= 0.0 || h <= 0.0 {
            return Err(FlatGeomError::InvalidParameter("sector needs β₁ < β₂, R > 0, h > 0".into()));
        }
        let nr = (radius / h).ceil().max(2.0) as usize;
        let mut nt = ((beta2 - beta1) * radius / h).ceil().max(2.0) as usize;
        nt += nt % 2;
        let mut positions = vec![Vec2::ZERO];
        let mut polar = vec![(0.0, 0.5 * (beta1 + beta2))];
        let id = |j: usize, k: usize| 1 + (j - 1) * (nt + 1) + k;
        for j in 1..=nr {
            let r = radius * j as f64 / nr as f64;
            for k in 0..=nt {
                let th = beta1 + (beta2 - beta1) * k as f64 / nt as f64;
                positions.push(Vec2::polar(r, th));
                polar.push((r, th));
            }
        }
        let mut triangles = Vec::new();
        for k in 0..nt {
            triangles.push([0, id(1, k), id(1, k + 1)]);
        }
        for j in 1..nr {
            for k in 0..nt {
                let (a, b, c, d) = (id(j, k), id(j, k + 1), id(j + 1, k + 1), id(j + 1, k));
                if k < nt / 2 {
                    triangles.push([a, c, b]);
                    triangles.push([a, d, c]);
                } else {
                    triangles.push([a, d, b]);
                    triangles.push([b, d, c]);
                }
            }
        }
        let l1: Vec<usize> = std::iter::once(0).chain((1..=nr).map(|j| id(j, 0))).collect();
        let arc: Vec<usize> = (0..=nt).map(|k| id(nr, k)).collect();
        let l2: Vec<usize> = (1..=nr).rev().map(|j| id(j, nt)).chain(std::iter::once(0)).collect();
        let domain = MultiDomain::from_mesh(
            TriMesh::new(positions, triangles),
            &[
                ArcSpec::chain(&l1, "L1", false),
                ArcSpec::chain(&arc, "arc", true),
                ArcSpec::chain(&l2, "L2", false),
            ],
        )?;
        Ok(SectorDomain {
            beta1,
            beta2,
            radius,
            domain,
            polar,
        })
    }

    /// Vertex index of the mirror image under θ ↦ β₁+β₂−θ.
    pub fn mirror_vertex(&self, v: usize) -> usize {
        if v == 0 {
            return 0;
        }
        let nt = self.domain.arcs[1].vertices.len() - 1;
        let j = (v - 1) / (nt + 1);
        let k = (v - 1) % (nt + 1);
        1 + j * (nt + 1) + (nt - k)
    }
}

/// Ordered flux vectors v₁..v_r with corners at the partial sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxPolygon {
    pub vectors: Vec<Vec2>,
}

pub fn flux_polygon_from_vectors(vectors: &[Vec2]) -> Result<FluxPolygon, FlatGeomError> {
    if vectors.len() < 2 {
        return Err(FlatGeomError::TooFewVectors);
    }
    let sum = vectors.iter().fold(Vec2::ZERO, |a, v| a + *v);
    let total: f64 = vectors.iter().map(|v| v.norm()).sum();
    if sum.norm() > 1e-12 * total {
        return Err(FlatGeomError::UnbalancedFlux { residual: sum.norm() });
    }
    Ok(FluxPolygon {
        vectors: vectors.to_vec(),
    })
}

impl FluxPolygon {
    pub fn r(&self) -> usize {
        self.vectors.len()
    }

    /// P₁ = 0, P_{i+1} = P_i + v_i.
    pub fn corners(&self) -> Vec<Vec2> {
        let mut out = Vec::with_capacity(self.r());
        let mut p = Vec2::ZERO;
        for v in &self.vectors {
            out.push(p);
            p += *v;
        }
        out
    }

    pub fn perimeter(&self) -> f64 {
        self.vectors.iter().map(|v| v.norm()).sum()
    }

    pub fn signed_area(&self) -> f64 {
        polygon_signed_area(&self.corners())
    }

    /// Fewer than three sides, a zero-length side, or no enclosed area.
    pub fn is_degenerate(&self) -> bool {
        let p = self.perimeter();
        self.r() < 3
            || self.vectors.iter().any(|v| v.norm() <= 1e-12 * p)
            || self.signed_area().abs() <= 1e-12 * p * p
    }

    pub fn degeneracy_reason(&self) -> Option<String> {
        let p = self.perimeter();
        if self.r() < 3 {
            Some(format!("r = {} < 3", self.r()))
        } else if let Some(i) = self.vectors.iter().position(|v| v.norm() <= 1e-12 * p) {
            Some(format!("edge {i} has zero length"))
        } else if self.signed_area().abs() <= 1e-12 * p * p {
            Some("polygon encloses no area".into())
        } else {
            None
        }
    }

    pub fn scaled(&self, s: f64) -> FluxPolygon {
        FluxPolygon {
            vectors: self.vectors.iter().map(|v| *v * s).collect(),
        }
    }

    /// Regular r-gon fluxes of length `len`, the first along +x.
    pub fn regular(r: usize, len: f64) -> FluxPolygon {
        let mut vectors: Vec<Vec2> = (0..r)
            .map(|i| Vec2::polar(len, 2.0 * PI * i as f64 / r as f64))
            .collect();
        let sum = vectors.iter().fold(Vec2::ZERO, |a, v| a + *v);
        vectors[r - 1] = vectors[r - 1] - sum;
        FluxPolygon { vectors }
    }
}

/// A disk bounded by straight edges whose development traverses a flux polygon.
#[derive(Debug, Clone)]
pub struct PolygonalDisk {
    pub domain: MultiDomain,
    /// Vertex ids of P₁..P_r.
    pub corners: Vec<usize>,
    /// `chains[i]` runs along the boundary from P_i to P_{i+1}.
    pub chains: Vec<Vec<usize>>,
    pub fluxes: FluxPolygon,
    /// Rigid motion taking flux-polygon corners to developed corners.
    pub placement: Isometry2,
}

impl PolygonalDisk {
    /// Wrap a supplied (possibly immersed) triangulated disk. Each boundary chain between
    /// consecutive corners must be straight and develop onto the matching flux vector.
    pub fn from_domain(
        domain: MultiDomain,
        corners: Vec<usize>,
        fluxes: FluxPolygon,
    ) -> Result<PolygonalDisk, FlatGeomError> {
        if let Some(why) = fluxes.degeneracy_reason() {
            return Err(FlatGeomError::DegeneratePolygon(why));
        }
        if corners.len() != fluxes.r() {
            return Err(FlatGeomError::InvalidParameter(format!(
                "{} corners for {} flux vectors",
                corners.len(),
                fluxes.r()
            )));
        }
        let r = corners.len();
        let mut chains = Vec::with_capacity(r);
        for i in 0..r {
            let c = domain
                .boundary_chain(corners[i], corners[(i + 1) % r])
                .ok_or_else(|| FlatGeomError::InvalidParameter(format!("corner {i} is not on the boundary")))?;
            chains.push(c);
        }
        let total: usize = chains.iter().map(|c| c.len() - 1).sum();
        if total != domain.boundary.len() {
            return Err(FlatGeomError::InvalidParameter("corners are not in boundary order".into()));
        }
        let p = &domain.mesh.positions;
        let w0 = p[corners[1 % r]] - p[corners[0]];
        let angle = w0.y.atan2(w0.x) - fluxes.vectors[0].y.atan2(fluxes.vectors[0].x);
        let placement = Isometry2::rotation(angle, p[corners[0]]);
        let scale = fluxes.perimeter();
        let mut worst: f64 = 0.0;
        for (i, chain) in chains.iter().enumerate() {
            let w = p[corners[(i + 1) % r]] - p[corners[i]];
            worst = worst.max((w - placement.apply_linear(fluxes.vectors[i])).norm());
            let dir = w.normalized();
            for &v in chain {
                worst = worst.max((p[v] - p[corners[i]]).cross(dir).abs());
            }
        }
        if worst > 1e-9 * scale {
            return Err(FlatGeomError::DiskMismatch(worst));
        }
        let mut disk = PolygonalDisk {
            domain,
            corners,
            chains,
            fluxes,
            placement,
        };
        if disk.chains.iter().any(|c| (c.len() - 1) % 2 == 1) {
            disk = disk.refined()?;
        }
        Ok(disk)
    }

    /// Uniform 1:4 refinement; corner ids are preserved.
    fn refined(&self) -> Result<PolygonalDisk, FlatGeomError> {
        let m = subdivide_triangles(&self.domain.mesh.positions, &self.domain.mesh.triangles, 2);
        let nv0 = self.domain.n_vertices();
        // midpoints of coarse edges were appended; find them by position per chain edge
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &m.triangles {
            for &v in tri {
                if v >= nv0 {
                    mid.entry((v, v)).or_insert(v);
                }
            }
        }
        let locate_mid = |a: usize, b: usize| -> usize {
            let target = self.domain.position(a).lerp(self.domain.position(b), 0.5);
            (nv0..m.n_vertices())
                .filter(|&v| m.positions[v].dist(target) < 1e-12 * (1.0 + target.norm()))
                .find(|&v| {
                    // the midpoint must be adjacent to a boundary triangle containing a or b
                    m.triangles.iter().any(|t| t.contains(&v) && (t.contains(&a) || t.contains(&b)))
                })
                .expect("midpoint exists")
        };
        let mut specs = Vec::new();
        for (i, c) in self.chains.iter().enumerate() {
            let mut fine = vec![c[0]];
            for w in c.windows(2) {
                fine.push(locate_mid(w[0], w[1]));
                fine.push(w[1]);
            }
            specs.push(ArcSpec::chain(&fine, &format!("P{}P{}", i + 1, (i + 1) % self.chains.len() + 1), false));
        }
        let domain = MultiDomain::from_mesh(m, &specs)?;
        PolygonalDisk::from_domain(domain, self.corners.clone(), self.fluxes.clone())
    }

    pub fn r(&self) -> usize {
        self.corners.len()
    }

    /// Developed edge vector P_{i+1} − P_i.
    pub fn edge_vector(&self, i: usize) -> Vec2 {
        let p = &self.domain.mesh.positions;
        p[self.corners[(i + 1) % self.r()]] - p[self.corners[i]]
    }

    pub fn area(&self) -> f64 {
        self.domain.mesh.total_area()
    }
}

/// Triangulate the region enclosed by a simple flux polygon with mesh size about `h`.
pub fn find_embedded_disk(poly: &FluxPolygon, h: f64) -> Result<PolygonalDisk, FlatGeomError> {
    if let Some(why) = poly.degeneracy_reason() {
        return Err(FlatGeomError::DegeneratePolygon(why));
    }
    if !(h > 0.0) {
        return Err(FlatGeomError::InvalidParameter("h must be positive".into()));
    }
    let pts = poly.corners();
    let r = pts.len();
    let eps = 1e-12 * poly.perimeter();
    for i in 0..r {
        for j in (i + 1)..r {
            let adjacent = j == i + 1 || (i == 0 && j == r - 1);
            let (a, b) = (pts[i], pts[(i + 1) % r]);
            let (c, d) = (pts[j], pts[(j + 1) % r]);
            if adjacent {
                // adjacent edges may only share their common corner
                let (shared, other_i, other_j) = if j == i + 1 { (b, a, d) } else { (a, b, c) };
                let (u, v) = (other_i - shared, other_j - shared);
                if u.cross(v).abs() <= eps * u.norm().max(v.norm()) && u.dot(v) > 0.0 {
                    return Err(FlatGeomError::SelfIntersecting(i, j));
                }
            } else if segments_intersect(a, b, c, d, eps) {
                return Err(FlatGeomError::SelfIntersecting(i, j));
            }
        }
    }
    if poly.signed_area() < 0.0 {
        return Err(FlatGeomError::Clockwise);
    }
    let max_edge = poly.vectors.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut n = (max_edge / h).ceil().max(2.0) as usize;
    n += n % 2;
    let centroid = {
        let mut c = Vec2::ZERO;
        let mut a = 0.0;
        for i in 0..r {
            let (p, q) = (pts[i], pts[(i + 1) % r]);
            let w = p.cross(q);
            c += (p + q) * w;
            a += w;
        }
        c / (3.0 * a)
    };
    let star = (0..r).all(|i| signed_area(centroid, pts[i], pts[(i + 1) % r]) > 1e-3 * max_edge * max_edge);
    let (corners_pos, coarse): (Vec<Vec2>, Vec<[usize; 3]>) = if star {
        let mut c = pts.clone();
        c.push(centroid);
        (c, (0..r).map(|i| [r, i, (i + 1) % r]).collect())
    } else {
        (pts.clone(), ear_clip(&pts))
    };
    // subdivide with a per-triangle count so every polygon edge gets exactly n segments
    let mesh = subdivide_triangles(&corners_pos, &coarse, n);
    let mut specs = Vec::with_capacity(r);
    let find = |p: Vec2| {
        mesh.positions
            .iter()
            .position(|q| q.dist(p) <= 1e-12 * (1.0 + p.norm()))
            .expect("edge vertex")
    };
    for i in 0..r {
        let chain: Vec<usize> = (0..=n)
            .map(|k| find(pts[i].lerp(pts[(i + 1) % r], k as f64 / n as f64)))
            .collect();
        specs.push(ArcSpec::chain(&chain, &format!("P{}P{}", i + 1, (i + 1) % r + 1), false));
    }
    let domain = MultiDomain::from_mesh(mesh, &specs)?;
    PolygonalDisk::from_domain(domain, (0..r).collect(), poly.clone())
}

fn ear_clip(pts: &[Vec2]) -> Vec<[usize; 3]> {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    let mut tris = Vec::new();
    while idx.len() > 3 {
        let m = idx.len();
        let mut clipped = false;
        for k in 0..m {
            let (a, b, c) = (idx[(k + m - 1) % m], idx[k], idx[(k + 1) % m]);
            if signed_area(pts[a], pts[b], pts[c]) <= 0.0 {
                continue;
            }
            let inside = idx.iter().any(|&o| {
                o != a && o != b && o != c && {
                    let l = crate::geom::barycentric(pts[o], pts[a], pts[b], pts[c]);
                    l.iter().all(|&x| x >= -1e-12)
                }
            });
            if !inside {
                tris.push([a, b, c]);
                idx.remove(k);
                clipped = true;
                break;
            }
        }
        if !clipped {
            break;
        }
    }
    if idx.len() == 3 {
        tris.push([idx[0], idx[1], idx[2]]);
    }
    tris
}

/// Row abscissae for strips: uniform spacing `h` up to a power of two `x_g ≈ 10h`,
/// then geometric with ratio 2^{1/m}, so powers of two past `x_g` are hit exactly and
/// truncations at those lengths nest. The last row is `l`.
pub fn graded_rows(h: f64, l: f64) -> Vec<f64> {
    let xg = 2f64.powi((10.0 * h).log2().round() as i32).max(h);
    let m = ((2f64).ln() / (1.0 + h / xg).ln()).ceil().max(1.0) as i32;
    let mut rows = Vec::new();
    let nu = (xg / h).round() as i32;
    for j in 1..nu {
        rows.push(xg * j as f64 / nu as f64);
    }
    let mut j: i32 = 0;
    loop {
        let x = xg * 2f64.powi(j.div_euclid(m)) * 2f64.powf(j.rem_euclid(m) as f64 / m as f64);
        rows.push(x);
        if x >= l * 4.0 {
            break;
        }
        j += 1;
    }
    let mut out: Vec<f64> = Vec::new();
    for x in rows {
        let spacing = x - out.last().copied().unwrap_or(0.0);
        if x < l - 0.25 * spacing {
            out.push(x);
        }
    }
    out.push(l);
    out
}

/// Position of a strip vertex: strip index, coordinate `s` along the base edge from P_i and
/// distance `x` from the base.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripCoord {
    pub strip: usize,
    pub s: f64,
    pub x: f64,
}

/// Ω(P): a polygonal disk with half-strips glued along each edge, truncated at length `l`.
#[derive(Debug, Clone)]
pub struct OmegaP {
    pub disk: PolygonalDisk,
    pub l: f64,
    pub domain: MultiDomain,
    /// Vertex chain of L_i^+ from P_i outward.
    pub rays_plus: Vec<Vec<usize>>,
    /// Vertex chain of L_i^- from P_i outward.
    pub rays_minus: Vec<Vec<usize>>,
    /// Far cap I_{i,l} of strip i, from the end of L_i^+ to the end of L_{i+1}^-.
    pub caps: Vec<Vec<usize>>,
    pub strip_coords: Vec<Option<StripCoord>>,
}

/// Compact exhaustion domain Ω_k bounded by [P_i, Q_i^k] and [Q_i^k, P_{i+1}].
#[derive(Debug, Clone)]
pub struct ExhaustionDomain {
    pub disk: PolygonalDisk,
    pub k: f64,
    pub domain: MultiDomain,
    /// Vertex id of Q_i^k.
    pub q: Vec<usize>,
    /// Arc index of [P_i, Q_i^k] (+∞ side) and [Q_i^k, P_{i+1}] (−∞ side).
    pub plus_arcs: Vec<usize>,
    pub minus_arcs: Vec<usize>,
    pub strip_coords: Vec<Option<StripCoord>>,
}

/// Lower row to upper row triangulation by a zipper that advances on normalized position.
fn zipper(lower: &[usize], upper: &[usize], t_lo: &[f64], t_up: &[f64], out: &mut Vec<[usize; 3]>) {
    let (mut i, mut j) = (0, 0);
    while i + 1 < lower.len() || j + 1 < upper.len() {
        let adv_lower = if j + 1 >= upper.len() {
            true
        } else if i + 1 >= lower.len() {
            false
        } else {
            t_lo[i + 1] < t_up[j + 1] - 1e-12
        };
        if adv_lower {
            out.push([lower[i], lower[i + 1], upper[j]]);
            i += 1;
        } else {
            out.push([lower[i], upper[j + 1], upper[j]]);
            j += 1;
        }
    }
}

struct StripBuilder<'a> {
    positions: &'a mut Vec<Vec2>,
    coords: &'a mut Vec<Option<StripCoord>>,
    triangles: &'a mut Vec<[usize; 3]>,
}

impl StripBuilder<'_> {
    /// Add rows above a base chain. Each row is `(x, s_lo, s_hi, segments)`; a row with zero
    /// segments is a single tip vertex. Rows are triangulated symmetrically about the middle.
    fn build(
        &mut self,
        strip: usize,
        origin: Vec2,
        along: Vec2,
        normal: Vec2,
        base: &[usize],
        rows: &[(f64, f64, f64, usize)],
    ) -> Vec<Vec<usize>> {
        let width = {
            let last = self.positions[*base.last().unwrap()];
            (last - origin).dot(along)
        };
        let base_s: Vec<f64> = base.iter().map(|&v| (self.positions[v] - origin).dot(along)).collect();
        let mut all_rows = vec![(base.to_vec(), base_s)];
        for &(x, lo, hi, n) in rows {
            let mut ids = Vec::with_capacity(n + 1);
            let mut ss = Vec::with_capacity(n + 1);
            let count = if n == 0 { 1 } else { n + 1 };
            for c in 0..count {
                let s = if n == 0 { 0.5 * (lo + hi) } else { lo + (hi - lo) * c as f64 / n as f64 };
                self.positions.push(origin + along * s + normal * x);
                self.coords.push(Some(StripCoord { strip, s, x }));
                ids.push(self.positions.len() - 1);
                ss.push(s);
            }
            all_rows.push((ids, ss));
        }
        let mid = 0.5 * width;
        for w in all_rows.windows(2) {
            let (lo_ids, lo_s) = &w[0];
            let (up_ids, up_s) = &w[1];
            let split = |ids: &Vec<usize>, ss: &Vec<f64>| {
                let k = ss
                    .iter()
                    .enumerate()
                    .min_by(|a, b| (a.1 - mid).abs().total_cmp(&(b.1 - mid).abs()))
                    .unwrap()
                    .0;
                let left_ids = ids[..=k].to_vec();
                let right_ids: Vec<usize> = ids[k..].iter().rev().copied().collect();
                let left_t: Vec<f64> = (0..=k).map(|i| if k == 0 { 1.0 } else { i as f64 / k as f64 }).collect();
                let m = ids.len() - 1 - k;
                let right_t: Vec<f64> = (0..=m).map(|i| if m == 0 { 1.0 } else { i as f64 / m as f64 }).collect();
                (left_ids, left_t, right_ids, right_t)
            };
            let (ll, llt, lr, lrt) = split(lo_ids, lo_s);
            let (ul, ult, ur, urt) = split(up_ids, up_s);
            zipper(&ll, &ul, &llt, &ult, self.triangles);
            zipper(&lr, &ur, &lrt, &urt, self.triangles);
        }
        all_rows.into_iter().map(|(ids, _)| ids).collect()
    }
}

fn orient_ccw(positions: &[Vec2], triangles: &mut [[usize; 3]]) {
    for t in triangles.iter_mut() {
        if signed_area(positions[t[0]], positions[t[1]], positions[t[2]]) < 0.0 {
            t.swap(1, 2);
        }
    }
}

/// Glue half-strips to every edge of `disk` and truncate them at length `l`.
pub fn build_omega_p(disk: &PolygonalDisk, l: f64) -> Result<OmegaP, FlatGeomError> {
    if let Some(why) = disk.fluxes.degeneracy_reason() {
        return Err(FlatGeomError::DegeneratePolygon(why));
    }
    if !(l > 0.0) {
        return Err(FlatGeomError::InvalidParameter("truncation length must be positive".into()));
    }
    let r = disk.r();
    let h = disk.domain.h();
    let mut positions = disk.domain.mesh.positions.clone();
    let mut triangles = disk.domain.mesh.triangles.clone();
    let mut coords: Vec<Option<StripCoord>> = vec![None; positions.len()];
    for (i, chain) in disk.chains.iter().enumerate() {
        for &v in chain {
            let o = disk.domain.position(disk.corners[i]);
            let along = disk.edge_vector(i).normalized();
            coords[v] = Some(StripCoord { strip: i, s: (disk.domain.position(v) - o).dot(along), x: 0.0 });
        }
    }
    let xs = graded_rows(h, l);
    let mut rows_per_strip = Vec::with_capacity(r);
    for i in 0..r {
        let w = disk.edge_vector(i);
        let along = w.normalized();
        let normal = Vec2::new(along.y, -along.x);
        let n = disk.chains[i].len() - 1;
        let rows: Vec<(f64, f64, f64, usize)> = xs.iter().map(|&x| (x, 0.0, w.norm(), n)).collect();
        let origin = disk.domain.position(disk.corners[i]);
        let mut b = StripBuilder {
            positions: &mut positions,
            coords: &mut coords,
            triangles: &mut triangles,
        };
        rows_per_strip.push(b.build(i, origin, along, normal, &disk.chains[i], &rows));
    }
    let nd = disk.domain.n_triangles();
    orient_ccw(&positions, &mut triangles[nd..]);
    let mut rays_plus = Vec::with_capacity(r);
    let mut rays_minus = vec![Vec::new(); r];
    let mut caps = Vec::with_capacity(r);
    let mut specs = Vec::new();
    for (i, rows) in rows_per_strip.iter().enumerate() {
        let plus: Vec<usize> = rows.iter().map(|row| row[0]).collect();
        let minus: Vec<usize> = rows.iter().map(|row| *row.last().unwrap()).collect();
        let cap = rows.last().unwrap().clone();
        let half = cap.len() / 2;
        specs.push(ArcSpec::chain(&plus, &format!("L{}+", i + 1), false));
        specs.push(ArcSpec::chain(&cap[..=half], &format!("I{}+", i + 1), false));
        specs.push(ArcSpec::chain(&cap[half..], &format!("I{}-", i + 1), false));
        let rev: Vec<usize> = minus.iter().rev().copied().collect();
        specs.push(ArcSpec::chain(&rev, &format!("L{}-", (i + 1) % r + 1), false));
        rays_plus.push(plus);
        rays_minus[(i + 1) % r] = minus;
        caps.push(cap);
    }
    let domain = MultiDomain::from_mesh(TriMesh::new(positions, triangles), &specs)?;
    Ok(OmegaP {
        disk: disk.clone(),
        l,
        domain,
        rays_plus,
        rays_minus,
        caps,
        strip_coords: coords,
    })
}

impl OmegaP {
    pub fn r(&self) -> usize {
        self.disk.r()
    }
}

fn even_ceil(x: f64) -> usize {
    let n = x.ceil().max(2.0) as usize;
    n + n % 2
}

/// Compact exhaustion domain Ω_k: the disk plus the triangles P_i Q_i^k P_{i+1}, where
/// Q_i^k is the midpoint of the cap at distance `k` in strip i. Arc tags: `A{i}` for
/// [P_i, Q_i^k] and `B{i}` for [Q_i^k, P_{i+1}].
pub fn build_exhaustion_domain(disk: &PolygonalDisk, k: f64) -> Result<ExhaustionDomain, FlatGeomError> {
    if let Some(why) = disk.fluxes.degeneracy_reason() {
        return Err(FlatGeomError::DegeneratePolygon(why));
    }
    if !(k > 0.0) {
        return Err(FlatGeomError::InvalidParameter("exhaustion length must be positive".into()));
    }
    let r = disk.r();
    let h = disk.domain.h();
    let mut positions = disk.domain.mesh.positions.clone();
    let mut triangles = disk.domain.mesh.triangles.clone();
    let mut coords: Vec<Option<StripCoord>> = vec![None; positions.len()];
    let base_rows = graded_rows(h, k);
    let mut specs = Vec::new();
    let mut q = Vec::with_capacity(r);
    for i in 0..r {
        let w = disk.edge_vector(i);
        let len = w.norm();
        let along = w.normalized();
        let normal = Vec2::new(along.y, -along.x);
        let origin = disk.domain.position(disk.corners[i]);
        for &v in &disk.chains[i] {
            coords[v] = Some(StripCoord { strip: i, s: (disk.domain.position(v) - origin).dot(along), x: 0.0 });
        }
        let n_base = disk.chains[i].len() - 1;
        let width = |x: f64| len * (1.0 - x / k);
        // rows follow the strip grading but never coarser than the local width
        let mut xs = Vec::new();
        let mut x = 0.0;
        let mut bi = 0;
        loop {
            while bi < base_rows.len() && base_rows[bi] <= x + 1e-12 {
                bi += 1;
            }
            let graded = if bi < base_rows.len() { base_rows[bi] - x } else { h };
            let step = graded.min(width(x).max(h));
            let next = x + step;
            if next >= k - 0.5 * step.min(width(x).max(h)) || width(next) < 0.5 * h {
                break;
            }
            xs.push(next);
            x = next;
        }
        let mut rows: Vec<(f64, f64, f64, usize)> = xs
            .iter()
            .map(|&x| {
                let half = 0.5 * len * x / k;
                let n = even_ceil(width(x) / h).min(n_base.max(2));
                (x, half, len - half, n)
            })
            .collect();
        rows.push((k, 0.5 * len, 0.5 * len, 0));
        let mut b = StripBuilder {
            positions: &mut positions,
            coords: &mut coords,
            triangles: &mut triangles,
        };
        let built = b.build(i, origin, along, normal, &disk.chains[i], &rows);
        let tip = built.last().unwrap()[0];
        q.push(tip);
        let plus: Vec<usize> = built.iter().map(|row| row[0]).collect();
        let minus: Vec<usize> = built.iter().rev().map(|row| *row.last().unwrap()).collect();
        specs.push(ArcSpec::chain(&plus, &format!("A{}", i + 1), false));
        specs.push(ArcSpec::chain(&minus, &format!("B{}", i + 1), false));
    }
    let nd = disk.domain.n_triangles();
    orient_ccw(&positions, &mut triangles[nd..]);
    let domain = MultiDomain::from_mesh(TriMesh::new(positions, triangles), &specs)?;
    let plus_arcs = (0..r).map(|i| domain.arc_index(&format!("A{}", i + 1)).unwrap()).collect();
    let minus_arcs = (0..r).map(|i| domain.arc_index(&format!("B{}", i + 1)).unwrap()).collect();
    Ok(ExhaustionDomain {
        disk: disk.clone(),
        k,
        domain,
        q,
        plus_arcs,
        minus_arcs,
        strip_coords: coords,
    })
}

/// Rectangle `[0, l] × [0, a]` with arcs `bottom` (s = 0 side), `cap` (x = l), `top`
/// (s = a side) and `base` (x = 0). Strip coordinates: x along the strip, s across.
#[derive(Debug, Clone)]
pub struct StripDomain {
    pub a: f64,
    pub l: f64,
    pub domain: MultiDomain,
}

impl StripDomain {
    pub fn new(a: f64, l: f64, h: f64) -> Result<StripDomain, FlatGeomError> {
        let nx = (l / h).round().max(1.0) as usize;
        let ny = (a / h).round().max(1.0) as usize;
        let mut d = MultiDomain::rectangle(Vec2::ZERO, l, a, nx, ny)?;
        for arc in &mut d.arcs {
            arc.tag = match arc.tag.as_str() {
                "right" => "cap".into(),
                "left" => "base".into(),
                other => other.into(),
            };
        }
        Ok(StripDomain { a, l, domain: d })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square_two_triangles() -> Vec<ChartTriangle> {
        let p = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0)];
        vec![
            ChartTriangle { vertices: [0, 1, 2], coords: [p[0], p[1], p[2]] },
            ChartTriangle { vertices: [0, 2, 3], coords: [p[0], p[2], p[3]] },
        ]
    }

    #[test]
    fn unit_square_is_a_multidomain() {
        let d = build_multidomain(&unit_square_two_triangles(), &[], &[]).unwrap();
        assert_eq!(d.domain_vertices.len(), 4);
        assert_eq!(d.boundary.len(), 4);
    }

    #[test]
    fn chart_transitions_are_developed() {
        let mut charts = unit_square_two_triangles();
        // second triangle given in a rotated and shifted chart
        let g = Isometry2::rotation(1.1, Vec2::new(3.0, -1.0));
        charts[1].coords = charts[1].coords.map(|p| g.apply(p));
        let tr = Transition { from: 0, to: 1, map: g.inverse() };
        let d = build_multidomain(&charts, &[tr], &[]).unwrap();
        assert!(d.position(3).dist(Vec2::new(0.0, 1.0)) < 1e-12);
    }

    #[test]
    fn wrong_transition_is_inconsistent() {
        let mut charts = unit_square_two_triangles();
        let g = Isometry2::rotation(1.1, Vec2::new(3.0, -1.0));
        charts[1].coords = charts[1].coords.map(|p| g.apply(p));
        let err = build_multidomain(&charts, &[], &[]).unwrap_err();
        assert!(matches!(err, FlatGeomError::InconsistentIsometry { .. }));
    }

    #[test]
    fn annulus_is_not_simply_connected() {
        let n = 8;
        let mut pos = Vec::new();
        for k in 0..n {
            let th = 2.0 * PI * k as f64 / n as f64;
            pos.push(Vec2::polar(1.0, th));
            pos.push(Vec2::polar(2.0, th));
        }
        let mut tris = Vec::new();
        for k in 0..n {
            let (a, b, c, d) = (2 * k, 2 * k + 1, 2 * ((k + 1) % n) + 1, 2 * ((k + 1) % n));
            tris.push([a, b, c]);
            tris.push([a, c, d]);
        }
        let err = MultiDomain::from_planar(pos, tris, &[]).unwrap_err();
        assert!(matches!(err, FlatGeomError::NotSimplyConnected { .. }), "{err:?}");
    }

    #[test]
    fn reflex_boundary_is_non_convex() {
        // L-shaped region, one arc for the whole boundary marked curved
        let pos = vec![
            Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0), Vec2::new(2.0, 1.0),
            Vec2::new(1.0, 1.0), Vec2::new(1.0, 2.0), Vec2::new(0.0, 2.0),
        ];
        let tris = vec![[0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 4, 5]];
        let arcs = [ArcSpec::chain(&[0, 1, 2, 3, 4, 5, 0], "all", true)];
        let err = MultiDomain::from_planar(pos, tris, &arcs).unwrap_err();
        assert!(matches!(err, FlatGeomError::NonConvexArc { a1: 3, .. }), "{err:?}");
    }

    #[test]
    fn overlapping_sector_develops() {
        let s = SectorDomain::new(0.0, 3.0 * PI, 1.0, 0.1).unwrap();
        assert_eq!(s.domain.domain_vertices.len(), 3);
        let area = s.domain.mesh.total_area();
        let exact = 0.5 * 3.0 * PI;
        assert!((area - exact).abs() < 0.02 * exact);
        for v in 0..s.domain.n_vertices() {
            let m = s.mirror_vertex(v);
            let (r1, t1) = s.polar[v];
            let (r2, t2) = s.polar[m];
            assert!((r1 - r2).abs() < 1e-12 && (t1 + t2 - 3.0 * PI).abs() < 1e-9);
        }
    }

    #[test]
    fn flux_polygons() {
        let deg = flux_polygon_from_vectors(&[Vec2::new(1.0, 0.0), Vec2::new(-1.0, 0.0)]).unwrap();
        assert!(deg.is_degenerate());
        let tri = FluxPolygon::regular(3, 1.0);
        assert!(!tri.is_degenerate());
        assert!(flux_polygon_from_vectors(&tri.vectors).is_ok());
        let bad = flux_polygon_from_vectors(&[Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)]).unwrap_err();
        assert!(matches!(bad, FlatGeomError::UnbalancedFlux { .. }));
    }

    #[test]
    fn equilateral_disk_and_omega() {
        let poly = FluxPolygon::regular(3, 1.0);
        let disk = find_embedded_disk(&poly, 0.1).unwrap();
        assert!((disk.area() - 3f64.sqrt() / 4.0).abs() < 1e-12);
        for i in 0..3 {
            assert!((disk.edge_vector(i) - poly.vectors[i]).norm() < 1e-12);
        }
        let om = build_omega_p(&disk, 4.0).unwrap();
        assert_eq!(om.domain.arcs.len(), 12);
        let area = om.domain.mesh.total_area();
        assert!((area - (disk.area() + 3.0 * 4.0)).abs() < 1e-9);
    }

    #[test]
    fn graded_rows_hit_powers_of_two() {
        let rows = graded_rows(0.05, 8.0);
        for target in [1.0, 2.0, 4.0, 8.0] {
            assert!(rows.iter().any(|&x| x == target), "{target} missing");
        }
        let short = graded_rows(0.05, 4.0);
        assert_eq!(&rows[..short.len()], &short[..]);
    }

    #[test]
    fn exhaustion_domain_is_valid() {
        let disk = find_embedded_disk(&FluxPolygon::regular(3, 1.0), 0.1).unwrap();
        let ex = build_exhaustion_domain(&disk, 4.0).unwrap();
        assert_eq!(ex.domain.domain_vertices.len(), 6);
        let h = 0.5 * (4.0f64 * 4.0 + 0.25).sqrt();
        let _ = h;
        let exact = disk.area() + 3.0 * 0.5 * 1.0 * 4.0;
        assert!((ex.domain.mesh.total_area() - exact).abs() < 1e-9);
    }
}
