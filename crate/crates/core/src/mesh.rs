//! Triangle meshes with developed vertex positions and their combinatorial topology.

use crate::geom::{signed_area, Vec2};
use std::collections::{HashMap, VecDeque};

/// A triangulation whose vertex positions are images under the developing map.
/// Triangles are counter-clockwise in developed coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    pub positions: Vec<Vec2>,
    pub triangles: Vec<[usize; 3]>,
}

#[derive(Debug, Clone)]
pub struct Topology {
    /// Undirected edges stored with `e[0] < e[1]`.
    pub edges: Vec<[usize; 2]>,
    pub edge_index: HashMap<(usize, usize), usize>,
    /// Triangles on each side of an edge; `[t, usize::MAX]` on the boundary.
    pub edge_tris: Vec<[usize; 2]>,
    /// `tri_edges[t][i]` is the edge joining local vertices `i` and `i+1`.
    pub tri_edges: Vec<[usize; 3]>,
    /// Neighbor across local edge `i`, if any.
    pub tri_neighbors: Vec<[Option<usize>; 3]>,
    pub vertex_tris: Vec<Vec<usize>>,
    pub vertex_neighbors: Vec<Vec<usize>>,
    pub is_boundary_vertex: Vec<bool>,
    /// Boundary loops as vertex cycles, oriented with the interior on the left.
    pub boundary_loops: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TopologyError {
    #[error("edge ({0}, {1}) is shared by more than two triangles")]
    NonManifoldEdge(usize, usize),
    #[error("edge ({0}, {1}) is traversed twice in the same direction (inconsistent orientation)")]
    InconsistentOrientation(usize, usize),
    #[error("vertex {0} is used by no triangle")]
    IsolatedVertex(usize),
    #[error("triangle {0} references a vertex out of range")]
    BadIndex(usize),
    #[error("boundary is not a disjoint union of simple loops at vertex {0}")]
    NonManifoldVertex(usize),
}

pub const NONE: usize = usize::MAX;

fn key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl TriMesh {
    pub fn new(positions: Vec<Vec2>, triangles: Vec<[usize; 3]>) -> Self {
        TriMesh {
            positions,
            triangles,
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.positions.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn corners(&self, t: usize) -> [Vec2; 3] {
        self.triangles[t].map(|v| self.positions[v])
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.corners(t);
        signed_area(a, b, c)
    }

    pub fn centroid(&self, t: usize) -> Vec2 {
        let [a, b, c] = self.corners(t);
        (a + b + c) / 3.0
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.area(t)).sum()
    }

    pub fn max_edge_length(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|t| (0..3).map(move |i| (t[i], t[(i + 1) % 3])))
            .map(|(a, b)| self.positions[a].dist(self.positions[b]))
            .fold(0.0, f64::max)
    }

    pub fn min_edge_length(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|t| (0..3).map(move |i| (t[i], t[(i + 1) % 3])))
            .map(|(a, b)| self.positions[a].dist(self.positions[b]))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn topology(&self) -> Result<Topology, TopologyError> {
        Topology::build(self.n_vertices(), &self.triangles)
    }

    /// Uniformly refine every triangle into `n²` congruent pieces.
    pub fn subdivide(&self, n: usize) -> TriMesh {
        subdivide_triangles(&self.positions, &self.triangles, n)
    }
}

impl Topology {
    /// Combinatorial structure of `triangles` over `nv` vertices.
    pub fn build(nv: usize, triangles: &[[usize; 3]]) -> Result<Topology, TopologyError> {
        let mut edges = Vec::new();
        let mut edge_index = HashMap::new();
        let mut edge_tris: Vec<[usize; 2]> = Vec::new();
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        let mut tri_edges = Vec::with_capacity(triangles.len());
        let mut vertex_tris = vec![Vec::new(); nv];
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= nv) || tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(TopologyError::BadIndex(t));
            }
            let mut te = [0; 3];
            for i in 0..3 {
                let (a, b) = (tri[i], tri[(i + 1) % 3]);
                if directed.insert((a, b), t).is_some() {
                    return Err(TopologyError::InconsistentOrientation(a, b));
                }
                let k = key(a, b);
                let e = *edge_index.entry(k).or_insert_with(|| {
                    edges.push([k.0, k.1]);
                    edge_tris.push([NONE, NONE]);
                    edges.len() - 1
                });
                let slot = &mut edge_tris[e];
                if slot[0] == NONE {
                    slot[0] = t;
                } else if slot[1] == NONE {
                    slot[1] = t;
                } else {
                    return Err(TopologyError::NonManifoldEdge(k.0, k.1));
                }
                te[i] = e;
                vertex_tris[tri[i]].push(t);
            }
            tri_edges.push(te);
        }
        if let Some(v) = vertex_tris.iter().position(|l| l.is_empty()) {
            return Err(TopologyError::IsolatedVertex(v));
        }
        let tri_neighbors = tri_edges
            .iter()
            .enumerate()
            .map(|(t, te)| {
                te.map(|e| {
                    let [a, b] = edge_tris[e];
                    let o = if a == t { b } else { a };
                    (o != NONE).then_some(o)
                })
            })
            .collect();
        let mut vertex_neighbors = vec![Vec::new(); nv];
        for e in &edges {
            vertex_neighbors[e[0]].push(e[1]);
            vertex_neighbors[e[1]].push(e[0]);
        }
        let mut is_boundary_vertex = vec![false; nv];
        let mut next: HashMap<usize, usize> = HashMap::new();
        for (e, et) in edge_tris.iter().enumerate() {
            if et[1] == NONE {
                let [a, b] = edges[e];
                let (from, to) = if directed.contains_key(&(a, b)) { (a, b) } else { (b, a) };
                is_boundary_vertex[a] = true;
                is_boundary_vertex[b] = true;
                if next.insert(from, to).is_some() {
                    return Err(TopologyError::NonManifoldVertex(from));
                }
            }
        }
        let mut boundary_loops = Vec::new();
        let mut starts: Vec<usize> = next.keys().copied().collect();
        starts.sort_unstable();
        let mut seen = vec![false; nv];
        for s in starts {
            if seen[s] {
                continue;
            }
            let mut lp = vec![s];
            seen[s] = true;
            let mut cur = next[&s];
            while cur != s {
                if seen[cur] {
                    return Err(TopologyError::NonManifoldVertex(cur));
                }
                seen[cur] = true;
                lp.push(cur);
                cur = *next.get(&cur).ok_or(TopologyError::NonManifoldVertex(cur))?;
            }
            boundary_loops.push(lp);
        }
        Ok(Topology {
            edges,
            edge_index,
            edge_tris,
            tri_edges,
            tri_neighbors,
            vertex_tris,
            vertex_neighbors,
            is_boundary_vertex,
            boundary_loops,
        })
    }

    pub fn edge(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_index.get(&key(a, b)).copied()
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edge_tris[e][1] == NONE
    }

    pub fn euler_characteristic(&self, n_vertices: usize, n_triangles: usize) -> i64 {
        n_vertices as i64 - self.edges.len() as i64 + n_triangles as i64
    }

    pub fn n_components(&self, n_triangles: usize) -> usize {
        let mut comp = vec![NONE; n_triangles];
        let mut count = 0;
        for s in 0..n_triangles {
            if comp[s] != NONE {
                continue;
            }
            comp[s] = count;
            let mut q = VecDeque::from([s]);
            while let Some(t) = q.pop_front() {
                for o in self.tri_neighbors[t].iter().flatten() {
                    if comp[*o] == NONE {
                        comp[*o] = count;
                        q.push_back(*o);
                    }
                }
            }
            count += 1;
        }
        count
    }

    /// Graph distance from a vertex set, over mesh edges.
    pub fn hop_distance(&self, sources: impl IntoIterator<Item = usize>) -> Vec<usize> {
        let mut d = vec![NONE; self.vertex_neighbors.len()];
        let mut q = VecDeque::new();
        for s in sources {
            if d[s] == NONE {
                d[s] = 0;
                q.push_back(s);
            }
        }
        while let Some(v) = q.pop_front() {
            for &w in &self.vertex_neighbors[v] {
                if d[w] == NONE {
                    d[w] = d[v] + 1;
                    q.push_back(w);
                }
            }
        }
        d
    }
}

/// Subdivide each coarse triangle into `n²` pieces; vertices on shared coarse edges are merged.
pub fn subdivide_triangles(corners: &[Vec2], coarse: &[[usize; 3]], n: usize) -> TriMesh {
    assert!(n >= 1);
    let mut positions: Vec<Vec2> = corners.to_vec();
    let mut edge_pts: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    let mut triangles = Vec::with_capacity(coarse.len() * n * n);
    for tri in coarse {
        let [a, b, c] = *tri;
        let (pa, pb, pc) = (corners[a], corners[b], corners[c]);
        // grid index (i, j): point a + i/n (b-a) + j/n (c-a), i + j <= n
        let mut idx = vec![vec![NONE; n + 1]; n + 1];
        let mut edge_vertex = |u: usize, w: usize, k: usize, positions: &mut Vec<Vec2>| -> usize {
            // k-th point (0..=n) from u to w
            if k == 0 {
                return u;
            }
            if k == n {
                return w;
            }
            let (lo, hi) = key(u, w);
            let list = edge_pts.entry((lo, hi)).or_insert_with(|| {
                let (plo, phi) = (corners[lo], corners[hi]);
                (1..n)
                    .map(|m| {
                        positions.push(plo.lerp(phi, m as f64 / n as f64));
                        positions.len() - 1
                    })
                    .collect()
            });
            if u == lo {
                list[k - 1]
            } else {
                list[n - k - 1]
            }
        };
        for i in 0..=n {
            for j in 0..=(n - i) {
                let v = if j == 0 {
                    edge_vertex(a, b, i, &mut positions)
                } else if i == 0 {
                    edge_vertex(a, c, j, &mut positions)
                } else if i + j == n {
                    edge_vertex(b, c, j, &mut positions)
                } else {
                    positions.push(pa + (pb - pa) * (i as f64 / n as f64) + (pc - pa) * (j as f64 / n as f64));
                    positions.len() - 1
                };
                idx[i][j] = v;
            }
        }
        for i in 0..n {
            for j in 0..(n - i) {
                triangles.push([idx[i][j], idx[i + 1][j], idx[i][j + 1]]);
                if i + j + 1 < n {
                    triangles.push([idx[i + 1][j], idx[i + 1][j + 1], idx[i][j + 1]]);
                }
            }
        }
    }
    TriMesh::new(positions, triangles)
}

/// Structured grid on `[x0, x0+w] × [y0, y0+h]` with `nx × ny` cells, each split along
/// the same diagonal direction.
pub fn rectangle_grid(origin: Vec2, w: f64, h: f64, nx: usize, ny: usize) -> TriMesh {
    let mut positions = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            positions.push(Vec2::new(
                origin.x + w * i as f64 / nx as f64,
                origin.y + h * j as f64 / ny as f64,
            ));
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    TriMesh::new(positions, triangles)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_topology_is_a_disk() {
        let m = rectangle_grid(Vec2::ZERO, 2.0, 1.0, 4, 3);
        let t = m.topology().unwrap();
        assert_eq!(t.euler_characteristic(m.n_vertices(), m.n_triangles()), 1);
        assert_eq!(t.boundary_loops.len(), 1);
        assert_eq!(t.boundary_loops[0].len(), 14);
        assert!((m.total_area() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn subdivision_merges_shared_edges() {
        let corners = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0)];
        let m = subdivide_triangles(&corners, &[[0, 1, 2], [0, 2, 3]], 4);
        assert_eq!(m.n_vertices(), 25);
        assert_eq!(m.n_triangles(), 32);
        let t = m.topology().unwrap();
        assert_eq!(t.euler_characteristic(m.n_vertices(), m.n_triangles()), 1);
        assert!(m.triangles.iter().enumerate().all(|(i, _)| m.area(i) > 0.0));
    }
}
