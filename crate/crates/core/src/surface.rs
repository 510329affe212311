//! Triangulated surfaces in space: normals, angle defects and Euler characteristics.

use crate::geom::Vec3;
use crate::mesh::{Topology, TopologyError};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Surface {
    pub positions: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
}

impl Surface {
    pub fn new(positions: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Self {
        Surface { positions, triangles }
    }

    pub fn n_vertices(&self) -> usize {
        self.positions.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn corners(&self, t: usize) -> [Vec3; 3] {
        self.triangles[t].map(|v| self.positions[v])
    }

    /// Cross product of two edges: twice the area times the unit normal.
    pub fn area_vector(&self, t: usize) -> Vec3 {
        let [a, b, c] = self.corners(t);
        (b - a).cross(c - a)
    }

    pub fn area(&self, t: usize) -> f64 {
        0.5 * self.area_vector(t).norm()
    }

    pub fn normal(&self, t: usize) -> Vec3 {
        self.area_vector(t).normalized()
    }

    pub fn centroid(&self, t: usize) -> Vec3 {
        let [a, b, c] = self.corners(t);
        (a + b + c) / 3.0
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.area(t)).sum()
    }

    pub fn topology(&self) -> Result<Topology, TopologyError> {
        Topology::build(self.n_vertices(), &self.triangles)
    }

    pub fn edge_count(&self) -> usize {
        let mut set = std::collections::HashSet::new();
        for t in &self.triangles {
            for i in 0..3 {
                let (a, b) = (t[i], t[(i + 1) % 3]);
                set.insert((a.min(b), a.max(b)));
            }
        }
        set.len()
    }

    /// V − E + F.
    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices() as i64 - self.edge_count() as i64 + self.n_triangles() as i64
    }

    /// Euler characteristic after closing every boundary loop with a cone.
    pub fn capped_euler_characteristic(&self) -> Result<i64, TopologyError> {
        let topo = self.topology()?;
        Ok(self.euler_characteristic() + topo.boundary_loops.len() as i64)
    }

    /// Interior angle of triangle `t` at local corner `i`.
    pub fn corner_angle(&self, t: usize, i: usize) -> f64 {
        let c = self.corners(t);
        (c[(i + 1) % 3] - c[i]).angle(c[(i + 2) % 3] - c[i])
    }

    /// Angle defect `2π − Σθ` at interior vertices, 0 on the boundary.
    pub fn angle_defects(&self, topo: &Topology) -> Vec<f64> {
        let mut sum = vec![0.0; self.n_vertices()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for (i, &v) in tri.iter().enumerate() {
                sum[v] += self.corner_angle(t, i);
            }
        }
        sum.iter()
            .enumerate()
            .map(|(v, s)| if topo.is_boundary_vertex[v] { 0.0 } else { 2.0 * PI - s })
            .collect()
    }

    /// Area-weighted vertex normals.
    pub fn vertex_normals(&self) -> Vec<Vec3> {
        let mut n = vec![Vec3::ZERO; self.n_vertices()];
        for (t, tri) in self.triangles.iter().enumerate() {
            let a = self.area_vector(t);
            for &v in tri {
                n[v] += a;
            }
        }
        n.into_iter().map(Vec3::normalized).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn octahedron() -> Surface {
        let p = vec![
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(-1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, -1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(0.0, 0.0, -1.0),
        ];
        let t = vec![
            [0, 2, 4],
            [2, 1, 4],
            [1, 3, 4],
            [3, 0, 4],
            [2, 0, 5],
            [1, 2, 5],
            [3, 1, 5],
            [0, 3, 5],
        ];
        Surface::new(p, t)
    }

    #[test]
    fn octahedron_is_a_sphere() {
        let s = octahedron();
        assert_eq!(s.euler_characteristic(), 2);
        let topo = s.topology().unwrap();
        let total: f64 = s.angle_defects(&topo).iter().sum();
        assert!((total - 4.0 * PI).abs() < 1e-12);
        assert!(s.normal(0).dot(s.centroid(0)) > 0.0);
    }

    #[test]
    fn capping_a_punctured_octahedron() {
        let mut s = octahedron();
        s.triangles.pop();
        assert_eq!(s.euler_characteristic(), 1);
        assert_eq!(s.capped_euler_characteristic().unwrap(), 2);
    }
}
