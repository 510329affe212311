//! Small planar geometry toolkit shared by every module.

use serde::{Deserialize, Serialize};
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl From<[f64; 2]> for Vec2 {
    fn from(a: [f64; 2]) -> Self {
        Vec2 { x: a[0], y: a[1] }
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn polar(r: f64, theta: f64) -> Self {
        Vec2::new(r * theta.cos(), r * theta.sin())
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn normalized(self) -> Vec2 {
        self / self.norm()
    }

    /// Counter-clockwise quarter turn.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn dist(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    pub fn lerp(self, o: Vec2, t: f64) -> Vec2 {
        self + (o - self) * t
    }

    pub fn rotate(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, s: f64) -> Vec2 {
        Vec2::new(self.x / s, self.y / s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Point or vector in space.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        [v.x, v.y, v.z]
    }
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Vec3 {
        let n = self.norm();
        if n > 0.0 {
            self / n
        } else {
            self
        }
    }

    pub fn dist(self, o: Vec3) -> f64 {
        (self - o).norm()
    }

    pub fn xy(self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    /// Mirror image through the plane `z = 0`.
    pub fn mirror_z(self) -> Vec3 {
        Vec3::new(self.x, self.y, -self.z)
    }

    /// Unsigned angle to `o`, robust near 0 and π.
    pub fn angle(self, o: Vec3) -> f64 {
        self.cross(o).norm().atan2(self.dot(o))
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        self.x += o.x;
        self.y += o.y;
        self.z += o.z;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Orientation-preserving or reversing plane isometry `x -> R x + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Isometry2 {
    /// Row-major 2x2 orthogonal matrix.
    pub linear: [[f64; 2]; 2],
    pub translation: Vec2,
}

impl Default for Isometry2 {
    fn default() -> Self {
        Isometry2::IDENTITY
    }
}

impl Isometry2 {
    pub const IDENTITY: Isometry2 = Isometry2 {
        linear: [[1.0, 0.0], [0.0, 1.0]],
        translation: Vec2::ZERO,
    };

    pub fn rotation(angle: f64, translation: Vec2) -> Self {
        let (s, c) = angle.sin_cos();
        Isometry2 {
            linear: [[c, -s], [s, c]],
            translation,
        }
    }

    pub fn apply(&self, p: Vec2) -> Vec2 {
        self.apply_linear(p) + self.translation
    }

    pub fn apply_linear(&self, p: Vec2) -> Vec2 {
        let m = &self.linear;
        Vec2::new(m[0][0] * p.x + m[0][1] * p.y, m[1][0] * p.x + m[1][1] * p.y)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Isometry2) -> Isometry2 {
        let a = &self.linear;
        let b = &other.linear;
        let mut m = [[0.0; 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Isometry2 {
            linear: m,
            translation: self.apply(other.translation),
        }
    }

    pub fn inverse(&self) -> Isometry2 {
        let m = &self.linear;
        let t = [[m[0][0], m[1][0]], [m[0][1], m[1][1]]];
        let inv = Isometry2 {
            linear: t,
            translation: Vec2::ZERO,
        };
        Isometry2 {
            linear: t,
            translation: -inv.apply_linear(self.translation),
        }
    }

    /// Deviation of the linear part from orthogonality (Frobenius norm of `RᵀR − I`).
    pub fn orthogonality_defect(&self) -> f64 {
        let m = &self.linear;
        let a = m[0][0] * m[0][0] + m[1][0] * m[1][0] - 1.0;
        let b = m[0][0] * m[0][1] + m[1][0] * m[1][1];
        let d = m[0][1] * m[0][1] + m[1][1] * m[1][1] - 1.0;
        (a * a + 2.0 * b * b + d * d).sqrt()
    }
}

pub fn signed_area(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    0.5 * (b - a).cross(c - a)
}

pub fn polygon_signed_area(pts: &[Vec2]) -> f64 {
    let n = pts.len();
    (0..n).map(|i| pts[i].cross(pts[(i + 1) % n])).sum::<f64>() * 0.5
}

/// Gradients of the three P1 hat functions of a non-degenerate triangle.
pub fn hat_gradients(a: Vec2, b: Vec2, c: Vec2) -> [Vec2; 3] {
    let two_area = (b - a).cross(c - a);
    [
        (c - b).perp() / two_area,
        (a - c).perp() / two_area,
        (b - a).perp() / two_area,
    ]
}

/// Barycentric coordinates of `p` in triangle `abc`.
pub fn barycentric(p: Vec2, a: Vec2, b: Vec2, c: Vec2) -> [f64; 3] {
    let d = (b - a).cross(c - a);
    let l1 = (p - a).cross(c - a) / d;
    let l2 = (b - a).cross(p - a) / d;
    [1.0 - l1 - l2, l1, l2]
}

/// Proper or improper intersection test of closed segments `ab` and `cd`.
pub fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2, eps: f64) -> bool {
    let d1 = (b - a).cross(c - a);
    let d2 = (b - a).cross(d - a);
    let d3 = (d - c).cross(a - c);
    let d4 = (d - c).cross(b - c);
    let scale_ab = (b - a).norm().max(1e-300);
    let scale_cd = (d - c).norm().max(1e-300);
    let s1 = sgn(d1 / scale_ab, eps);
    let s2 = sgn(d2 / scale_ab, eps);
    let s3 = sgn(d3 / scale_cd, eps);
    let s4 = sgn(d4 / scale_cd, eps);
    if s1 * s2 < 0 && s3 * s4 < 0 {
        return true;
    }
    let on = |p: Vec2, q: Vec2, r: Vec2, s: i32| {
        s == 0 && r.x >= p.x.min(q.x) - eps && r.x <= p.x.max(q.x) + eps
            && r.y >= p.y.min(q.y) - eps && r.y <= p.y.max(q.y) + eps
    };
    on(a, b, c, s1) || on(a, b, d, s2) || on(c, d, a, s3) || on(c, d, b, s4)
}

fn sgn(v: f64, eps: f64) -> i32 {
    if v > eps {
        1
    } else if v < -eps {
        -1
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hat_gradients_reproduce_linear_functions() {
        let (a, b, c) = (Vec2::new(0.1, 0.2), Vec2::new(1.3, -0.4), Vec2::new(0.5, 0.9));
        let g = hat_gradients(a, b, c);
        let f = |p: Vec2| 2.0 * p.x - 3.0 * p.y + 1.0;
        let grad = g[0] * f(a) + g[1] * f(b) + g[2] * f(c);
        assert!((grad.x - 2.0).abs() < 1e-12 && (grad.y + 3.0).abs() < 1e-12);
        let sum = g[0] + g[1] + g[2];
        assert!(sum.norm() < 1e-12);
    }

    #[test]
    fn isometry_compose_inverse() {
        let t = Isometry2::rotation(0.7, Vec2::new(1.0, -2.0));
        let id = t.compose(&t.inverse());
        let p = Vec2::new(3.0, 4.0);
        assert!(id.apply(p).dist(p) < 1e-12);
        assert!(t.orthogonality_defect() < 1e-15);
    }

    #[test]
    fn barycentric_of_vertices() {
        let (a, b, c) = (Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0), Vec2::new(0.0, 1.0));
        let l = barycentric(b, a, b, c);
        assert!((l[1] - 1.0).abs() < 1e-15 && l[0].abs() < 1e-15);
    }

    #[test]
    fn crossing_segments() {
        let o = Vec2::ZERO;
        assert!(segments_intersect(o, Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0), Vec2::new(1.0, 0.0), 1e-12));
        assert!(!segments_intersect(o, Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0), Vec2::new(1.0, 1.0), 1e-12));
        assert!(segments_intersect(o, Vec2::new(1.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0), 1e-12));
    }
}
