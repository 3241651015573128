//! Fixed-size linear algebra: f64 2-vectors and 2x2 matrices, plus lattice
//! (integer) vectors for edge normals and unimodular transforms.

use serde::{Deserialize, Serialize};
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

/// 2-vector over f64.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// Oriented area det(self, other) = self.x * other.y - self.y * other.x.
    pub fn det(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Clockwise quarter turn: (x, y) -> (y, -x). Turns xi-coefficient pairs
    /// into moment-map component pairs.
    pub fn perp(self) -> Vec2 {
        Vec2::new(self.y, -self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl SubAssign for Vec2 {
    fn sub_assign(&mut self, rhs: Vec2) {
        self.x -= rhs.x;
        self.y -= rhs.y;
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

/// Lattice 2-vector.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IVec2 {
    pub x: i64,
    pub y: i64,
}

impl IVec2 {
    pub fn new(x: i64, y: i64) -> Self {
        IVec2 { x, y }
    }

    pub fn det(self, other: IVec2) -> i64 {
        self.x * other.y - self.y * other.x
    }

    pub fn dot(self, other: IVec2) -> i64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm_sq(self) -> i64 {
        self.dot(self)
    }

    pub fn as_vec2(self) -> Vec2 {
        Vec2::new(self.x as f64, self.y as f64)
    }

    pub fn is_zero(self) -> bool {
        self.x == 0 && self.y == 0
    }

    /// Primitive lattice vector: nonzero with coprime entries.
    pub fn is_primitive(self) -> bool {
        !self.is_zero() && gcd_i64(self.x, self.y) == 1
    }
}

impl Neg for IVec2 {
    type Output = IVec2;
    fn neg(self) -> IVec2 {
        IVec2::new(-self.x, -self.y)
    }
}

impl Sub for IVec2 {
    type Output = IVec2;
    fn sub(self, rhs: IVec2) -> IVec2 {
        IVec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Add for IVec2 {
    type Output = IVec2;
    fn add(self, rhs: IVec2) -> IVec2 {
        IVec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

pub fn gcd_i64(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Extended gcd: returns (g, s, t) with a*s + b*t = g = gcd(a, b) >= 0.
pub fn egcd_i64(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, s, t) = egcd_i64(b, a % b);
        (g, t, s - (a / b) * t)
    }
}

/// Row-major 2x2 matrix over f64.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub m: [[f64; 2]; 2],
}

impl Mat2 {
    pub fn new(m00: f64, m01: f64, m10: f64, m11: f64) -> Self {
        Mat2 {
            m: [[m00, m01], [m10, m11]],
        }
    }

    pub fn identity() -> Self {
        Mat2::new(1.0, 0.0, 0.0, 1.0)
    }

    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn mul_vec(&self, v: Vec2) -> Vec2 {
        Vec2::new(
            self.m[0][0] * v.x + self.m[0][1] * v.y,
            self.m[1][0] * v.x + self.m[1][1] * v.y,
        )
    }

    pub fn mul(&self, other: &Mat2) -> Mat2 {
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = self.m[i][0] * other.m[0][j] + self.m[i][1] * other.m[1][j];
            }
        }
        Mat2 { m: out }
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2::new(self.m[0][0], self.m[1][0], self.m[0][1], self.m[1][1])
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        Some(Mat2::new(
            self.m[1][1] / d,
            -self.m[0][1] / d,
            -self.m[1][0] / d,
            self.m[0][0] / d,
        ))
    }

    /// Solve self * z = rhs.
    pub fn solve(&self, rhs: Vec2) -> Option<Vec2> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        Some(Vec2::new(
            (rhs.x * self.m[1][1] - rhs.y * self.m[0][1]) / d,
            (self.m[0][0] * rhs.y - self.m[1][0] * rhs.x) / d,
        ))
    }

    pub fn max_abs(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
    }
}

/// Row-major 2x2 lattice matrix (unimodular transforms).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IMat2 {
    pub m: [[i64; 2]; 2],
}

impl IMat2 {
    pub fn new(m00: i64, m01: i64, m10: i64, m11: i64) -> Self {
        IMat2 {
            m: [[m00, m01], [m10, m11]],
        }
    }

    pub fn identity() -> Self {
        IMat2::new(1, 0, 0, 1)
    }

    pub fn det(&self) -> i64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn mul_ivec(&self, v: IVec2) -> IVec2 {
        IVec2::new(
            self.m[0][0] * v.x + self.m[0][1] * v.y,
            self.m[1][0] * v.x + self.m[1][1] * v.y,
        )
    }

    pub fn mul_vec(&self, v: Vec2) -> Vec2 {
        self.as_mat2().mul_vec(v)
    }

    pub fn as_mat2(&self) -> Mat2 {
        Mat2::new(
            self.m[0][0] as f64,
            self.m[0][1] as f64,
            self.m[1][0] as f64,
            self.m[1][1] as f64,
        )
    }

    /// Exact inverse for det = ±1 matrices.
    pub fn inverse_unimodular(&self) -> Option<IMat2> {
        match self.det() {
            1 => Some(IMat2::new(self.m[1][1], -self.m[0][1], -self.m[1][0], self.m[0][0])),
            -1 => Some(IMat2::new(-self.m[1][1], self.m[0][1], self.m[1][0], -self.m[0][0])),
            _ => None,
        }
    }

    /// Inverse transpose as an f64 matrix (how points transform when normals
    /// transform by self).
    pub fn inv_transpose(&self) -> Option<Mat2> {
        self.inverse_unimodular()
            .map(|inv| inv.as_mat2().transpose())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perp_turns_coefficients_into_moment_components() {
        let v = Vec2::new(2.0, 3.0);
        assert_eq!(v.perp(), Vec2::new(3.0, -2.0));
        // perp is a clockwise quarter turn: applying it twice negates.
        assert_eq!(v.perp().perp(), -v);
    }

    #[test]
    fn egcd_solves_bezout() {
        for &(a, b) in &[(3i64, 5i64), (-4, 7), (12, -18), (1, 0), (0, 1), (-1, 0)] {
            let (g, s, t) = egcd_i64(a, b);
            assert_eq!(a * s + b * t, g);
            assert_eq!(g, gcd_i64(a, b));
            assert!(g >= 0);
        }
    }

    #[test]
    fn mat2_solve_matches_inverse() {
        let m = Mat2::new(2.0, 1.0, -1.0, 3.0);
        let rhs = Vec2::new(5.0, -2.0);
        let z = m.solve(rhs).unwrap();
        let back = m.mul_vec(z);
        assert!((back - rhs).norm() < 1e-14);
        let zi = m.inverse().unwrap().mul_vec(rhs);
        assert!((z - zi).norm() < 1e-14);
    }

    #[test]
    fn unimodular_inverse_roundtrips() {
        let a = IMat2::new(2, 1, 1, 1);
        assert_eq!(a.det(), 1);
        let inv = a.inverse_unimodular().unwrap();
        let v = IVec2::new(-3, 4);
        assert_eq!(inv.mul_ivec(a.mul_ivec(v)), v);
    }
}
