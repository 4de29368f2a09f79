//! Plane vectors, functionals and 2×2 matrices in the standard basis.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A point of the plane in coordinates of `e₁ = (1, 0)`, `e₂ = (0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// Euclidean unit vector at angle `theta`.
    pub fn unit(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Vec2::new(c, s)
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product; positive when `o` is counterclockwise of `self`.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn euclid(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Polar angle in `(-π, π]`.
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(a: [f64; 2]) -> Self {
        Vec2::new(a[0], a[1])
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
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

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, s: f64) -> Vec2 {
        Vec2::new(self.x / s, self.y / s)
    }
}

/// A linear functional `v ↦ a₁v₁ + a₂v₂`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Functional2 {
    pub a1: f64,
    pub a2: f64,
}

impl Functional2 {
    pub const fn new(a1: f64, a2: f64) -> Self {
        Functional2 { a1, a2 }
    }

    pub fn apply(self, v: Vec2) -> f64 {
        self.a1 * v.x + self.a2 * v.y
    }

    /// The coefficient vector, for code that treats functionals as points of the dual plane.
    pub fn as_vec(self) -> Vec2 {
        Vec2::new(self.a1, self.a2)
    }

    pub fn from_vec(v: Vec2) -> Self {
        Functional2::new(v.x, v.y)
    }

    pub fn scale(self, s: f64) -> Self {
        Functional2::new(self.a1 * s, self.a2 * s)
    }

    pub fn is_finite(self) -> bool {
        self.a1.is_finite() && self.a2.is_finite()
    }
}

impl Neg for Functional2 {
    type Output = Functional2;
    fn neg(self) -> Functional2 {
        Functional2::new(-self.a1, -self.a2)
    }
}

impl From<[f64; 2]> for Functional2 {
    fn from(a: [f64; 2]) -> Self {
        Functional2::new(a[0], a[1])
    }
}

impl From<Functional2> for [f64; 2] {
    fn from(f: Functional2) -> Self {
        [f.a1, f.a2]
    }
}

/// Row-major 2×2 matrix `[[a, b], [c, d]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[[f64; 2]; 2]", into = "[[f64; 2]; 2]")]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2::new(1.0, 0.0, 0.0, 1.0);
    pub const ZERO: Mat2 = Mat2::new(0.0, 0.0, 0.0, 0.0);

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2 { a, b, c, d }
    }

    pub const fn diag(p: f64, q: f64) -> Self {
        Mat2::new(p, 0.0, 0.0, q)
    }

    /// Matrix whose columns are `u` and `v`.
    pub fn from_cols(u: Vec2, v: Vec2) -> Self {
        Mat2::new(u.x, v.x, u.y, v.y)
    }

    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Mat2::new(c, -s, s, c)
    }

    /// Outer product `u vᵀ`.
    pub fn outer(u: Vec2, v: Vec2) -> Self {
        Mat2::new(u.x * v.x, u.x * v.y, u.y * v.x, u.y * v.y)
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        Vec2::new(self.a * v.x + self.b * v.y, self.c * v.x + self.d * v.y)
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }

    pub fn add(&self, o: &Mat2) -> Mat2 {
        Mat2::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        Mat2::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2::new(self.a, self.c, self.b, self.d)
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let det = self.det();
        let scale = self.max_abs().powi(2);
        if det == 0.0 || !det.is_finite() || det.abs() <= 1e-300 * scale.max(1e-300) {
            return None;
        }
        Some(Mat2::new(self.d / det, -self.b / det, -self.c / det, self.a / det))
    }

    pub fn max_abs(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs())
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (self.b - self.c).abs() <= tol * self.max_abs().max(1.0)
    }

    /// Eigenvalues of the symmetric part, ascending.
    pub fn sym_eigenvalues(&self) -> (f64, f64) {
        let off = 0.5 * (self.b + self.c);
        let mean = 0.5 * (self.a + self.d);
        let half_diff = 0.5 * (self.a - self.d);
        let r = half_diff.hypot(off);
        (mean - r, mean + r)
    }

    /// Principal square root of a symmetric positive-definite matrix.
    pub fn spd_sqrt(&self) -> Option<Mat2> {
        let (lo, hi) = self.sym_eigenvalues();
        if !(lo > 0.0) || !hi.is_finite() {
            return None;
        }
        // For 2×2 SPD: sqrt(M) = (M + sqrt(det) I) / sqrt(tr + 2 sqrt(det)).
        let off = 0.5 * (self.b + self.c);
        let s = (lo * hi).sqrt();
        let t = (self.a + self.d + 2.0 * s).sqrt();
        Some(Mat2::new((self.a + s) / t, off / t, off / t, (self.d + s) / t))
    }
}

impl From<[[f64; 2]; 2]> for Mat2 {
    fn from(m: [[f64; 2]; 2]) -> Self {
        Mat2::new(m[0][0], m[0][1], m[1][0], m[1][1])
    }
}

impl From<Mat2> for [[f64; 2]; 2] {
    fn from(m: Mat2) -> Self {
        [[m.a, m.b], [m.c, m.d]]
    }
}

/// Reduce an angle to `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let r = theta.rem_euclid(tau);
    if r >= tau {
        0.0
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spd_sqrt_squares_back() {
        let m = Mat2::new(4.0, 1.0, 1.0, 3.0);
        let r = m.spd_sqrt().unwrap();
        let back = r.mul(&r);
        assert!((back.a - 4.0).abs() < 1e-12);
        assert!((back.b - 1.0).abs() < 1e-12);
        assert!((back.d - 3.0).abs() < 1e-12);
        assert!(Mat2::new(1.0, 0.0, 0.0, -1.0).spd_sqrt().is_none());
    }

    #[test]
    fn inverse_of_singular_is_none() {
        assert!(Mat2::new(1.0, 2.0, 2.0, 4.0).inverse().is_none());
        let m = Mat2::new(2.0, 1.0, 0.0, 1.0);
        let p = m.mul(&m.inverse().unwrap());
        assert!((p.a - 1.0).abs() < 1e-15 && p.b.abs() < 1e-15);
    }

    #[test]
    fn serde_shapes() {
        let v: Vec2 = serde_json::from_str("[1.5, -2]").unwrap();
        assert_eq!(v, Vec2::new(1.5, -2.0));
        let m: Mat2 = serde_json::from_str("[[1,2],[3,4]]").unwrap();
        assert_eq!(serde_json::to_string(&m).unwrap(), "[[1.0,2.0],[3.0,4.0]]");
    }
}
