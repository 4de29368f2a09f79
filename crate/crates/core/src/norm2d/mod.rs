//! Norms on the plane and the unit-sphere curve γ.
//!
//! Points of the unit sphere are parametrized by polar angle:
//! `γ(θ) = u_θ / ‖u_θ‖` with `u_θ = (cos θ, sin θ)`, so the parameter of a
//! sphere point is exactly its Euclidean polar angle.

mod polygon;
mod vec;

use std::borrow::Cow;
use std::f64::consts::{PI, TAU};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use polygon::Polygon;
pub use vec::{wrap_angle, Functional2, Mat2, Vec2};

use crate::error::{Error, Result};

/// Exponent of an ℓp norm. `p = ∞` is kept symbolic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    /// The conjugate exponent `q` with `1/p + 1/q = 1`.
    pub fn conjugate(self) -> Exponent {
        match self {
            Exponent::Infinity => Exponent::Finite(1.0),
            Exponent::Finite(p) if p == 1.0 => Exponent::Infinity,
            Exponent::Finite(p) => Exponent::Finite(p / (p - 1.0)),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Infinity => write!(f, "inf"),
            Exponent::Finite(p) => write!(f, "{p}"),
        }
    }
}

/// Ellipse norm `‖v‖ = sqrt(vᵀ M v)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ellipse {
    m: Mat2,
    m_inv: Mat2,
}

impl Ellipse {
    pub fn matrix(&self) -> Mat2 {
        self.m
    }

    pub fn inverse_matrix(&self) -> Mat2 {
        self.m_inv
    }
}

fn quad(m: &Mat2, v: Vec2) -> f64 {
    m.a * v.x * v.x + (m.b + m.c) * v.x * v.y + m.d * v.y * v.y
}

/// A symmetric norm on ℝ².
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NormSpec", into = "NormSpec")]
pub enum Norm2 {
    Lp(Exponent),
    Polygon(Polygon),
    Ellipse(Ellipse),
}

impl Norm2 {
    pub fn lp(p: f64) -> Result<Norm2> {
        if p.is_infinite() && p > 0.0 {
            return Ok(Norm2::Lp(Exponent::Infinity));
        }
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::norm(format!("lp exponent must satisfy 1 <= p <= inf, got {p}")));
        }
        Ok(Norm2::Lp(Exponent::Finite(p)))
    }

    pub fn l1() -> Norm2 {
        Norm2::Lp(Exponent::Finite(1.0))
    }

    pub fn l2() -> Norm2 {
        Norm2::Lp(Exponent::Finite(2.0))
    }

    pub fn linf() -> Norm2 {
        Norm2::Lp(Exponent::Infinity)
    }

    pub fn polygon(vertices: &[Vec2]) -> Result<Norm2> {
        Polygon::new(vertices).map(Norm2::Polygon)
    }

    /// Regular `n`-gon norm with circumradius `r`, first vertex at angle `phase`.
    pub fn regular_polygon(n: usize, r: f64, phase: f64) -> Result<Norm2> {
        Polygon::regular(n, r, phase).map(Norm2::Polygon)
    }

    pub fn ellipse(m: Mat2) -> Result<Norm2> {
        if !m.is_finite() || !m.is_symmetric(1e-12) {
            return Err(Error::norm("ellipse matrix must be finite and symmetric"));
        }
        let m = Mat2::new(m.a, 0.5 * (m.b + m.c), 0.5 * (m.b + m.c), m.d);
        let (lo, _) = m.sym_eigenvalues();
        if !(lo > 0.0) {
            return Err(Error::norm("ellipse matrix must be positive definite"));
        }
        let m_inv = m
            .inverse()
            .ok_or_else(|| Error::norm("ellipse matrix is singular"))?;
        Ok(Norm2::Ellipse(Ellipse { m, m_inv }))
    }

    /// A random convex centrally symmetric polygon with `2 * half` vertices:
    /// a regular polygon with radii jittered by up to `jitter` (relative) and
    /// angles by up to `jitter` of the angular step. Redraws until convex.
    pub fn random_polygon<R: Rng + ?Sized>(rng: &mut R, half: usize, jitter: f64) -> Norm2 {
        let n = 2 * half;
        let step = TAU / n as f64;
        loop {
            let phase = rng.gen_range(0.0..step);
            let half_verts: Vec<Vec2> = (0..half)
                .map(|k| {
                    let t = phase + step * (k as f64 + rng.gen_range(-jitter..jitter));
                    Vec2::unit(t) * (1.0 + rng.gen_range(-jitter..jitter))
                })
                .collect();
            let full: Vec<Vec2> = half_verts
                .iter()
                .copied()
                .chain(half_verts.iter().map(|v| -*v))
                .collect();
            if let Ok(p) = Polygon::new(&full) {
                if p.len() == n {
                    return Norm2::Polygon(p);
                }
            }
        }
    }

    /// A random ellipse norm with eigenvalues in `[lo, hi]` and random axes.
    pub fn random_ellipse<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> Norm2 {
        let r = Mat2::rotation(rng.gen_range(0.0..PI));
        let d = Mat2::diag(rng.gen_range(lo..hi), rng.gen_range(lo..hi));
        let m = r.mul(&d).mul(&r.transpose());
        Norm2::ellipse(Mat2::new(m.a, 0.5 * (m.b + m.c), 0.5 * (m.b + m.c), m.d)).unwrap()
    }

    /// `‖v‖`. Non-finite input is rejected by [`Norm2::try_eval`]; this variant propagates NaN.
    pub fn eval(&self, v: Vec2) -> f64 {
        match self {
            Norm2::Lp(Exponent::Infinity) => v.x.abs().max(v.y.abs()),
            Norm2::Lp(Exponent::Finite(p)) => lp_eval(*p, v),
            Norm2::Polygon(poly) => poly.gauge(v),
            Norm2::Ellipse(e) => quad(&e.m, v).max(0.0).sqrt(),
        }
    }

    pub fn try_eval(&self, v: Vec2) -> Result<f64> {
        if !v.is_finite() {
            return Err(Error::input("vector has non-finite coordinates"));
        }
        Ok(self.eval(v))
    }

    /// Dual norm of a functional, `sup{f(v) : ‖v‖ ≤ 1}`.
    pub fn dual_eval(&self, f: Functional2) -> f64 {
        let v = f.as_vec();
        match self {
            Norm2::Lp(e) => Norm2::Lp(e.conjugate()).eval(v),
            Norm2::Polygon(poly) => poly.support(f),
            Norm2::Ellipse(e) => quad(&e.m_inv, v).max(0.0).sqrt(),
        }
    }

    /// The dual norm, acting on functional coefficient vectors.
    pub fn dual(&self) -> Norm2 {
        match self {
            Norm2::Lp(e) => Norm2::Lp(e.conjugate()),
            Norm2::Polygon(poly) => Norm2::Polygon(poly.polar()),
            Norm2::Ellipse(e) => Norm2::Ellipse(Ellipse {
                m: e.m_inv,
                m_inv: e.m,
            }),
        }
    }

    /// `γ(θ)`.
    pub fn sphere_point(&self, theta: f64) -> Vec2 {
        let u = Vec2::unit(theta);
        u / self.eval(u)
    }

    /// `r(θ) = ‖γ(θ)‖₂`.
    pub fn radial(&self, theta: f64) -> f64 {
        1.0 / self.eval(Vec2::unit(theta))
    }

    /// Polygonal view of ℓ1, ℓ∞ and polygon norms.
    pub fn as_polygon(&self) -> Option<Cow<'_, Polygon>> {
        match self {
            Norm2::Polygon(p) => Some(Cow::Borrowed(p)),
            Norm2::Lp(Exponent::Infinity) => Some(Cow::Owned(
                Polygon::new(&[Vec2::new(1.0, 1.0), Vec2::new(-1.0, 1.0)]).expect("square"),
            )),
            Norm2::Lp(Exponent::Finite(p)) if *p == 1.0 => Some(Cow::Owned(
                Polygon::new(&[Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)]).expect("diamond"),
            )),
            _ => None,
        }
    }

    /// True when the representation is Euclidean up to a linear change of coordinates.
    pub fn is_ellipse(&self) -> bool {
        matches!(self, Norm2::Ellipse(_) | Norm2::Lp(Exponent::Finite(2.0)))
    }

    fn check_on_sphere(&self, x: Vec2) -> Result<()> {
        let n = self.try_eval(x)?;
        if (n - 1.0).abs() > 1e-9 {
            return Err(Error::input(format!("point is not on the unit sphere (norm {n})")));
        }
        Ok(())
    }

    /// A norming functional `x*` with `‖x*‖ = 1`, `x*(x) = 1`. At polygon corners
    /// the normalized average of the two adjacent edge functionals is returned.
    pub fn supporting_functional(&self, x: Vec2) -> Result<Functional2> {
        self.supporting_functionals(x).map(|v| v[0])
    }

    /// All extreme norming functionals of `x`, preceded by the tie-break choice.
    /// Strictly smooth points yield a single functional.
    pub fn supporting_functionals(&self, x: Vec2) -> Result<Vec<Functional2>> {
        self.check_on_sphere(x)?;
        if let Some(poly) = self.as_polygon() {
            return Ok(poly.supporting(x));
        }
        let f = match self {
            Norm2::Lp(Exponent::Finite(p)) => {
                let g = |c: f64| c.signum() * c.abs().powf(p - 1.0);
                Functional2::new(g(x.x), g(x.y))
            }
            Norm2::Ellipse(e) => Functional2::from_vec(e.m.apply(x)),
            _ => unreachable!("polygonal norms handled above"),
        };
        Ok(vec![f.scale(1.0 / self.dual_eval(f))])
    }

    /// Polar-angle interval `[lo, hi]` (`lo ∈ [0, 2π)`) of the face `F(f)`.
    pub fn face_angles(&self, f: Functional2) -> Result<(f64, f64)> {
        if !f.is_finite() {
            return Err(Error::input("functional has non-finite coefficients"));
        }
        let d = self.dual_eval(f);
        if (d - 1.0).abs() > 1e-9 {
            return Err(Error::input(format!("functional is not on the dual sphere (norm {d})")));
        }
        if let Some(poly) = self.as_polygon() {
            return Ok(poly.face_angles(f));
        }
        let x = match self {
            Norm2::Lp(Exponent::Finite(p)) => {
                let q = p / (p - 1.0);
                let g = |c: f64| c.signum() * c.abs().powf(q - 1.0);
                Vec2::new(g(f.a1), g(f.a2))
            }
            Norm2::Ellipse(e) => e.m_inv.apply(f.as_vec()),
            _ => unreachable!("polygonal norms handled above"),
        };
        let t = wrap_angle(x.angle());
        Ok((t, t))
    }

    /// Short label used in reports.
    pub fn label(&self) -> String {
        match self {
            Norm2::Lp(Exponent::Infinity) => "linf".into(),
            Norm2::Lp(Exponent::Finite(p)) => format!("l{p}"),
            Norm2::Polygon(p) => format!("polygon{}", p.len()),
            Norm2::Ellipse(_) => "ellipse".into(),
        }
    }
}

impl fmt::Display for Norm2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

fn lp_eval(p: f64, v: Vec2) -> f64 {
    let (x, y) = (v.x.abs(), v.y.abs());
    if p == 1.0 {
        return x + y;
    }
    if p == 2.0 {
        return x.hypot(y);
    }
    let m = x.max(y);
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    let (a, b) = (x / m, y / m);
    m * (a.powf(p) + b.powf(p)).powf(1.0 / p)
}

/// The unit-sphere curve of a norm, optionally started at an offset (half arcs).
#[derive(Clone, Copy, Debug)]
pub struct SphereCurve<'a> {
    pub norm: &'a Norm2,
    pub offset: f64,
}

impl<'a> SphereCurve<'a> {
    pub fn new(norm: &'a Norm2) -> Self {
        SphereCurve { norm, offset: 0.0 }
    }

    /// The half arc starting at `x` (any nonzero vector on the ray of the start point).
    pub fn starting_at(norm: &'a Norm2, x: Vec2) -> Self {
        SphereCurve {
            norm,
            offset: wrap_angle(x.angle()),
        }
    }

    pub fn point(&self, theta: f64) -> Vec2 {
        self.norm.sphere_point(theta + self.offset)
    }
}

/// JSON form of a plane norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum NormSpec {
    Lp { p: PSpec },
    Polygon { vertices: Vec<[f64; 2]> },
    Ellipse { matrix: [[f64; 2]; 2] },
}

/// `p` as a number or the string `"inf"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PSpec {
    Number(f64),
    Text(String),
}

impl TryFrom<NormSpec> for Norm2 {
    type Error = Error;

    fn try_from(spec: NormSpec) -> Result<Norm2> {
        match spec {
            NormSpec::Lp { p: PSpec::Number(p) } => Norm2::lp(p),
            NormSpec::Lp { p: PSpec::Text(s) } => match s.to_ascii_lowercase().as_str() {
                "inf" | "infinity" => Ok(Norm2::linf()),
                _ => Err(Error::norm(format!("unrecognized exponent {s:?}"))),
            },
            NormSpec::Polygon { vertices } => {
                let v: Vec<Vec2> = vertices.into_iter().map(Vec2::from).collect();
                Norm2::polygon(&v)
            }
            NormSpec::Ellipse { matrix } => Norm2::ellipse(Mat2::from(matrix)),
        }
    }
}

impl From<Norm2> for NormSpec {
    fn from(n: Norm2) -> NormSpec {
        match n {
            Norm2::Lp(Exponent::Infinity) => NormSpec::Lp {
                p: PSpec::Text("inf".into()),
            },
            Norm2::Lp(Exponent::Finite(p)) => NormSpec::Lp { p: PSpec::Number(p) },
            Norm2::Polygon(poly) => NormSpec::Polygon {
                vertices: poly.vertices().iter().map(|&v| v.into()).collect(),
            },
            Norm2::Ellipse(e) => NormSpec::Ellipse {
                matrix: e.m.into(),
            },
        }
    }
}
