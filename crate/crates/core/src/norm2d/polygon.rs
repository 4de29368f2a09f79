//! Centrally symmetric polygonal unit balls.

use std::f64::consts::{PI, TAU};

use super::vec::{wrap_angle, Functional2, Vec2};
use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-9;
const COLLINEAR_TOL: f64 = 1e-12;

/// A centrally symmetric convex polygon with the origin in its interior,
/// stored counterclockwise starting from the vertex of least polar angle in `[0, 2π)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon {
    vertices: Vec<Vec2>,
    /// Polar angles of `vertices`, strictly increasing, `angles[0] ∈ [0, 2π)`.
    angles: Vec<f64>,
    /// `facets[k]` is the functional equal to 1 on the edge `vertices[k] → vertices[k+1]`.
    facets: Vec<Functional2>,
}

impl Polygon {
    /// Builds a polygon from a full or half vertex list.
    ///
    /// A list whose second half is not the negation of the first is treated as
    /// a half list, provided it spans less than π. Clockwise input is reversed;
    /// collinear vertices are merged.
    pub fn new(input: &[Vec2]) -> Result<Polygon> {
        if input.len() < 2 {
            return Err(Error::norm("polygon needs at least 2 vertices"));
        }
        if input.iter().any(|v| !v.is_finite()) {
            return Err(Error::norm("polygon vertex is not finite"));
        }
        if input.iter().any(|v| v.euclid() == 0.0) {
            return Err(Error::norm("polygon vertex at the origin"));
        }
        let full = if is_symmetric_list(input) {
            input.to_vec()
        } else if spans_less_than_pi(input) {
            input.iter().copied().chain(input.iter().map(|v| -*v)).collect()
        } else {
            return Err(Error::norm(
                "polygon is not centrally symmetric (v[k+n] = -v[k] fails)",
            ));
        };
        Polygon::from_full(full)
    }

    fn from_full(mut verts: Vec<Vec2>) -> Result<Polygon> {
        if signed_area(&verts) < 0.0 {
            verts.reverse();
        }
        let mut verts = merge_collinear(verts);
        let n = verts.len();
        if n < 4 || n % 2 == 1 {
            return Err(Error::norm(format!(
                "polygon must have an even number >= 4 of vertices, got {n}"
            )));
        }
        let half = n / 2;
        let scale = verts.iter().map(|v| v.euclid()).fold(0.0, f64::max);
        for k in 0..half {
            if (verts[k] + verts[k + half]).euclid() > SYMMETRY_TOL * scale {
                return Err(Error::norm(
                    "polygon is not centrally symmetric (v[k+n] = -v[k] fails)",
                ));
            }
        }
        let mut turn = 0.0;
        for k in 0..n {
            let a = verts[k];
            let b = verts[(k + 1) % n];
            let c = verts[(k + 2) % n];
            if a.cross(b) <= 0.0 {
                return Err(Error::norm("origin is not strictly inside the polygon"));
            }
            if (b - a).cross(c - b) <= 0.0 {
                return Err(Error::norm("polygon vertices are not in convex position"));
            }
            turn += a.cross(b).atan2(a.dot(b));
        }
        if (turn - TAU).abs() > 1e-6 {
            return Err(Error::norm("polygon winds around the origin more than once"));
        }
        let start = (0..n)
            .min_by(|&i, &j| {
                wrap_angle(verts[i].angle())
                    .partial_cmp(&wrap_angle(verts[j].angle()))
                    .unwrap()
            })
            .unwrap();
        verts.rotate_left(start);
        let mut angles = Vec::with_capacity(n);
        let mut prev = wrap_angle(verts[0].angle());
        angles.push(prev);
        for v in &verts[1..] {
            let mut a = wrap_angle(v.angle());
            while a <= prev {
                a += TAU;
            }
            angles.push(a);
            prev = a;
        }
        let facets = (0..n)
            .map(|k| edge_functional(verts[k], verts[(k + 1) % n]))
            .collect();
        Ok(Polygon {
            vertices: verts,
            angles,
            facets,
        })
    }

    /// Regular polygon with `n` vertices (even, ≥ 4) on the circle of radius `r`, first vertex at angle `phase`.
    pub fn regular(n: usize, r: f64, phase: f64) -> Result<Polygon> {
        if n < 4 || n % 2 == 1 {
            return Err(Error::norm("regular polygon needs an even vertex count >= 4"));
        }
        let verts = (0..n)
            .map(|k| Vec2::unit(phase + TAU * k as f64 / n as f64) * r)
            .collect();
        Polygon::from_full(verts)
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Functional2] {
        &self.facets
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Unwrapped polar angle of vertex `k` (any integer index, cyclic).
    pub fn vertex_angle(&self, k: isize) -> f64 {
        let n = self.len() as isize;
        let wraps = k.div_euclid(n);
        self.angles[k.rem_euclid(n) as usize] + TAU * wraps as f64
    }

    /// Index of the edge crossed by the ray at polar angle `theta`.
    pub fn edge_index(&self, theta: f64) -> usize {
        let mut t = wrap_angle(theta);
        if t < self.angles[0] {
            t += TAU;
        }
        self.angles.partition_point(|&a| a <= t).max(1) - 1
    }

    pub fn gauge(&self, v: Vec2) -> f64 {
        if v.x == 0.0 && v.y == 0.0 {
            return 0.0;
        }
        let n = self.len();
        let k = self.edge_index(v.angle());
        let mut g = self.facets[k].apply(v);
        g = g.max(self.facets[(k + 1) % n].apply(v));
        g = g.max(self.facets[(k + n - 1) % n].apply(v));
        g
    }

    /// `max_k f(v_k)`, the dual norm of `f`.
    pub fn support(&self, f: Functional2) -> f64 {
        let half = self.len() / 2;
        self.vertices[..half]
            .iter()
            .map(|&v| f.apply(v).abs())
            .fold(0.0, f64::max)
    }

    /// The polar polygon, whose vertices are the edge functionals.
    pub fn polar(&self) -> Polygon {
        Polygon::from_full(self.facets.iter().map(|f| f.as_vec()).collect())
            .expect("polar of a valid polygon is valid")
    }

    /// Supporting functionals at `x` (assumed on the boundary): the averaged
    /// rule first, then the two adjacent edge functionals when `x` is a corner.
    pub fn supporting(&self, x: Vec2) -> Vec<Functional2> {
        let n = self.len();
        let k = self.edge_index(x.angle());
        let corner = [k, (k + 1) % n]
            .into_iter()
            .find(|&j| (x - self.vertices[j]).euclid() <= 1e-9 * self.vertices[j].euclid());
        match corner {
            None => vec![self.facets[k]],
            Some(j) => {
                let left = self.facets[(j + n - 1) % n];
                let right = self.facets[j];
                let avg = Functional2::new(0.5 * (left.a1 + right.a1), 0.5 * (left.a2 + right.a2));
                let avg = avg.scale(1.0 / self.support(avg));
                vec![avg, left, right]
            }
        }
    }

    /// Polar-angle interval `[lo, hi]` of the face `{f = 1}`; `f` must have dual norm 1.
    pub fn face_angles(&self, f: Functional2) -> (f64, f64) {
        let n = self.len();
        let values: Vec<f64> = self.vertices.iter().map(|&v| f.apply(v)).collect();
        let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let on = |k: usize| values[k] >= best - 1e-10;
        let top = (0..n).find(|&k| values[k] == best).unwrap();
        let mut lo = top as isize;
        while on((lo - 1).rem_euclid(n as isize) as usize) && (top as isize - lo) < n as isize - 1 {
            lo -= 1;
        }
        let mut hi = top as isize;
        while on((hi + 1).rem_euclid(n as isize) as usize) && (hi - lo) < n as isize - 1 {
            hi += 1;
        }
        let a = self.vertex_angle(lo);
        let b = self.vertex_angle(hi);
        let w = wrap_angle(a);
        (w, w + (b - a))
    }
}

fn is_symmetric_list(v: &[Vec2]) -> bool {
    let n = v.len();
    if n % 2 == 1 {
        return false;
    }
    let scale = v.iter().map(|p| p.euclid()).fold(0.0, f64::max);
    let half = n / 2;
    (0..half).all(|k| (v[k] + v[k + half]).euclid() <= SYMMETRY_TOL * scale)
}

fn spans_less_than_pi(v: &[Vec2]) -> bool {
    let mut total = 0.0;
    for w in v.windows(2) {
        total += w[0].cross(w[1]).atan2(w[0].dot(w[1]));
    }
    total.abs() < PI - 1e-12
}

fn signed_area(v: &[Vec2]) -> f64 {
    let n = v.len();
    (0..n).map(|k| v[k].cross(v[(k + 1) % n])).sum::<f64>() * 0.5
}

fn merge_collinear(mut v: Vec<Vec2>) -> Vec<Vec2> {
    loop {
        let n = v.len();
        if n < 3 {
            return v;
        }
        let mut drop = None;
        for k in 0..n {
            let a = v[(k + n - 1) % n];
            let b = v[k];
            let c = v[(k + 1) % n];
            let scale = (b - a).euclid() * (c - b).euclid();
            if (b - a).euclid() <= COLLINEAR_TOL * b.euclid()
                || (b - a).cross(c - b).abs() <= COLLINEAR_TOL * scale && (b - a).dot(c - b) > 0.0
            {
                drop = Some(k);
                break;
            }
        }
        match drop {
            Some(k) => {
                v.remove(k);
            }
            None => return v,
        }
    }
}

fn edge_functional(a: Vec2, b: Vec2) -> Functional2 {
    let c = a.cross(b);
    Functional2::new((b.y - a.y) / c, (a.x - b.x) / c)
}
