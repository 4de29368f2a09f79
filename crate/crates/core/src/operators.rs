//! Linear maps between normed planes, their attaining sets, and faces of unit balls.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norm2d::{wrap_angle, Functional2, Mat2, Norm2, Vec2};
use crate::search::{bisect_boundary, golden_max, GridSearch};

/// A 2×2 matrix acting between two normed planes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Operator2 {
    pub matrix: Mat2,
    pub domain: Norm2,
    pub codomain: Norm2,
}

/// A closed arc `{γ(θ) : lo ≤ θ ≤ hi}` of a unit sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcInterval {
    pub lo: f64,
    pub hi: f64,
}

impl ArcInterval {
    /// Normalizes `lo` into `[0, 2π)`, keeping the width.
    pub fn new(lo: f64, hi: f64) -> ArcInterval {
        let w = (hi - lo).clamp(0.0, 2.0 * PI);
        let lo = wrap_angle(lo);
        ArcInterval { lo, hi: lo + w }
    }

    pub fn point(theta: f64) -> ArcInterval {
        ArcInterval::new(theta, theta)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_degenerate(&self) -> bool {
        self.hi == self.lo
    }

    pub fn contains(&self, theta: f64) -> bool {
        let d = (theta - self.lo).rem_euclid(2.0 * PI);
        d <= self.width() || self.width() >= 2.0 * PI
    }

    /// Membership of `θ` or `θ + π`, for arcs that stand for a set symmetric under `x ↦ −x`.
    pub fn contains_mod_pi(&self, theta: f64) -> bool {
        self.contains(theta) || self.contains(theta + PI)
    }

    /// The antipodal arc.
    pub fn antipode(&self) -> ArcInterval {
        ArcInterval::new(self.lo + PI, self.hi + PI)
    }
}

/// The faces `F(y*)` and `F(−y*)` of a norming functional.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FacePair {
    pub functional: Functional2,
    pub plus_face: ArcInterval,
    pub minus_face: ArcInterval,
}

impl FacePair {
    pub fn new(norm: &Norm2, f: Functional2) -> Result<FacePair> {
        let plus_face = face(norm, f)?;
        Ok(FacePair {
            functional: f,
            plus_face,
            minus_face: plus_face.antipode(),
        })
    }
}

impl Operator2 {
    pub fn new(matrix: Mat2, domain: Norm2, codomain: Norm2) -> Result<Operator2> {
        if !matrix.is_finite() {
            return Err(Error::input("operator matrix has non-finite entries"));
        }
        Ok(Operator2 {
            matrix,
            domain,
            codomain,
        })
    }

    pub fn apply(&self, x: Vec2) -> Vec2 {
        self.matrix.apply(x)
    }

    /// `‖T γ(θ)‖` along the domain sphere.
    pub fn sphere_image_norm(&self, theta: f64) -> f64 {
        self.codomain
            .eval(self.matrix.apply(self.domain.sphere_point(theta)))
    }

    pub fn scaled(&self, s: f64) -> Operator2 {
        Operator2 {
            matrix: self.matrix.scale(s),
            ..self.clone()
        }
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Operator2) -> Operator2 {
        Operator2 {
            matrix: self.matrix.mul(&inner.matrix),
            domain: inner.domain.clone(),
            codomain: self.codomain.clone(),
        }
    }

    /// `‖T‖` and a maximizing angle in `[0, π)`.
    pub fn norm(&self) -> (f64, f64) {
        operator_norm_with(self, &GridSearch::default())
    }
}

/// Exact candidates for `‖T‖` from extreme points: domain vertices, or the
/// codomain dual vertices pulled back through the adjoint.
fn vertex_candidates(t: &Operator2) -> Option<(f64, f64)> {
    if let Some(p) = t.domain.as_polygon() {
        let half = p.len() / 2;
        return p.vertices()[..half]
            .iter()
            .map(|&v| (t.codomain.eval(t.apply(v)), v.angle()))
            .max_by(|a, b| a.0.total_cmp(&b.0));
    }
    if let Some(q) = t.codomain.dual().as_polygon() {
        let mt = t.matrix.transpose();
        return q
            .vertices()
            .iter()
            .map(|&f| {
                let g = Functional2::from_vec(mt.apply(f));
                let d = t.domain.dual_eval(g);
                let angle = if d > 0.0 {
                    t.domain
                        .face_angles(g.scale(1.0 / d))
                        .map(|(lo, _)| lo)
                        .unwrap_or(0.0)
                } else {
                    0.0
                };
                (d, angle)
            })
            .max_by(|a, b| a.0.total_cmp(&b.0));
    }
    None
}

/// `sup_{x ∈ S_X} ‖Tx‖` by grid and golden refinement on `[0, π]`, combined
/// with exact vertex candidates when either side is polygonal.
pub fn operator_norm(t: &Operator2) -> (f64, f64) {
    operator_norm_with(t, &GridSearch::default())
}

pub fn operator_norm_with(t: &Operator2, search: &GridSearch) -> (f64, f64) {
    if t.matrix.max_abs() == 0.0 {
        return (0.0, 0.0);
    }
    let e = search.maximize(|th| t.sphere_image_norm(th), 0.0, PI);
    let mut best = (e.value, e.arg);
    if let Some(c) = vertex_candidates(t) {
        if c.0 > best.0 {
            best = c;
        }
    }
    (best.0, best.1.rem_euclid(PI))
}

/// The band `{θ : ‖Tγ(θ)‖ ≥ 1 − tol}` as maximal arcs, modulo π
/// (each arc stands for itself and its antipode). Requires `‖T‖ = 1 ± tol`.
pub fn attaining_set(t: &Operator2, tol: f64) -> Result<Vec<ArcInterval>> {
    attaining_set_with(t, tol, &GridSearch::default())
}

pub fn attaining_set_with(t: &Operator2, tol: f64, search: &GridSearch) -> Result<Vec<ArcInterval>> {
    let (n, _) = operator_norm_with(t, search);
    if (n - 1.0).abs() > tol {
        return Err(Error::input(format!(
            "attaining set needs a norm-one operator, got norm {n}"
        )));
    }
    Ok(band_arcs(|th| t.sphere_image_norm(th), 1.0 - tol, search.nodes))
}

/// Maximal arcs of `{θ : f(θ) ≥ thr}` for a π-periodic `f`, found on a grid of
/// `nodes` points, with golden refinement of every sub-threshold local maximum
/// and endpoints polished by bisection to 1e-11.
pub fn band_arcs<F: Fn(f64) -> f64>(f: F, thr: f64, nodes: usize) -> Vec<ArcInterval> {
    let h = PI / nodes as f64;
    let t = |i: isize| h * i as f64;
    let v: Vec<f64> = (0..nodes).map(|i| f(t(i as isize))).collect();
    let at = |i: isize| v[i.rem_euclid(nodes as isize) as usize];
    let inside = |i: isize| at(i) >= thr;
    if (0..nodes as isize).all(inside) {
        return vec![ArcInterval { lo: 0.0, hi: PI }];
    }
    let pred = |x: f64| f(x) >= thr;
    let mut arcs = Vec::new();
    let start = (0..nodes as isize).find(|&i| !inside(i)).unwrap();
    let mut i = start + 1;
    let end = start + nodes as isize;
    while i <= end {
        if inside(i) {
            let first = i;
            while inside(i + 1) {
                i += 1;
            }
            let lo = bisect_boundary(pred, t(first), t(first - 1), 1e-11);
            let hi = bisect_boundary(pred, t(i), t(i + 1), 1e-11);
            arcs.push(ArcInterval::new(lo, hi));
        } else if at(i) >= at(i - 1) && at(i) >= at(i + 1) {
            let e = golden_max(&f, t(i - 1), t(i + 1), 1e-13);
            if e.value >= thr {
                let lo = bisect_boundary(pred, e.arg, t(i - 1), 1e-11);
                let hi = bisect_boundary(pred, e.arg, t(i + 1), 1e-11);
                arcs.push(ArcInterval::new(lo, hi));
            }
        }
        i += 1;
    }
    arcs.iter()
        .map(|a| {
            let lo = a.lo.rem_euclid(PI);
            ArcInterval {
                lo,
                hi: lo + a.width(),
            }
        })
        .collect()
}

/// `T*`: transpose, acting from the codomain dual to the domain dual.
pub fn adjoint(t: &Operator2) -> Operator2 {
    Operator2 {
        matrix: t.matrix.transpose(),
        domain: t.codomain.dual(),
        codomain: t.domain.dual(),
    }
}

/// The face `F(x*) = {x ∈ S : x*(x) = 1}` as an arc; `x*` must have dual norm 1.
pub fn face(norm: &Norm2, f: Functional2) -> Result<ArcInterval> {
    let (lo, hi) = norm.face_angles(f)?;
    Ok(ArcInterval { lo, hi })
}

/// Distance from `y` to an arc of the unit sphere in the norm.
pub fn dist_to_arc(norm: &Norm2, y: Vec2, arc: &ArcInterval) -> f64 {
    if arc.width() <= 1e-15 {
        return norm.eval(y - norm.sphere_point(arc.lo));
    }
    GridSearch::default()
        .minimize(|th| norm.eval(y - norm.sphere_point(th)), arc.lo, arc.hi)
        .value
}

/// `dist(y, F(y*) ∪ F(−y*))`.
pub fn dist_to_face_union(norm: &Norm2, y: Vec2, fp: &FacePair) -> f64 {
    dist_to_arc(norm, y, &fp.plus_face).min(dist_to_arc(norm, y, &fp.minus_face))
}

/// Checks on a 1024-point subgrid that `x*(γ(θ₁)) ≥ 1` and `x*(γ(θ₂)) ≥ 1`
/// imply `x*(γ(θ)) ≥ 1` for `θ₁ ≤ θ ≤ θ₂`.
pub fn check_face_interval(norm: &Norm2, f: Functional2, th1: f64, th2: f64) -> Result<bool> {
    let w = th2 - th1;
    if !(0.0..=PI).contains(&w) {
        return Err(Error::input(format!("need 0 <= th2 - th1 <= pi, got {w}")));
    }
    let val = |th: f64| f.apply(norm.sphere_point(th));
    if val(th1) < 1.0 - 1e-12 || val(th2) < 1.0 - 1e-12 {
        return Ok(true);
    }
    Ok((0..=1024).all(|k| val(th1 + w * k as f64 / 1024.0) >= 1.0 - 1e-10))
}
