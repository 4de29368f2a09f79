//! The maximal-area ellipse inscribed in a symmetric unit ball, and the
//! norm-one operator from a Euclidean plane onto it.
//!
//! For a polygonal ball `{y : |f_i(y)| ≤ 1}` the ellipse `{Au : |u| ≤ 1}` with
//! `H = A²` is inscribed iff `f_iᵀ H f_i ≤ 1` for every facet, so maximizing
//! `log det H` is the minimum-volume enclosing ellipse problem for the points
//! `±f_i`. It is solved in its dual form (design weights on the points) by
//! Frank–Wolfe steps with away steps, then polished on the active set.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norm2d::{Exponent, Functional2, Mat2, Norm2, Vec2};
use crate::operators::{dist_to_face_union, FacePair, Operator2};

const CONTACT_TOL: f64 = 1e-7;
const CLUSTER_RAD: f64 = 1e-4;

/// `{Au : ‖u‖₂ ≤ 1}` with its contact points on the unit sphere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JohnEllipse {
    pub a: Mat2,
    pub det: f64,
    /// Contact points `A u_φ`, one per ± pair.
    pub contacts: Vec<Vec2>,
    /// The parameters `φ ∈ [0, π)` of the contacts.
    pub contact_angles: Vec<f64>,
    /// Dual objective `log det Σ w_i f_i f_iᵀ` per iteration (polygonal bodies only).
    pub trace: Vec<f64>,
}

/// Dual iteration for the centred minimum-volume ellipse through the points `p`.
/// Returns `H` with `max_i p_iᵀ H p_i = 1` and the dual objective trace.
fn mvee(p: &[Vec2]) -> (Mat2, Vec<f64>) {
    let m = p.len();
    let d = 2.0;
    let mut w = vec![1.0 / m as f64; m];
    let moment = |w: &[f64]| {
        let mut x = Mat2::ZERO;
        for (wi, pi) in w.iter().zip(p) {
            x = x.add(&Mat2::outer(*pi, *pi).scale(*wi));
        }
        x
    };
    let mut trace = Vec::new();
    let mut x = moment(&w);
    for _ in 0..100_000 {
        trace.push(x.det().ln());
        let xi = x.inverse().expect("moment matrix stays nonsingular");
        let kappa: Vec<f64> = p.iter().map(|&v| v.dot(xi.apply(v))).collect();
        let (j, kmax) = kappa
            .iter()
            .copied()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let (k, kmin) = kappa
            .iter()
            .copied()
            .enumerate()
            .filter(|&(i, _)| w[i] > 0.0)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if kmax <= d * (1.0 + 1e-14) && kmin >= d * (1.0 - 1e-14) {
            break;
        }
        if kmax - d >= d - kmin {
            let a = (kmax - d) / (d * (kmax - 1.0));
            w.iter_mut().for_each(|v| *v *= 1.0 - a);
            w[j] += a;
        } else {
            let wk = w[k];
            let a = ((d - kmin) / (d * (kmin - 1.0))).min(wk / (1.0 - wk));
            w.iter_mut().for_each(|v| *v *= 1.0 + a);
            w[k] -= a;
            if w[k] < 1e-300 {
                w[k] = 0.0;
            }
        }
        x = moment(&w);
    }
    let xi = x.inverse().expect("moment matrix stays nonsingular");
    let kmax = p
        .iter()
        .map(|&v| v.dot(xi.apply(v)))
        .fold(0.0, f64::max);
    (xi.scale(1.0 / kmax), trace)
}

/// Exact optimum from the active constraints, if the KKT conditions check out.
fn polish(p: &[Vec2], h: &Mat2) -> Option<Mat2> {
    let val = |h: &Mat2, v: Vec2| v.dot(h.apply(v));
    let active: Vec<Vec2> = p
        .iter()
        .copied()
        .filter(|&v| val(h, v) >= 1.0 - CONTACT_TOL)
        .collect();
    let feasible = |c: &Mat2| p.iter().all(|&v| val(c, v) <= 1.0 + 1e-12);
    let mut best: Option<Mat2> = None;
    let mut consider = |c: Mat2| {
        if c.sym_eigenvalues().0 > 0.0 && feasible(&c) {
            if best.map_or(true, |b| c.det() > b.det()) {
                best = Some(c);
            }
        }
    };
    for i in 0..active.len() {
        for j in i + 1..active.len() {
            let pm = Mat2::from_cols(active[i], active[j]);
            if let Some(c) = pm.mul(&pm.transpose()).inverse() {
                consider(c);
            }
            for k in j + 1..active.len() {
                if let Some(c) = three_point(active[i], active[j], active[k]) {
                    consider(c);
                }
            }
        }
    }
    let b = best?;
    // Keep the polish only if it does not lose area against the iterate.
    (b.det() >= h.det() * (1.0 - 1e-9)).then_some(b)
}

/// The symmetric `H` with `p_iᵀ H p_i = 1` for three points, when the
/// multipliers of `H⁻¹ = Σ λ_i p_i p_iᵀ` are all nonnegative.
fn three_point(a: Vec2, b: Vec2, c: Vec2) -> Option<Mat2> {
    let row = |v: Vec2| [v.x * v.x, 2.0 * v.x * v.y, v.y * v.y];
    let m = nalgebra::Matrix3::from_rows(&[
        nalgebra::RowVector3::from(row(a)),
        nalgebra::RowVector3::from(row(b)),
        nalgebra::RowVector3::from(row(c)),
    ]);
    let s = m.lu().solve(&nalgebra::Vector3::new(1.0, 1.0, 1.0))?;
    let h = Mat2::new(s[0], s[1], s[1], s[2]);
    let hi = h.inverse()?;
    let cols = nalgebra::Matrix3::from_columns(&[
        nalgebra::Vector3::new(a.x * a.x, a.x * a.y, a.y * a.y),
        nalgebra::Vector3::new(b.x * b.x, b.x * b.y, b.y * b.y),
        nalgebra::Vector3::new(c.x * c.x, c.x * c.y, c.y * c.y),
    ]);
    let lam = cols.lu().solve(&nalgebra::Vector3::new(hi.a, hi.b, hi.d))?;
    lam.iter().all(|&l| l >= -1e-12).then_some(h)
}

/// The John ellipse of the unit ball of `norm`.
pub fn john_ellipse(norm: &Norm2) -> Result<JohnEllipse> {
    // Every direction touches for an ellipse; ℓp balls touch on the axes or
    // the diagonals; a polygon touches at the feet of its active facets.
    let (a, trace, mut angles) = match norm {
        Norm2::Ellipse(e) => (
            e.matrix().spd_sqrt().and_then(|r| r.inverse()),
            Vec::new(),
            vec![0.0, PI / 2.0],
        ),
        Norm2::Lp(Exponent::Finite(p)) if *p > 1.0 => {
            let r = if *p >= 2.0 { 1.0 } else { 2f64.powf(0.5 - 1.0 / p) };
            let angles = if *p >= 2.0 { vec![0.0, PI / 2.0] } else { vec![PI / 4.0, 3.0 * PI / 4.0] };
            (Some(Mat2::diag(r, r)), Vec::new(), angles)
        }
        _ => {
            let poly = norm.as_polygon().expect("remaining norms are polygonal");
            let half = poly.len() / 2;
            let pts: Vec<Vec2> = poly.facets()[..half].iter().map(|f| f.as_vec()).collect();
            let (h, trace) = mvee(&pts);
            let h = polish(&pts, &h).unwrap_or(h);
            let a = h.spd_sqrt();
            let angles = match a {
                Some(a) => pts
                    .iter()
                    .filter(|&&f| f.dot(h.apply(f)) >= 1.0 - CONTACT_TOL)
                    .map(|&f| a.apply(f).angle().rem_euclid(PI))
                    .collect(),
                None => Vec::new(),
            };
            (a, trace, angles)
        }
    };
    let a = a.ok_or_else(|| Error::stage("john_ellipse", "degenerate ellipse matrix"))?;
    angles.sort_by(f64::total_cmp);
    let mut clustered: Vec<f64> = Vec::new();
    for t in angles {
        let close = |u: f64| {
            let d = (t - u).rem_euclid(PI);
            d.min(PI - d) <= CLUSTER_RAD
        };
        if !clustered.iter().any(|&u| close(u)) {
            clustered.push(t);
        }
    }
    if clustered.len() < 2 {
        return Err(Error::stage(
            "john_ellipse",
            format!("found {} independent contact(s), need 2", clustered.len()),
        ));
    }
    let contacts = clustered.iter().map(|&t| a.apply(Vec2::unit(t))).collect();
    Ok(JohnEllipse {
        a,
        det: a.det(),
        contacts,
        contact_angles: clustered,
        trace,
    })
}

/// Output of the Euclidean-domain construction.
#[derive(Clone, Debug)]
pub struct Case1 {
    pub t: Operator2,
    pub x0: Vec2,
    pub y1: Vec2,
    pub y2: Vec2,
    pub y1star: Functional2,
    pub separation: f64,
    pub john: JohnEllipse,
}

/// For `X = Ellipse(M)`: `T = A·M^{1/2}` maps `B_X` onto the John ellipse of `B_Y`.
/// `y₁, y₂` are the pair of contacts with the largest face-union separation.
pub fn case1_operator(norm_x: &Norm2, norm_y: &Norm2) -> Result<Case1> {
    let m = match norm_x {
        Norm2::Ellipse(e) => e.matrix(),
        Norm2::Lp(Exponent::Finite(p)) if *p == 2.0 => Mat2::IDENTITY,
        _ => return Err(Error::input(format!("{norm_x} is not an ellipse norm"))),
    };
    let john = john_ellipse(norm_y)?;
    let root = m.spd_sqrt().ok_or_else(|| Error::norm("domain matrix is not SPD"))?;
    let t = Operator2::new(john.a.mul(&root), norm_x.clone(), norm_y.clone())?;
    let mut best: Option<(f64, usize, usize, Functional2)> = None;
    for i in 0..john.contacts.len() {
        let y1 = john.contacts[i];
        let y1star = norm_y
            .supporting_functional(y1 / norm_y.eval(y1))
            .map_err(|e| Error::stage("case1_operator", e.to_string()))?;
        let fp = FacePair::new(norm_y, y1star)?;
        for (j, &y2) in john.contacts.iter().enumerate() {
            if j == i {
                continue;
            }
            let d = dist_to_face_union(norm_y, y2, &fp);
            if best.map_or(true, |b| d > b.0 + 1e-12) {
                best = Some((d, i, j, y1star));
            }
        }
    }
    let (separation, i, j, y1star) = best.expect("at least two contacts");
    let y2 = john.contacts[j];
    let tinv = t
        .matrix
        .inverse()
        .ok_or_else(|| Error::stage("case1_operator", "operator is singular"))?;
    Ok(Case1 {
        x0: tinv.apply(y2),
        y1: john.contacts[i],
        y2,
        y1star,
        separation,
        t,
        john,
    })
}
