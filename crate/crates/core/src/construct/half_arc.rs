//! Steps for a non-Euclidean domain: the initial operator `S`, the half-arc maxima `a` and `b`,
//! and the two ways of finishing.

use std::f64::consts::PI;

use crate::convexity::{equality_direction_with, DayNordlanderGap};
use crate::error::{Error, Result};
use crate::norm2d::{Functional2, Mat2, Norm2, Vec2};
use crate::operators::Operator2;
use crate::search::GridSearch;

const SLACK: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct InitialOperator {
    pub s: Operator2,
    /// The dyadic shrink factor `δ₀`; `S` already includes `1 − δ₀`.
    pub shrink: f64,
    pub theta2: f64,
    pub y1: Vec2,
    pub y2: Vec2,
}

/// `S x₁ = y₁`, `S x₂ = y₂` for an equality chord `y₁y₂` of the codomain,
/// shrunk by the largest `1 − 2⁻ᵏ` keeping all four strict inequalities.
pub fn case2_initial_operator(
    x: &Norm2,
    y: &Norm2,
    gap: &DayNordlanderGap,
    search: &GridSearch,
) -> Result<InitialOperator> {
    let stage = |r: String| Error::stage("case2_initial_operator", r);
    let (theta2, y1, y2) = equality_direction_with(y, gap.epsilon, search)?;
    let xi = Mat2::from_cols(gap.x1, gap.x2)
        .inverse()
        .ok_or_else(|| stage("x1 and x2 are dependent".into()))?;
    let s0 = Mat2::from_cols(y1, y2).mul(&xi);
    let (x1, x2) = (gap.x1, gap.x2);
    let (dm, dp) = (x.eval(x1 - x2), x.eval(x1 + x2));
    for k in 1..=52 {
        let shrink = 0.5f64.powi(k);
        let s = s0.scale(1.0 - shrink);
        let img = |v: Vec2| y.eval(s.apply(v));
        if img(x1) < 1.0 - SLACK
            && img(x2) < 1.0 - SLACK
            && img(x1 - x2) / dm > 1.0 + SLACK
            && img(x1 + x2) / dp > 1.0 + SLACK
        {
            return Ok(InitialOperator {
                s: Operator2::new(s, x.clone(), y.clone())?,
                shrink,
                theta2,
                y1,
                y2,
            });
        }
    }
    Err(stage(format!(
        "no dyadic shrink works at epsilon {}; gap margins too thin",
        gap.epsilon
    )))
}

/// Pattern points and maxima of `t ↦ ‖S γ(start + t)‖` on `[0, π]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfArcExtrema {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    /// Max over `[0, t₁] ∪ [t₃, π]`, attained at `s_outer`.
    pub a: f64,
    /// Max over `[t₁, t₃]`, attained at `s_inner = t₂`.
    pub b: f64,
    pub s_outer: f64,
    pub s_inner: f64,
}

/// `t₁`, `t₃` are the first and last grid nodes below 1; `t₂` is the maximizer
/// between them, which must exceed 1.
pub fn half_arc_extrema(s: &Operator2, start: f64, search: &GridSearch) -> Result<HalfArcExtrema> {
    let f = |t: f64| s.sphere_image_norm(start + t);
    let n = search.nodes;
    let node = |i: usize| PI * i as f64 / n as f64;
    let below: Vec<usize> = (0..=n).filter(|&i| f(node(i)) < 1.0).collect();
    let fail = |r: &str| Error::stage("half_arc_extrema", r.to_string());
    let (&first, &last) = match (below.first(), below.last()) {
        (Some(a), Some(b)) if a < b => (a, b),
        _ => return Err(fail("no two dips below 1 on the half arc")),
    };
    let (t1, t3) = (node(first), node(last));
    let inner = search.maximize(f, t1, t3);
    if inner.value <= 1.0 {
        return Err(fail("no bump above 1 between the dips"));
    }
    let left = search.maximize(f, 0.0, t1);
    let right = search.maximize(f, t3, PI);
    let outer = if right.value > left.value { right } else { left };
    Ok(HalfArcExtrema {
        t1,
        t2: inner.arg,
        t3,
        a: outer.value,
        b: inner.value,
        s_outer: outer.arg,
        s_inner: inner.arg,
    })
}

/// `T = S / max(a, b)` when `a = b`. Returns `T` and the half arc carrying its
/// three contacts as `(start, contact, [dip₁, dip₂])`.
pub fn subcase1_finalize(s: &Operator2, start: f64, ext: &HalfArcExtrema) -> (Operator2, f64, f64, [f64; 2]) {
    let t = s.scaled(1.0 / ext.a.max(ext.b));
    let base = if ext.s_outer <= ext.t1 {
        ext.s_outer
    } else {
        ext.s_outer - PI
    };
    (t, start + base, ext.s_inner - base, [ext.t1 - base, ext.t3 - base])
}

#[derive(Clone, Debug)]
pub struct Subcase2 {
    pub t: Operator2,
    pub lambda0: f64,
    /// Parameter of the interior contact on the half arc.
    pub s2: f64,
    pub ystar: Functional2,
}

/// With `‖T₁γ₂(0)‖ = 1`, `T₁γ₂ ≤ 1` off `(s₁, s₃)` and a bump above 1 inside,
/// bisects `λ` so that `P_λ T₁` has its bump exactly at 1.
pub fn subcase2_finalize(
    t1: &Operator2,
    arc_start: f64,
    s1: f64,
    s3: f64,
    search: &GridSearch,
) -> Result<Subcase2> {
    let stage = |r: String| Error::stage("subcase2_finalize", r);
    let x = &t1.domain;
    let y = &t1.codomain;
    let g = |t: f64| t1.sphere_image_norm(arc_start + t);
    if (g(0.0) - 1.0).abs() > 1e-9 {
        return Err(stage(format!("start value {} is not 1", g(0.0))));
    }
    if !(0.0 < s1 && s1 < s3 && s3 < PI && g(s1) < 1.0 && g(s3) < 1.0) {
        return Err(stage(format!("bad dips at {s1} and {s3}")));
    }
    let y0 = t1.apply(x.sphere_point(arc_start));
    let y0 = y0 / y.eval(y0);
    let ystar = y.supporting_functional(y0)?;
    let proj = Mat2::outer(y0, ystar.as_vec());
    let p_lambda = |lam: f64| Mat2::IDENTITY.scale(lam).add(&proj.scale(1.0 - lam));
    let phi = |lam: f64| {
        let m = p_lambda(lam).mul(&t1.matrix);
        search.maximize(|t| y.eval(m.apply(x.sphere_point(arc_start + t))), s1, s3)
    };
    let at0 = phi(0.0);
    if at0.value >= 1.0 - 1e-10 {
        return Err(stage(format!(
            "phi(0) = {} is not below 1 (at t = {})",
            at0.value, at0.arg
        )));
    }
    if phi(1.0).value <= 1.0 {
        return Err(stage("phi(1) does not exceed 1".into()));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut best = (0.5, phi(0.5));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let e = phi(mid);
        best = (mid, e);
        if (e.value - 1.0).abs() <= 1e-10 || hi - lo <= f64::EPSILON {
            break;
        }
        if e.value < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (lambda0, e) = best;
    if (e.value - 1.0).abs() > 1e-10 {
        return Err(stage(format!("bisection stalled at phi = {}", e.value)));
    }
    let t = Operator2::new(p_lambda(lambda0).mul(&t1.matrix), x.clone(), y.clone())?;
    Ok(Subcase2 {
        t,
        lambda0,
        s2: e.arg,
        ystar,
    })
}
