//! Midpoint curves of ε-chords, the profile Δ(ε, θ), the modulus of
//! convexity and the search for a strict gap below the Euclidean modulus.
//!
//! For a chord `z₁z₂` of the unit sphere with `‖z₁ − z₂‖ = ε`, the midpoint
//! traces a closed curve Γ_ε as the chord rotates. `z_θ` is the point of Γ_ε
//! on the ray through `γ(θ)`, and `Δ(ε, θ) = 1 − ‖z_θ‖`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norm2d::{Norm2, Vec2};
use crate::search::{bisect_boundary, brent_root, GridSearch};

const ALIGN_TOL: f64 = 1e-11;
const HILBERT_TOL: f64 = 1e-8;

/// One point of the midpoint curve Γ_ε.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChordMidpoint {
    pub theta: f64,
    pub delta: f64,
    pub z: Vec2,
    pub chord: (Vec2, Vec2),
}

/// Samples of `θ ↦ (Δ(ε, θ), z_θ)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChordMidpointProfile {
    pub norm: Norm2,
    pub epsilon: f64,
    pub samples: Vec<ChordMidpoint>,
}

/// A witness that `δ_X(ε)` falls strictly below the Euclidean modulus.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DayNordlanderGap {
    pub epsilon: f64,
    /// Direction where `(1 − Δ)² < 1 − ε²/4`.
    pub theta_below: f64,
    /// Direction where `(1 − Δ)² > 1 − ε²/4`.
    pub theta_above: f64,
    pub x1: Vec2,
    pub x2: Vec2,
    /// `1 − ε²/4 − (1 − Δ(ε, θ_below))²`.
    pub margin_below: f64,
    /// `(1 − Δ(ε, θ_above))² − (1 − ε²/4)`.
    pub margin_above: f64,
    /// `min(ε − ‖x₁ − x₂‖, √(4 − ε²) − ‖x₁ + x₂‖)`.
    pub slack: f64,
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 2.0 {
        Ok(())
    } else {
        Err(Error::input(format!("epsilon must lie in (0, 2), got {eps}")))
    }
}

/// Modulus of convexity of a Euclidean plane, `1 − √(1 − ε²/4)`.
pub fn hilbert_modulus(eps: f64) -> f64 {
    1.0 - (1.0 - eps * eps / 4.0).sqrt()
}

/// Angle from `u` to `v` measured counterclockwise, in `(-π, π]`.
fn turn(u: Vec2, v: Vec2) -> f64 {
    u.cross(v).atan2(u.dot(v))
}

/// The partner `ψ ∈ [φ, φ + π]` with `‖γ(φ) − γ(ψ)‖ = ε`.
fn partner(norm: &Norm2, phi: f64, eps: f64) -> f64 {
    let p = norm.sphere_point(phi);
    brent_root(
        |psi| norm.eval(p - norm.sphere_point(psi)) - eps,
        phi,
        phi + PI,
        1e-15,
    )
    .unwrap_or(phi + PI)
}

/// Signed angular offset of the chord midpoint from the ray at `theta`.
fn defect(norm: &Norm2, phi: f64, psi: f64, theta: f64) -> f64 {
    let m = norm.sphere_point(phi) + norm.sphere_point(psi);
    phi + turn(Vec2::unit(phi), m) - theta
}

/// Finds the ε-chord whose midpoint lies on the ray through `γ(θ)`.
pub fn chord_midpoint(norm: &Norm2, eps: f64, theta: f64) -> Result<ChordMidpoint> {
    check_eps(eps)?;
    if !theta.is_finite() {
        return Err(Error::input("theta must be finite"));
    }
    Ok(chord_midpoint_unchecked(norm, eps, theta))
}

fn chord_midpoint_unchecked(norm: &Norm2, eps: f64, theta: f64) -> ChordMidpoint {
    let f = |phi: f64| defect(norm, phi, partner(norm, phi, eps), theta);
    let phi = brent_root(f, theta - PI, theta, 1e-14).unwrap_or(theta - PI / 2.0);
    let mut psi = partner(norm, phi, eps);
    if defect(norm, phi, psi, theta).abs() > ALIGN_TOL {
        // The chord length is flat in ψ near the partner: slide along the plateau.
        let p = norm.sphere_point(phi);
        let c = |s: f64| norm.eval(p - norm.sphere_point(s)) - eps;
        let lo = bisect_boundary(|s| c(s) < -1e-13, phi, psi, 1e-15);
        let hi = bisect_boundary(|s| c(s) > 1e-13, phi + PI, psi, 1e-15);
        if let Some(s) = brent_root(|s| defect(norm, phi, s, theta), lo, hi, 1e-15) {
            psi = s;
        }
    }
    let z1 = norm.sphere_point(phi);
    let z2 = norm.sphere_point(psi);
    let m = (z1 + z2) * 0.5;
    let len = norm.eval(m);
    ChordMidpoint {
        theta,
        delta: (1.0 - len).max(0.0),
        z: norm.sphere_point(theta) * len,
        chord: (z1, z2),
    }
}

/// `Δ(ε, θ)`.
pub fn delta(norm: &Norm2, eps: f64, theta: f64) -> f64 {
    chord_midpoint_unchecked(norm, eps, theta).delta
}

/// `(1 − Δ(ε, θ))² − (1 − ε²/4)`, the integrand sign of the zero-integral identity.
pub fn excess(norm: &Norm2, eps: f64, theta: f64) -> f64 {
    let s = 1.0 - delta(norm, eps, theta);
    s * s - (1.0 - eps * eps / 4.0)
}

/// Profile on `n` equally spaced directions of `[0, 2π)`.
pub fn profile(norm: &Norm2, eps: f64, n: usize) -> Result<ChordMidpointProfile> {
    check_eps(eps)?;
    let samples = (0..n)
        .into_par_iter()
        .map(|k| chord_midpoint_unchecked(norm, eps, 2.0 * PI * k as f64 / n as f64))
        .collect();
    Ok(ChordMidpointProfile {
        norm: norm.clone(),
        epsilon: eps,
        samples,
    })
}

/// `δ(ε) = inf_θ Δ(ε, θ)`; Δ has period π, so `[0, π]` is searched.
pub fn modulus_of_convexity(norm: &Norm2, eps: f64) -> Result<f64> {
    modulus_with(norm, eps, &GridSearch::default())
}

pub fn modulus_with(norm: &Norm2, eps: f64, search: &GridSearch) -> Result<f64> {
    check_eps(eps)?;
    let e = search.minimize(|t| delta(norm, eps, t), 0.0, PI);
    Ok(e.value.max(0.0))
}

/// Ratio of the area enclosed by Γ_ε to the area of the unit ball, by
/// composite Simpson in θ with node doubling (4096 nodes up to 65536)
/// until two successive ratios agree to 1e-8.
pub fn nordlander_area_ratio(norm: &Norm2, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    let node = |t: f64| {
        let r = norm.radial(t);
        let s = 1.0 - delta(norm, eps, t);
        (r * r, s * s * r * r)
    };
    let mut n = 4096usize;
    let h0 = PI / n as f64;
    let mut values: Vec<(f64, f64)> = (0..=n)
        .into_par_iter()
        .map(|k| node(h0 * k as f64))
        .collect();
    let ratio = |v: &[(f64, f64)]| {
        let m = v.len() - 1;
        let (mut a, mut b) = (0.0, 0.0);
        for (k, &(x, y)) in v.iter().enumerate() {
            let w = if k == 0 || k == m {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            a += w * x;
            b += w * y;
        }
        b / a
    };
    let mut last = ratio(&values);
    while n < 65536 {
        let h = PI / (2 * n) as f64;
        let mids: Vec<(f64, f64)> = (0..n)
            .into_par_iter()
            .map(|k| node(h * (2 * k + 1) as f64))
            .collect();
        let mut merged = Vec::with_capacity(2 * n + 1);
        for k in 0..n {
            merged.push(values[k]);
            merged.push(mids[k]);
        }
        merged.push(values[n]);
        values = merged;
        n *= 2;
        let next = ratio(&values);
        let done = (next - last).abs() <= 1e-8;
        last = next;
        if done {
            break;
        }
    }
    Ok(last)
}

/// Numerical Hilbert test: ellipse representation, or `max_θ |excess(1, θ)| < 1e-8`.
pub fn is_hilbert(norm: &Norm2) -> bool {
    if norm.is_ellipse() {
        return true;
    }
    let e = GridSearch::default().maximize(|t| excess(norm, 1.0, t).abs(), 0.0, PI);
    e.value < HILBERT_TOL
}

/// Moves the endpoints of an ε-chord inward along the sphere so that both
/// `‖x₁ − x₂‖ < ε` and `‖x₁ + x₂‖ < √(4 − ε²)` hold with the largest common slack.
fn perturb_chord(norm: &Norm2, eps: f64, phi: f64, psi: f64) -> (Vec2, Vec2, f64) {
    let target = (4.0 - eps * eps).sqrt();
    let eval = |a: f64, b: f64| {
        let x1 = norm.sphere_point(a);
        let x2 = norm.sphere_point(b);
        let s = (eps - norm.eval(x1 - x2)).min(target - norm.eval(x1 + x2));
        (x1, x2, s)
    };
    let span = 0.25 * (psi - phi);
    let search = GridSearch::with_nodes(512);
    let moves: [(f64, f64); 3] = [(0.0, 1.0), (1.0, 0.0), (1.0, 1.0)];
    let mut best = eval(phi, psi);
    for (wa, wb) in moves {
        let e = search.maximize(|t| eval(phi + wa * t, psi - wb * t).2, 0.0, span);
        let cand = eval(phi + wa * e.arg, psi - wb * e.arg);
        if cand.2 > best.2 {
            best = cand;
        }
    }
    best
}

/// Scans ε ∈ {0.1, …, 1.9} for the first ε at which the excess changes sign by
/// more than 1e-8 on both sides, then builds `x₁, x₂` from the chord at the
/// most negative direction.
pub fn find_gap(norm: &Norm2) -> Result<DayNordlanderGap> {
    find_gap_with(norm, &GridSearch::default())
}

pub fn find_gap_with(norm: &Norm2, search: &GridSearch) -> Result<DayNordlanderGap> {
    if norm.is_ellipse() {
        return Err(Error::NoGap(format!("{norm} is an ellipse norm")));
    }
    let mut any_sign_change = false;
    for k in 1..=19 {
        let eps = 0.1 * k as f64;
        let lo = search.minimize(|t| excess(norm, eps, t), 0.0, PI);
        if lo.value >= -HILBERT_TOL {
            continue;
        }
        let hi = search.maximize(|t| excess(norm, eps, t), 0.0, PI);
        if hi.value <= HILBERT_TOL {
            continue;
        }
        any_sign_change = true;
        let cm = chord_midpoint_unchecked(norm, eps, lo.arg);
        let phi = cm.chord.0.angle();
        let mut psi = cm.chord.1.angle();
        while psi < phi {
            psi += 2.0 * PI;
        }
        let (x1, x2, slack) = perturb_chord(norm, eps, phi, psi);
        if slack < 1e-8 {
            continue;
        }
        return Ok(DayNordlanderGap {
            epsilon: eps,
            theta_below: lo.arg,
            theta_above: hi.arg,
            x1,
            x2,
            margin_below: -lo.value,
            margin_above: hi.value,
            slack,
        });
    }
    let why = if any_sign_change {
        "gap directions found but no chord perturbation reached slack 1e-8"
    } else {
        "excess within 1e-8 of zero for every scanned epsilon"
    };
    Err(Error::NoGap(format!("{norm}: {why}")))
}

/// A direction θ₂ with `(1 − Δ(ε, θ₂))² = 1 − ε²/4` and its chord `(y₁, y₂)`,
/// which then satisfies `‖y₁ − y₂‖ = ε`, `‖y₁ + y₂‖ = √(4 − ε²)`.
pub fn equality_direction(norm: &Norm2, eps: f64) -> Result<(f64, Vec2, Vec2)> {
    equality_direction_with(norm, eps, &GridSearch::default())
}

pub fn equality_direction_with(
    norm: &Norm2,
    eps: f64,
    search: &GridSearch,
) -> Result<(f64, Vec2, Vec2)> {
    check_eps(eps)?;
    let at = |t: f64| {
        let c = chord_midpoint_unchecked(norm, eps, t);
        (t, c.chord.0, c.chord.1)
    };
    if norm.is_ellipse() {
        return Ok(at(0.0));
    }
    let g = |t: f64| excess(norm, eps, t);
    let nodes: Vec<(f64, f64)> = (0..search.nodes)
        .map(|i| {
            let t = search.node(0.0, PI, i);
            (t, g(t))
        })
        .collect();
    if nodes.iter().all(|&(_, v)| v.abs() <= 1e-10) {
        return Ok(at(0.0));
    }
    if let Some(&(t, _)) = nodes.iter().find(|&&(_, v)| v == 0.0) {
        return Ok(at(t));
    }
    for w in nodes.windows(2) {
        let ((a, ga), (b, gb)) = (w[0], w[1]);
        if ga.signum() != gb.signum() {
            let t = brent_root(g, a, b, 1e-15).expect("bracketed");
            let v = g(t);
            if v.abs() <= 1e-10 {
                return Ok(at(t));
            }
        }
    }
    Err(Error::stage(
        "equality_direction",
        format!("no direction with zero excess located for {norm} at eps {eps}"),
    ))
}
