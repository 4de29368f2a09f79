//! The family `T_λ = P_λ T` with `P(y) = y₁*(y) y₁`, and its independent
//! brute-force verification.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::CounterexampleSeed;
use crate::error::{Error, Result};
use crate::norm2d::{Mat2, Vec2};
use crate::operators::{attaining_set, dist_to_arc, operator_norm, ArcInterval, Operator2};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const VERIFY_SAMPLES: usize = 1_000_000;

/// `{1 − 2⁻ⁿ : n = 1..20}`.
pub fn default_lambdas() -> Vec<f64> {
    (1..=20).map(|n| 1.0 - 0.5f64.powi(n)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttainingReport {
    /// Attaining arcs modulo π.
    pub arcs: Vec<ArcInterval>,
    /// `min ‖x ∓ x₀‖` over the arcs.
    pub min_dist: f64,
    /// `max (1 − |y₁*(T x)|)` over arc samples.
    pub face_gap: f64,
    pub in_faces: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub seed: CounterexampleSeed,
    pub tol: f64,
    pub lambdas: Vec<f64>,
    /// Matrices of `T_λ`, after renormalization.
    pub operators: Vec<Mat2>,
    /// Factor applied to each `P_λ T` (1 when none was needed).
    pub renormalization: Vec<f64>,
    pub values: Vec<f64>,
    pub delta: f64,
    pub attaining: Vec<AttainingReport>,
    pub verified: bool,
}

impl Certificate {
    pub fn operator(&self, k: usize) -> Operator2 {
        Operator2 {
            matrix: self.operators[k],
            ..self.seed.t.clone()
        }
    }
}

fn check_lambdas(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(Error::input("empty lambda schedule"));
    }
    if lambdas.iter().any(|l| !(0.0..1.0).contains(l)) {
        return Err(Error::input("lambdas must lie in [0, 1)"));
    }
    if lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::input("lambdas must be strictly ascending"));
    }
    Ok(())
}

pub fn p2_failure_family(seed: &CounterexampleSeed, lambdas: &[f64], tol: f64) -> Result<Certificate> {
    check_lambdas(lambdas)?;
    if !(tol > 0.0 && tol <= 1e-4) {
        return Err(Error::input(format!("tol {tol} outside (0, 1e-4]")));
    }
    let t = &seed.t;
    let x = &t.domain;
    let proj = Mat2::outer(seed.y1, seed.y1star.as_vec());
    let t_norm = operator_norm(t).0;
    let rows: Vec<Result<(Mat2, f64, f64, AttainingReport)>> = lambdas
        .par_iter()
        .map(|&lam| {
            let p = Mat2::IDENTITY.scale(lam).add(&proj.scale(1.0 - lam));
            let mut op = Operator2::new(p.mul(&t.matrix), x.clone(), t.codomain.clone())?;
            let n = operator_norm(&op).0;
            let factor = if (n - 1.0).abs() > 1e-9 { 1.0 / n } else { 1.0 };
            op = op.scaled(factor);
            let arcs = attaining_set(&op, tol).map_err(|e| Error::stage("p2_failure_family", e.to_string()))?;
            let min_dist = arcs
                .iter()
                .map(|a| dist_to_arc(x, seed.x0, a).min(dist_to_arc(x, -seed.x0, a)))
                .fold(f64::INFINITY, f64::min);
            let face_gap = arcs
                .iter()
                .flat_map(|a| (0..=64).map(move |k| a.lo + a.width() * k as f64 / 64.0))
                .map(|th| 1.0 - seed.y1star.apply(t.apply(x.sphere_point(th))).abs())
                .fold(f64::NEG_INFINITY, f64::max);
            // From 1 − tol ≤ λ‖Tx‖ + (1 − λ)|y₁*(Tx)| with ‖Tx‖ ≤ ‖T‖.
            let bound = (tol + lam * (t_norm - 1.0).max(0.0)) / (1.0 - lam);
            let report = AttainingReport {
                arcs,
                min_dist,
                face_gap,
                in_faces: face_gap <= 10.0 * bound + 1e-12,
            };
            Ok((op.matrix, factor, t.codomain.eval(op.apply(seed.x0)), report))
        })
        .collect();
    let mut cert = Certificate {
        seed: seed.clone(),
        tol,
        lambdas: lambdas.to_vec(),
        operators: Vec::new(),
        renormalization: Vec::new(),
        values: Vec::new(),
        delta: seed.delta,
        attaining: Vec::new(),
        verified: false,
    };
    for r in rows {
        let (m, f, v, rep) = r?;
        cert.operators.push(m);
        cert.renormalization.push(f);
        cert.values.push(v);
        cert.attaining.push(rep);
    }
    cert.verified = cert.values.windows(2).all(|w| w[1] >= w[0] - 1e-12)
        && cert.attaining.iter().all(|a| a.min_dist > cert.delta && a.in_faces);
    Ok(cert)
}

/// Clause-by-clause result of the brute-force re-check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub samples: usize,
    pub norms: Vec<f64>,
    pub values: Vec<f64>,
    pub distances: Vec<f64>,
    pub norm_ok: bool,
    pub monotone_ok: bool,
    pub limit_ok: bool,
    pub distance_ok: bool,
    pub pass: bool,
}

pub fn verify_certificate(cert: &Certificate) -> VerifyReport {
    verify_certificate_with(cert, VERIFY_SAMPLES)
}

/// Re-measures every `T_λ` on `samples` sphere points in `[0, π)` using only
/// norm evaluations. The attaining band is `{‖T_λ x‖ ≥ 1 − tol}` together with
/// `{‖T_λ x‖ ≥ max − tol}`, so a slightly off-one maximum still has a band.
pub fn verify_certificate_with(cert: &Certificate, samples: usize) -> VerifyReport {
    let x = &cert.seed.t.domain;
    let y = &cert.seed.t.codomain;
    let x0 = cert.seed.x0;
    let sphere: Vec<Vec2> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let u = Vec2::unit(PI * k as f64 / samples as f64);
            u / x.eval(u)
        })
        .collect();
    let mut norms = Vec::new();
    let mut values = Vec::new();
    let mut distances = Vec::new();
    for m in &cert.operators {
        let g: Vec<f64> = sphere.par_iter().map(|&p| y.eval(m.apply(p))).collect();
        let max = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let thr = (1.0 - cert.tol).min(max - cert.tol);
        let d = g
            .par_iter()
            .zip(sphere.par_iter())
            .filter(|(v, _)| **v >= thr)
            .map(|(_, &p)| x.eval(p - x0).min(x.eval(p + x0)))
            .min_by(f64::total_cmp)
            .unwrap_or(f64::INFINITY);
        norms.push(max);
        values.push(y.eval(m.apply(x0)));
        distances.push(d);
    }
    let norm_ok = !norms.is_empty() && norms.iter().all(|n| (n - 1.0).abs() <= 1e-6);
    let monotone_ok = values.windows(2).all(|w| w[1] >= w[0] - 1e-12);
    let limit_ok = values.last().is_some_and(|v| *v >= 1.0 - 1e-4);
    let distance_ok = distances
        .iter()
        .all(|d| *d > cert.delta * (1.0 - 1e-3));
    VerifyReport {
        samples,
        norms,
        values,
        distances,
        norm_ok,
        monotone_ok,
        limit_ok,
        distance_ok,
        pass: norm_ok && monotone_ok && limit_ok && distance_ok,
    }
}

#[cfg(test)]
mod tests {
    use super::super::build_counterexample;
    use super::*;
    use crate::norm2d::Norm2;

    #[test]
    fn square_pair_certificate_verifies() {
        let seed = build_counterexample(&Norm2::linf(), &Norm2::linf()).unwrap();
        let cert = p2_failure_family(&seed, &default_lambdas(), DEFAULT_TOL).unwrap();
        assert!(cert.verified, "{:?}", cert.attaining);
        let r = verify_certificate_with(&cert, 200_000);
        assert!(r.pass, "{r:?}");
        assert!(*cert.values.last().unwrap() >= 1.0 - 1e-4);
    }

    #[test]
    fn lambda_zero_is_rank_one() {
        let seed = build_counterexample(&Norm2::l2(), &Norm2::linf()).unwrap();
        let cert = p2_failure_family(&seed, &[0.0, 0.5], DEFAULT_TOL).unwrap();
        assert!(cert.operators[0].det().abs() < 1e-12);
        let v0 = seed.y1star.apply(seed.y2).abs();
        assert!((cert.values[0] - v0).abs() < 1e-12);
        let y = &seed.t.codomain;
        let v_half = y.eval(seed.y2 * 0.5 + seed.y1 * (0.5 * seed.y1star.apply(seed.y2)));
        assert!((cert.values[1] - v_half).abs() < 1e-12);
    }

    #[test]
    fn tampering_is_detected() {
        let seed = build_counterexample(&Norm2::l2(), &Norm2::linf()).unwrap();
        let cert = p2_failure_family(&seed, &default_lambdas(), DEFAULT_TOL).unwrap();
        assert!(verify_certificate_with(&cert, 100_000).pass);
        let mut moved = cert.clone();
        let arc = moved.attaining.last().unwrap().arcs[0];
        moved.seed.x0 = seed.t.domain.sphere_point(arc.lo);
        let r = verify_certificate_with(&moved, 100_000);
        assert!(!r.distance_ok && !r.pass);
        let mut scaled = cert.clone();
        scaled.operators.iter_mut().for_each(|m| *m = m.scale(1.01));
        let r = verify_certificate_with(&scaled, 100_000);
        assert!(!r.norm_ok && !r.pass);
    }

    #[test]
    fn bad_schedules_rejected() {
        let seed = build_counterexample(&Norm2::l2(), &Norm2::linf()).unwrap();
        assert!(p2_failure_family(&seed, &[0.5, 0.25], DEFAULT_TOL).is_err());
        assert!(p2_failure_family(&seed, &[1.0], DEFAULT_TOL).is_err());
        assert!(p2_failure_family(&seed, &[0.5], 1e-3).is_err());
    }
}
