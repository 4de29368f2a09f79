//! Curve data for plots: half arcs, midpoint curves and construction pictures.

use std::f64::consts::PI;
use std::fmt::Write;

use crate::construct::{Case, CounterexampleSeed};
use crate::convexity::profile;
use crate::ellipsoid::john_ellipse;
use crate::error::{Error, Result};
use crate::norm2d::{Norm2, Vec2};
use crate::operators::face;

/// A table of numbers, optionally keyed by a curve name in the first column.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub comment: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<(Option<&'static str>, Vec<f64>)>,
}

impl Table {
    /// CSV with a `#` comment line, a header and 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# {}\n{}\n", self.comment, self.columns.join(","));
        for (label, values) in &self.rows {
            let mut cells: Vec<String> = label.iter().map(|l| l.to_string()).collect();
            cells.extend(values.iter().map(|v| format!("{v:.16e}")));
            writeln!(out, "{}", cells.join(",")).unwrap();
        }
        out
    }
}

fn check_samples(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::input("need at least 2 samples"));
    }
    Ok(())
}

/// Angle of the point where the half arc of the seed starts.
pub fn half_arc_start(seed: &CounterexampleSeed) -> f64 {
    match (seed.trace.case, seed.trace.arc_start) {
        (Case::NonHilbert, Some(s)) => s,
        _ => {
            let inv = seed.t.matrix.inverse().expect("seed operators are invertible");
            inv.apply(seed.y1).angle()
        }
    }
}

/// `t ↦ ‖T γ(start + t)‖` on `[0, π]`.
pub fn half_arc(seed: &CounterexampleSeed, samples: usize) -> Result<Table> {
    check_samples(samples)?;
    let start = half_arc_start(seed);
    let x = &seed.t.domain;
    let rows = (0..samples)
        .map(|k| {
            let t = PI * k as f64 / (samples - 1) as f64;
            let p = x.sphere_point(start + t);
            let q = seed.t.apply(p);
            (None, vec![t, p.x, p.y, q.x, q.y, seed.t.codomain.eval(q)])
        })
        .collect();
    Ok(Table {
        comment: format!(
            "half arc from angle {start:.16e}: t, gamma(t) x y, T gamma(t) x y, norm of T gamma(t)"
        ),
        columns: vec!["t", "x", "y", "tx", "ty", "norm"],
        rows,
    })
}

/// The midpoint curve for chords of length `eps`, next to the unit sphere.
pub fn gamma_eps(norm: &Norm2, eps: f64, samples: usize) -> Result<Table> {
    check_samples(samples)?;
    let prof = profile(norm, eps, samples)?;
    let rows = prof
        .samples
        .iter()
        .map(|s| {
            let p = norm.sphere_point(s.theta);
            (None, vec![s.theta, s.z.x, s.z.y, p.x, p.y, s.delta])
        })
        .collect();
    Ok(Table {
        comment: format!(
            "midpoint curve of {}-chords for {}: theta, midpoint x y, sphere x y, Delta",
            eps,
            norm.label()
        ),
        columns: vec!["theta", "zx", "zy", "sx", "sy", "delta"],
        rows,
    })
}

/// Spheres, the image of the domain sphere, the face arcs of `±y₁*`, the
/// marked points and, for a Euclidean domain, the John ellipse of `Y`.
pub fn construction(seed: &CounterexampleSeed, samples: usize) -> Result<Table> {
    check_samples(samples)?;
    let (x, y) = (&seed.t.domain, &seed.t.codomain);
    let mut rows = Vec::new();
    let circle = |k: usize| 2.0 * PI * k as f64 / samples as f64;
    for k in 0..samples {
        let th = circle(k);
        let p = x.sphere_point(th);
        rows.push((Some("domain_sphere"), vec![th, p.x, p.y]));
    }
    for k in 0..samples {
        let th = circle(k);
        let p = y.sphere_point(th);
        rows.push((Some("codomain_sphere"), vec![th, p.x, p.y]));
    }
    for k in 0..samples {
        let th = circle(k);
        let p = seed.t.apply(x.sphere_point(th));
        rows.push((Some("image"), vec![th, p.x, p.y]));
    }
    for (name, f) in [("face_plus", seed.y1star), ("face_minus", seed.y1star.scale(-1.0))] {
        let arc = face(y, f)?;
        for k in 0..samples {
            let th = arc.lo + arc.width() * k as f64 / (samples - 1) as f64;
            let p = y.sphere_point(th);
            rows.push((Some(name), vec![th, p.x, p.y]));
        }
    }
    if seed.trace.case == Case::Hilbert {
        let john = john_ellipse(y)?;
        for k in 0..samples {
            let th = circle(k);
            let p = john.a.apply(Vec2::unit(th));
            rows.push((Some("john"), vec![th, p.x, p.y]));
        }
    }
    for (name, p) in [("x0", seed.x0), ("y1", seed.y1), ("y2", seed.y2)] {
        rows.push((Some(name), vec![p.angle(), p.x, p.y]));
    }
    Ok(Table {
        comment: format!(
            "construction for {} -> {}: curve, parameter, x, y",
            x.label(),
            y.label()
        ),
        columns: vec!["curve", "param", "x", "y"],
        rows,
    })
}
