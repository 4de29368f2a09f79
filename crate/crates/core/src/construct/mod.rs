//! The counterexample pipeline: a norm-one operator whose image touches the
//! unit sphere at two points separated from each other's faces, and the
//! family `T_λ` built from it.

mod certificate;
mod half_arc;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use certificate::{
    default_lambdas, p2_failure_family, verify_certificate, verify_certificate_with,
    AttainingReport, Certificate, VerifyReport, DEFAULT_TOL, VERIFY_SAMPLES,
};
pub use half_arc::{
    case2_initial_operator, half_arc_extrema, subcase1_finalize, subcase2_finalize,
    HalfArcExtrema, InitialOperator, Subcase2,
};

use crate::convexity::find_gap_with;
use crate::ellipsoid::case1_operator;
use crate::error::{Error, Result};
use crate::norm2d::{Functional2, Mat2, Norm2, Vec2};
use crate::operators::{dist_to_face_union, operator_norm_with, FacePair, Operator2};
use crate::search::GridSearch;

/// Safety margin subtracted from the measured separation.
pub const DELTA_MARGIN: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    Hilbert,
    NonHilbert,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subcase {
    AEqualsB,
    ALessB,
    None,
}

/// Everything the construction passed through. Angles are polar angles of the
/// domain; `arc_start` with `contact` and `dips` describe the half arc on which
/// `T` touches the sphere at `0`, `contact` and `π`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionTrace {
    pub case: Case,
    pub subcase: Subcase,
    pub grid: usize,
    pub epsilon: Option<f64>,
    pub x1: Option<Vec2>,
    pub x2: Option<Vec2>,
    pub y1: Option<Vec2>,
    pub y2: Option<Vec2>,
    pub theta2: Option<f64>,
    pub shrink: Option<f64>,
    pub switched: bool,
    pub gamma1_start: Option<f64>,
    pub t: Option<[f64; 3]>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub s: Option<f64>,
    pub lambda0: Option<f64>,
    pub arc_start: Option<f64>,
    pub contact: Option<f64>,
    pub dips: Option<[f64; 2]>,
    pub s_op: Option<Mat2>,
    pub t1_op: Option<Mat2>,
}

impl ConstructionTrace {
    fn hilbert(grid: usize) -> Self {
        ConstructionTrace {
            case: Case::Hilbert,
            subcase: Subcase::None,
            grid,
            epsilon: None,
            x1: None,
            x2: None,
            y1: None,
            y2: None,
            theta2: None,
            shrink: None,
            switched: false,
            gamma1_start: None,
            t: None,
            a: None,
            b: None,
            s: None,
            lambda0: None,
            arc_start: None,
            contact: None,
            dips: None,
            s_op: None,
            t1_op: None,
        }
    }

    /// Re-checks the recorded strict inequalities of a non-Euclidean run from scratch.
    pub fn validate(&self, x: &Norm2, y: &Norm2) -> Result<()> {
        if self.case == Case::Hilbert {
            return Ok(());
        }
        let missing = || Error::stage("trace", "non-Euclidean trace is incomplete");
        let (x1, x2) = (self.x1.ok_or_else(missing)?, self.x2.ok_or_else(missing)?);
        let s = self.s_op.ok_or_else(missing)?;
        let img = |v: Vec2| y.eval(s.apply(v));
        let checks = [
            ("|S x1| < 1", img(x1) < 1.0),
            ("|S x2| < 1", img(x2) < 1.0),
            ("|S(x1-x2)| > |x1-x2|", img(x1 - x2) > x.eval(x1 - x2)),
            ("|S(x1+x2)| > |x1+x2|", img(x1 + x2) > x.eval(x1 + x2)),
            (
                "a <= b",
                self.a.ok_or_else(missing)? <= self.b.ok_or_else(missing)? + 1e-10,
            ),
        ];
        match checks.iter().find(|c| !c.1) {
            Some((what, _)) => Err(Error::stage("trace", format!("{what} fails on re-check"))),
            None => Ok(()),
        }
    }
}

/// A norm-one `T` with `T x₀ = y₂` and `y₂` at distance `separation` from
/// `F(y₁*) ∪ F(−y₁*)`, where `y₁*` supports `y₁ ∈ T(S_X)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleSeed {
    #[serde(rename = "T")]
    pub t: Operator2,
    pub x0: Vec2,
    pub y1: Vec2,
    pub y2: Vec2,
    pub y1star: Functional2,
    pub separation: f64,
    pub delta: f64,
    pub trace: ConstructionTrace,
}

/// Whether `T γ(θ₀ + θ_c)` avoids both faces of every extreme supporting
/// functional at `T γ(θ₀)`, under the three-contact hypothesis on the half arc.
pub fn check_prop_2_3(t: &Operator2, theta0: f64, theta_c: f64, theta1: f64, theta2: f64) -> Result<bool> {
    let g = |s: f64| t.sphere_image_norm(theta0 + s);
    let hyp = |ok: bool, what: &str| {
        if ok {
            Ok(())
        } else {
            Err(Error::input(format!("three-contact hypothesis fails: {what}")))
        }
    };
    hyp(
        0.0 <= theta1 && theta1 <= theta_c && theta_c <= theta2 && theta2 <= PI,
        "need 0 <= theta1 <= theta_c <= theta2 <= pi",
    )?;
    hyp((operator_norm_with(t, &GridSearch::default()).0 - 1.0).abs() <= 1e-8, "norm is not 1")?;
    hyp((g(0.0) - 1.0).abs() <= 1e-8, "no contact at 0")?;
    hyp((g(theta_c) - 1.0).abs() <= 1e-8, "no contact at theta_c")?;
    hyp((g(PI) - 1.0).abs() <= 1e-8, "no contact at pi")?;
    hyp(g(theta1) <= 1.0 - 1e-8, "theta1 is not interior")?;
    hyp(g(theta2) <= 1.0 - 1e-8, "theta2 is not interior")?;
    let y = &t.codomain;
    let base = t.apply(t.domain.sphere_point(theta0));
    let yc = t.apply(t.domain.sphere_point(theta0 + theta_c));
    for f in y.supporting_functionals(base / y.eval(base))? {
        let fp = FacePair::new(y, f)?;
        if dist_to_face_union(y, yc, &fp) <= 1e-9 {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn build_counterexample(x: &Norm2, y: &Norm2) -> Result<CounterexampleSeed> {
    build_counterexample_with(x, y, &GridSearch::default())
}

/// Through the John ellipse when `x` is Euclidean, through a convexity gap otherwise.
pub fn build_counterexample_with(x: &Norm2, y: &Norm2, search: &GridSearch) -> Result<CounterexampleSeed> {
    if x.is_ellipse() {
        return build_case1(x, y, search.nodes);
    }
    match build_case2(x, y, search) {
        Err(Error::Stage { stage: "half_arc_extrema", .. }) => {
            let fine = GridSearch { nodes: search.nodes * 8, ..*search };
            build_case2(x, y, &fine)
        }
        other => other,
    }
}

fn build_case1(x: &Norm2, y: &Norm2, grid: usize) -> Result<CounterexampleSeed> {
    let c = case1_operator(x, y)?;
    let x0 = c.x0 / x.eval(c.x0);
    let mut trace = ConstructionTrace::hilbert(grid);
    trace.y1 = Some(c.y1);
    trace.y2 = Some(c.y2);
    finalize(c.t, x0, c.y1, c.y2, trace)
}

fn build_case2(x: &Norm2, y: &Norm2, search: &GridSearch) -> Result<CounterexampleSeed> {
    let gap = find_gap_with(x, search)?;
    let init = case2_initial_operator(x, y, &gap, search)?;
    let mut trace = ConstructionTrace::hilbert(search.nodes);
    trace.case = Case::NonHilbert;
    trace.epsilon = Some(gap.epsilon);
    trace.x1 = Some(gap.x1);
    trace.x2 = Some(gap.x2);
    trace.y1 = Some(init.y1);
    trace.y2 = Some(init.y2);
    trace.theta2 = Some(init.theta2);
    trace.shrink = Some(init.shrink);
    trace.s_op = Some(init.s.matrix);

    let mut start = (gap.x1 + gap.x2).angle();
    let mut ext = half_arc_extrema(&init.s, start, search)?;
    if ext.a > ext.b {
        trace.switched = true;
        start = (gap.x1 - gap.x2).angle();
        ext = half_arc_extrema(&init.s, start, search)?;
        if ext.a > ext.b + 1e-10 {
            return Err(Error::stage("half_arc_extrema", "a > b on both half arcs"));
        }
    }
    trace.gamma1_start = Some(start);
    trace.t = Some([ext.t1, ext.t2, ext.t3]);
    trace.a = Some(ext.a);
    trace.b = Some(ext.b);
    trace.s = Some(ext.s_outer);

    let (t, arc_start, contact, dips) = if (ext.a - ext.b).abs() <= 1e-10 {
        trace.subcase = Subcase::AEqualsB;
        let (t, arc_start, contact, dips) = subcase1_finalize(&init.s, start, &ext);
        (t, arc_start, contact, dips)
    } else {
        trace.subcase = Subcase::ALessB;
        let t1 = init.s.scaled(1.0 / ext.a);
        trace.t1_op = Some(t1.matrix);
        let (s1, s3) = if ext.s_outer <= ext.t1 {
            (ext.t1 - ext.s_outer, ext.t3 - ext.s_outer)
        } else {
            (ext.t1 + PI - ext.s_outer, ext.t3 + PI - ext.s_outer)
        };
        let arc_start = start + ext.s_outer;
        let sub = subcase2_finalize(&t1, arc_start, s1, s3, search)?;
        trace.lambda0 = Some(sub.lambda0);
        (sub.t, arc_start, sub.s2, [s1, s3])
    };
    trace.arc_start = Some(arc_start);
    trace.contact = Some(contact);
    trace.dips = Some(dips);
    trace.validate(x, y)?;
    if !check_prop_2_3(&t, arc_start, contact, dips[0], dips[1])
        .map_err(|e| Error::stage("check_prop_2_3", e.to_string()))?
    {
        return Err(Error::stage("check_prop_2_3", "contact lies in a face of y1*"));
    }
    let x0 = x.sphere_point(arc_start + contact);
    let y1 = t.apply(x.sphere_point(arc_start));
    let y2 = t.apply(x0);
    finalize(t, x0, y1, y2, trace)
}

fn finalize(t: Operator2, x0: Vec2, y1: Vec2, y2: Vec2, trace: ConstructionTrace) -> Result<CounterexampleSeed> {
    let y = &t.codomain;
    let y1star = y
        .supporting_functional(y1 / y.eval(y1))
        .map_err(|e| Error::stage("finalize", e.to_string()))?;
    let fp = FacePair::new(y, y1star)?;
    let separation = dist_to_face_union(y, y2, &fp);
    let delta = separation - DELTA_MARGIN;
    if delta <= 1e-8 {
        return Err(Error::stage(
            "finalize",
            format!("separation {separation:e} leaves no room for the margin"),
        ));
    }
    Ok(CounterexampleSeed {
        t,
        x0,
        y1,
        y2,
        y1star,
        separation,
        delta,
        trace,
    })
}
