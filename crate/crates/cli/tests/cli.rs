use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use planenorm::construct::{Case, Certificate};
use planenorm::convexity::hilbert_modulus;
use planenorm::Norm2;

const LINF: &str = r#"{"type":"lp","p":"inf"}"#;
const L2: &str = r#"{"type":"lp","p":2}"#;
const SQUARE: &str = r#"{"type":"polygon","vertices":[[1,1],[-1,1],[-1,-1],[1,-1]]}"#;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_planenorm")).args(args).output().unwrap()
}

fn run_env(args: &[&str], key: &str, val: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_planenorm"))
        .args(args)
        .env(key, val)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Data rows of a CSV written by the tool, skipping the comment and header.
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

fn construct_to(dir: &Path, x: &str, y: &str) -> (Option<i32>, Certificate) {
    let out = dir.join("cert.json");
    let o = run(&["construct", "--norm-x", x, "--norm-y", y, "--out", out.to_str().unwrap()]);
    let cert = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    (o.status.code(), cert)
}

#[test]
fn construct_square_pair_and_certify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (code, cert) = construct_to(dir.path(), LINF, LINF);
    assert_eq!(code, Some(0));
    assert!(cert.delta > 0.0);
    let o = run(&["certify", dir.path().join("cert.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("result       PASS"));
}

#[test]
fn euclidean_domain_uses_the_john_ellipse() {
    let dir = tempfile::tempdir().unwrap();
    let (code, cert) = construct_to(dir.path(), L2, SQUARE);
    assert_eq!(code, Some(0));
    assert_eq!(cert.seed.trace.case, Case::Hilbert);
}

#[test]
fn invalid_inputs_exit_2() {
    let bad = r#"{"type":"polygon","vertices":[[1,0],[0,1],[-1,0.2],[0,-1]]}"#;
    let o = run(&["construct", "--norm-x", bad, "--norm-y", LINF]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("symmetric"));
    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk.json");
    fs::write(&junk, "{not json").unwrap();
    assert_eq!(run(&["certify", junk.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["certify", "/nonexistent/cert.json"]).status.code(), Some(2));
    assert_eq!(run(&["construct", "--norm-x", L2, "--norm-y", LINF, "--tol", "0.01"]).status.code(), Some(2));
    assert_eq!(run(&["construct", "--norm-x", L2, "--norm-y", LINF, "--grid", "3000"]).status.code(), Some(2));
    assert_eq!(run(&["figure-data", "--kind", "pie", "--norm-x", L2]).status.code(), Some(2));
    assert_eq!(run_env(&["john", "--norm", L2], "PLANENORM_THREADS", "zero").status.code(), Some(2));
}

#[test]
fn stage_failures_exit_3_with_the_stage_name() {
    // This domain is too close to Euclidean for the shrink search.
    let o = run(&["construct", "--norm-x", r#"{"type":"lp","p":2.0000001}"#, "--norm-y", LINF]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("stage `case2_initial_operator`"));
}

#[test]
fn modulus_tables() {
    let o = run(&["modulus", "--norm", L2, "--eps", "0.5,1,1.5"]);
    assert_eq!(o.status.code(), Some(0));
    for r in rows(&stdout(&o)) {
        assert!(num(&r[3]).abs() <= 1e-7);
    }
    let o = run(&["modulus", "--norm", LINF, "--eps", "1,3"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("skipping"));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 1);
    assert!(num(&r[0][1]).abs() <= 1e-12);
    assert!((num(&r[0][3]) - (1.0 - 3f64.sqrt() / 2.0)).abs() <= 1e-12);
}

/// Least midpoint defect over chords of length `eps`, by scanning pairs of
/// sphere points of the 2D `ℓ₃` norm.
fn chord_oracle(eps: f64) -> f64 {
    let n = Norm2::lp(3.0).unwrap();
    let m = 20_000;
    let pts: Vec<_> = (0..m).map(|k| n.sphere_point(std::f64::consts::PI * 2.0 * k as f64 / m as f64)).collect();
    let mut best = f64::INFINITY;
    for (i, p) in pts.iter().enumerate().take(m / 2) {
        // Partner by bisection on the chord length along the circle.
        let (mut lo, mut hi) = (i, i + m / 2);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if n.eval(*p - pts[mid % m]) < eps {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let q = pts[lo % m];
        let mid = (*p + q) * 0.5;
        best = best.min(1.0 - n.eval(mid));
    }
    best
}

#[test]
fn l3_has_strict_gaps_matching_a_chord_oracle() {
    let o = run(&["modulus", "--norm", r#"{"type":"lp","p":3}"#, "--eps", "0.5,1,1.5"]);
    for r in rows(&stdout(&o)) {
        let (e, dx, dh, gap) = (num(&r[0]), num(&r[1]), num(&r[2]), num(&r[3]));
        assert!(gap > 0.0 && dx > 0.0 && gap < dh);
        assert_eq!(dh, hilbert_modulus(e));
        assert!((dx - chord_oracle(e)).abs() <= 1e-3, "{e}: {dx} vs {}", chord_oracle(e));
    }
}

#[test]
fn figure_data_examples() {
    let dir = tempfile::tempdir().unwrap();
    construct_to(dir.path(), LINF, LINF);
    let cert = dir.path().join("cert.json");
    let o = run(&["figure-data", "--kind", "half-arc", "--cert", cert.to_str().unwrap(), "--samples", "4097"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("# "));
    let v: Vec<f64> = rows(&text).iter().map(|r| num(&r[5])).collect();
    assert!((v[0] - 1.0).abs() < 1e-9 && (v[4096] - 1.0).abs() < 1e-9);
    assert!(v.iter().cloned().fold(0.0, f64::max) <= 1.0 + 1e-9);
    let near_one = v.iter().filter(|x| **x > 1.0 - 1e-6).count();
    assert!(near_one >= 3);

    let o = run(&["figure-data", "--kind", "gamma-eps", "--norm-x", L2, "--eps", "1", "--samples", "100"]);
    for r in rows(&stdout(&o)) {
        assert!((num(&r[1]).hypot(num(&r[2])) - 3f64.sqrt() / 2.0).abs() < 1e-9);
    }

    let o = run(&["figure-data", "--kind", "construction", "--norm-x", L2, "--norm-y", SQUARE, "--samples", "64"]);
    let r = rows(&stdout(&o));
    let john: Vec<_> = r.iter().filter(|r| r[0] == "john").collect();
    assert_eq!(john.len(), 64);
    assert!(john.iter().all(|r| (num(&r[2]).hypot(num(&r[3])) - 1.0).abs() < 1e-9));
    assert!(r.iter().any(|r| r[0] == "codomain_sphere"));
}

#[test]
fn outputs_are_deterministic_and_thread_independent() {
    let a = run(&["construct", "--norm-x", LINF, "--norm-y", r#"{"type":"lp","p":1}"#]);
    let b = run_env(&["construct", "--norm-x", LINF, "--norm-y", r#"{"type":"lp","p":1}"#], "PLANENORM_THREADS", "1");
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn tampered_certificates_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let (_, cert) = construct_to(dir.path(), L2, LINF);
    let mut scaled = cert.clone();
    scaled.operators.iter_mut().for_each(|m| *m = m.scale(1.01));
    let p = dir.path().join("scaled.json");
    fs::write(&p, serde_json::to_string(&scaled).unwrap()).unwrap();
    let o = run(&["certify", p.to_str().unwrap(), "--samples", "100000"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("norms        FAIL"));
}

#[test]
fn ambient_cube_lift() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lift.json");
    let o = run(&[
        "construct",
        "--ambient",
        r#"{"type":"lp","dim":3,"p":"inf"}"#,
        "--x0-basis",
        "0,0,1",
        "--y0-basis",
        "1,0,0",
        "--y0-basis",
        "0,1,0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["lift"]["pass"], true);
    let ratio = v["lift"]["delta_prime"].as_f64().unwrap() / v["lift"]["delta"].as_f64().unwrap();
    assert!(ratio >= 0.9);
    let o = run(&["construct", "--ambient", r#"{"type":"lp","dim":3,"p":"inf"}"#, "--x0-basis", "0,0,1", "--x0-basis", "0,1,0", "--y0-basis", "1,0,0", "--y0-basis", "0,1,0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn john_command_prints_the_hexagon_ellipse() {
    let hex = r#"{"type":"polygon","vertices":[[1,0],[0.5,0.8660254037844386],[-0.5,0.8660254037844386]]}"#;
    let o = run(&["john", "--norm", hex]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["det"].as_f64().unwrap() - 0.75).abs() < 1e-9);
}
