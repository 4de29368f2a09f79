use std::fs;
use std::io::Write;

use serde::de::DeserializeOwned;

use planenorm::construct::{
    build_counterexample_with, p2_failure_family, verify_certificate_with, Certificate,
    CounterexampleSeed, VerifyReport, VERIFY_SAMPLES,
};
use planenorm::convexity::{hilbert_modulus, modulus_of_convexity};
use planenorm::ellipsoid::john_ellipse;
use planenorm::figures::{construction, gamma_eps, half_arc, Table};
use planenorm::quotient::{lift_certificate, quotient_norm, restrict_codomain, LiftReport, NormN, LIFT_SAMPLES};
use planenorm::search::GridSearch;
use planenorm::Norm2;

use crate::config::{RunArgs, RunConfig};

pub const EXIT_PASS: u8 = 0;
pub const EXIT_VERIFY: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_STAGE: u8 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<planenorm::Error> for CliError {
    fn from(e: planenorm::Error) -> Self {
        CliError {
            code: if e.is_validation() { EXIT_INPUT } else { EXIT_STAGE },
            message: match e {
                planenorm::Error::NoGap(_) => format!("stage `find_gap` failed: {e}"),
                _ => e.to_string(),
            },
        }
    }
}

/// Reads JSON from a file, or takes the argument itself when it looks like JSON.
fn load<T: DeserializeOwned>(arg: &str, what: &str) -> CliResult<T> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(|e| CliError::input(format!("cannot read {what} {arg}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| CliError::input(format!("malformed {what} {arg}: {e}")))
}

fn emit(out: Option<&str>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::input(format!("cannot write {path}: {e}"))),
        None => match std::io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                Err(CliError::input(format!("cannot write to stdout: {e}")))
            }
            _ => Ok(()),
        },
    }
}

fn parse_vector(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|c| {
            c.trim()
                .parse::<f64>()
                .map_err(|_| CliError::input(format!("bad vector component {c:?} in {s:?}")))
        })
        .collect()
}

fn verify_lines(r: &VerifyReport) -> String {
    let flag = |ok: bool| if ok { "ok" } else { "FAIL" };
    let worst_norm = r.norms.iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max);
    let min_dist = r.distances.iter().copied().fold(f64::INFINITY, f64::min);
    format!(
        "samples      {}\nnorms        {}  max |norm - 1| = {:e}\nmonotone     {}\nlimit        {}  last value = {}\ndistance     {}  min distance = {}\nresult       {}\n",
        r.samples,
        flag(r.norm_ok),
        worst_norm,
        flag(r.monotone_ok),
        flag(r.limit_ok),
        r.values.last().copied().unwrap_or(f64::NAN),
        flag(r.distance_ok),
        min_dist,
        if r.pass { "PASS" } else { "FAIL" }
    )
}

fn build(x: &Norm2, y: &Norm2, cfg: &RunConfig, verbose: bool) -> CliResult<(Certificate, VerifyReport)> {
    let seed = build_counterexample_with(x, y, &GridSearch::with_nodes(cfg.grid))?;
    if verbose {
        eprintln!(
            "seed: case {:?}, subcase {:?}, delta {}, grid {}",
            seed.trace.case, seed.trace.subcase, seed.delta, seed.trace.grid
        );
    }
    let cert = p2_failure_family(&seed, &cfg.lambdas, cfg.tol)?;
    let report = verify_certificate_with(&cert, VERIFY_SAMPLES);
    if verbose {
        eprint!("{}", verify_lines(&report));
    }
    Ok((cert, report))
}

pub fn construct(norm_x: &str, norm_y: &str, run: &RunArgs, verbose: bool) -> CliResult<u8> {
    let cfg = run.validate()?;
    let x: Norm2 = load(norm_x, "norm")?;
    let y: Norm2 = load(norm_y, "norm")?;
    let (cert, report) = build(&x, &y, &cfg, verbose)?;
    let json = serde_json::to_string_pretty(&cert).expect("certificates serialize");
    emit(cfg.out.as_deref(), &(json + "\n"))?;
    Ok(if report.pass { EXIT_PASS } else { EXIT_VERIFY })
}

pub fn construct_ambient(
    ambient: &[String],
    x0_basis: &[String],
    y0_basis: &[String],
    run: &RunArgs,
    verbose: bool,
) -> CliResult<u8> {
    let cfg = run.validate()?;
    let (ax, ay): (NormN, NormN) = match ambient {
        [a] => {
            let n: NormN = load(a, "ambient norm")?;
            (n.clone(), n)
        }
        [a, b] => (load(a, "ambient norm")?, load(b, "ambient norm")?),
        _ => return Err(CliError::input("--ambient takes one or two norms")),
    };
    let x0: Vec<Vec<f64>> = x0_basis.iter().map(|s| parse_vector(s)).collect::<CliResult<_>>()?;
    let y0: Vec<Vec<f64>> = y0_basis.iter().map(|s| parse_vector(s)).collect::<CliResult<_>>()?;
    let px = quotient_norm(&ax, &x0)?;
    let ry = restrict_codomain(&ay, &y0)?;
    if verbose {
        eprintln!(
            "quotient {} (error {:e}), restriction {} (error {:e})",
            px.induced.label(),
            px.error_bound,
            ry.norm.label(),
            ry.error_bound
        );
    }
    let (cert, report) = build(&px.induced, &ry.norm, &cfg, verbose)?;
    let lift = lift_certificate(&px, &ry, &cert, LIFT_SAMPLES)?;
    eprint!("{}", lift_lines(&lift));
    #[derive(serde::Serialize)]
    struct Out<'a> {
        certificate: &'a Certificate,
        lift: &'a LiftReport,
    }
    let json = serde_json::to_string_pretty(&Out {
        certificate: &cert,
        lift: &lift,
    })
    .expect("reports serialize");
    emit(cfg.out.as_deref(), &(json + "\n"))?;
    Ok(if report.pass && lift.pass { EXIT_PASS } else { EXIT_VERIFY })
}

fn lift_lines(r: &LiftReport) -> String {
    let flag = |ok: bool| if ok { "ok" } else { "FAIL" };
    format!(
        "lift         dim {} -> {}, slack {:e}, delta {} -> {}\nlift norms   {}\nlift values  {}  monotone {}\nlift dist    {}  min = {}\nlift result  {}\n",
        r.dim_x,
        r.dim_y,
        r.slack,
        r.delta,
        r.delta_prime,
        flag(r.norm_ok),
        flag(r.limit_ok),
        flag(r.monotone_ok),
        flag(r.distance_ok),
        r.distances.iter().copied().fold(f64::INFINITY, f64::min),
        if r.pass { "PASS" } else { "FAIL" }
    )
}

pub fn certify(path: &str, samples: usize) -> CliResult<u8> {
    let cert: Certificate = load(path, "certificate")?;
    if cert.operators.is_empty() || cert.operators.len() != cert.lambdas.len() {
        return Err(CliError::input("certificate has no operators or a mismatched lambda list"));
    }
    if samples < 2 {
        return Err(CliError::input("--samples must be at least 2"));
    }
    let report = verify_certificate_with(&cert, samples);
    print!("{}", verify_lines(&report));
    Ok(if report.pass { EXIT_PASS } else { EXIT_VERIFY })
}

pub fn modulus(norm: &str, eps: &[f64], out: Option<&str>) -> CliResult<u8> {
    let norm: Norm2 = load(norm, "norm")?;
    let mut table = Table {
        comment: format!("modulus of convexity of {}: eps, delta_X, delta_H, delta_H - delta_X", norm.label()),
        columns: vec!["eps", "delta_x", "delta_h", "gap"],
        rows: Vec::new(),
    };
    for &e in eps {
        if !(e > 0.0 && e < 2.0) {
            eprintln!("warning: skipping eps {e} outside (0, 2)");
            continue;
        }
        let dx = modulus_of_convexity(&norm, e)?;
        let dh = hilbert_modulus(e);
        table.rows.push((None, vec![e, dx, dh, dh - dx]));
    }
    emit(out, &table.to_csv())?;
    Ok(EXIT_PASS)
}

fn seed_from(
    norm_x: Option<&str>,
    norm_y: Option<&str>,
    cert: Option<&str>,
    cfg: &RunConfig,
) -> CliResult<CounterexampleSeed> {
    if let Some(c) = cert {
        let c: Certificate = load(c, "certificate")?;
        return Ok(c.seed);
    }
    match (norm_x, norm_y) {
        (Some(x), Some(y)) => {
            let x: Norm2 = load(x, "norm")?;
            let y: Norm2 = load(y, "norm")?;
            Ok(build_counterexample_with(&x, &y, &GridSearch::with_nodes(cfg.grid))?)
        }
        _ => Err(CliError::input("need --cert or both --norm-x and --norm-y")),
    }
}

pub fn figure_data(
    kind: &str,
    norm_x: Option<&str>,
    norm_y: Option<&str>,
    cert: Option<&str>,
    eps: f64,
    samples: usize,
    run: &RunArgs,
) -> CliResult<u8> {
    let cfg = run.validate()?;
    let table = match kind {
        "half-arc" => half_arc(&seed_from(norm_x, norm_y, cert, &cfg)?, samples)?,
        "construction" => construction(&seed_from(norm_x, norm_y, cert, &cfg)?, samples)?,
        "gamma-eps" => {
            let n = norm_x.ok_or_else(|| CliError::input("gamma-eps needs --norm-x"))?;
            let n: Norm2 = load(n, "norm")?;
            gamma_eps(&n, eps, samples)?
        }
        other => {
            return Err(CliError::input(format!(
                "unknown figure kind {other:?}; expected half-arc, gamma-eps or construction"
            )))
        }
    };
    emit(cfg.out.as_deref(), &table.to_csv())?;
    Ok(EXIT_PASS)
}

pub fn john(norm: &str, out: Option<&str>) -> CliResult<u8> {
    let norm: Norm2 = load(norm, "norm")?;
    let j = john_ellipse(&norm)?;
    emit(out, &(serde_json::to_string_pretty(&j).expect("ellipses serialize") + "\n"))?;
    Ok(EXIT_PASS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vectors_parse() {
        assert_eq!(parse_vector("1, 0,-2.5").unwrap(), vec![1.0, 0.0, -2.5]);
        assert!(parse_vector("1,x").is_err());
    }

    #[test]
    fn library_errors_map_to_exit_codes() {
        let e: CliError = Norm2::lp(0.5).unwrap_err().into();
        assert_eq!(e.code, EXIT_INPUT);
        let e: CliError = planenorm::convexity::find_gap(&Norm2::l2()).unwrap_err().into();
        assert_eq!(e.code, EXIT_STAGE);
    }

    #[test]
    fn inline_and_file_norms() {
        let n: Norm2 = load(r#"{"type":"lp","p":"inf"}"#, "norm").unwrap();
        assert_eq!(n, Norm2::linf());
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("n.json");
        fs::write(&p, r#"{"type":"lp","p":1}"#).unwrap();
        let n: Norm2 = load(p.to_str().unwrap(), "norm").unwrap();
        assert_eq!(n, Norm2::l1());
        assert_eq!(load::<Norm2>("/nonexistent/x.json", "norm").unwrap_err().code, EXIT_INPUT);
    }
}
