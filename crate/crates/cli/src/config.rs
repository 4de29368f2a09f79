use clap::Args;

use crate::commands::{CliError, CliResult};

pub const THREADS_VAR: &str = "PLANENORM_THREADS";

/// Settings shared by the pipeline commands.
#[derive(Args, Clone, Debug)]
pub struct RunArgs {
    /// Search grid nodes; a power of two, at least 256
    #[arg(long, default_value_t = planenorm::search::DEFAULT_GRID)]
    pub grid: usize,
    /// Width of the attaining band
    #[arg(long, default_value_t = planenorm::construct::DEFAULT_TOL)]
    pub tol: f64,
    /// λ schedule, comma separated (default 1 - 2^-n, n = 1..20)
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Option<Vec<f64>>,
    /// Output file (stdout when absent)
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub grid: usize,
    pub tol: f64,
    pub lambdas: Vec<f64>,
    pub out: Option<String>,
}

impl RunArgs {
    pub fn validate(&self) -> CliResult<RunConfig> {
        if self.grid < 256 || !self.grid.is_power_of_two() {
            return Err(CliError::input(format!(
                "--grid {} must be a power of two >= 256",
                self.grid
            )));
        }
        if !(self.tol > 0.0 && self.tol <= 1e-4) {
            return Err(CliError::input(format!("--tol {} outside (0, 1e-4]", self.tol)));
        }
        Ok(RunConfig {
            grid: self.grid,
            tol: self.tol,
            lambdas: self
                .lambdas
                .clone()
                .unwrap_or_else(planenorm::construct::default_lambdas),
            out: self.out.clone(),
        })
    }
}

pub fn init_threads() -> CliResult<()> {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::input(format!("{THREADS_VAR}={v:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::input(e.to_string()))
}
