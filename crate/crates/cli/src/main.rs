//! planenorm: counterexample certificates for plane operator norms.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunArgs;

#[derive(Parser)]
#[command(
    name = "planenorm",
    version,
    about = "Build and check norm-one operators whose near-attaining points stay away from attaining ones",
    after_help = "EXIT CODES:\n  0 pass\n  1 certificate verification failed\n  2 invalid input\n  3 pipeline stage failed\n\n\
                  ENVIRONMENT:\n  PLANENORM_THREADS  cap on worker threads\n\n\
                  Norm arguments take a JSON file path or inline JSON, e.g.\n  \
                  '{\"type\":\"lp\",\"p\":\"inf\"}'\n  \
                  '{\"type\":\"polygon\",\"vertices\":[[1,0],[0.5,0.8]]}'\n  \
                  '{\"type\":\"ellipse\",\"matrix\":[[2,0],[0,1]]}'"
)]
struct Cli {
    /// Print pipeline progress to stderr
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a seed operator and its certificate family, then verify it
    #[command(after_help = "EXAMPLES:\n\
                  \n  planenorm construct --norm-x x.json --norm-y y.json --out cert.json\
                  \n  planenorm construct --ambient cube.json --x0-basis 0,0,1 --y0-basis 1,0,0 --y0-basis 0,1,0")]
    Construct {
        /// Domain norm (2D)
        #[arg(long, required_unless_present = "ambient")]
        norm_x: Option<String>,
        /// Codomain norm (2D)
        #[arg(long, required_unless_present = "ambient")]
        norm_y: Option<String>,
        /// Ambient norm; give twice for distinct domain and codomain spaces
        #[arg(long, num_args = 1, action = clap::ArgAction::Append, conflicts_with_all = ["norm_x", "norm_y"])]
        ambient: Vec<String>,
        /// Vector spanning part of the subspace factored out of the domain, comma separated
        #[arg(long, requires = "ambient")]
        x0_basis: Vec<String>,
        /// Vector spanning part of the codomain plane, comma separated; give twice
        #[arg(long, requires = "ambient")]
        y0_basis: Vec<String>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Re-verify a certificate file by brute force
    Certify {
        /// Certificate JSON
        cert: String,
        /// Sphere samples per operator
        #[arg(long, default_value_t = planenorm::construct::VERIFY_SAMPLES)]
        samples: usize,
    },
    /// Tabulate the modulus of convexity against the Euclidean one
    Modulus {
        #[arg(long)]
        norm: String,
        /// Chord lengths in (0, 2), comma separated
        #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,1,1.5,1.75")]
        eps: Vec<f64>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Emit curve data for plots as CSV
    FigureData {
        /// half-arc, gamma-eps or construction
        #[arg(long)]
        kind: String,
        /// Domain norm, or the norm for gamma-eps
        #[arg(long)]
        norm_x: Option<String>,
        #[arg(long)]
        norm_y: Option<String>,
        /// Read the seed from a certificate instead of building it
        #[arg(long)]
        cert: Option<String>,
        /// Chord length for gamma-eps
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        #[arg(long, default_value_t = 1024)]
        samples: usize,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Print the John ellipse of a norm as JSON
    John {
        #[arg(long)]
        norm: String,
        #[arg(long)]
        out: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = config::init_threads() {
        eprintln!("error: {}", e.message);
        return ExitCode::from(2);
    }
    let verbose = cli.verbose;
    let result = match cli.command {
        Command::Construct {
            norm_x,
            norm_y,
            ambient,
            x0_basis,
            y0_basis,
            run,
        } => match (norm_x, norm_y) {
            (Some(x), Some(y)) => commands::construct(&x, &y, &run, verbose),
            _ => commands::construct_ambient(&ambient, &x0_basis, &y0_basis, &run, verbose),
        },
        Command::Certify { cert, samples } => commands::certify(&cert, samples),
        Command::Modulus { norm, eps, out } => commands::modulus(&norm, &eps, out.as_deref()),
        Command::FigureData {
            kind,
            norm_x,
            norm_y,
            cert,
            eps,
            samples,
            run,
        } => commands::figure_data(
            &kind,
            norm_x.as_deref(),
            norm_y.as_deref(),
            cert.as_deref(),
            eps,
            samples,
            &run,
        ),
        Command::John { norm, out } => commands::john(&norm, out.as_deref()),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
