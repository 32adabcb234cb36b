use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spectral_tau::job::{parse_indices, run, Command, JobSpec, EXIT_INPUT_ERROR};

/// Exact tau-function correlators of spectral curves.
#[derive(Parser)]
#[command(name = "spectral-tau", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Characteristic polynomial, genus, validity checks and branch expansions.
    CurveInfo(Common),
    /// Correlator tables up to a number of points and an order.
    Correlators(Common),
    /// Divisor of poles of the normalized eigenvector.
    Divisor(Common),
    /// Jet of the n-wave fields read off the projectors.
    Jet(Common),
    /// Compare correlators with theta-function derivatives (2 x 2 only).
    VerifyTheta(Common),
}

#[derive(Args)]
struct Common {
    /// Matrix polynomial as JSON.
    #[arg(long)]
    input: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    kmax: Option<usize>,
    #[arg(long = "max-n")]
    max_n: Option<usize>,
    /// Terms of each branch expansion in curve-info.
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Single correlator as "a1,k1;a2,k2;..." with sheets from 1.
    #[arg(long)]
    indices: Option<String>,
    /// Seed for the random diagonal conjugation check.
    #[arg(long)]
    seed: Option<u64>,
}

fn configure_threads() {
    if let Some(n) = std::env::var("SPECTRAL_TAU_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // a second initialization only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Sub::CurveInfo(a) => (Command::CurveInfo, a),
        Sub::Correlators(a) => (Command::Correlators, a),
        Sub::Divisor(a) => (Command::Divisor, a),
        Sub::Jet(a) => (Command::Jet, a),
        Sub::VerifyTheta(a) => (Command::VerifyTheta, a),
    };
    let mut job = JobSpec::new(command, args.input);
    job.kmax = args.kmax.unwrap_or(job.kmax);
    job.max_n = args.max_n.unwrap_or(job.max_n);
    job.order = args.order.unwrap_or(job.order);
    job.tol = args.tol.unwrap_or(job.tol);
    job.seed = args.seed;
    if let Some(text) = args.indices {
        match parse_indices(&text) {
            Ok(idx) => job.indices = Some(idx),
            Err(e) => {
                eprintln!("{e}");
                return ExitCode::from(EXIT_INPUT_ERROR as u8);
            }
        }
    }
    let outcome = run(&job);
    let text = outcome.render();
    match args.output {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, &text) {
                eprintln!("{}: {e}", path.display());
                return ExitCode::from(EXIT_INPUT_ERROR as u8);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(outcome.exit_code as u8)
}
