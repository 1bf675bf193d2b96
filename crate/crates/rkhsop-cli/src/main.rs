//! `rkhsop` command line: reproduces the bundled experiments and decomposes
//! operators estimated from user-supplied CSV data.
//!
//! Exit codes: 0 on success, 1 on usage or input errors, 2 when a numerical
//! routine fails.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rkhsop::experiments::{self, DecomposeOptions, EstimatorKind, Mode, Route};
use rkhsop::{
    Error, ExperimentReport, Kernel, Regularizer, DEFAULT_CCA_EPSILON, DEFAULT_TRANSFER_EPSILON,
    DEFAULT_TRUNCATION_THRESHOLD,
};

#[derive(Parser)]
#[command(
    name = "rkhsop",
    version,
    about = "Spectral decompositions of empirical RKHS operators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recover the Mercer spectrum of the degree-2 polynomial kernel from
    /// uniform samples on [-2,2]^2
    Mercer(MercerArgs),
    /// Decompose the cross-covariance operator of a two-component Gaussian
    /// mixture
    Crosscov(CrosscovArgs),
    /// Find coherent sets of the double gyre flow through kernel CCA
    Doublegyre(DoublegyreArgs),
    /// Decompose an operator estimated from CSV data
    Decompose(DecomposeArgs),
}

#[derive(Args)]
struct MercerArgs {
    /// Number of sample points
    #[arg(short = 'm', long, default_value_t = 5000)]
    samples: usize,
    /// RNG seed
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Where to write the report
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct CrosscovArgs {
    /// Number of paired sample points
    #[arg(short = 'm', long, default_value_t = 2000)]
    samples: usize,
    /// Standard deviation of the mixture components
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
    /// Bandwidth of the normalized Gaussian kernel
    #[arg(long, default_value_t = 0.1)]
    bandwidth: f64,
    /// RNG seed
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Where to write the report
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct DoublegyreArgs {
    /// Seeding grid as `nx,ny` midpoints over [0,2]x[0,1]
    #[arg(long, value_parser = parse_grid, default_value = "120,60")]
    grid: (usize, usize),
    /// Flow time between the two configurations
    #[arg(long, default_value_t = 10.0)]
    tau: f64,
    /// Bandwidth of the Gaussian kernel
    #[arg(long, default_value_t = 0.25)]
    bandwidth: f64,
    /// Relative Tikhonov regularization of the Gram matrices
    #[arg(long, default_value_t = DEFAULT_CCA_EPSILON)]
    epsilon: f64,
    /// Where to write the report
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct DecomposeArgs {
    /// Input CSV file (header `x1,...,xd`, one observation per row)
    x: PathBuf,
    /// Paired output CSV file (header `y1,...,yd'`)
    #[arg(long)]
    y: Option<PathBuf>,
    /// Kernel spec: `linear`, `gaussian:bw=B[:normalized]`, or
    /// `poly:degree=D:offset=C`
    #[arg(long, value_parser = parse_kernel)]
    kernel: Kernel,
    /// Kernel for the output space (defaults to --kernel)
    #[arg(long = "out-kernel", value_parser = parse_kernel)]
    out_kernel: Option<Kernel>,
    /// Estimator: `covariance`, `cross-covariance`, `cme`, `koopman`,
    /// `perron-frobenius`, or `cca`; defaults to covariance without --y and
    /// cross-covariance with it
    #[arg(long, value_parser = parse_estimator)]
    estimator: Option<EstimatorKind>,
    /// What to compute: `eig` or `svd`
    #[arg(long, value_parser = parse_mode, default_value = "svd")]
    mode: Mode,
    /// Numerical route: `qr`, `aux`, or `block`
    #[arg(long, value_parser = parse_route, default_value = "aux")]
    route: Route,
    /// Relative Tikhonov regularization for Gram-inverting estimators
    #[arg(long, default_value_t = DEFAULT_TRANSFER_EPSILON)]
    epsilon: f64,
    /// Relative spectral truncation threshold
    #[arg(long, default_value_t = DEFAULT_TRUNCATION_THRESHOLD)]
    threshold: f64,
    /// Store at most this many singular/eigen function coefficient vectors
    #[arg(long)]
    rank: Option<usize>,
    /// Where to write the report
    #[arg(short, long)]
    output: PathBuf,
}

fn parse_kernel(s: &str) -> Result<Kernel, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_route(s: &str) -> Result<Route, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_estimator(s: &str) -> Result<EstimatorKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (nx, ny) = s
        .split_once(',')
        .ok_or_else(|| "expected `nx,ny`".to_string())?;
    let nx = nx
        .trim()
        .parse()
        .map_err(|_| format!("bad grid column count `{nx}`"))?;
    let ny = ny
        .trim()
        .parse()
        .map_err(|_| format!("bad grid row count `{ny}`"))?;
    Ok((nx, ny))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests arrive as clap "errors" that print to
            // stdout and exit cleanly; real usage errors go to stderr.
            let code = u8::from(e.use_stderr());
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}

fn run(cli: Cli) -> rkhsop::Result<()> {
    match cli.command {
        Command::Mercer(args) => {
            let report = experiments::run_mercer(args.samples, args.seed, &args.output)?;
            print_summary(&report, "eigenvalues", &args.output);
        }
        Command::Crosscov(args) => {
            let report = experiments::run_crosscov(
                args.samples,
                args.rho,
                args.bandwidth,
                args.seed,
                &args.output,
            )?;
            print_summary(&report, "singular values", &args.output);
        }
        Command::Doublegyre(args) => {
            let (nx, ny) = args.grid;
            let report = experiments::run_doublegyre(
                nx,
                ny,
                args.tau,
                args.bandwidth,
                args.epsilon,
                &args.output,
            )?;
            print_summary(&report, "singular values", &args.output);
        }
        Command::Decompose(args) => {
            let options = DecomposeOptions {
                x_path: args.x,
                y_path: args.y,
                kernel: args.kernel,
                out_kernel: args.out_kernel,
                estimator: args.estimator,
                mode: args.mode,
                route: args.route,
                epsilon: Regularizer::new(args.epsilon)?,
                threshold: args.threshold,
                rank: args.rank,
            };
            let report = experiments::decompose_csv(&options, &args.output)?;
            let array = match options.mode {
                Mode::Svd => "singular values",
                Mode::Eig => "eigenvalues",
            };
            print_summary(&report, array, &args.output);
        }
    }
    Ok(())
}

/// One line of leading values plus the output location.
fn print_summary(report: &ExperimentReport, array: &str, path: &Path) {
    if let Some(rows) = report.array(array) {
        let shown: Vec<String> = rows
            .iter()
            .take(8)
            .map(|row| {
                if row.len() == 2 {
                    format!("{:.6}{:+.6}i", row[0], row[1])
                } else {
                    format!("{:.6}", row[0])
                }
            })
            .collect();
        let suffix = if rows.len() > 8 { ", ..." } else { "" };
        println!("{array} ({}): {}{suffix}", rows.len(), shown.join(", "));
    }
    println!("report written to {}", path.display());
}
