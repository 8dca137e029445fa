//! `ordsel`: success probabilities, Gaussian-copula bounds and sufficient
//! sample sizes for noisy multiple selection, from the command line.
//!
//! Data goes to stdout (JSON lines by default), diagnostics to stderr.
//! `ORDSEL_THREADS` caps the worker pool.

mod commands;
mod failure;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::failure::Failure;
use crate::output::Format;

#[derive(Parser, Debug)]
#[command(name = "ordsel", version, about = "Noisy multiple selection under copula dependence")]
pub struct Cli {
    /// Add wall-clock time per record (makes output non-reproducible).
    #[arg(long, global = true)]
    pub timing: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Success probability of horse-race selection.
    Psuccess(PsuccessArgs),
    /// Gaussian-copula lower bound on the success probability.
    Bound(BoundArgs),
    /// Sufficient sample size for a target success probability.
    Invert(InvertArgs),
    /// Grid of sufficient sample sizes over correlations and failure probabilities.
    Table(TableArgs),
    /// Quadrature, Monte Carlo and lower bound along one varying parameter.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Gaussian,
    Clayton,
    Frank,
    Independence,
    Comonotonic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    /// One-dimensional quadrature.
    Quad,
    /// Nested quadrature over the ordered simplex (m ≤ 3).
    Brute,
    /// Monte Carlo of the selection rule as stated.
    Mc,
    /// Monte Carlo over the m smallest order statistics only.
    McOs,
    /// Closed form where one exists.
    Exact,
}

#[derive(Args, Debug)]
pub struct PsuccessArgs {
    #[arg(long, value_enum)]
    pub copula: Family,
    /// Copula parameter: ρ, or ϑ for Clayton and Frank.
    #[arg(long, allow_hyphen_values = true)]
    pub param: Option<f64>,
    #[arg(long)]
    pub n: u64,
    #[arg(long, default_value_t = 1)]
    pub m: u64,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Quad)]
    pub method: MethodArg,
    #[arg(long, default_value_t = 100_000)]
    pub reps: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Points per level for `--method brute`.
    #[arg(long, default_value_t = 500)]
    pub grid: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct BoundArgs {
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub rho: f64,
    /// Fixed ω in (0, π/2); optimised over when omitted.
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("dependence").required(true).args(["rho", "xi2"])))]
pub struct InvertArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub rho: Option<f64>,
    /// Noise-to-signal variance ratio; sets ρ = (1 + ξ²)^(-1/2).
    #[arg(long)]
    pub xi2: Option<f64>,
    #[arg(long)]
    pub delta: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct TableArgs {
    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [0.99, 0.9, 0.6, 0.3, 0.01])]
    pub rhos: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.01, 0.05, 0.1])]
    pub deltas: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Vary {
    N,
    Rho,
    Alpha,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub vary: Vary,
    #[arg(long)]
    pub from: f64,
    #[arg(long)]
    pub to: f64,
    #[arg(long, default_value_t = 20)]
    pub points: usize,
    /// Space the points geometrically.
    #[arg(long)]
    pub log_axis: bool,
    #[arg(long, default_value_t = 100)]
    pub n: u64,
    #[arg(long, default_value_t = 1)]
    pub m: u64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.4)]
    pub rho: f64,
    /// Monte Carlo replications per point; 0 skips Monte Carlo.
    #[arg(long, default_value_t = 100_000)]
    pub reps: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("ORDSEL_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Failure::Usage(format!("ORDSEL_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Usage(format!("cannot size the thread pool: {e}")))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| commands::run(&cli));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("ordsel: {f}");
            f.exit_code()
        }
    }
}
