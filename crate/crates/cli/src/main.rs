//! `renewal-ldp`: rate curves, path simulation, rare-event Monte Carlo and
//! verification suites for renewal large deviations.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::FileConfig;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "renewal-ldp", version, about = "Large deviations of renewal processes")]
struct Cli {
    /// TOML file with default values for any long flag; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Contracted rate `J_F` on a grid, with regime labels.
    Rate(RateArgs),
    /// `rate` with `F ≡ 1` and a kink report.
    Scan(ScanArgs),
    /// One renewal path and its summary at the horizon.
    Simulate(SimulateArgs),
    /// Monte Carlo estimate of a rare-event probability.
    Mc(McArgs),
    /// Consistency and bound checks; exit status 4 when any fails.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Waiting-time law, e.g. `exp(1)`, `pareto(2,1)`, `atoms(1:0.5,2:0.5)`.
    #[arg(long)]
    pub law: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Bounded reward: `one`, `min1`, `sat(K)`, `sig`, `ind(a,b,w)`.
    #[arg(long)]
    pub f: Option<String>,
    /// `a:b:n` or a comma list of m values.
    #[arg(long)]
    pub grid: Option<String>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub grid: Option<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Horizon.
    #[arg(long)]
    pub t: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Reward for `C_t`; `one` when absent.
    #[arg(long)]
    pub f: Option<String>,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[command(flatten)]
    pub common: Common,
    /// `count:m:δ`, `upper:m` or `cumul:m:δ`.
    #[arg(long)]
    pub event: Option<String>,
    /// Horizon, or a comma list of horizons.
    #[arg(long)]
    pub t: Option<String>,
    #[arg(long)]
    pub n: Option<u64>,
    /// `naive`, `tilt` or `bigjump`.
    #[arg(long)]
    pub sampler: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Reward for cumulative events.
    #[arg(long)]
    pub f: Option<String>,
    /// Worker threads; falls back to `RENEWAL_LDP_THREADS`.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// `crosscheck`, `tightness`, `lln`, `freeenergy` or `all`.
    #[arg(long)]
    pub suite: Option<String>,
    /// Horizon of the `lln` suite.
    #[arg(long)]
    pub t: Option<String>,
    /// Paths per Monte Carlo check; each suite has its own default.
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// m values of the `crosscheck` suite.
    #[arg(long)]
    pub grid: Option<String>,
    /// Tilts `c` applied to an exponential law in the `lln` suite.
    #[arg(long)]
    pub tilts: Option<String>,
    #[arg(long)]
    pub threads: Option<usize>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Rate(a) => commands::rate::run(&a, &file),
        Command::Scan(a) => commands::rate::run_scan(&a, &file),
        Command::Simulate(a) => commands::simulate::run(&a, &file),
        Command::Mc(a) => commands::mc::run(&a, &file),
        Command::Verify(a) => commands::verify::run(&a, &file),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("renewal-ldp: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
