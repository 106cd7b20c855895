//! `kwalk` — momentum distributions of kicked two-level atoms from the
//! command line.
//!
//! Exit codes: 0 success; 2 configuration problems (bad flags, malformed or
//! unknown config keys, parameters outside a route's domain); 3 numerical
//! failures (Bessel argument out of range, probability leaking off the grid);
//! 4 a compare run exceeded its tolerance; 1 anything else (I/O).

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kicked_walk::WalkError;

mod commands;
mod output;
mod run_config;

use commands::{Axis, ComparisonFailed};
use run_config::{Overrides, Resolved};

#[derive(Parser)]
#[command(
    name = "kwalk",
    version,
    about = "Quantum walks of kicked two-level atoms: exact simulation, analytic routes, cross-route comparison, parameter sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact quantum-map run, ensemble-averaged over quasimomentum when --fwhm > 0
    Simulate(Overrides),
    /// Analytic route: resonant closed form or near-resonant path sum
    Analytic(Overrides),
    /// Run the simulation and an analytic route, report distances, judge against --tolerance
    Compare(Overrides),
    /// Run one route over a list of parameter values and summarize
    Sweep(SweepArgs),
}

#[derive(clap::Args)]
struct SweepArgs {
    #[command(flatten)]
    overrides: Overrides,
    /// Parameter to vary
    #[arg(long, value_enum)]
    axis: Axis,
    /// Comma-separated values for the axis, e.g. "4,8,12"
    #[arg(long, value_name = "V1,V2,...", allow_hyphen_values = true)]
    values: String,
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Simulate(over) => commands::cmd_simulate(&Resolved::from(&over)?),
        Command::Analytic(over) => commands::cmd_analytic(&Resolved::from(&over)?),
        Command::Compare(over) => commands::cmd_compare(&Resolved::from(&over)?),
        Command::Sweep(args) => {
            commands::cmd_sweep(&Resolved::from(&args.overrides)?, args.axis, &args.values)
        }
    }
}

fn classify(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<ComparisonFailed>().is_some() {
            return 4;
        }
        if let Some(walk_err) = cause.downcast_ref::<WalkError>() {
            return match walk_err {
                WalkError::Config(_) | WalkError::Domain(_) => 2,
                WalkError::BesselRange { .. } | WalkError::Truncation { .. } => 3,
            };
        }
        if cause.downcast_ref::<toml::de::Error>().is_some() {
            return 2;
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 1;
        }
    }
    // Remaining failures come from our own argument validation (bail!).
    2
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(classify(&err))
        }
    }
}
