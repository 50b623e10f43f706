//! `ucfas`: configuration-driven experiment runner for the quadrotor control
//! pipeline. Subcommands select the mode; everything else comes from the
//! config file (or the built-in `paper_defaults`).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ucfas_cli::config::{self, Mode};
use ucfas_cli::runner;
use ucfas_cli::CliError;

#[derive(Parser)]
#[command(
    name = "ucfas",
    about = "Quadrotor control pipeline: gain synthesis, stabilization and tracking runs, feasibility sampling",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Config file path, or `paper_defaults` for the built-in configuration.
    #[arg(long)]
    config: String,
    /// Output directory (overrides the config's output.dir).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize gain rows from the configured (Z, F) designs.
    Synthesize(RunArgs),
    /// Closed-loop stabilization run toward the configured setpoint.
    Simulate(RunArgs),
    /// Closed-loop tracking run along the configured spiral reference.
    Track(RunArgs),
    /// Sampled region-of-attraction estimation for one subsystem.
    Roea(RunArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (mode, args) = match cli.command {
        Command::Synthesize(args) => (Mode::Synthesize, args),
        Command::Simulate(args) => (Mode::Simulate, args),
        Command::Track(args) => (Mode::Track, args),
        Command::Roea(args) => (Mode::Roea, args),
    };
    let config = config::load(&args.config)?;
    if let Some(configured) = config.mode {
        if configured != mode {
            eprintln!(
                "note: config sets mode = \"{}\", running \"{}\" (subcommand wins)",
                configured.name(),
                mode.name()
            );
        }
    }
    let out_dir = args
        .out
        .unwrap_or_else(|| PathBuf::from(&config.output.dir));
    runner::execute(mode, &config, &out_dir)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
