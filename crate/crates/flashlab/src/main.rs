use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use flashlab::commands::{cmd_certify, cmd_classify, cmd_report, cmd_run, resolve, Overrides};
use flashlab::config::RunConfig;

/// Simulate, classify and certify EPR experiments in flash-ontology collapse
/// models.
#[derive(Parser)]
#[command(name = "flashlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// rgrwf, preferred_frame or local_hv.
    #[arg(long, global = true)]
    model: Option<String>,
    /// Runs per settings pair and frame.
    #[arg(long, global = true)]
    n: Option<u64>,
    /// Master seed (falls back to FLASHLAB_SEED, then 0).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Rapidity of the frame runs are evaluated in.
    #[arg(long, global = true, value_name = "CHI", allow_negative_numbers = true)]
    frame: Option<f64>,
    /// Setting of side A in radians.
    #[arg(
        long,
        global = true,
        value_name = "ANGLE",
        allow_negative_numbers = true
    )]
    a: Option<f64>,
    /// Setting of side B in radians.
    #[arg(
        long,
        global = true,
        value_name = "ANGLE",
        allow_negative_numbers = true
    )]
    b: Option<f64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Also write every flash to flashes.csv (run only).
    #[arg(long, global = true)]
    csv: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Outcome distribution at one settings pair, with the analytic oracle.
    Run,
    /// The five-property classification of a model.
    Classify,
    /// Exhaustive certificate for deterministic strategies.
    Certify,
    /// Print the reports found in the output directory.
    Report,
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var("FLASHLAB_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .with_context(|| format!("FLASHLAB_SEED is not an unsigned integer: {s:?}")),
        Err(_) => Ok(None),
    }
}

fn execute(cli: Cli) -> Result<String> {
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)
            .with_context(|| format!("invalid configuration {}", path.display()))?,
        None => RunConfig::default(),
    };
    let overrides = Overrides {
        model: cli.model,
        n: cli.n,
        seed: cli.seed,
        frame: cli.frame,
        a: cli.a,
        b: cli.b,
        out: cli.out,
        csv: cli.csv,
    };
    let config = resolve(config, &overrides, env_seed()?)?;
    Ok(match cli.command {
        Command::Run => cmd_run(&config)?,
        Command::Classify => cmd_classify(&config)?,
        Command::Certify => cmd_certify(&config)?,
        Command::Report => cmd_report(&config.out)?,
    })
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
