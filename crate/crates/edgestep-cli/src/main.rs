//! Configuration-driven front end for the edgestep simulation suite.
//!
//! Every invocation is a batch run: `edgestep <command> --config run.toml`
//! reads a TOML config, validates it strictly, executes, and writes CSV
//! artifacts plus a run manifest into the output directory.
//!
//! Exit codes: 0 success, 2 validation error, 3 campaign gate failure,
//! 4 runtime anomaly (for example a bootstrap run still growing at its
//! round cap).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use commands::{EXIT_RUNTIME_ANOMALY, EXIT_VALIDATION};
use config::{CommandKind, Overrides};

#[derive(Parser)]
#[command(
    name = "edgestep",
    version,
    about = "Preferential attachment with edge steps: simulation, normalization tables, and verification campaigns"
)]
struct Cli {
    /// Path to the TOML run config (required).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output directory override.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker pool size override (default: one worker per CPU).
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
    /// Master seed override.
    #[arg(long, global = true, value_name = "SEED")]
    seed: Option<u64>,
    #[command(subcommand)]
    command: CommandArg,
}

#[derive(Subcommand)]
enum CommandArg {
    /// Simulate one trajectory; write the snapshot and a trajectory CSV.
    Generate,
    /// Tabulate the normalizing sequences φ and ξ for the configured f.
    Normalize,
    /// Run a Monte-Carlo verification campaign with pass/fail gates.
    Campaign,
    /// Generate graphs and run bootstrap percolation on them.
    Bootstrap,
    /// Simulate the endpoint-count urn coupled to a vertex's degree.
    Urn,
}

impl CommandArg {
    fn kind(&self) -> CommandKind {
        match self {
            CommandArg::Generate => CommandKind::Generate,
            CommandArg::Normalize => CommandKind::Normalize,
            CommandArg::Campaign => CommandKind::Campaign,
            CommandArg::Bootstrap => CommandKind::Bootstrap,
            CommandArg::Urn => CommandKind::Urn,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("runtime anomaly: {err:#}");
            ExitCode::from(EXIT_RUNTIME_ANOMALY)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let invoked = cli.command.kind();
    let Some(path) = cli.config else {
        eprintln!("config error: --config <FILE> is required");
        return Ok(EXIT_VALIDATION);
    };
    let text = match std::fs::read_to_string(&path) {
        Ok(text) => text,
        Err(err) => {
            eprintln!("config error: cannot read {}: {err}", path.display());
            return Ok(EXIT_VALIDATION);
        }
    };
    let config_dir = path.parent().map(PathBuf::from).unwrap_or_else(|| ".".into());
    let overrides = Overrides {
        seed: cli.seed,
        out: cli.out,
        workers: cli.workers,
    };
    let config = match config::parse_config(&text, &config_dir, &overrides) {
        Ok(config) => config,
        Err(errors) => {
            for error in &errors {
                eprintln!("config error: {error}");
            }
            eprintln!("{} validation error(s)", errors.len());
            return Ok(EXIT_VALIDATION);
        }
    };
    if config.command != invoked {
        eprintln!(
            "config error: the config names command `{}` but `{invoked}` was invoked",
            config.command
        );
        return Ok(EXIT_VALIDATION);
    }
    for warning in &config.warnings {
        eprintln!("warning: {warning}");
    }
    if let Some(workers) = config.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .context("initializing the worker pool")?;
    }
    commands::execute(&config)
}
