//! `trp`: simulate, optimize and translate twisted-rapid-passage gates.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "trp", version, about = "Twisted-rapid-passage gate synthesis")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat dotted-key TOML config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override a config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Output directory. Without it, results go to standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Random seed for annealing (overrides optimize.seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one sweep and score it against the target gate.
    Simulate,
    /// Search sweep parameters that minimize Tr P.
    Optimize,
    /// Translate a sweep into hardware control waveforms.
    Translate,
    /// Regenerate published sensitivity tables (1 to 7) as CSV.
    Tables {
        which: Vec<u8>,
    },
    /// Check the gate-composition and metric identities.
    Verify,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    for s in &cli.overrides {
        cfg.set(s)?;
    }
    if let Some(seed) = cli.seed {
        cfg.set(&format!("optimize.seed={seed}"))?;
    }
    let out = cli.out.clone().or(cfg.string("output.path")?.map(PathBuf::from));
    if let Some(fmt) = cfg.string("output.format")? {
        if fmt != "json" {
            return Err(CliError::Config(format!("output.format must be `json`, got `{fmt}`")));
        }
    }
    match cli.command {
        Command::Simulate => commands::simulate(&cfg, out.as_deref()),
        Command::Optimize => commands::optimize(&cfg, out.as_deref()),
        Command::Translate => commands::translate(&cfg, out.as_deref()),
        Command::Tables { which } => commands::tables(&cfg, &which, out.as_deref()),
        Command::Verify => commands::verify(out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
