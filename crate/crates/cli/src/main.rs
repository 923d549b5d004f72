//! `dilatox`: stationary laws, multifractal integrals, Ikeda densities and
//! Monte Carlo checks from TOML experiment files.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Context;
use crate::config::RunConfig;
use crate::failure::Failure;

#[derive(Parser)]
#[command(name = "dilatox", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Config file; `compare` accepts several and takes each table from the first file that has it.
    #[arg(long, global = true, value_name = "PATH")]
    config: Vec<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Overrides the ensemble seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; falls back to DILATOX_THREADS, then to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Evaluate fractal weights that do not sum to the branch count.
    #[arg(long, global = true)]
    unchecked: bool,
    /// Config files are JSON instead of TOML.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Characteristic function (and density) of a solved linear model.
    Stationary,
    /// Multifractal integral of a built-in integrand.
    Mfi,
    /// Random-phase densities of the Ikeda map.
    Ikeda,
    /// Monte Carlo ensemble summary.
    Simulate,
    /// Metrics between a prediction and a simulation, checked against thresholds.
    Compare,
}

fn threads(flag: Option<usize>) -> Result<Option<usize>, Failure> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("DILATOX_THREADS") {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| {
            Failure::config(format!(
                "DILATOX_THREADS must be a positive integer, got {v:?}"
            ))
        }),
        Err(_) => Ok(None),
    }
}

fn run(cli: Cli) -> Result<String, Failure> {
    if let Some(n) = threads(cli.threads)? {
        if n == 0 {
            return Err(Failure::config("thread count must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::config(format!("cannot size the thread pool: {e}")))?;
    }
    if cli.config.is_empty() {
        return Err(Failure::config("--config is required"));
    }
    if cli.config.len() > 1 && !matches!(cli.command, Command::Compare) {
        return Err(Failure::config("only compare takes more than one --config"));
    }
    let configs = cli
        .config
        .iter()
        .map(|p| RunConfig::load(p, cli.json))
        .collect::<Result<Vec<_>, _>>()?;
    std::fs::create_dir_all(&cli.out)
        .map_err(|e| Failure::config(format!("cannot create {}: {e}", cli.out.display())))?;
    let ctx = Context {
        configs,
        out: cli.out,
        seed: cli.seed,
        unchecked: cli.unchecked,
    };
    match cli.command {
        Command::Stationary => commands::stationary(&ctx),
        Command::Mfi => commands::mfi(&ctx),
        Command::Ikeda => commands::ikeda(&ctx),
        Command::Simulate => commands::simulate(&ctx),
        Command::Compare => commands::compare_cmd(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
