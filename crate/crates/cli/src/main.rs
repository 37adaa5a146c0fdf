//! Experiment runner for the Carleman lattice Boltzmann / HHL emulation
//! toolkit. Subcommands read a JSON run configuration and write
//! deterministic CSVs plus a manifest; `plot` renders CSVs to SVG.

mod commands;
mod config;
mod csvio;
mod manifest;
mod plot;
mod runner;
mod svg;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use config::RunConfig;
use runner::ExperimentContext;

#[derive(Parser)]
#[command(
    name = "qlbm",
    version,
    about = "Carleman lattice Boltzmann toolkit with an HHL emulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, clap::Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config's out_dir; default "out").
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for parameter sweeps (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Directory for on-disk spectrum caching.
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Linearization error of the Carleman evolution against the
    /// reference solver, orders 1 and 2.
    CarlemanRmse(RunArgs),
    /// Eigenspectra, histograms and size-deviation tables.
    Spectra(RunArgs),
    /// Emulated solver sweeps (fidelity errors, success probabilities).
    Hhl(RunArgs),
    /// CNOT-count bounds for the configured sweep.
    Resources(RunArgs),
    /// Render CSV outputs to SVG figures.
    Plot {
        /// CSV files produced by the other subcommands.
        inputs: Vec<PathBuf>,
        /// Output directory (default: next to each input).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            // machine-readable error record on stderr
            let record = serde_json::json!({
                "tool": "qlbm",
                "error": format!("{err:#}"),
            });
            eprintln!("{record}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::CarlemanRmse(args) => run_experiment(args, commands::carleman_rmse),
        Command::Spectra(args) => run_experiment(args, commands::spectra),
        Command::Hhl(args) => run_experiment(args, commands::hhl),
        Command::Resources(args) => run_experiment(args, commands::resources),
        Command::Plot { inputs, out } => {
            if inputs.is_empty() {
                anyhow::bail!("plot needs at least one CSV input");
            }
            for input in &inputs {
                let out_dir = out
                    .clone()
                    .or_else(|| input.parent().map(PathBuf::from))
                    .unwrap_or_else(|| PathBuf::from("."));
                let written = plot::plot_file(input, &out_dir)
                    .with_context(|| format!("plotting {}", input.display()))?;
                for path in written {
                    println!("wrote {}", path.display());
                }
            }
            Ok(())
        }
    }
}

fn run_experiment(
    args: RunArgs,
    command: fn(&ExperimentContext, usize) -> Result<()>,
) -> Result<()> {
    let config = RunConfig::load(&args.config)?;
    commands::check_use_case(&config)?;
    let threads = args.threads.unwrap_or_else(num_threads);
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .ok(); // already built when several experiments run in-process
    let out_dir = args
        .out
        .clone()
        .or_else(|| config.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out_dir)?;
    let ctx = ExperimentContext::new(config, out_dir, args.cache);
    command(&ctx, threads)
}

fn num_threads() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}
