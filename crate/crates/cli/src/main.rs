//! Batch front end for structure-preserving H2 model reduction.
//!
//! Subcommands: `run` (one configuration), `sweep` (several configurations,
//! optionally parallel), `diagnose` (realizability report on stored model
//! files).  Exit status is 0 only when the run converged and every
//! structural defect stayed within tolerance.

mod config;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "qirka",
    version,
    about = "Structure-preserving H2 model reduction for linear quantum systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce one configured benchmark and write CSV diagnostics.
    Run {
        /// Configuration file (sectioned key = value text).
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides the config's [output] dir.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run several configurations and aggregate sweep.csv.
    Sweep {
        /// Configuration file; repeat the flag for each run.
        #[arg(long = "config", required = true)]
        configs: Vec<PathBuf>,
        /// Root output directory (per-run artifacts in subdirectories).
        #[arg(long)]
        out: PathBuf,
        /// Worker thread cap for parallel runs (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Print realizability residuals for a stored model (and basis defects).
    Diagnose {
        /// Directory containing a.mat, b.mat, c.mat, d.mat.
        model_dir: PathBuf,
        /// Optional trial-basis matrix file to check against the skew form.
        #[arg(long)]
        basis: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run { config, out } => runner::cmd_run(config, out.as_deref()),
        Command::Sweep {
            configs,
            out,
            workers,
        } => runner::cmd_sweep(configs, out, *workers),
        Command::Diagnose { model_dir, basis } => runner::cmd_diagnose(model_dir, basis.as_deref()),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
