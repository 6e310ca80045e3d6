//! Thin command-line front end over the library: config-driven runs, front
//! comparisons, and config validation.
//!
//! Exit codes: 0 ok, 2 validation failure, 3 runtime failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use regpath::experiment::{self, RunFailure, RunOptions};

#[derive(Parser)]
#[command(name = "regpath", version, about = "Bi-objective regularization paths")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a config file.
    Run {
        /// Experiment config (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides paths.out_dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed override.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        quiet: bool,
    },
    /// Compare two exported fronts under a shared reference point.
    Compare {
        front_a: PathBuf,
        front_b: PathBuf,
        /// Where to write the JSON report.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        quiet: bool,
    },
    /// Validate a config file and print it with all defaults materialized.
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            config,
            out,
            seed,
            quiet,
        } => {
            let opts = RunOptions {
                config_path: config,
                out_override: out,
                seed_override: seed,
                quiet,
            };
            match experiment::run(&opts) {
                Ok(_) => ExitCode::SUCCESS,
                Err(RunFailure::Validation(e)) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
                Err(RunFailure::Runtime(e)) => {
                    eprintln!("error: {e}");
                    ExitCode::from(3)
                }
            }
        }
        Command::Compare {
            front_a,
            front_b,
            out,
            quiet,
        } => match experiment::compare_to_json(&front_a, &front_b, &out) {
            Ok(report) => {
                if !quiet {
                    println!(
                        "A: hv {:.6} gap {:?} | B: hv {:.6} gap {:?} -> {}",
                        report.a.hypervolume,
                        report.a.max_gap,
                        report.b.hypervolume,
                        report.b.max_gap,
                        out.display()
                    );
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Command::ValidateConfig { config } => {
            match regpath::experiment::ExperimentConfig::from_path(&config) {
                Ok(cfg) => {
                    let resolved = cfg.resolved(None, None);
                    match resolved.to_toml_string() {
                        Ok(text) => {
                            println!("{text}");
                            ExitCode::SUCCESS
                        }
                        Err(e) => {
                            eprintln!("error: {e}");
                            ExitCode::from(2)
                        }
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
