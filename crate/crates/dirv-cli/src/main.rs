//! Command-line front end for running ranking-evaluation experiments:
//! `simulate` runs a policy against simulated users, `replay` runs it
//! against logged impressions, and `report` aggregates result files.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dirv::harness::config::ExperimentConfig;
use dirv::harness::{output, run_replay, run_simulation, RunSeries};

#[derive(Parser)]
#[command(
    name = "dirv",
    version,
    about = "Online evaluation of ranked lists by their post-click outcomes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured experiment against simulated users.
    Simulate {
        /// Experiment config file (`key = value` lines).
        #[arg(long)]
        config: PathBuf,
        /// Override the policy named in the config.
        #[arg(long)]
        policy: Option<String>,
        /// Override the master seed named in the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output directory named in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a logged impression file against the configured policy.
    Replay {
        /// Experiment config file (`key = value` lines).
        #[arg(long)]
        config: PathBuf,
        /// Tab-separated impression log to replay.
        #[arg(long)]
        data: PathBuf,
        /// Override the policy named in the config.
        #[arg(long)]
        policy: Option<String>,
        /// Override the master seed named in the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output directory named in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Aggregate every per-run result file in a directory across repeats.
    Report {
        /// Directory holding per-run CSV result files.
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.command {
        Command::Simulate { config, policy, seed, out } => {
            let cfg = load_config(&config, "simulate", policy, seed, out)?;
            warn(&cfg.warnings);
            let series = run_simulation(&cfg)?;
            warn(&series.warnings[cfg.warnings.len()..]);
            write_series(&series, &cfg.out)
        }
        Command::Replay { config, data, policy, seed, out } => {
            let cfg = load_config(&config, "replay", policy, seed, out)?;
            warn(&cfg.warnings);
            let series = run_replay(&cfg, &data)?;
            warn(&series.warnings[cfg.warnings.len()..]);
            write_series(&series, &cfg.out)
        }
        Command::Report { input } => {
            let entries = output::report_dir(&input)?;
            if entries.is_empty() {
                println!("no result files found in {}", input.display());
                return Ok(());
            }
            for entry in entries {
                println!(
                    "{}: policy {} seed {}, {} repeats to {} impressions, \
                     final mean pairwise error {:.4}, final mean total variance {:.4}",
                    entry.file.display(),
                    entry.policy,
                    entry.seed,
                    entry.repeats,
                    entry.final_impressions,
                    entry.final_mean_e_bin,
                    entry.final_mean_total_variance,
                );
                println!("  aggregate written to {}", entry.aggregate_file.display());
            }
            Ok(())
        }
    }
}

/// The subcommand decides the mode; other flags override their config keys.
/// Everything funnels through the config validator so overrides obey the
/// same rules as the file.
fn load_config(
    path: &Path,
    mode: &str,
    policy: Option<String>,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> Result<ExperimentConfig, Box<dyn std::error::Error>> {
    let mut overrides = vec![("mode".to_string(), mode.to_string())];
    if let Some(policy) = policy {
        overrides.push(("policy".to_string(), policy));
    }
    if let Some(seed) = seed {
        overrides.push(("seed".to_string(), seed.to_string()));
    }
    if let Some(out) = out {
        overrides.push(("out".to_string(), out.display().to_string()));
    }
    Ok(ExperimentConfig::from_file_with_overrides(path, &overrides)?)
}

fn warn(warnings: &[String]) {
    for warning in warnings {
        eprintln!("warning: {warning}");
    }
}

fn write_series(series: &RunSeries, out_dir: &Path) -> Result<(), Box<dyn std::error::Error>> {
    let results = output::emit_results(series, out_dir)?;
    let aggregate_file = output::emit_aggregate(series, out_dir)?;
    println!("wrote {}", results.display());
    println!("wrote {}", aggregate_file.display());
    if let Some(last) = output::aggregate(&series.rows).last() {
        println!(
            "policy {} seed {}: {} repeats to {} impressions, final mean pairwise error {:.4}",
            series.policy,
            series.seed,
            last.repeats,
            last.impressions,
            last.mean_e_bin,
        );
    }
    Ok(())
}
