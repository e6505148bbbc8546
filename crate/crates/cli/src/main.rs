use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use schedtune_cli::config::load_config;
use schedtune_cli::scenario::run_scenario;
use schedtune_cli::summary::print_summary;

#[derive(Parser)]
#[command(name = "schedtune", version, about = "Simulates task scheduling on heterogeneous multi-core systems and tunes the configuration with GP-based Bayesian optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment scenario described by a TOML config file
    Run {
        /// Path to the experiment config (an empty file runs the defaults)
        config: PathBuf,
        /// Replace the config's seed list, e.g. `--seed-override 1,2,3`
        #[arg(long, value_delimiter = ',')]
        seed_override: Option<Vec<u64>>,
        /// Replace the config's output directory
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Number of runs executed in parallel
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Suppress progress logging
        #[arg(long)]
        quiet: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, seed_override, out_dir, jobs, quiet } => {
            schedtune_cli::runlog::init(quiet);
            let mut cfg = match load_config(&config) {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            if let Some(seeds) = seed_override {
                if seeds.is_empty() {
                    eprintln!("error: --seed-override needs at least one seed");
                    return ExitCode::from(2);
                }
                cfg.seeds = seeds;
            }
            if let Some(dir) = out_dir {
                cfg.out_dir = dir;
            }
            let manifest = match run_scenario(&cfg, jobs) {
                Ok(m) => m,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            print!("{}", print_summary(&manifest));
            if manifest.any_failed() {
                let failed = manifest
                    .runs
                    .iter()
                    .filter(|r| r.status != schedtune_cli::scenario::RunStatus::Ok)
                    .count();
                eprintln!("error: {failed} run(s) failed; see manifest.json");
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            }
        }
    }
}
