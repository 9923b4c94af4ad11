use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cpm_cli::{parse_config, preset_config, preset_names, run_experiment, AppError};

/// Experiment runner for stochastic combinatorial partial monitoring
/// learners.
#[derive(Parser)]
#[command(name = "cpm", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        /// Path to a key = value config file.
        config: PathBuf,
        /// Output directory for curve CSVs and the summary.
        #[arg(long)]
        out: PathBuf,
        /// Explicit seed list overriding the config (comma separated).
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        /// Parallel runs.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Run a named experiment.
    Preset {
        /// Preset name; omit with --list to enumerate.
        name: Option<String>,
        /// Output directory; defaults to ./out/<name>.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Explicit seed list overriding the preset (comma separated).
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        /// Parallel runs.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// List available presets and exit.
        #[arg(long)]
        list: bool,
    },
}

fn override_seeds(
    config: &mut cpm_core::simulator::ExperimentConfig,
    seeds: Option<Vec<u64>>,
) -> Result<(), AppError> {
    if let Some(seeds) = seeds {
        config.seeds = seeds;
        config
            .validate()
            .map_err(|e| AppError::validation(e.to_string()))?;
    }
    Ok(())
}

fn report(manifest: &cpm_cli::RunManifest) {
    println!(
        "wrote {} files to {} in {} ms (beta_sigma = {:.6}, sigma size = {})",
        manifest.files().count(),
        manifest.out_dir.display(),
        manifest.wall.as_millis(),
        manifest.beta_sigma,
        manifest.sigma.len(),
    );
}

fn run() -> Result<(), AppError> {
    let cli = Cli::try_parse().map_err(|e| {
        // let clap print its own help/version output
        if e.use_stderr() {
            AppError::validation(e.to_string())
        } else {
            let _ = e.print();
            std::process::exit(0);
        }
    })?;
    match cli.command {
        Command::Run {
            config,
            out,
            seeds,
            jobs,
        } => {
            let mut experiment = parse_config(&config)?;
            override_seeds(&mut experiment, seeds)?;
            let manifest = run_experiment(&experiment, &out, jobs, Some(&config))?;
            report(&manifest);
        }
        Command::Preset {
            name,
            out,
            seeds,
            jobs,
            list,
        } => {
            if list {
                for (name, desc) in preset_names() {
                    println!("{name:24} {desc}");
                }
                return Ok(());
            }
            let name = name.ok_or_else(|| {
                AppError::validation("preset name required; use --list to enumerate")
            })?;
            let mut experiment = preset_config(&name)?;
            override_seeds(&mut experiment, seeds)?;
            let out = out.unwrap_or_else(|| PathBuf::from("out").join(&name));
            let manifest = run_experiment(&experiment, &out, jobs, None)?;
            report(&manifest);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
