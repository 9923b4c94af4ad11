//! Seed-batch execution and file output.
//!
//! Every run writes one `seed_<seed>.csv` curve, one `aggregate.csv`, and
//! one `summary.txt`. Curve files are byte-deterministic for a fixed
//! config and seed list; floats are serialized with 17 significant digits
//! so values round-trip exactly.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use cpm_core::simulator::{
    aggregate, fit_scaling_exponent, run_single, AggregateCurve, ExperimentConfig, RegretCurve,
};

use crate::AppError;

/// What a finished experiment left on disk.
#[derive(Debug)]
pub struct RunManifest {
    pub config_path: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub sigma: Vec<String>,
    pub beta_sigma: f64,
    pub seed_files: Vec<PathBuf>,
    pub aggregate_file: PathBuf,
    pub summary_file: PathBuf,
    pub wall: Duration,
}

impl RunManifest {
    pub fn files(&self) -> impl Iterator<Item = &PathBuf> {
        self.seed_files
            .iter()
            .chain([&self.aggregate_file, &self.summary_file])
    }
}

fn write_seed_csv(path: &Path, curve: &RegretCurve) -> Result<(), AppError> {
    let file = fs::File::create(path)
        .map_err(|e| AppError::runtime(format!("cannot create {}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    let io = |e: std::io::Error| AppError::runtime(format!("write {}: {e}", path.display()));
    writeln!(w, "round,cum_regret").map_err(io)?;
    for &(t, r) in &curve.snapshots {
        writeln!(w, "{t},{r:.16e}").map_err(io)?;
    }
    w.flush().map_err(io)
}

fn write_aggregate_csv(path: &Path, agg: &AggregateCurve) -> Result<(), AppError> {
    let file = fs::File::create(path)
        .map_err(|e| AppError::runtime(format!("cannot create {}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    let io = |e: std::io::Error| AppError::runtime(format!("write {}: {e}", path.display()));
    writeln!(w, "round,cum_regret,stderr").map_err(io)?;
    for i in 0..agg.rounds.len() {
        writeln!(
            w,
            "{},{:.16e},{:.16e}",
            agg.rounds[i], agg.mean[i], agg.stderr[i]
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Runs every seed of the config (up to `jobs` in parallel), writes the
/// output files, and returns the manifest. Every listed file exists when
/// this returns successfully.
pub fn run_experiment(
    config: &ExperimentConfig,
    out_dir: &Path,
    jobs: usize,
    config_path: Option<&Path>,
) -> Result<RunManifest, AppError> {
    let started = Instant::now();
    config
        .validate()
        .map_err(|e| AppError::validation(e.to_string()))?;
    if jobs == 0 {
        return Err(AppError::validation("jobs: must be at least 1"));
    }
    fs::create_dir_all(out_dir)
        .map_err(|e| AppError::runtime(format!("cannot create {}: {e}", out_dir.display())))?;

    let seeds = &config.seeds;
    let slots: Mutex<Vec<Option<Result<RegretCurve, String>>>> =
        Mutex::new(vec![None; seeds.len()]);
    let cursor = AtomicUsize::new(0);
    let workers = jobs.min(seeds.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = cursor.fetch_add(1, Ordering::Relaxed);
                if i >= seeds.len() {
                    break;
                }
                let result = run_single(config, seeds[i]).map_err(|e| e.to_string());
                slots.lock().unwrap()[i] = Some(result);
            });
        }
    });

    let mut curves = Vec::with_capacity(seeds.len());
    for (i, slot) in slots.into_inner().unwrap().into_iter().enumerate() {
        match slot {
            Some(Ok(curve)) => curves.push(curve),
            Some(Err(msg)) => {
                return Err(AppError::runtime(format!("seed {}: {msg}", seeds[i])));
            }
            None => return Err(AppError::runtime("run was never scheduled")),
        }
    }

    let mut seed_files = Vec::with_capacity(curves.len());
    for curve in &curves {
        let path = out_dir.join(format!("seed_{}.csv", curve.seed));
        write_seed_csv(&path, curve)?;
        seed_files.push(path);
    }

    let agg = aggregate(&curves).map_err(|e| AppError::runtime(e.to_string()))?;
    let aggregate_file = out_dir.join("aggregate.csv");
    write_aggregate_csv(&aggregate_file, &agg)?;

    let summary_file = out_dir.join("summary.txt");
    write_summary(&summary_file, config, &curves, &agg, started.elapsed())?;

    let manifest = RunManifest {
        config_path: config_path.map(|p| p.to_path_buf()),
        out_dir: out_dir.to_path_buf(),
        sigma: curves[0].sigma.clone(),
        beta_sigma: curves[0].beta_sigma,
        seed_files,
        aggregate_file,
        summary_file,
        wall: started.elapsed(),
    };
    for file in manifest.files() {
        if !file.exists() {
            return Err(AppError::runtime(format!(
                "output file {} is missing after the run",
                file.display()
            )));
        }
    }
    Ok(manifest)
}

fn write_summary(
    path: &Path,
    config: &ExperimentConfig,
    curves: &[RegretCurve],
    agg: &AggregateCurve,
    wall: Duration,
) -> Result<(), AppError> {
    let file = fs::File::create(path)
        .map_err(|e| AppError::runtime(format!("cannot create {}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    let io = |e: std::io::Error| AppError::runtime(format!("write {}: {e}", path.display()));

    let first = &curves[0];
    writeln!(w, "fingerprint = {:016x}", first.fingerprint).map_err(io)?;
    writeln!(w, "beta_sigma = {:.16e}", first.beta_sigma).map_err(io)?;
    writeln!(w, "sigma = {}", first.sigma.join(" ")).map_err(io)?;
    match first.gap {
        Some(gap) => writeln!(w, "gap = {gap:.16e}").map_err(io)?,
        None => writeln!(w, "gap = unknown").map_err(io)?,
    }

    // slope of the mean curve over the last two decades
    let t_min = (config.horizon / 100).max(1);
    match fit_scaling_exponent(&agg.mean_snapshots(), t_min) {
        Ok(slope) => writeln!(w, "slope = {slope:.16e}").map_err(io)?,
        Err(_) => writeln!(w, "slope = unavailable").map_err(io)?,
    }
    writeln!(w, "final_mean_regret = {:.16e}", agg.final_mean()).map_err(io)?;

    let argmax: u64 = curves.iter().map(|c| c.argmax_calls).sum();
    let secondmax: u64 = curves.iter().map(|c| c.secondmax_calls).sum();
    writeln!(w, "argmax_calls = {argmax}").map_err(io)?;
    writeln!(w, "secondmax_calls = {secondmax}").map_err(io)?;

    let estimates = curves
        .iter()
        .filter(|c| c.gap_outcome.as_ref().is_some_and(|o| o.is_estimate()))
        .count();
    let exceeded = curves
        .iter()
        .filter(|c| c.gap_outcome.as_ref().is_some_and(|o| !o.is_estimate()))
        .count();
    let truncated = curves.iter().filter(|c| c.gap_outcome.is_none()).count();
    writeln!(w, "estimate_count = {estimates}").map_err(io)?;
    writeln!(w, "threshold_exceeded_count = {exceeded}").map_err(io)?;
    if estimates + exceeded > 0 {
        writeln!(w, "truncated_count = {}", truncated).map_err(io)?;
    }
    if estimates > 0 {
        let mean_delta_hat: f64 = curves
            .iter()
            .filter_map(|c| c.gap_outcome.as_ref().and_then(|o| o.delta_hat()))
            .sum::<f64>()
            / estimates as f64;
        writeln!(w, "delta_hat_mean = {mean_delta_hat:.16e}").map_err(io)?;
    }

    writeln!(
        w,
        "seeds = {}",
        config
            .seeds
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(",")
    )
    .map_err(io)?;
    writeln!(w, "wall_ms = {}", wall.as_millis()).map_err(io)?;
    writeln!(w, "--- config ---").map_err(io)?;
    write!(w, "{}", config.canonical_string()).map_err(io)?;
    w.flush().map_err(io)
}
