//! Experiment harness: tuning, evaluation sweeps, artifact emission, CLI.
//!
//! A sweep runs the measurement protocol over a grid of drift rates and
//! random seeds:
//!
//! 1. **Tuning** — for every (method, β) pair, each method's scalar
//!    hyperparameter is selected on a dedicated block of tuning seeds by
//!    maximizing mean dynamic cancellation over a fixed grid. Selections are
//!    cached in `tuned.csv`, keyed by a fingerprint of every
//!    protocol-relevant configuration field, and reused on later runs with
//!    the same configuration.
//! 2. **Evaluation** — the tuned hyperparameters are applied to the
//!    remaining seeds, one independently generated dataset per (β, seed),
//!    producing one row per (method, β, seed) in `runs.csv`.
//!
//! Work is parallelized over seeds and grid candidates with order-preserving
//! collection, so output files are byte-identical regardless of thread
//! count. `summary.csv` is aggregated from the *parsed* `runs.csv` content,
//! so re-running the aggregation against an existing runs table reproduces
//! it exactly.

pub mod cli;
mod config;
mod emit;
mod protocol;

pub use cli::cli_main;
pub use config::{ExperimentConfig, GridConfig, OUT_DIR_ENV};
pub use emit::{format_sig, SummaryRow};

use crate::adapt::hyperparam_search;
use crate::error::{FdsicError, Result};
use crate::metrics::{Method, RunResult};
use protocol::{dynamic_score, prepare_dataset, run_method, PreparedDataset};
use rayon::prelude::*;
use std::collections::HashMap;
use std::path::PathBuf;

/// Hyperparameter selected for one (method, β) pair during tuning.
#[derive(Debug, Clone, PartialEq)]
pub struct TunedRow {
    pub method: Method,
    pub beta: f64,
    pub hyperparam: f64,
    /// Mean dynamic cancellation over the tuning seeds at the selection.
    pub mean_dynamic_db: f64,
}

/// Everything a sweep produces, in memory.
#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub tuned: Vec<TunedRow>,
    pub runs: Vec<RunResult>,
    pub summary: Vec<SummaryRow>,
}

/// Run `f` on the global rayon pool (`jobs == 0`) or on a dedicated pool
/// with exactly `jobs` threads.
fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if jobs == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| FdsicError::Config(format!("failed to build {jobs}-thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Select hyperparameters for every (method, β) pair on the tuning seeds.
///
/// Candidate/seed scores are precomputed in parallel; the sequential grid
/// search then consumes them from a lookup table, preserving its early-exit
/// semantics (a candidate is abandoned at its first diverging seed) without
/// making the selection depend on thread scheduling.
pub fn tune(config: &ExperimentConfig) -> Result<Vec<TunedRow>> {
    config.validate()?;
    with_pool(config.jobs, || tune_inner(config))?
}

fn tune_inner(config: &ExperimentConfig) -> Result<Vec<TunedRow>> {
    let seeds = config.tuning_seeds();
    let mut rows = Vec::new();
    for &beta in &config.beta_list {
        let preps: Vec<PreparedDataset> = seeds
            .par_iter()
            .map(|&seed| prepare_dataset(seed, beta, config))
            .collect::<Result<_>>()?;
        let prep_index: HashMap<u64, usize> =
            seeds.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        for &method in &config.methods {
            let grid = config.grid_for(method);
            let tasks: Vec<(f64, u64)> = grid
                .iter()
                .flat_map(|&cand| seeds.iter().map(move |&seed| (cand, seed)))
                .collect();
            let scores: Vec<std::result::Result<f64, String>> = tasks
                .par_iter()
                .map(|&(cand, seed)| {
                    dynamic_score(&preps[prep_index[&seed]], method, cand, config)
                        .map_err(|e| e.to_string())
                })
                .collect();
            let cache: HashMap<(u64, u64), std::result::Result<f64, String>> = tasks
                .iter()
                .map(|&(cand, seed)| (cand.to_bits(), seed))
                .zip(scores)
                .collect();
            let best = hyperparam_search(method, beta, &seeds, grid, |_, _, seed, cand| {
                match &cache[&(cand.to_bits(), seed)] {
                    Ok(v) => Ok(*v),
                    Err(msg) => Err(FdsicError::Numerical(msg.clone())),
                }
            })?;
            rows.push(TunedRow {
                method,
                beta,
                hyperparam: best.value,
                mean_dynamic_db: best.mean_dynamic_cancellation_db,
            });
        }
    }
    Ok(rows)
}

/// Load tuning selections from `tuned.csv` if it covers every configured
/// (method, β) pair under the current configuration fingerprint; otherwise
/// tune from scratch and persist the result.
fn load_or_tune(config: &ExperimentConfig) -> Result<Vec<TunedRow>> {
    let out_dir = config.resolved_out_dir();
    let path = out_dir.join("tuned.csv");
    let fingerprint = config.data_fingerprint();
    if path.is_file() {
        if let Ok(records) = emit::parse_tuned_csv(&emit::read_file(&path)?) {
            let mut lookup: HashMap<(&str, u64), &TunedRow> = HashMap::new();
            for rec in &records {
                if rec.config_hash == fingerprint {
                    lookup.insert((rec.row.method.label(), rec.row.beta.to_bits()), &rec.row);
                }
            }
            let mut rows = Vec::new();
            for &beta in &config.beta_list {
                for &method in &config.methods {
                    if let Some(row) = lookup.get(&(method.label(), beta.to_bits())) {
                        rows.push((*row).clone());
                    }
                }
            }
            if rows.len() == config.beta_list.len() * config.methods.len() {
                log::info!("reusing tuned hyperparameters from {}", path.display());
                return Ok(rows);
            }
        }
        log::info!("tuned table at {} does not match this configuration; retuning", path.display());
    }
    let rows = tune(config)?;
    std::fs::create_dir_all(&out_dir).map_err(|e| FdsicError::io(&out_dir, e))?;
    emit::write_file(&path, &emit::render_tuned_csv(&fingerprint, &rows))?;
    Ok(rows)
}

/// Evaluate every configured method on the evaluation seeds using the given
/// tuning selections.
fn evaluate(config: &ExperimentConfig, tuned: &[TunedRow]) -> Result<Vec<RunResult>> {
    let lookup: HashMap<(Method, u64), f64> = tuned
        .iter()
        .map(|t| ((t.method, t.beta.to_bits()), t.hyperparam))
        .collect();
    for &beta in &config.beta_list {
        for &method in &config.methods {
            if !lookup.contains_key(&(method, beta.to_bits())) {
                return Err(FdsicError::Config(format!(
                    "no tuned hyperparameter for {method} at beta {beta}"
                )));
            }
        }
    }
    let tasks: Vec<(f64, u64)> = config
        .beta_list
        .iter()
        .flat_map(|&beta| config.eval_seeds().into_iter().map(move |seed| (beta, seed)))
        .collect();
    let nested: Vec<Vec<RunResult>> = tasks
        .par_iter()
        .map(|&(beta, seed)| -> Result<Vec<RunResult>> {
            let prep = prepare_dataset(seed, beta, config)?;
            config
                .methods
                .iter()
                .map(|&method| {
                    run_method(&prep, method, lookup[&(method, beta.to_bits())], config)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(nested.into_iter().flatten().collect())
}

/// Evaluate a single (seed, β, method, hyperparameter) cell of the
/// protocol: generate that seed's dataset, fit the static period, track the
/// dynamic period, and report both cancellation figures.
pub fn run_single(
    config: &ExperimentConfig,
    seed: u64,
    beta: f64,
    method: Method,
    hyperparam: f64,
) -> Result<RunResult> {
    config.validate()?;
    let prep = prepare_dataset(seed, beta, config)?;
    run_method(&prep, method, hyperparam, config)
}

/// Run the full protocol: tune (or reuse cached tuning), evaluate, and
/// aggregate. Does not write evaluation artifacts; see [`emit_results`].
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepOutput> {
    config.validate()?;
    let tuned = load_or_tune(config)?;
    let runs = with_pool(config.jobs, || evaluate(config, &tuned))??;
    // Aggregate from the rendered-then-parsed table so the summary is a pure
    // function of the runs file content.
    let parsed = emit::parse_runs_csv(&emit::render_runs_csv(&runs))?;
    let summary = emit::summarize_runs(&parsed, config)?;
    Ok(SweepOutput { tuned, runs, summary })
}

/// Write every artifact of a completed sweep into the configured output
/// directory and return that directory.
pub fn emit_results(config: &ExperimentConfig, output: &SweepOutput) -> Result<PathBuf> {
    let out_dir = config.resolved_out_dir();
    std::fs::create_dir_all(&out_dir).map_err(|e| FdsicError::io(&out_dir, e))?;
    emit::write_file(&out_dir.join("runs.csv"), &emit::render_runs_csv(&output.runs))?;
    emit::write_file(&out_dir.join("summary.csv"), &emit::render_summary_csv(&output.summary))?;
    emit::write_file(
        &out_dir.join("flops_vs_cancellation.csv"),
        &emit::render_flops_csv(&output.summary),
    )?;
    let (analytic, measured) = emit::complexity_tables(config)?;
    emit::write_file(&out_dir.join("complexity.csv"), &emit::render_complexity_csv(&analytic))?;
    emit::write_file(
        &out_dir.join("complexity_measured.csv"),
        &emit::render_complexity_csv(&measured),
    )?;
    emit::write_file(
        &out_dir.join("complexity_notes.txt"),
        &emit::render_complexity_notes(&analytic, &measured, config),
    )?;
    emit::write_file(
        &out_dir.join("tuned.csv"),
        &emit::render_tuned_csv(&config.data_fingerprint(), &output.tuned),
    )?;
    Ok(out_dir)
}

/// Re-aggregate an existing `runs.csv` in the output directory, rewriting
/// `summary.csv` and `flops_vs_cancellation.csv` byte-identically to what
/// the original sweep produced.
pub fn report(config: &ExperimentConfig) -> Result<Vec<SummaryRow>> {
    let out_dir = config.resolved_out_dir();
    let runs = emit::parse_runs_csv(&emit::read_file(&out_dir.join("runs.csv"))?)?;
    let summary = emit::summarize_runs(&runs, config)?;
    emit::write_file(&out_dir.join("summary.csv"), &emit::render_summary_csv(&summary))?;
    emit::write_file(
        &out_dir.join("flops_vs_cancellation.csv"),
        &emit::render_flops_csv(&summary),
    )?;
    Ok(summary)
}

/// Generate and export every (β, seed) dataset of the configured sweep as
/// CSV files under `<out>/datasets/`. Returns the number of datasets.
pub fn generate_datasets(config: &ExperimentConfig) -> Result<usize> {
    config.validate()?;
    let dir = config.resolved_out_dir().join("datasets");
    std::fs::create_dir_all(&dir).map_err(|e| FdsicError::io(&dir, e))?;
    let params = crate::hwmodel::DatasetParams {
        static_len: config.static_len,
        dynamic_len: config.dynamic_len,
        noise_db: config.noise_db,
    };
    let tasks: Vec<(f64, u64)> = config
        .beta_list
        .iter()
        .flat_map(|&beta| config.all_seeds().into_iter().map(move |seed| (beta, seed)))
        .collect();
    with_pool(config.jobs, || {
        tasks
            .par_iter()
            .map(|&(beta, seed)| {
                let dataset = crate::hwmodel::generate_dataset(
                    seed,
                    beta,
                    &config.hardware,
                    &config.ofdm,
                    &params,
                )?;
                let stem = format!("s{seed}_b{beta}");
                crate::hwmodel::export_dataset_csv(
                    &dataset,
                    &dir.join(format!("dataset_{stem}.csv")),
                )?;
                crate::hwmodel::export_truth_csv(&dataset, &dir.join(format!("truth_{stem}.csv")))
            })
            .collect::<Result<Vec<()>>>()
    })??;
    Ok(tasks.len())
}
