//! Run a miniature end-to-end benchmark sweep.
//!
//! This is the full harness pipeline — per-(method, β) hyperparameter
//! tuning on held-out seeds, then evaluation on fresh seeds — shrunk to a
//! couple of minutes of work. Results land as CSV tables in a temporary
//! directory; the full-size equivalent is `fdsic run` (or
//! `fdsic run --quick` for the reduced preset).
//!
//! Run with: `cargo run --release --example quick_sweep`

use fdsic::harness::{emit_results, run_sweep, ExperimentConfig};
use fdsic::metrics::Method;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut config = ExperimentConfig::default();
    config.beta_list = vec![0.9, 0.999, 0.99999];
    config.n_seeds = 6;
    config.n_tuning_seeds = 2;
    config.static_len = 2000;
    config.dynamic_len = 1000;
    config.mbnn_epochs = 2;
    // Thin the hyperparameter grids to every third point.
    config.grids.lms_mu = config.grids.lms_mu.iter().copied().step_by(3).collect();
    config.grids.ftrl_alpha = config.grids.ftrl_alpha.iter().copied().step_by(3).collect();
    config.out_dir = std::env::temp_dir().join("fdsic-example-sweep");

    println!(
        "sweeping {} methods x {} betas, {} seeds each ({} for tuning)...",
        config.methods.len(),
        config.beta_list.len(),
        config.n_seeds,
        config.n_tuning_seeds
    );
    let output = run_sweep(&config)?;

    println!("\ntuned hyperparameters:");
    for row in &output.tuned {
        println!(
            "  {:<12} beta={:<8} -> {:<12} ({:.2} dB on tuning seeds)",
            row.method.label(),
            row.beta,
            fdsic::harness::format_sig(row.hyperparam, 6),
            row.mean_dynamic_db
        );
    }

    println!("\nmean dynamic cancellation (dB) by method and beta:");
    print!("{:<12}", "method");
    for beta in &config.beta_list {
        print!(" {:>10}", format!("b={beta}"));
    }
    println!();
    for method in Method::ALL {
        if !config.methods.contains(&method) {
            continue;
        }
        print!("{:<12}", method.label());
        for beta in &config.beta_list {
            let row = output
                .summary
                .iter()
                .find(|r| r.method == method && r.beta == *beta)
                .expect("summary covers every cell");
            print!(" {:>10.2}", row.mean_dynamic_db);
        }
        println!();
    }

    let out_dir = emit_results(&config, &output)?;
    println!("\nwrote result tables to {}:", out_dir.display());
    let mut names: Vec<String> = std::fs::read_dir(&out_dir)?
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_file())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    for name in names {
        println!("  {name}");
    }
    Ok(())
}
