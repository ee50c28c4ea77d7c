//! Command-line interface for the experiment harness.
//!
//! Subcommands:
//!
//! * `generate` — export every (β, seed) dataset of the sweep as CSV.
//! * `tune`     — select hyperparameters on the tuning seeds and write
//!   `tuned.csv` (always recomputes, replacing any cached selection).
//! * `run`      — full sweep: tune (reusing a valid cache), evaluate, and
//!   write every result table.
//! * `count`    — print the analytic and instrumented per-iteration
//!   operation-count tables.
//! * `report`   — re-aggregate an existing `runs.csv` into `summary.csv`
//!   and `flops_vs_cancellation.csv`.
//!
//! Every subcommand accepts the same flags; `--config` points at a TOML
//! file (all keys optional) and the remaining flags override individual
//! fields of it.

use super::config::ExperimentConfig;
use super::{emit, generate_datasets, run_sweep, tune, TunedRow};
use crate::error::{FdsicError, Result};
use crate::metrics::Method;
use clap::{Args, Parser, Subcommand};
use std::ffi::OsString;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Debug, Parser)]
#[command(
    name = "fdsic",
    about = "Self-interference cancellation benchmark harness for in-band full-duplex radios",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Export the sweep's datasets as CSV files under <out>/datasets/
    Generate(CommonArgs),
    /// Select per-(method, β) hyperparameters and write tuned.csv
    Tune(CommonArgs),
    /// Run the full sweep and write all result tables
    Run(CommonArgs),
    /// Print per-iteration operation counts (analytic and instrumented)
    Count(CommonArgs),
    /// Re-aggregate an existing runs.csv into summary tables
    Report(CommonArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// TOML configuration file; defaults apply for any key it omits
    #[arg(long)]
    config: Option<PathBuf>,
    /// Total seeds per β (tuning seeds come from the front of the range)
    #[arg(long)]
    seeds: Option<usize>,
    /// Comma-separated drift coefficients β to sweep
    #[arg(long, value_delimiter = ',')]
    betas: Vec<f64>,
    /// Comma-separated methods (linear-lms, wlmp-lms, wlmp-rls, mbnn-ftrl, or "all")
    #[arg(long, value_delimiter = ',')]
    methods: Vec<String>,
    /// Output directory for result tables
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = rayon default)
    #[arg(long)]
    jobs: Option<usize>,
    /// Reduced preset: 10 seeds per β, 2 of them for tuning
    #[arg(long)]
    quick: bool,
}

fn parse_methods(specs: &[String]) -> Result<Vec<Method>> {
    let mut methods: Vec<Method> = Vec::new();
    let mut push = |m: Method| {
        if !methods.contains(&m) {
            methods.push(m);
        }
    };
    for spec in specs {
        if spec.eq_ignore_ascii_case("all") {
            Method::ALL.into_iter().for_each(&mut push);
        } else {
            push(Method::from_str(spec)?);
        }
    }
    Ok(methods)
}

/// Build the effective configuration: file (or defaults), then the quick
/// preset, then individual flag overrides.
fn effective_config(args: &CommonArgs) -> Result<ExperimentConfig> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if args.quick {
        config.apply_quick_preset();
    }
    if let Some(n) = args.seeds {
        config.n_seeds = n;
        if config.n_tuning_seeds >= n {
            let clamped = (n / 5).max(1);
            eprintln!(
                "note: clamping tuning seeds from {} to {clamped} to fit --seeds {n}",
                config.n_tuning_seeds
            );
            config.n_tuning_seeds = clamped;
        }
    }
    if !args.betas.is_empty() {
        config.beta_list = args.betas.clone();
    }
    if !args.methods.is_empty() {
        config.methods = parse_methods(&args.methods)?;
    }
    if let Some(out) = &args.out {
        config.out_dir = out.clone();
    }
    if let Some(jobs) = args.jobs {
        config.jobs = jobs;
    }
    config.validate()?;
    Ok(config)
}

fn print_tuned(rows: &[TunedRow]) {
    println!("{:<12} {:>8} {:>12} {:>16}", "method", "beta", "hyperparam", "mean_dynamic_db");
    for r in rows {
        println!(
            "{:<12} {:>8} {:>12} {:>16}",
            r.method.label(),
            r.beta,
            emit::format_sig(r.hyperparam, 6),
            emit::format_sig(r.mean_dynamic_db, 6)
        );
    }
}

fn print_summary(rows: &[super::SummaryRow]) {
    println!(
        "{:<12} {:>8} {:>6} {:>12} {:>5} {:>4} {:>10} {:>10} {:>8} {:>8} {:>12}",
        "method", "beta", "ovs", "hyperparam", "runs", "div", "static_db", "dyn_db", "std", "drop", "flops"
    );
    for r in rows {
        println!(
            "{:<12} {:>8} {:>6} {:>12} {:>5} {:>4} {:>10} {:>10} {:>8} {:>8} {:>12}",
            r.method.label(),
            r.beta,
            r.oversampling,
            emit::format_sig(r.hyperparam, 6),
            r.n_runs,
            r.n_divergent,
            emit::format_sig(r.mean_static_db, 6),
            emit::format_sig(r.mean_dynamic_db, 6),
            emit::format_sig(r.std_dynamic_db, 6),
            emit::format_sig(r.mean_drop_db, 6),
            emit::format_sig(r.flops, 6)
        );
    }
}

fn cmd_generate(config: &ExperimentConfig) -> Result<()> {
    let n = generate_datasets(config)?;
    println!(
        "wrote {n} dataset/truth CSV pairs to {}",
        config.resolved_out_dir().join("datasets").display()
    );
    Ok(())
}

fn cmd_tune(config: &ExperimentConfig) -> Result<()> {
    let rows = tune(config)?;
    let out_dir = config.resolved_out_dir();
    std::fs::create_dir_all(&out_dir).map_err(|e| FdsicError::io(&out_dir, e))?;
    let path = out_dir.join("tuned.csv");
    emit::write_file(&path, &emit::render_tuned_csv(&config.data_fingerprint(), &rows))?;
    print_tuned(&rows);
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_run(config: &ExperimentConfig) -> Result<()> {
    let output = run_sweep(config)?;
    let out_dir = super::emit_results(config, &output)?;
    print_summary(&output.summary);
    println!("wrote result tables to {}", out_dir.display());
    Ok(())
}

fn cmd_count(config: &ExperimentConfig) -> Result<()> {
    let (analytic, measured) = emit::complexity_tables(config)?;
    println!(
        "per-iteration real operations (memory length {}, nonlinearity order {})",
        config.hardware.memory_len, config.hardware.nonlin_order
    );
    for (title, table) in [("analytic", &analytic), ("instrumented", &measured)] {
        println!("\n{title}:");
        println!(
            "{:<12} {:>8} {:>8} {:>8} {:>8} {:>8}",
            "method", "params", "adds", "mults", "divs", "sqrts"
        );
        for (method, r) in table {
            println!(
                "{:<12} {:>8} {:>8} {:>8} {:>8} {:>8}",
                method.label(),
                r.n_params,
                r.n_add,
                r.n_mult,
                r.n_div,
                r.n_sqrt
            );
        }
    }
    println!();
    print!("{}", emit::render_complexity_notes(&analytic, &measured, config));
    Ok(())
}

fn cmd_report(config: &ExperimentConfig) -> Result<()> {
    let summary = super::report(config)?;
    print_summary(&summary);
    println!(
        "rewrote summary.csv and flops_vs_cancellation.csv in {}",
        config.resolved_out_dir().display()
    );
    Ok(())
}

/// Minimal logger so adaptation warnings (e.g. covariance resets) reach
/// stderr when running the binary; library users install their own.
struct StderrLogger;

impl log::Log for StderrLogger {
    fn enabled(&self, metadata: &log::Metadata) -> bool {
        metadata.level() <= log::Level::Warn
    }

    fn log(&self, record: &log::Record) {
        if self.enabled(record.metadata()) {
            eprintln!("{}: {}", record.level(), record.args());
        }
    }

    fn flush(&self) {}
}

static LOGGER: StderrLogger = StderrLogger;

/// Parse arguments and dispatch; returns the process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    // Ignore the error if a logger is already installed (tests, embedding).
    if log::set_logger(&LOGGER).is_ok() {
        log::set_max_level(log::LevelFilter::Warn);
    }
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version land here too; clap picks the stream and code.
            let _ = e.print();
            return e.exit_code();
        }
    };
    let (args, run): (&CommonArgs, fn(&ExperimentConfig) -> Result<()>) = match &cli.command {
        Command::Generate(a) => (a, cmd_generate),
        Command::Tune(a) => (a, cmd_tune),
        Command::Run(a) => (a, cmd_run),
        Command::Count(a) => (a, cmd_count),
        Command::Report(a) => (a, cmd_report),
    };
    let result = effective_config(args).and_then(|config| run(&config));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
