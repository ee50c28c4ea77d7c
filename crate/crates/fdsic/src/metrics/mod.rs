//! Cancellation quality metrics and arithmetic-complexity accounting.
//!
//! The headline figure of merit is the cancellation ratio
//! `C_dB = 10·log10(Σ|t[n]|² / Σ|t[n] − y[n]|²)` — received self-interference
//! power over residual power after subtracting the canceler estimate. The
//! complexity side lives in [`ops`] (counting contexts and conversion rules)
//! and [`counts`] (closed-form and instrumented per-update costs for each
//! canceler/adapter pairing).

pub mod counts;
pub mod ops;

pub use counts::{count_ops_analytic, count_ops_instrumented, Method};
pub use ops::{
    complex_ops_to_real, flops_projection, ArithOps, CountingOps, OpCountReport, OpTally,
    PlainOps,
};

use crate::error::{FdsicError, Result};
use crate::C64;

/// Cancellation ratio in dB between targets and canceler estimates.
///
/// Returns `10·log10(Σ|t|² / Σ|t−y|²)`, capped at +300 dB when the residual
/// energy falls below 10⁻³⁰ of the target energy (perfect fits stay
/// plottable). A non-finite residual (diverged canceler) yields `-inf`.
pub fn cancellation_db(targets: &[C64], estimates: &[C64]) -> Result<f64> {
    if targets.is_empty() || targets.len() != estimates.len() {
        return Err(FdsicError::Dimension(format!(
            "need equal nonzero lengths, got {} targets and {} estimates",
            targets.len(),
            estimates.len()
        )));
    }
    let target_energy: f64 = targets.iter().map(|t| t.norm_sqr()).sum();
    if target_energy == 0.0 {
        return Err(FdsicError::Numerical("targets are all zero".into()));
    }
    let residual_energy: f64 = targets
        .iter()
        .zip(estimates)
        .map(|(t, y)| (t - y).norm_sqr())
        .sum();
    if !residual_energy.is_finite() {
        return Ok(f64::NEG_INFINITY);
    }
    if residual_energy < 1e-30 * target_energy {
        return Ok(300.0);
    }
    Ok(10.0 * (target_energy / residual_energy).log10())
}

/// Tracking loss in dB: static-period cancellation minus dynamic-period
/// cancellation. Negative values mean the tracker beat the static fit.
pub fn cancellation_drop(static_db: f64, dynamic_db: f64) -> f64 {
    static_db - dynamic_db
}

/// Outcome of one (method, β, seed) experiment run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunResult {
    pub method: Method,
    pub beta: f64,
    pub oversampling: u64,
    pub seed: u64,
    pub static_cancellation_db: f64,
    pub dynamic_cancellation_db: f64,
    /// Always `static_cancellation_db − dynamic_cancellation_db`.
    pub drop_db: f64,
    /// The tuned scalar hyperparameter used (μ, λ, or α by method).
    pub hyperparam: f64,
}

impl RunResult {
    /// Build a result, deriving `drop_db` from the two cancellation values.
    pub fn new(
        method: Method,
        beta: f64,
        oversampling: u64,
        seed: u64,
        static_cancellation_db: f64,
        dynamic_cancellation_db: f64,
        hyperparam: f64,
    ) -> Self {
        RunResult {
            method,
            beta,
            oversampling,
            seed,
            static_cancellation_db,
            dynamic_cancellation_db,
            drop_db: cancellation_drop(static_cancellation_db, dynamic_cancellation_db),
            hyperparam,
        }
    }
}
