//! Per-dataset training and evaluation protocol.
//!
//! For one (seed, β) dataset: the polynomial cancelers get a batch LS fit
//! on the static period and then track the dynamic period with per-sample
//! LMS or RLS updates starting from those weights; the model-based canceler
//! trains on the static period for a few epochs of per-sample FTRL passes
//! and carries its optimizer state into the dynamic period. All dynamic
//! predictions are strictly one-step-ahead (predict with pre-update
//! parameters, then update), and a divergence (non-finite residual or
//! gradient) is reported as −∞ dB rather than an error so sweeps are never
//! survivorship-biased.

use super::config::ExperimentConfig;
use crate::adapt::{ftrl_step, lms_step, rls_step, FtrlState, LmsState, LsFit, RlsState};
use crate::cancelers::mbnn::{mbnn_backward, mbnn_forward, MbnnCanceler};
use crate::cancelers::wlmp_basis_rows;
use crate::error::{FdsicError, Result};
use crate::hwmodel::{generate_dataset, oversampling_for_beta, Dataset, DatasetParams};
use crate::metrics::{cancellation_db, Method, RunResult};
use crate::C64;

/// One generated dataset plus everything shared across methods and
/// hyperparameter candidates: regressor rows for the full frame and the
/// static-period least-squares fits.
#[derive(Debug)]
pub(crate) struct PreparedDataset {
    pub seed: u64,
    pub beta: f64,
    pub dataset: Dataset,
    /// Per-sample tap-delay histories `[x[n], x[n−1], …]`, zero-padded.
    pub linear_rows: Vec<Vec<C64>>,
    /// Per-sample widely-linear polynomial basis rows, zero-padded.
    pub wlmp_rows: Vec<Vec<C64>>,
    pub linear_fit: LsFit,
    pub wlmp_fit: LsFit,
    pub linear_static_db: f64,
    pub wlmp_static_db: f64,
    /// Mean per-component regressor power of the static basis rows, used
    /// to scale the RLS initial covariance.
    pub wlmp_mean_power: f64,
}

/// Tap-delay histories for a linear FIR canceler, newest sample first.
fn history_rows(x: &[C64], memory_len: usize) -> Vec<Vec<C64>> {
    (0..x.len())
        .map(|n| {
            (0..memory_len)
                .map(|m| if n >= m { x[n - m] } else { C64::new(0.0, 0.0) })
                .collect()
        })
        .collect()
}

fn fill_history(x: &[C64], idx: usize, buf: &mut [C64]) {
    for (m, slot) in buf.iter_mut().enumerate() {
        *slot = if idx >= m { x[idx - m] } else { C64::new(0.0, 0.0) };
    }
}

/// Plain regression prediction for a block of rows.
fn predict_rows(rows: &[Vec<C64>], weights: &[C64]) -> Vec<C64> {
    rows.iter()
        .map(|row| row.iter().zip(weights).map(|(&a, &b)| a * b).sum())
        .collect()
}

/// Generate the dataset for (seed, β) and precompute everything the
/// individual method runs share.
pub(crate) fn prepare_dataset(seed: u64, beta: f64, config: &ExperimentConfig) -> Result<PreparedDataset> {
    let params = DatasetParams {
        static_len: config.static_len,
        dynamic_len: config.dynamic_len,
        noise_db: config.noise_db,
    };
    let dataset = generate_dataset(seed, beta, &config.hardware, &config.ofdm, &params)?;
    let m = config.hardware.memory_len;
    let p = config.hardware.nonlin_order;
    let linear_rows = history_rows(dataset.x_full(), m);
    let wlmp_rows = wlmp_basis_rows(dataset.x_full(), m, p)?;
    let static_len = config.static_len;

    let linear_fit = crate::adapt::ls_fit(&linear_rows[..static_len], dataset.y_static())?;
    let wlmp_fit = crate::adapt::ls_fit(&wlmp_rows[..static_len], dataset.y_static())?;
    let linear_static_preds = predict_rows(&linear_rows[..static_len], &linear_fit.weights);
    let wlmp_static_preds = predict_rows(&wlmp_rows[..static_len], &wlmp_fit.weights);
    let linear_static_db = cancellation_db(dataset.y_static(), &linear_static_preds)?;
    let wlmp_static_db = cancellation_db(dataset.y_static(), &wlmp_static_preds)?;

    let n_components = (static_len * wlmp_rows[0].len()) as f64;
    let wlmp_mean_power = wlmp_rows[..static_len]
        .iter()
        .flatten()
        .map(|v| v.norm_sqr())
        .sum::<f64>()
        / n_components;

    Ok(PreparedDataset {
        seed,
        beta,
        dataset,
        linear_rows,
        wlmp_rows,
        linear_fit,
        wlmp_fit,
        linear_static_db,
        wlmp_static_db,
        wlmp_mean_power,
    })
}

/// Track the dynamic period with LMS from the given starting weights;
/// returns the one-step-ahead cancellation.
fn lms_dynamic_db(
    prep: &PreparedDataset,
    rows: &[Vec<C64>],
    start: &[C64],
    mu: f64,
    static_len: usize,
) -> Result<f64> {
    let state = LmsState::new(mu)?;
    let mut w = start.to_vec();
    let targets = prep.dataset.y_dynamic();
    let mut preds = Vec::with_capacity(targets.len());
    for (t, &target) in targets.iter().enumerate() {
        let (y, _) = lms_step(&state, &mut w, &rows[static_len + t], target)?;
        preds.push(y);
    }
    cancellation_db(targets, &preds)
}

fn rls_dynamic_db(prep: &PreparedDataset, lambda: f64, config: &ExperimentConfig) -> Result<f64> {
    let n = prep.wlmp_fit.weights.len();
    let delta = RlsState::default_delta(prep.wlmp_mean_power)?;
    let mut state = RlsState::new(n, lambda, delta)?;
    let mut w = prep.wlmp_fit.weights.clone();
    let targets = prep.dataset.y_dynamic();
    let mut preds = Vec::with_capacity(targets.len());
    for (t, &target) in targets.iter().enumerate() {
        let (y, _) = rls_step(&mut state, &mut w, &prep.wlmp_rows[config.static_len + t], target)?;
        preds.push(y);
    }
    cancellation_db(targets, &preds)
}

/// Static-period FTRL training of the model-based canceler plus the frozen
/// evaluation pass, returning the trained state and the static cancellation.
fn mbnn_train_static(
    prep: &PreparedDataset,
    alpha: f64,
    config: &ExperimentConfig,
) -> Result<(MbnnCanceler, FtrlState, Vec<f64>, f64)> {
    let m = config.hardware.memory_len;
    let p = config.hardware.nonlin_order;
    let canceler = MbnnCanceler::cold_start(m, p)?;
    let mut canceler = canceler;
    let mut w = canceler.real_params();
    let mut opt = FtrlState::new(w.len(), alpha)?;
    opt.warm_start(&w)?;
    let x = prep.dataset.x_full();
    let targets = prep.dataset.y_static();
    let mut hist = vec![C64::new(0.0, 0.0); m];
    for _epoch in 0..config.mbnn_epochs {
        for (n, &target) in targets.iter().enumerate() {
            fill_history(x, n, &mut hist);
            let (y, tape) = mbnn_forward(&canceler, &hist)?;
            let grads = mbnn_backward(&canceler, &tape, target - y)?;
            ftrl_step(&mut opt, &mut w, grads.values())?;
            canceler.set_real_params(&w)?;
        }
    }
    let mut preds = Vec::with_capacity(targets.len());
    for n in 0..targets.len() {
        fill_history(x, n, &mut hist);
        let (y, _) = mbnn_forward(&canceler, &hist)?;
        preds.push(y);
    }
    let static_db = cancellation_db(targets, &preds)?;
    Ok((canceler, opt, w, static_db))
}

fn mbnn_run(prep: &PreparedDataset, alpha: f64, config: &ExperimentConfig) -> Result<(f64, f64)> {
    let (mut canceler, mut opt, mut w, static_db) = mbnn_train_static(prep, alpha, config)?;
    let m = config.hardware.memory_len;
    let x = prep.dataset.x_full();
    let targets = prep.dataset.y_dynamic();
    let mut hist = vec![C64::new(0.0, 0.0); m];
    let mut preds = Vec::with_capacity(targets.len());
    for (t, &target) in targets.iter().enumerate() {
        fill_history(x, config.static_len + t, &mut hist);
        let (y, tape) = mbnn_forward(&canceler, &hist)?;
        preds.push(y);
        let grads = mbnn_backward(&canceler, &tape, target - y)?;
        ftrl_step(&mut opt, &mut w, grads.values())?;
        canceler.set_real_params(&w)?;
    }
    let dynamic_db = cancellation_db(targets, &preds)?;
    Ok((static_db, dynamic_db))
}

/// Map numerical blow-ups to the −∞ divergence sentinel while letting
/// genuine contract violations (dimension/config errors) propagate.
fn divergence_to_sentinel(result: Result<(f64, f64)>) -> Result<(f64, f64)> {
    match result {
        Err(FdsicError::Numerical(_)) => Ok((f64::NEG_INFINITY, f64::NEG_INFINITY)),
        other => other,
    }
}

/// Run one method on a prepared dataset with a fixed hyperparameter.
pub(crate) fn run_method(
    prep: &PreparedDataset,
    method: Method,
    hyperparam: f64,
    config: &ExperimentConfig,
) -> Result<RunResult> {
    let static_len = config.static_len;
    let (static_db, dynamic_db) = match method {
        Method::LinearLms => {
            let dynamic = lms_dynamic_db(
                prep,
                &prep.linear_rows,
                &prep.linear_fit.weights,
                hyperparam,
                static_len,
            )?;
            (prep.linear_static_db, dynamic)
        }
        Method::WlmpLms => {
            let dynamic =
                lms_dynamic_db(prep, &prep.wlmp_rows, &prep.wlmp_fit.weights, hyperparam, static_len)?;
            (prep.wlmp_static_db, dynamic)
        }
        Method::WlmpRls => (prep.wlmp_static_db, rls_dynamic_db(prep, hyperparam, config)?),
        Method::MbnnFtrl => divergence_to_sentinel(mbnn_run(prep, hyperparam, config))?,
    };
    Ok(RunResult::new(
        method,
        prep.beta,
        oversampling_for_beta(prep.beta),
        prep.seed,
        static_db,
        dynamic_db,
        hyperparam,
    ))
}

/// Dynamic-period score used by the hyperparameter search.
pub(crate) fn dynamic_score(
    prep: &PreparedDataset,
    method: Method,
    hyperparam: f64,
    config: &ExperimentConfig,
) -> Result<f64> {
    run_method(prep, method, hyperparam, config).map(|r| r.dynamic_cancellation_db)
}
