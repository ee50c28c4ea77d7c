//! Adaptation algorithms: batch least squares, LMS, RLS, and FTRL.
//!
//! All online kernels follow a strict predict-then-update discipline: the
//! prediction returned for sample `n` uses only the state accumulated from
//! samples `< n`, so residual streams are honest one-step-ahead errors.
//! Each kernel exists in a `*_counted` form written over an arithmetic
//! context; the production wrappers run the identical code path with
//! zero-cost passthrough ops, which keeps the measured complexity figures
//! tied to the code that actually runs.
//!
//! The module also provides the hyperparameter grids and the seed-averaged
//! grid search used by the experiment harness.

use crate::cancelers::cdot;
use crate::error::{FdsicError, Result};
use crate::metrics::ops::{ArithOps, PlainOps};
use crate::metrics::Method;
use crate::C64;
use nalgebra::{DMatrix, DVector};

/// Relative drift bound above which the RLS inverse-correlation matrix is
/// re-symmetrized.
const HERMITIAN_DRIFT_TOL: f64 = 1e-9;

/// Result of a batch least-squares fit.
#[derive(Debug, Clone)]
pub struct LsFit {
    /// Minimum-norm least-squares solution, one weight per regressor column.
    pub weights: Vec<C64>,
    /// True when the regressor matrix was numerically rank-deficient, in
    /// which case the minimum-norm solution among the minimizers is
    /// returned.
    pub rank_deficient: bool,
}

/// Solve `min_w Σ_i |targets[i] − rows[i]·w|²` by singular value
/// decomposition.
///
/// Requires at least as many equations as unknowns and consistent row
/// lengths. Rank deficiency is tolerated (flagged in the result) so
/// near-collinear nonlinear basis sets still produce a usable fit.
///
/// Columns are equilibrated to unit RMS before the decomposition:
/// polynomial bases mix columns whose scales differ by tens of dB, and
/// without equilibration that scale spread — not actual collinearity —
/// dominates the condition number and can push well-determined directions
/// below the rank tolerance.
pub fn ls_fit(rows: &[Vec<C64>], targets: &[C64]) -> Result<LsFit> {
    if rows.is_empty() {
        return Err(FdsicError::Dimension("least squares needs at least one equation".into()));
    }
    let n_cols = rows[0].len();
    if n_cols == 0 {
        return Err(FdsicError::Dimension("least squares needs at least one regressor".into()));
    }
    if rows.iter().any(|r| r.len() != n_cols) {
        return Err(FdsicError::Dimension("inconsistent regressor row lengths".into()));
    }
    if targets.len() != rows.len() {
        return Err(FdsicError::Dimension(format!(
            "{} equations but {} targets",
            rows.len(),
            targets.len()
        )));
    }
    if rows.len() < n_cols {
        return Err(FdsicError::Dimension(format!(
            "underdetermined system: {} equations for {} unknowns",
            rows.len(),
            n_cols
        )));
    }
    let n_rows = rows.len();
    let col_scale: Vec<f64> = (0..n_cols)
        .map(|j| {
            let ms = rows.iter().map(|r| r[j].norm_sqr()).sum::<f64>() / n_rows as f64;
            // An identically-zero column contributes nothing; leave it
            // unscaled so it lands in the null space instead of dividing
            // by zero.
            if ms > 0.0 { ms.sqrt() } else { 1.0 }
        })
        .collect();
    let a = DMatrix::from_fn(n_rows, n_cols, |i, j| rows[i][j] / col_scale[j]);
    let b = DVector::from_fn(targets.len(), |i, _| targets[i]);
    let svd = a.svd(true, true);
    let max_sv = svd.singular_values.iter().fold(0.0f64, |acc, &s| acc.max(s));
    let tol = f64::EPSILON * max_sv * n_rows.max(n_cols) as f64;
    let rank = svd.rank(tol);
    let solution = svd
        .solve(&b, tol)
        .map_err(|e| FdsicError::Numerical(format!("svd solve failed: {e}")))?;
    Ok(LsFit {
        weights: solution.iter().zip(&col_scale).map(|(w, s)| w / s).collect(),
        rank_deficient: rank < n_cols,
    })
}

/// Least-mean-squares configuration: just the step size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmsState {
    mu: f64,
}

impl LmsState {
    /// Step size must be positive and finite.
    pub fn new(mu: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(FdsicError::Config(format!("lms step size must be positive, got {mu}")));
        }
        Ok(LmsState { mu })
    }

    /// The configured step size.
    pub fn mu(&self) -> f64 {
        self.mu
    }
}

/// One LMS iteration through an explicit arithmetic context.
///
/// Predicts `y = w·φ`, then applies the stochastic-gradient update
/// `w ← w + μ·e·conj(φ)`. Returns `(prediction, error)`.
pub fn lms_step_counted<O: ArithOps>(
    mu: f64,
    weights: &mut [C64],
    regressors: &[C64],
    target: C64,
    ops: &mut O,
) -> Result<(C64, C64)> {
    if weights.is_empty() || weights.len() != regressors.len() {
        return Err(FdsicError::Dimension(format!(
            "lms expects matching non-empty weights/regressors, got {}/{}",
            weights.len(),
            regressors.len()
        )));
    }
    let y = cdot(weights, regressors, ops);
    let e = ops.csub(target, y);
    let scaled = ops.cscale(mu, e);
    for (w, &phi) in weights.iter_mut().zip(regressors) {
        let delta = ops.cmul(scaled, phi.conj());
        *w = ops.cadd(*w, delta);
    }
    Ok((y, e))
}

/// One LMS iteration (predict-then-update).
pub fn lms_step(
    state: &LmsState,
    weights: &mut [C64],
    regressors: &[C64],
    target: C64,
) -> Result<(C64, C64)> {
    lms_step_counted(state.mu, weights, regressors, target, &mut PlainOps)
}

/// Recursive-least-squares state: forgetting factor and the inverse
/// correlation matrix `P` (row-major, N×N).
#[derive(Debug, Clone)]
pub struct RlsState {
    dim: usize,
    lambda: f64,
    inv_lambda: f64,
    delta: f64,
    p: Vec<C64>,
    reset_count: u64,
}

impl RlsState {
    /// `lambda` is the exponential forgetting factor in (0, 1]; `delta`
    /// scales the initial covariance `P₀ = δ·I`.
    pub fn new(dim: usize, lambda: f64, delta: f64) -> Result<Self> {
        if dim == 0 {
            return Err(FdsicError::Config("rls needs at least one weight".into()));
        }
        if !(lambda.is_finite() && lambda > 0.0 && lambda <= 1.0) {
            return Err(FdsicError::Config(format!(
                "rls forgetting factor must lie in (0, 1], got {lambda}"
            )));
        }
        if !(delta.is_finite() && delta > 0.0) {
            return Err(FdsicError::Config(format!(
                "rls initial covariance scale must be positive, got {delta}"
            )));
        }
        let mut state = RlsState {
            dim,
            lambda,
            inv_lambda: 1.0 / lambda,
            delta,
            p: vec![C64::new(0.0, 0.0); dim * dim],
            reset_count: 0,
        };
        state.reset_covariance();
        Ok(state)
    }

    /// Conventional data-independent initialization: `δ = 100 / E[|φ|²]`.
    pub fn default_delta(mean_regressor_power: f64) -> Result<f64> {
        if !(mean_regressor_power.is_finite() && mean_regressor_power > 0.0) {
            return Err(FdsicError::Config(format!(
                "mean regressor power must be positive, got {mean_regressor_power}"
            )));
        }
        Ok(100.0 / mean_regressor_power)
    }

    /// Number of adapted weights.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The forgetting factor.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// How many times the covariance was reset after going non-finite.
    pub fn reset_count(&self) -> u64 {
        self.reset_count
    }

    fn reset_covariance(&mut self) {
        self.p.fill(C64::new(0.0, 0.0));
        for i in 0..self.dim {
            self.p[i * self.dim + i] = C64::new(self.delta, 0.0);
        }
    }

    /// Numerical maintenance applied after every update, outside the
    /// counted arithmetic: recover from a non-finite covariance and undo
    /// accumulated Hermitian drift.
    fn maintain(&mut self) {
        let finite = self.p.iter().all(|v| v.re.is_finite() && v.im.is_finite());
        if !finite {
            log::warn!(
                "rls covariance went non-finite (reset #{}); reinitializing to delta*I",
                self.reset_count + 1
            );
            self.reset_covariance();
            self.reset_count += 1;
            return;
        }
        let n = self.dim;
        let mut drift = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                let d = self.p[i * n + j] - self.p[j * n + i].conj();
                drift = drift.max(d.norm());
            }
        }
        if drift > HERMITIAN_DRIFT_TOL {
            for i in 0..n {
                for j in (i + 1)..n {
                    let avg = 0.5 * (self.p[i * n + j] + self.p[j * n + i].conj());
                    self.p[i * n + j] = avg;
                    self.p[j * n + i] = avg.conj();
                }
                let di = self.p[i * n + i];
                self.p[i * n + i] = C64::new(di.re, 0.0);
            }
        }
    }
}

/// One RLS iteration through an explicit arithmetic context.
///
/// Gain form: `k = P·conj(φ) / (λ + φᵀ·P·conj(φ))`, evaluated as
/// `v = λ⁻¹·P·conj(φ)` and `k = v / (1 + φᵀv)`; the quadratic form is real
/// for Hermitian `P`, so the denominator division is a real one. The
/// covariance update is `P ← λ⁻¹·P − k ⊗ (λ⁻¹·φᵀP)`. Returns
/// `(prediction, error)`.
pub fn rls_step_counted<O: ArithOps>(
    state: &mut RlsState,
    weights: &mut [C64],
    regressors: &[C64],
    target: C64,
    ops: &mut O,
) -> Result<(C64, C64)> {
    let n = state.dim;
    if weights.len() != n || regressors.len() != n {
        return Err(FdsicError::Dimension(format!(
            "rls dimension {} does not match weights {} / regressors {}",
            n,
            weights.len(),
            regressors.len()
        )));
    }
    // u = P·conj(φ), folded from the first term so no zero-init adds.
    let mut u = Vec::with_capacity(n);
    for i in 0..n {
        let row = &state.p[i * n..(i + 1) * n];
        let mut acc = ops.cmul(row[0], regressors[0].conj());
        for j in 1..n {
            let term = ops.cmul(row[j], regressors[j].conj());
            acc = ops.cadd(acc, term);
        }
        u.push(acc);
    }
    // v = λ⁻¹·u; the reciprocal is cached in the state.
    let v: Vec<C64> = u.iter().map(|&ui| ops.cscale(state.inv_lambda, ui)).collect();
    // q = φᵀ·v is real (up to roundoff) for Hermitian P.
    let q = cdot(regressors, &v, ops);
    let denom = ops.cadd(C64::new(1.0, 0.0), q).re;
    let k: Vec<C64> = v.iter().map(|&vi| ops.cdiv_re(vi, denom)).collect();
    // Predict with the pre-update weights, then correct them.
    let y = cdot(weights, regressors, ops);
    let e = ops.csub(target, y);
    for (w, &ki) in weights.iter_mut().zip(&k) {
        let delta = ops.cmul(ki, e);
        *w = ops.cadd(*w, delta);
    }
    // π = φᵀ·P (fresh row-vector product), ρ = λ⁻¹·π.
    let mut rho = Vec::with_capacity(n);
    for j in 0..n {
        let mut acc = ops.cmul(regressors[0], state.p[j]);
        for i in 1..n {
            let term = ops.cmul(regressors[i], state.p[i * n + j]);
            acc = ops.cadd(acc, term);
        }
        rho.push(ops.cscale(state.inv_lambda, acc));
    }
    // P ← λ⁻¹·P − k ⊗ ρ.
    for i in 0..n {
        for j in 0..n {
            let scaled = ops.cscale(state.inv_lambda, state.p[i * n + j]);
            let outer = ops.cmul(k[i], rho[j]);
            state.p[i * n + j] = ops.csub(scaled, outer);
        }
    }
    state.maintain();
    Ok((y, e))
}

/// One RLS iteration (predict-then-update).
pub fn rls_step(
    state: &mut RlsState,
    weights: &mut [C64],
    regressors: &[C64],
    target: C64,
) -> Result<(C64, C64)> {
    rls_step_counted(state, weights, regressors, target, &mut PlainOps)
}

/// Per-coordinate FTRL-proximal state over real parameters.
#[derive(Debug, Clone)]
pub struct FtrlState {
    alpha: f64,
    inv_alpha: f64,
    beta: f64,
    l1: f64,
    l2: f64,
    z: Vec<f64>,
    n: Vec<f64>,
    sqrt_n: Vec<f64>,
}

impl FtrlState {
    /// Unregularized learner with learning-rate scale `alpha` (β = 1,
    /// λ₁ = λ₂ = 0), the configuration used by the experiments.
    pub fn new(dim: usize, alpha: f64) -> Result<Self> {
        Self::with_regularization(dim, alpha, 1.0, 0.0, 0.0)
    }

    /// Full FTRL-proximal configuration with L1/L2 regularization.
    pub fn with_regularization(dim: usize, alpha: f64, beta: f64, l1: f64, l2: f64) -> Result<Self> {
        if dim == 0 {
            return Err(FdsicError::Config("ftrl needs at least one coordinate".into()));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(FdsicError::Config(format!(
                "ftrl learning-rate scale must be positive, got {alpha}"
            )));
        }
        if !(beta.is_finite() && beta >= 0.0) || l1 < 0.0 || l2 < 0.0 {
            return Err(FdsicError::Config(
                "ftrl beta/l1/l2 must be finite and non-negative".into(),
            ));
        }
        Ok(FtrlState {
            alpha,
            inv_alpha: 1.0 / alpha,
            beta,
            l1,
            l2,
            z: vec![0.0; dim],
            n: vec![0.0; dim],
            sqrt_n: vec![0.0; dim],
        })
    }

    /// Seed the linear accumulators so the closed-form weight reproduces
    /// `weights` before any gradient arrives (`z = −w·β/α`). Without this,
    /// the first update would silently restart the model from zero, because
    /// the weight is a pure function of the accumulators. Only valid on a
    /// fresh state.
    pub fn warm_start(&mut self, weights: &[f64]) -> Result<()> {
        if weights.len() != self.dim() {
            return Err(FdsicError::Dimension(format!(
                "warm start got {} weights for dimension {}",
                weights.len(),
                self.dim()
            )));
        }
        if self.n.iter().any(|&n| n != 0.0) {
            return Err(FdsicError::Config(
                "ftrl warm start requires a fresh state (no accumulated gradients)".into(),
            ));
        }
        for (z, &w) in self.z.iter_mut().zip(weights) {
            *z = -w * self.beta * self.inv_alpha;
        }
        Ok(())
    }

    /// Number of real coordinates.
    pub fn dim(&self) -> usize {
        self.z.len()
    }

    /// The learning-rate scale.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Per-coordinate squared-gradient accumulators.
    pub fn accumulators(&self) -> &[f64] {
        &self.n
    }
}

/// One FTRL-proximal iteration through an explicit arithmetic context.
///
/// Per coordinate: `σ = (√(n+g²) − √n)/α`, `z ← z + g − σ·w`, `n ← n + g²`,
/// then the closed-form weight `w = −z·α / (β + √n)`. The counted path is
/// the unregularized one; with λ₁/λ₂ ≠ 0 the general soft-thresholded
/// solution runs in plain arithmetic instead.
pub fn ftrl_step_counted<O: ArithOps>(
    state: &mut FtrlState,
    weights: &mut [f64],
    grads: &[f64],
    ops: &mut O,
) -> Result<()> {
    let dim = state.dim();
    if weights.len() != dim || grads.len() != dim {
        return Err(FdsicError::Dimension(format!(
            "ftrl dimension {} does not match weights {} / grads {}",
            dim,
            weights.len(),
            grads.len()
        )));
    }
    let regularized = state.l1 != 0.0 || state.l2 != 0.0;
    for i in 0..dim {
        let g = grads[i];
        if regularized {
            let g2 = g * g;
            let n_new = state.n[i] + g2;
            let sqrt_new = n_new.sqrt();
            let sigma = (sqrt_new - state.sqrt_n[i]) * state.inv_alpha;
            state.z[i] += g - sigma * weights[i];
            state.n[i] = n_new;
            state.sqrt_n[i] = sqrt_new;
            let z = state.z[i];
            weights[i] = if z.abs() <= state.l1 {
                0.0
            } else {
                -(z - z.signum() * state.l1)
                    / ((state.beta + sqrt_new) * state.inv_alpha + state.l2)
            };
        } else {
            let g2 = ops.rmul(g, g);
            let n_new = ops.radd(state.n[i], g2);
            let sqrt_new = ops.rsqrt(n_new);
            let ds = ops.rsub(sqrt_new, state.sqrt_n[i]);
            let sigma = ops.rmul(ds, state.inv_alpha);
            let shrink = ops.rmul(sigma, weights[i]);
            let step = ops.rsub(g, shrink);
            let z_new = ops.radd(state.z[i], step);
            state.z[i] = z_new;
            state.n[i] = n_new;
            state.sqrt_n[i] = sqrt_new;
            let num = ops.rmul(z_new, state.alpha);
            let denom = ops.radd(state.beta, sqrt_new);
            weights[i] = -ops.rdiv(num, denom);
        }
    }
    Ok(())
}

/// One FTRL-proximal iteration over a model's real parameter vector.
pub fn ftrl_step(state: &mut FtrlState, weights: &mut [f64], grads: &[f64]) -> Result<()> {
    ftrl_step_counted(state, weights, grads, &mut PlainOps)
}

/// Step-size grid for LMS tuning: 43 logarithmic points, 1e−6 to 1.
pub fn lms_mu_grid() -> Vec<f64> {
    (0..=42).map(|k| 10f64.powf(-6.0 + k as f64 / 7.0)).collect()
}

/// Learning-rate grid for FTRL tuning: 43 logarithmic points, 1e−4 to 1e2.
pub fn ftrl_alpha_grid() -> Vec<f64> {
    (0..=42).map(|k| 10f64.powf(-4.0 + k as f64 / 7.0)).collect()
}

/// Forgetting-factor grid for RLS tuning.
pub fn rls_lambda_grid() -> Vec<f64> {
    vec![0.9, 0.99, 0.995, 0.999, 0.9995, 0.9999, 1.0]
}

/// Winning candidate of a hyperparameter search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuningResult {
    /// The selected hyperparameter value.
    pub value: f64,
    /// Its mean dynamic-period cancellation over the tuning seeds, in dB.
    pub mean_dynamic_cancellation_db: f64,
}

/// Grid search for the best hyperparameter of `method` at drift rate
/// `beta`.
///
/// Each candidate is scored by the mean over `tuning_seeds` of the
/// dynamic-period cancellation returned by `protocol(method, beta, seed,
/// candidate)`. A protocol error or non-finite score marks the candidate
/// diverged. The best mean wins; exact ties go to the smaller candidate.
/// Fails only if every candidate diverged.
pub fn hyperparam_search<F>(
    method: Method,
    beta: f64,
    tuning_seeds: &[u64],
    grid: &[f64],
    mut protocol: F,
) -> Result<TuningResult>
where
    F: FnMut(Method, f64, u64, f64) -> Result<f64>,
{
    if grid.is_empty() {
        return Err(FdsicError::Config("hyperparameter grid is empty".into()));
    }
    if tuning_seeds.is_empty() {
        return Err(FdsicError::Config("no tuning seeds supplied".into()));
    }
    let mut best: Option<TuningResult> = None;
    for &candidate in grid {
        let mut sum = 0.0;
        let mut diverged = false;
        for &seed in tuning_seeds {
            match protocol(method, beta, seed, candidate) {
                Ok(score) if score.is_finite() => sum += score,
                _ => {
                    diverged = true;
                    break;
                }
            }
        }
        if diverged {
            continue;
        }
        let mean = sum / tuning_seeds.len() as f64;
        let better = match best {
            None => true,
            Some(b) => {
                mean > b.mean_dynamic_cancellation_db
                    || (mean == b.mean_dynamic_cancellation_db && candidate < b.value)
            }
        };
        if better {
            best = Some(TuningResult { value: candidate, mean_dynamic_cancellation_db: mean });
        }
    }
    best.ok_or_else(|| {
        FdsicError::Numerical(format!(
            "hyperparameter search failed: every candidate for {method} at beta={beta} diverged"
        ))
    })
}
