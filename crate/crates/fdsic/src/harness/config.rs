//! Experiment configuration: defaults, file loading, validation, hashing.
//!
//! The configuration file is TOML with every field optional; missing fields
//! take the defaults below, which reproduce the full benchmark protocol
//! (5 drift rates × 50 seeds, 10 of them reserved for hyperparameter
//! tuning). `--quick` shrinks that to a desk-scale preset.

use crate::adapt::{ftrl_alpha_grid, lms_mu_grid, rls_lambda_grid};
use crate::baseband::OfdmConfig;
use crate::error::{FdsicError, Result};
use crate::hwmodel::HwDistributionConfig;
use crate::metrics::Method;
use crate::rng::content_hash;
use std::path::{Path, PathBuf};

/// Environment variable that overrides the configured output directory.
pub const OUT_DIR_ENV: &str = "FDSIC_OUT_DIR";

/// Hyperparameter search grids, one per tunable algorithm.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// LMS step sizes μ.
    pub lms_mu: Vec<f64>,
    /// FTRL learning-rate scales α.
    pub ftrl_alpha: Vec<f64>,
    /// RLS forgetting factors λ.
    pub rls_lambda: Vec<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            lms_mu: lms_mu_grid(),
            ftrl_alpha: ftrl_alpha_grid(),
            rls_lambda: rls_lambda_grid(),
        }
    }
}

/// Full experiment description. Everything that influences the numbers
/// lives here; `out_dir` and `jobs` only influence where results go and
/// how fast they arrive.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Drift rates β to sweep; each maps 1:1 to an oversampling rate.
    pub beta_list: Vec<f64>,
    /// Total number of dataset seeds per β.
    pub n_seeds: usize,
    /// How many of the first seeds are reserved for hyperparameter tuning;
    /// the rest are evaluation seeds.
    pub n_tuning_seeds: usize,
    /// Master seeds are `seed_base .. seed_base + n_seeds`.
    pub seed_base: u64,
    /// Which canceler/algorithm pairings to run.
    pub methods: Vec<Method>,
    /// Frozen-hardware samples per dataset.
    pub static_len: usize,
    /// Drifting-hardware samples per dataset.
    pub dynamic_len: usize,
    /// Receiver noise power relative to mean target power, in dB.
    pub noise_db: f64,
    /// Training epochs over the static period for the model-based canceler.
    pub mbnn_epochs: usize,
    /// Transceiver hardware distribution.
    pub hardware: HwDistributionConfig,
    /// Transmit-frame numerology.
    pub ofdm: OfdmConfig,
    /// Hyperparameter search grids.
    pub grids: GridConfig,
    /// Where CSV outputs are written (overridable via `FDSIC_OUT_DIR`).
    pub out_dir: PathBuf,
    /// Worker threads for the sweep; 0 means one per CPU.
    pub jobs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            beta_list: vec![0.9, 0.99, 0.999, 0.9999, 0.99999],
            n_seeds: 50,
            n_tuning_seeds: 10,
            seed_base: 0,
            methods: Method::ALL.to_vec(),
            static_len: 10000,
            dynamic_len: 10000,
            noise_db: -40.0,
            mbnn_epochs: 5,
            hardware: HwDistributionConfig::default(),
            ofdm: OfdmConfig::default(),
            grids: GridConfig::default(),
            out_dir: PathBuf::from("results"),
            jobs: 0,
        }
    }
}

impl ExperimentConfig {
    /// Parse a TOML configuration; missing fields take defaults, unknown
    /// fields are rejected.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| FdsicError::Parse(format!("config parse error: {e}")))
    }

    /// Load a configuration file.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| FdsicError::io(path, e))?;
        Self::from_toml_str(&text)
    }

    /// Shrink to the desk-scale preset: 10 seeds, 2 of them for tuning.
    pub fn apply_quick_preset(&mut self) {
        self.n_seeds = 10;
        self.n_tuning_seeds = 2;
    }

    /// Check internal consistency; called by every entry point.
    pub fn validate(&self) -> Result<()> {
        if self.beta_list.is_empty() {
            return Err(FdsicError::Config("beta_list must not be empty".into()));
        }
        for &b in &self.beta_list {
            if !(b.is_finite() && (0.0..1.0).contains(&b)) {
                return Err(FdsicError::Config(format!("beta must lie in [0, 1), got {b}")));
            }
        }
        if self.n_seeds == 0 {
            return Err(FdsicError::Config("n_seeds must be at least 1".into()));
        }
        if self.n_tuning_seeds >= self.n_seeds {
            return Err(FdsicError::Config(format!(
                "n_tuning_seeds ({}) must be smaller than n_seeds ({})",
                self.n_tuning_seeds, self.n_seeds
            )));
        }
        if self.n_tuning_seeds == 0 {
            return Err(FdsicError::Config("n_tuning_seeds must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(FdsicError::Config("methods must not be empty".into()));
        }
        let mut sorted = self.methods.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != self.methods.len() {
            return Err(FdsicError::Config("methods contains duplicates".into()));
        }
        if self.static_len == 0 || self.dynamic_len == 0 {
            return Err(FdsicError::Config(
                "static_len and dynamic_len must both be at least 1".into(),
            ));
        }
        if self.mbnn_epochs == 0 {
            return Err(FdsicError::Config("mbnn_epochs must be at least 1".into()));
        }
        if self.grids.lms_mu.is_empty()
            || self.grids.ftrl_alpha.is_empty()
            || self.grids.rls_lambda.is_empty()
        {
            return Err(FdsicError::Config("hyperparameter grids must not be empty".into()));
        }
        self.hardware.validate()?;
        Ok(())
    }

    /// Seeds reserved for hyperparameter tuning.
    pub fn tuning_seeds(&self) -> Vec<u64> {
        (0..self.n_tuning_seeds as u64).map(|i| self.seed_base + i).collect()
    }

    /// Seeds used for the reported statistics.
    pub fn eval_seeds(&self) -> Vec<u64> {
        (self.n_tuning_seeds as u64..self.n_seeds as u64)
            .map(|i| self.seed_base + i)
            .collect()
    }

    /// All seeds, tuning first.
    pub fn all_seeds(&self) -> Vec<u64> {
        (0..self.n_seeds as u64).map(|i| self.seed_base + i).collect()
    }

    /// The output directory, honoring the `FDSIC_OUT_DIR` override.
    pub fn resolved_out_dir(&self) -> PathBuf {
        match std::env::var_os(OUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.out_dir.clone(),
        }
    }

    /// Hash of every field that influences the numerical results (output
    /// location and parallelism excluded). Used to key persisted tuning
    /// results so stale selections are never reused.
    pub fn data_fingerprint(&self) -> String {
        let mut canon = self.clone();
        canon.out_dir = PathBuf::new();
        canon.jobs = 0;
        let text = toml::to_string(&canon).expect("config serialization cannot fail");
        format!("{:016x}", content_hash(text.as_bytes()))
    }

    /// The grid searched for `method`'s tunable hyperparameter.
    pub fn grid_for(&self, method: Method) -> &[f64] {
        match method {
            Method::LinearLms | Method::WlmpLms => &self.grids.lms_mu,
            Method::WlmpRls => &self.grids.rls_lambda,
            Method::MbnnFtrl => &self.grids.ftrl_alpha,
        }
    }
}
