//! Dataset synthesis: OFDM excitation through the drifting hardware model.
//!
//! A dataset is one contiguous transmit frame pushed through the transceiver
//! model in two phases: a *static* period with the hardware frozen at its
//! initial draw (for canceler convergence), followed by a *dynamic* period
//! in which every parameter advances one AR(1) step per sample (for tracking
//! evaluation). Receiver noise is added to the targets only. Generation is a
//! pure function of `(seed, beta, configs)`; every random draw comes from a
//! purpose-labeled substream so datasets are bit-reproducible.

use super::sampling::{design_hardware, hardware_from_values};
use super::{pa_output, HardwareParams, HwDistributionConfig, ParamId};
use crate::baseband::{add_noise, generate_ofdm_frame, OfdmConfig, NOISE_FLOOR_DB};
use crate::error::{FdsicError, Result};
use crate::rng::stream;
use crate::C64;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

/// Lengths and noise level for dataset generation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetParams {
    /// Samples with frozen hardware (canceler convergence period).
    pub static_len: usize,
    /// Samples with per-sample AR(1) drift (tracking period).
    pub dynamic_len: usize,
    /// Receiver noise power relative to the mean target power, in dB.
    /// Values at or below the noise floor disable noise entirely.
    pub noise_db: f64,
}

impl Default for DatasetParams {
    fn default() -> Self {
        DatasetParams { static_len: 10_000, dynamic_len: 10_000, noise_db: -40.0 }
    }
}

/// Ground-truth parameter trajectory recorded during generation.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthTrace {
    /// Hardware state used throughout the static period.
    pub initial: HardwareParams,
    /// Parameter identities, in the fixed design order.
    pub param_ids: Vec<ParamId>,
    /// `dynamic_values[t][k]`: value of parameter `k` when dynamic sample
    /// `t` was emitted (i.e. after the step preceding that sample).
    pub dynamic_values: Vec<Vec<C64>>,
}

impl TruthTrace {
    /// Hardware state in effect for dynamic sample `t`.
    pub fn params_at(&self, t: usize) -> Result<HardwareParams> {
        let values = self.dynamic_values.get(t).ok_or_else(|| {
            FdsicError::Dimension(format!(
                "dynamic step {t} out of range (trace has {})",
                self.dynamic_values.len()
            ))
        })?;
        hardware_from_values(
            self.initial.taps.memory_len(),
            self.initial.taps.nonlin_order(),
            values,
        )
    }
}

/// One generated dataset: transmit samples, noisy targets, and the truth
/// trace, split into static and dynamic periods.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub seed: u64,
    pub beta: f64,
    x: Vec<C64>,
    y: Vec<C64>,
    static_len: usize,
    pub truth: TruthTrace,
}

impl Dataset {
    /// Transmit samples of the static period.
    pub fn x_static(&self) -> &[C64] {
        &self.x[..self.static_len]
    }

    /// Targets of the static period.
    pub fn y_static(&self) -> &[C64] {
        &self.y[..self.static_len]
    }

    /// Transmit samples of the dynamic period.
    pub fn x_dynamic(&self) -> &[C64] {
        &self.x[self.static_len..]
    }

    /// Targets of the dynamic period.
    pub fn y_dynamic(&self) -> &[C64] {
        &self.y[self.static_len..]
    }

    /// Full transmit frame (static followed by dynamic).
    pub fn x_full(&self) -> &[C64] {
        &self.x
    }

    /// Full target sequence.
    pub fn y_full(&self) -> &[C64] {
        &self.y
    }

    /// Static-period length in samples.
    pub fn static_len(&self) -> usize {
        self.static_len
    }

    /// Dynamic-period length in samples.
    pub fn dynamic_len(&self) -> usize {
        self.x.len() - self.static_len
    }
}

/// Fill `history[m] = x[n−m]`, zero-padded for n−m < 0.
fn fill_history(x: &[C64], n: usize, history: &mut [C64]) {
    for (m, slot) in history.iter_mut().enumerate() {
        *slot = if n >= m { x[n - m] } else { C64::new(0.0, 0.0) };
    }
}

/// Generate one dataset for a given seed and drift coefficient.
///
/// The RNG substreams are labeled by purpose (`ofdm`, `hw_init`,
/// `ar1:<param>`, `noise`), so the transmit frame, the hardware draw, each
/// parameter's innovation sequence, and the receiver noise are mutually
/// independent and individually reproducible. Because every parameter owns
/// its innovation stream and innovations are drawn as unit normals, the
/// same seed yields perfectly paired drift paths across different β.
pub fn generate_dataset(
    seed: u64,
    beta: f64,
    hw_config: &HwDistributionConfig,
    ofdm: &OfdmConfig,
    params: &DatasetParams,
) -> Result<Dataset> {
    if params.static_len + params.dynamic_len == 0 {
        return Err(FdsicError::Config(
            "dataset must contain at least one sample".into(),
        ));
    }
    if !(0.0..1.0).contains(&beta) {
        return Err(FdsicError::Config(format!("beta must be in [0, 1), got {beta}")));
    }
    let total = params.static_len + params.dynamic_len;
    let x = generate_ofdm_frame(ofdm, total, &mut stream(seed, "ofdm"))?.into_samples();

    let mut hw_rng = stream(seed, "hw_init");
    let design = design_hardware(hw_config, &mut hw_rng)?;
    let initial = design.draw(&mut hw_rng)?;
    let mut family = design.ar1_family(&initial, beta)?;
    let mut drift_rngs: Vec<_> = family
        .iter()
        .map(|(id, _)| stream(seed, &format!("ar1:{id}")))
        .collect();
    let param_ids: Vec<ParamId> = family.iter().map(|(id, _)| *id).collect();

    let m_len = hw_config.memory_len;
    let mut history = vec![C64::new(0.0, 0.0); m_len];
    let mut y = Vec::with_capacity(total);

    for n in 0..params.static_len {
        fill_history(&x, n, &mut history);
        y.push(pa_output(&history, &initial)?);
    }

    let mut dynamic_values = Vec::with_capacity(params.dynamic_len);
    for t in 0..params.dynamic_len {
        let mut step_values = Vec::with_capacity(family.len());
        for ((_, process), rng) in family.iter_mut().zip(drift_rngs.iter_mut()) {
            step_values.push(super::ar1_step(process, rng));
        }
        let current = family.current_params()?;
        dynamic_values.push(step_values);
        let n = params.static_len + t;
        fill_history(&x, n, &mut history);
        y.push(pa_output(&history, &current)?);
    }

    if params.noise_db > NOISE_FLOOR_DB {
        y = add_noise(&y, params.noise_db, &mut stream(seed, "noise"))?;
    }

    Ok(Dataset {
        seed,
        beta,
        x,
        y,
        static_len: params.static_len,
        truth: TruthTrace { initial, param_ids, dynamic_values },
    })
}

/// Write the dataset to CSV with columns
/// `sample_index,period,x_re,x_im,y_re,y_im`. Floats use shortest
/// round-trip formatting, so import reproduces the values bit-exactly.
pub fn export_dataset_csv(dataset: &Dataset, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| FdsicError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| FdsicError::io(path, e);
    writeln!(w, "sample_index,period,x_re,x_im,y_re,y_im").map_err(io_err)?;
    for (n, (x, y)) in dataset.x.iter().zip(dataset.y.iter()).enumerate() {
        let period = if n < dataset.static_len { "static" } else { "dynamic" };
        writeln!(w, "{n},{period},{},{},{},{}", x.re, x.im, y.re, y.im).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Write the truth trace sidecar with columns `param_id,sample_index,re,im`.
///
/// The initial (static-period) state is recorded at sample index 0; each
/// dynamic step is recorded at its absolute sample index.
pub fn export_truth_csv(dataset: &Dataset, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| FdsicError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| FdsicError::io(path, e);
    writeln!(w, "param_id,sample_index,re,im").map_err(io_err)?;
    let truth = &dataset.truth;
    let initial_values: Vec<C64> = {
        let mut v = vec![
            C64::new(truth.initial.mixer.a_iq, 0.0),
            C64::new(truth.initial.mixer.phi_iq, 0.0),
        ];
        v.extend(truth.initial.taps.as_slice().iter().copied());
        v
    };
    for (id, value) in truth.param_ids.iter().zip(initial_values.iter()) {
        writeln!(w, "{id},0,{},{}", value.re, value.im).map_err(io_err)?;
    }
    for (t, values) in truth.dynamic_values.iter().enumerate() {
        let n = dataset.static_len + t;
        for (id, value) in truth.param_ids.iter().zip(values.iter()) {
            writeln!(w, "{id},{n},{},{}", value.re, value.im).map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)
}

/// Dataset read back from CSV (no truth trace; that lives in the sidecar).
#[derive(Debug, Clone, PartialEq)]
pub struct ImportedDataset {
    pub x_static: Vec<C64>,
    pub y_static: Vec<C64>,
    pub x_dynamic: Vec<C64>,
    pub y_dynamic: Vec<C64>,
}

/// Read a dataset CSV written by [`export_dataset_csv`].
pub fn import_dataset_csv(path: &Path) -> Result<ImportedDataset> {
    let file = std::fs::File::open(path).map_err(|e| FdsicError::io(path, e))?;
    let reader = BufReader::new(file);
    let mut out = ImportedDataset {
        x_static: Vec::new(),
        y_static: Vec::new(),
        x_dynamic: Vec::new(),
        y_dynamic: Vec::new(),
    };
    let parse = |field: &str, line: usize| -> Result<f64> {
        field.parse::<f64>().map_err(|_| {
            FdsicError::Parse(format!("line {line}: bad float field {field:?}"))
        })
    };
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| FdsicError::io(path, e))?;
        if idx == 0 {
            if line.trim() != "sample_index,period,x_re,x_im,y_re,y_im" {
                return Err(FdsicError::Parse(format!("unexpected header {line:?}")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(FdsicError::Parse(format!(
                "line {idx}: expected 6 fields, got {}",
                fields.len()
            )));
        }
        let x = C64::new(parse(fields[2], idx)?, parse(fields[3], idx)?);
        let y = C64::new(parse(fields[4], idx)?, parse(fields[5], idx)?);
        match fields[1] {
            "static" => {
                out.x_static.push(x);
                out.y_static.push(y);
            }
            "dynamic" => {
                out.x_dynamic.push(x);
                out.y_dynamic.push(y);
            }
            other => {
                return Err(FdsicError::Parse(format!("line {idx}: unknown period {other:?}")));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_params() -> DatasetParams {
        DatasetParams { static_len: 300, dynamic_len: 200, noise_db: -40.0 }
    }

    #[test]
    fn output_sizes_match_configuration() {
        let ds = generate_dataset(
            1,
            0.999,
            &HwDistributionConfig::default(),
            &OfdmConfig::default(),
            &DatasetParams::default(),
        )
        .unwrap();
        assert_eq!(ds.x_static().len(), 10_000);
        assert_eq!(ds.y_static().len(), 10_000);
        assert_eq!(ds.x_dynamic().len(), 10_000);
        assert_eq!(ds.y_dynamic().len(), 10_000);
        assert_eq!(ds.truth.dynamic_values.len(), 10_000);
        assert_eq!(ds.truth.param_ids.len(), 11);
    }

    #[test]
    fn generation_is_bit_identical_per_seed() {
        let cfg = HwDistributionConfig::default();
        let ofdm = OfdmConfig::default();
        let params = small_params();
        let a = generate_dataset(9, 0.99, &cfg, &ofdm, &params).unwrap();
        let b = generate_dataset(9, 0.99, &cfg, &ofdm, &params).unwrap();
        assert_eq!(a, b);
        for (u, v) in a.y_full().iter().zip(b.y_full()) {
            assert_eq!(u.re.to_bits(), v.re.to_bits());
            assert_eq!(u.im.to_bits(), v.im.to_bits());
        }
        let c = generate_dataset(10, 0.99, &cfg, &ofdm, &params).unwrap();
        assert_ne!(a.y_full()[0], c.y_full()[0]);
    }

    #[test]
    fn noiseless_static_targets_equal_model_output() {
        let params = DatasetParams { noise_db: f64::NEG_INFINITY, ..small_params() };
        let ds = generate_dataset(
            3,
            0.9,
            &HwDistributionConfig::default(),
            &OfdmConfig::default(),
            &params,
        )
        .unwrap();
        let m = ds.truth.initial.taps.memory_len();
        let mut history = vec![C64::new(0.0, 0.0); m];
        for n in 0..ds.static_len() {
            fill_history(ds.x_full(), n, &mut history);
            let want = pa_output(&history, &ds.truth.initial).unwrap();
            assert_eq!(ds.y_static()[n], want, "sample {n}");
        }
    }

    #[test]
    fn noiseless_dynamic_targets_follow_truth_trace() {
        let params = DatasetParams { noise_db: f64::NEG_INFINITY, ..small_params() };
        let ds = generate_dataset(
            4,
            0.9,
            &HwDistributionConfig::default(),
            &OfdmConfig::default(),
            &params,
        )
        .unwrap();
        let m = ds.truth.initial.taps.memory_len();
        let mut history = vec![C64::new(0.0, 0.0); m];
        for t in 0..ds.dynamic_len() {
            let hw = ds.truth.params_at(t).unwrap();
            let n = ds.static_len() + t;
            fill_history(ds.x_full(), n, &mut history);
            let want = pa_output(&history, &hw).unwrap();
            assert_eq!(ds.y_dynamic()[t], want, "dynamic sample {t}");
        }
        assert!(ds.truth.params_at(ds.dynamic_len()).is_err());
    }

    #[test]
    fn noise_perturbs_targets_at_the_requested_level() {
        let cfg = HwDistributionConfig::default();
        let ofdm = OfdmConfig::default();
        let clean_params = DatasetParams { noise_db: f64::NEG_INFINITY, ..Default::default() };
        let clean = generate_dataset(5, 0.99, &cfg, &ofdm, &clean_params).unwrap();
        let noisy = generate_dataset(5, 0.99, &cfg, &ofdm, &DatasetParams::default()).unwrap();
        // Transmit samples are untouched by receiver noise.
        assert_eq!(clean.x_full(), noisy.x_full());
        let signal: f64 = clean.y_full().iter().map(|v| v.norm_sqr()).sum();
        let noise: f64 = clean
            .y_full()
            .iter()
            .zip(noisy.y_full())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let ratio_db = 10.0 * (noise / signal).log10();
        assert!(
            (ratio_db + 40.0).abs() < 0.5,
            "noise level {ratio_db} dB, expected −40 dB"
        );
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let cfg = HwDistributionConfig::default();
        let ofdm = OfdmConfig::default();
        let zero = DatasetParams { static_len: 0, dynamic_len: 0, ..Default::default() };
        assert!(generate_dataset(1, 0.9, &cfg, &ofdm, &zero).is_err());
        assert!(generate_dataset(1, 1.0, &cfg, &ofdm, &DatasetParams::default()).is_err());
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let params = DatasetParams { static_len: 120, dynamic_len: 80, noise_db: -40.0 };
        let ds = generate_dataset(
            6,
            0.999,
            &HwDistributionConfig::default(),
            &OfdmConfig::default(),
            &params,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let data_path = dir.path().join("dataset.csv");
        let truth_path = dir.path().join("truth.csv");
        export_dataset_csv(&ds, &data_path).unwrap();
        export_truth_csv(&ds, &truth_path).unwrap();
        let imported = import_dataset_csv(&data_path).unwrap();
        assert_eq!(imported.x_static, ds.x_static());
        assert_eq!(imported.y_static, ds.y_static());
        assert_eq!(imported.x_dynamic, ds.x_dynamic());
        assert_eq!(imported.y_dynamic, ds.y_dynamic());
        for (a, b) in imported.y_dynamic.iter().zip(ds.y_dynamic()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
        // Sidecar sanity: one row per parameter for the initial state plus
        // one per parameter per dynamic step, plus the header.
        let truth_text = std::fs::read_to_string(&truth_path).unwrap();
        let rows = truth_text.lines().count();
        assert_eq!(rows, 1 + 11 + 80 * 11);
        assert!(truth_text.starts_with("param_id,sample_index,re,im\n"));
        assert!(truth_text.contains("\nh_p5_m2,"));
    }

    #[test]
    fn import_rejects_malformed_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "wrong,header\n").unwrap();
        assert!(import_dataset_csv(&path).is_err());
        std::fs::write(
            &path,
            "sample_index,period,x_re,x_im,y_re,y_im\n0,weird,0,0,0,0\n",
        )
        .unwrap();
        assert!(import_dataset_csv(&path).is_err());
        std::fs::write(
            &path,
            "sample_index,period,x_re,x_im,y_re,y_im\n0,static,zero,0,0,0\n",
        )
        .unwrap();
        assert!(import_dataset_csv(&path).is_err());
    }
}
