//! Random hardware realizations and their per-parameter drift processes.
//!
//! A hardware instance is drawn from designed stationary distributions:
//! the two mixer imbalances are real Gaussians, PA taps are complex
//! Gaussians whose power follows a configurable decay ladder, with a
//! line-of-sight (Rice) component on the zero-lag taps. Every scalar
//! parameter then gets its own AR(1) process whose stationary moments
//! equal the sampling distribution, so drift never changes the ensemble
//! statistics — only how fast an individual instance moves through them.

use super::ar1::{ar1_stationary_draw, Ar1Process};
use super::{HardwareParams, MixerParams, PaTaps};
use crate::error::{FdsicError, Result};
use crate::C64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Identifies one scalar hardware parameter (mixer imbalance or PA tap).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamId {
    /// Mixer gain imbalance A_iq.
    AIq,
    /// Mixer phase imbalance φ_iq.
    PhiIq,
    /// PA tap h_p[m].
    Tap { p: usize, m: usize },
}

impl std::fmt::Display for ParamId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParamId::AIq => write!(f, "a_iq"),
            ParamId::PhiIq => write!(f, "phi_iq"),
            ParamId::Tap { p, m } => write!(f, "h_p{p}_m{m}"),
        }
    }
}

/// Distributional design for random hardware instances.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HwDistributionConfig {
    /// Mean of the gain imbalance A_iq.
    pub mean_a_iq: f64,
    /// Variance of the gain imbalance.
    pub var_a_iq: f64,
    /// Mean of the phase imbalance φ_iq (radians).
    pub mean_phi_iq: f64,
    /// Variance of the phase imbalance.
    pub var_phi_iq: f64,
    /// Power step between successive ladder rungs, in dB. Tap h_p[m] has
    /// total power 10^(−decay·((p−1)/2 + m)/10).
    pub tap_power_decay_db: f64,
    /// Rice K-factor (line-of-sight to scattered power ratio) for the
    /// zero-lag taps. Higher K concentrates the magnitude.
    pub rice_k_factor: f64,
    /// PA memory length M.
    pub memory_len: usize,
    /// PA nonlinearity order P (odd).
    pub nonlin_order: usize,
}

impl Default for HwDistributionConfig {
    fn default() -> Self {
        HwDistributionConfig {
            mean_a_iq: 1.0,
            var_a_iq: 0.005,
            mean_phi_iq: 0.0,
            var_phi_iq: 0.005,
            tap_power_decay_db: 20.0,
            rice_k_factor: 10.0,
            memory_len: 3,
            nonlin_order: 5,
        }
    }
}

impl HwDistributionConfig {
    /// Check parameter ranges (non-negative variances, positive decay,
    /// valid polynomial shape).
    pub fn validate(&self) -> Result<()> {
        if self.var_a_iq < 0.0 || self.var_phi_iq < 0.0 {
            return Err(FdsicError::Config("imbalance variances must be non-negative".into()));
        }
        if !(self.tap_power_decay_db > 0.0) {
            return Err(FdsicError::Config(format!(
                "tap_power_decay_db must be positive, got {}",
                self.tap_power_decay_db
            )));
        }
        if !(self.rice_k_factor >= 0.0) {
            return Err(FdsicError::Config("rice_k_factor must be non-negative".into()));
        }
        if self.memory_len == 0 {
            return Err(FdsicError::Config("memory_len must be positive".into()));
        }
        if self.nonlin_order == 0 || self.nonlin_order % 2 == 0 {
            return Err(FdsicError::Config(format!(
                "nonlin_order must be odd and positive, got {}",
                self.nonlin_order
            )));
        }
        Ok(())
    }

    /// Total designed power of tap h_p[m]: 10^(−decay·((p−1)/2 + m)/10).
    pub fn tap_power(&self, p: usize, m: usize) -> f64 {
        let rung = ((p - 1) / 2 + m) as f64;
        10f64.powf(-self.tap_power_decay_db * rung / 10.0)
    }
}

/// Stationary (mean, variance) design for one scalar parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamDesign {
    pub id: ParamId,
    pub mean: C64,
    pub var: f64,
    pub is_real: bool,
}

/// Full per-parameter stationary design for one hardware instance.
///
/// Parameters appear in a fixed order: A_iq, φ_iq, then taps in
/// lexicographic (p, m) order. Zero-lag tap means carry a random phase,
/// so the design itself is a (lightly) random object.
#[derive(Debug, Clone, PartialEq)]
pub struct HardwareDesign {
    pub memory_len: usize,
    pub nonlin_order: usize,
    pub params: Vec<ParamDesign>,
}

/// Draw the stationary design for a hardware instance.
///
/// Consumes RNG draws only for the zero-lag tap mean phases (uniform on
/// [0, 2π)); all other moments are deterministic functions of the config.
pub fn design_hardware(config: &HwDistributionConfig, rng: &mut ChaCha8Rng) -> Result<HardwareDesign> {
    config.validate()?;
    let mut params = Vec::with_capacity(2 + config.memory_len * (config.nonlin_order + 1) / 2);
    params.push(ParamDesign {
        id: ParamId::AIq,
        mean: C64::new(config.mean_a_iq, 0.0),
        var: config.var_a_iq,
        is_real: true,
    });
    params.push(ParamDesign {
        id: ParamId::PhiIq,
        mean: C64::new(config.mean_phi_iq, 0.0),
        var: config.var_phi_iq,
        is_real: true,
    });
    for p in super::odd_orders(config.nonlin_order) {
        for m in 0..config.memory_len {
            let omega = config.tap_power(p, m);
            let (mean, var) = if m == 0 {
                // Rice split: |mean|² = K/(K+1)·Ω with a random phase,
                // scattered variance Ω/(K+1).
                let k = config.rice_k_factor;
                let mean_mag = (k / (k + 1.0) * omega).sqrt();
                let phase = rng.random::<f64>() * std::f64::consts::TAU;
                (C64::from_polar(mean_mag, phase), omega / (k + 1.0))
            } else {
                (C64::new(0.0, 0.0), omega)
            };
            params.push(ParamDesign { id: ParamId::Tap { p, m }, mean, var, is_real: false });
        }
    }
    Ok(HardwareDesign { memory_len: config.memory_len, nonlin_order: config.nonlin_order, params })
}

/// Reconstruct a design from an already-drawn instance.
///
/// The random mean phase of each zero-lag tap is unobservable from a
/// single draw, so it is re-anchored to the phase of the drawn tap value;
/// this preserves every designed magnitude moment.
fn design_from_initial(
    initial: &HardwareParams,
    config: &HwDistributionConfig,
) -> Result<HardwareDesign> {
    config.validate()?;
    if initial.taps.memory_len() != config.memory_len
        || initial.taps.nonlin_order() != config.nonlin_order
    {
        return Err(FdsicError::Dimension(format!(
            "hardware has M={}, P={} but config says M={}, P={}",
            initial.taps.memory_len(),
            initial.taps.nonlin_order(),
            config.memory_len,
            config.nonlin_order
        )));
    }
    let mut params = Vec::with_capacity(2 + initial.taps.len());
    params.push(ParamDesign {
        id: ParamId::AIq,
        mean: C64::new(config.mean_a_iq, 0.0),
        var: config.var_a_iq,
        is_real: true,
    });
    params.push(ParamDesign {
        id: ParamId::PhiIq,
        mean: C64::new(config.mean_phi_iq, 0.0),
        var: config.var_phi_iq,
        is_real: true,
    });
    for (p, m, h) in initial.taps.iter() {
        let omega = config.tap_power(p, m);
        let (mean, var) = if m == 0 {
            let k = config.rice_k_factor;
            let mean_mag = (k / (k + 1.0) * omega).sqrt();
            (C64::from_polar(mean_mag, h.arg()), omega / (k + 1.0))
        } else {
            (C64::new(0.0, 0.0), omega)
        };
        params.push(ParamDesign { id: ParamId::Tap { p, m }, mean, var, is_real: false });
    }
    Ok(HardwareDesign { memory_len: config.memory_len, nonlin_order: config.nonlin_order, params })
}

/// Assemble `HardwareParams` from per-parameter values in design order.
pub(crate) fn hardware_from_values(
    memory_len: usize,
    nonlin_order: usize,
    values: &[C64],
) -> Result<HardwareParams> {
    let n_taps = memory_len * (nonlin_order + 1) / 2;
    if values.len() != 2 + n_taps {
        return Err(FdsicError::Dimension(format!(
            "expected {} parameter values, got {}",
            2 + n_taps,
            values.len()
        )));
    }
    let mixer = MixerParams { a_iq: values[0].re, phi_iq: values[1].re };
    let taps = PaTaps::from_vec(memory_len, nonlin_order, values[2..].to_vec())?;
    Ok(HardwareParams { mixer, taps })
}

/// Flatten `HardwareParams` to per-parameter values in design order.
fn hardware_to_values(params: &HardwareParams) -> Vec<C64> {
    let mut values = Vec::with_capacity(2 + params.taps.len());
    values.push(C64::new(params.mixer.a_iq, 0.0));
    values.push(C64::new(params.mixer.phi_iq, 0.0));
    values.extend(params.taps.as_slice().iter().copied());
    values
}

impl HardwareDesign {
    /// Draw one instance from this design's stationary distributions.
    pub fn draw(&self, rng: &mut ChaCha8Rng) -> Result<HardwareParams> {
        let values: Vec<C64> = self
            .params
            .iter()
            .map(|p| ar1_stationary_draw(p.mean, p.var, p.is_real, rng))
            .collect();
        hardware_from_values(self.memory_len, self.nonlin_order, &values)
    }

    /// Build the AR(1) process family for this design, one process per
    /// parameter, each initialized at the corresponding value of `initial`.
    pub fn ar1_family(&self, initial: &HardwareParams, beta: f64) -> Result<Ar1Family> {
        let values = hardware_to_values(initial);
        if values.len() != self.params.len() {
            return Err(FdsicError::Dimension(format!(
                "initial hardware has {} parameters, design has {}",
                values.len(),
                self.params.len()
            )));
        }
        let processes = self
            .params
            .iter()
            .zip(values)
            .map(|(design, value)| {
                Ar1Process::from_moments(design.mean, design.var, beta, value, design.is_real)
                    .map(|proc| (design.id, proc))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Ar1Family { memory_len: self.memory_len, nonlin_order: self.nonlin_order, processes })
    }
}

/// Draw a complete hardware instance from its stationary distribution.
pub fn sample_initial_hardware(
    config: &HwDistributionConfig,
    rng: &mut ChaCha8Rng,
) -> Result<HardwareParams> {
    design_hardware(config, rng)?.draw(rng)
}

/// One AR(1) process per scalar hardware parameter, in design order
/// (A_iq, φ_iq, then taps lexicographic in (p, m)).
#[derive(Debug, Clone, PartialEq)]
pub struct Ar1Family {
    memory_len: usize,
    nonlin_order: usize,
    processes: Vec<(ParamId, Ar1Process)>,
}

impl Ar1Family {
    /// Number of parameter processes.
    pub fn len(&self) -> usize {
        self.processes.len()
    }

    /// True when the family holds no processes (never, by construction).
    pub fn is_empty(&self) -> bool {
        self.processes.is_empty()
    }

    /// Shared drift memory coefficient β.
    pub fn beta(&self) -> f64 {
        self.processes[0].1.beta
    }

    /// Iterate `(id, process)` pairs in design order.
    pub fn iter(&self) -> impl Iterator<Item = &(ParamId, Ar1Process)> {
        self.processes.iter()
    }

    /// Mutable iteration for stepping the processes.
    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut (ParamId, Ar1Process)> {
        self.processes.iter_mut()
    }

    /// Assemble the hardware state from the current process values.
    pub fn current_params(&self) -> Result<HardwareParams> {
        let values: Vec<C64> = self.processes.iter().map(|(_, p)| p.state).collect();
        hardware_from_values(self.memory_len, self.nonlin_order, &values)
    }
}

/// Build the drift family for an existing hardware instance.
///
/// The zero-lag tap mean phases are re-anchored to the phases of the
/// corresponding values in `initial` (the stationary mean direction is not
/// recoverable from a single draw; anchoring preserves all designed
/// magnitude moments). Mixer processes are real-valued, taps complex.
pub fn build_ar1_family(
    initial: &HardwareParams,
    config: &HwDistributionConfig,
    beta: f64,
) -> Result<Ar1Family> {
    design_from_initial(initial, config)?.ar1_family(initial, beta)
}
