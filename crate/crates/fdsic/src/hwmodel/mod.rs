//! Ground-truth full-duplex transceiver model.
//!
//! The transmit chain is modeled as an IQ mixer with gain/phase imbalance
//! followed by a power amplifier with polynomial nonlinearity and memory:
//!
//! ```text
//! x_iq[n] = K1·x[n] + K2·conj(x[n])
//! y[n]    = Σ_{m=0..M-1} Σ_{p odd, 1..P} h_p[m] · x_iq[n-m] · |x_iq[n-m]|^(p-1)
//! ```
//!
//! where `K1 = ½(1 + A_iq·e^(-jφ_iq))` and `K2 = ½(1 − A_iq·e^(jφ_iq))`.
//! Every scalar parameter (the two mixer imbalances and each complex tap)
//! drifts as a stationary AR(1) process — see [`ar1`]. [`sampling`] draws
//! hardware realizations from the designed stationary distributions, and
//! [`dataset`] turns all of it into (x, y) training/tracking datasets.

pub mod ar1;
pub mod dataset;
pub mod sampling;

pub use ar1::{ar1_moments_to_coeffs, ar1_step, oversampling_for_beta, Ar1Process};
pub use dataset::{
    export_dataset_csv, export_truth_csv, generate_dataset, import_dataset_csv, Dataset,
    DatasetParams, ImportedDataset,
};
pub use sampling::{
    build_ar1_family, design_hardware, sample_initial_hardware, Ar1Family, HardwareDesign,
    HwDistributionConfig, ParamId,
};

use crate::error::{FdsicError, Result};
use crate::C64;

/// IQ-mixer gain and phase imbalance.
///
/// The mixing coefficients `K1`/`K2` are always derived from these two real
/// parameters, never stored independently.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixerParams {
    /// Gain imbalance (unitless, 1 = balanced). Must be positive.
    pub a_iq: f64,
    /// Phase imbalance in radians (0 = balanced).
    pub phi_iq: f64,
}

impl MixerParams {
    /// Construct with validation (`a_iq > 0`).
    pub fn new(a_iq: f64, phi_iq: f64) -> Result<Self> {
        if !(a_iq > 0.0) {
            return Err(FdsicError::Config(format!("a_iq must be positive, got {a_iq}")));
        }
        Ok(MixerParams { a_iq, phi_iq })
    }

    /// An ideal mixer: unit gain balance, zero phase error.
    pub fn ideal() -> Self {
        MixerParams { a_iq: 1.0, phi_iq: 0.0 }
    }

    /// Direct mixing coefficient K1 = ½(1 + A·e^(−jφ)).
    pub fn k1(&self) -> C64 {
        (C64::new(1.0, 0.0) + self.a_iq * C64::from_polar(1.0, -self.phi_iq)) * 0.5
    }

    /// Image mixing coefficient K2 = ½(1 − A·e^(jφ)).
    pub fn k2(&self) -> C64 {
        (C64::new(1.0, 0.0) - self.a_iq * C64::from_polar(1.0, self.phi_iq)) * 0.5
    }
}

/// Apply the IQ-mixer imbalance model: `K1·x + K2·conj(x)`.
pub fn iq_mix(x: C64, mixer: &MixerParams) -> C64 {
    mixer.k1() * x + mixer.k2() * x.conj()
}

/// Image-rejection ratio `10·log10(|K1|²/|K2|²)` in dB.
///
/// Returns `f64::INFINITY` for a perfectly balanced mixer (`|K2| = 0`).
pub fn irr_db(mixer: &MixerParams) -> f64 {
    let k2 = mixer.k2().norm_sqr();
    if k2 == 0.0 {
        return f64::INFINITY;
    }
    10.0 * (mixer.k1().norm_sqr() / k2).log10()
}

/// Memory-polynomial tap set `h_p[m]` for odd `p ≤ P` and lag `m < M`.
///
/// Taps are stored densely in lexicographic `(p, m)` order:
/// `h_1[0], h_1[1], …, h_1[M−1], h_3[0], …, h_P[M−1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PaTaps {
    memory_len: usize,
    nonlin_order: usize,
    h: Vec<C64>,
}

/// Iterator over the odd polynomial orders `1, 3, …, P`.
pub fn odd_orders(nonlin_order: usize) -> impl Iterator<Item = usize> {
    (1..=nonlin_order).step_by(2)
}

impl PaTaps {
    /// All-zero tap set for a given memory length `M` and odd order `P`.
    pub fn zeros(memory_len: usize, nonlin_order: usize) -> Result<Self> {
        if memory_len == 0 {
            return Err(FdsicError::Config("memory_len must be positive".into()));
        }
        if nonlin_order == 0 || nonlin_order % 2 == 0 {
            return Err(FdsicError::Config(format!(
                "nonlin_order must be odd and positive, got {nonlin_order}"
            )));
        }
        let n = memory_len * (nonlin_order + 1) / 2;
        Ok(PaTaps { memory_len, nonlin_order, h: vec![C64::new(0.0, 0.0); n] })
    }

    /// Build from a dense vector in `(p, m)` lexicographic order.
    pub fn from_vec(memory_len: usize, nonlin_order: usize, h: Vec<C64>) -> Result<Self> {
        let mut taps = Self::zeros(memory_len, nonlin_order)?;
        if h.len() != taps.h.len() {
            return Err(FdsicError::Dimension(format!(
                "expected {} taps for M={memory_len}, P={nonlin_order}, got {}",
                taps.h.len(),
                h.len()
            )));
        }
        taps.h = h;
        Ok(taps)
    }

    /// Memory length M.
    pub fn memory_len(&self) -> usize {
        self.memory_len
    }

    /// Odd nonlinearity order P.
    pub fn nonlin_order(&self) -> usize {
        self.nonlin_order
    }

    /// Number of stored taps, `M·(P+1)/2`.
    pub fn len(&self) -> usize {
        self.h.len()
    }

    /// True when no taps are stored (never, by construction).
    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    fn index(&self, p: usize, m: usize) -> Result<usize> {
        if p % 2 == 0 || p == 0 || p > self.nonlin_order || m >= self.memory_len {
            return Err(FdsicError::Config(format!(
                "tap index (p={p}, m={m}) outside odd p in 1..={}, m in 0..{}",
                self.nonlin_order, self.memory_len
            )));
        }
        Ok(((p - 1) / 2) * self.memory_len + m)
    }

    /// Tap value `h_p[m]`.
    pub fn get(&self, p: usize, m: usize) -> Result<C64> {
        Ok(self.h[self.index(p, m)?])
    }

    /// Overwrite tap `h_p[m]`.
    pub fn set(&mut self, p: usize, m: usize, value: C64) -> Result<()> {
        let i = self.index(p, m)?;
        self.h[i] = value;
        Ok(())
    }

    /// Iterate `(p, m, h_p[m])` in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        odd_orders(self.nonlin_order).flat_map(move |p| {
            (0..self.memory_len).map(move |m| (p, m, self.h[((p - 1) / 2) * self.memory_len + m]))
        })
    }

    /// Dense tap vector in `(p, m)` lexicographic order.
    pub fn as_slice(&self) -> &[C64] {
        &self.h
    }
}

/// Complete hardware state: mixer imbalance plus PA taps.
#[derive(Debug, Clone, PartialEq)]
pub struct HardwareParams {
    pub mixer: MixerParams,
    pub taps: PaTaps,
}

/// Evaluate the PA memory polynomial for one output sample.
///
/// `x_history[m]` must hold `x[n−m]`, i.e. index equals lag, with exactly
/// `M` entries.
pub fn pa_output(x_history: &[C64], params: &HardwareParams) -> Result<C64> {
    let m_len = params.taps.memory_len();
    if x_history.len() != m_len {
        return Err(FdsicError::Dimension(format!(
            "pa_output needs {} history samples, got {}",
            m_len,
            x_history.len()
        )));
    }
    let mut acc = C64::new(0.0, 0.0);
    for (m, &x) in x_history.iter().enumerate() {
        let z = iq_mix(x, &params.mixer);
        let a = z.norm_sqr();
        // z·|z|^(p−1) accumulated by climbing even powers of |z|.
        let mut envelope = 1.0; // |z|^(p−1)
        for p in odd_orders(params.taps.nonlin_order()) {
            if p > 1 {
                envelope *= a;
            }
            acc += params.taps.get(p, m)? * z * envelope;
        }
    }
    Ok(acc)
}
