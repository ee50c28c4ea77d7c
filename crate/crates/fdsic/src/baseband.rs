//! Transmit baseband generation and signal utilities.
//!
//! The self-interference source is an OFDM transmit frame: random
//! constellation points on the active subcarriers of each symbol, an inverse
//! FFT, and a cyclic prefix. Frames are normalized to unit mean power after
//! generation so that the receiver noise floor and the hardware tap-power
//! profile always have the same 0 dB reference.
//!
//! Everything here is a pure function of an explicit seeded stream (see
//! [`crate::rng::stream`]), so concurrent callers with independent streams
//! are safe and reproducible.

use crate::error::{FdsicError, Result};
use crate::C64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;

/// Modulation alphabet used on each active subcarrier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Constellation {
    /// Four-point constellation (±1 ± j)/√2, unit energy.
    Qpsk,
    /// Sixteen-point constellation {±1, ±3}² / √10, unit average energy.
    Qam16,
}

/// OFDM numerology for transmit-frame generation.
///
/// The default is a conventional Wi-Fi-like layout: 64-point FFT, 16-sample
/// cyclic prefix, 52 active subcarriers (DC excluded), QPSK.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OfdmConfig {
    /// FFT length per OFDM symbol.
    pub fft_size: usize,
    /// Cyclic-prefix length prepended to each symbol; must be < `fft_size`.
    pub cp_length: usize,
    /// Number of data-bearing subcarriers, split evenly around (and
    /// excluding) the DC bin.
    pub active_subcarriers: usize,
    /// Subcarrier modulation.
    pub constellation: Constellation,
}

impl Default for OfdmConfig {
    fn default() -> Self {
        OfdmConfig {
            fft_size: 64,
            cp_length: 16,
            active_subcarriers: 52,
            constellation: Constellation::Qpsk,
        }
    }
}

impl OfdmConfig {
    /// Samples per OFDM symbol including the cyclic prefix.
    pub fn symbol_len(&self) -> usize {
        self.fft_size + self.cp_length
    }

    fn validate(&self) -> Result<()> {
        if self.fft_size == 0 {
            return Err(FdsicError::Config("fft_size must be positive".into()));
        }
        if self.cp_length >= self.fft_size {
            return Err(FdsicError::Config(format!(
                "cp_length {} must be smaller than fft_size {}",
                self.cp_length, self.fft_size
            )));
        }
        if self.active_subcarriers == 0 {
            return Err(FdsicError::Config("active_subcarriers must be positive".into()));
        }
        // The upper half-band must fit strictly below the Nyquist bin and the
        // lower half-band strictly above it; DC stays empty.
        let upper = self.active_subcarriers.div_ceil(2);
        if upper >= self.fft_size / 2 {
            return Err(FdsicError::Config(format!(
                "active_subcarriers {} does not fit in an fft of {} bins with DC excluded",
                self.active_subcarriers, self.fft_size
            )));
        }
        Ok(())
    }
}

/// A complex baseband signal with unit-power semantics at generation time.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    samples: Vec<C64>,
}

impl Frame {
    /// Wrap samples into a frame; at least one sample is required.
    pub fn from_samples(samples: Vec<C64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(FdsicError::Dimension("a frame needs at least one sample".into()));
        }
        Ok(Frame { samples })
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// True when the frame holds no samples (never, by construction).
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Borrow the sample sequence.
    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    /// Consume the frame into its sample vector.
    pub fn into_samples(self) -> Vec<C64> {
        self.samples
    }
}

/// Draw one constellation point.
fn draw_symbol(constellation: Constellation, rng: &mut ChaCha8Rng) -> C64 {
    match constellation {
        Constellation::Qpsk => {
            let re = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let im = if rng.random::<bool>() { 1.0 } else { -1.0 };
            C64::new(re, im) / 2f64.sqrt()
        }
        Constellation::Qam16 => {
            const LEVELS: [f64; 4] = [-3.0, -1.0, 1.0, 3.0];
            let re = LEVELS[rng.random_range(0..4)];
            let im = LEVELS[rng.random_range(0..4)];
            C64::new(re, im) / 10f64.sqrt()
        }
    }
}

/// Generate an OFDM transmit frame of exactly `n_samples` samples.
///
/// Whole symbols are generated (random constellation points on the active
/// subcarriers, inverse FFT, cyclic prefix) and the concatenation is
/// truncated to `n_samples`, then scaled to unit mean power. Requests
/// shorter than one OFDM symbol are rejected rather than zero-padded.
pub fn generate_ofdm_frame(
    config: &OfdmConfig,
    n_samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Frame> {
    config.validate()?;
    if n_samples == 0 {
        return Err(FdsicError::Config("n_samples must be positive".into()));
    }
    let sym_len = config.symbol_len();
    if n_samples < sym_len {
        return Err(FdsicError::Config(format!(
            "n_samples {} is shorter than one OFDM symbol ({} samples)",
            n_samples, sym_len
        )));
    }

    let n_symbols = n_samples.div_ceil(sym_len);
    let upper = config.active_subcarriers.div_ceil(2); // bins 1..=upper
    let lower = config.active_subcarriers - upper; //      bins fft-lower..=fft-1

    let mut planner = FftPlanner::new();
    let ifft = planner.plan_fft_inverse(config.fft_size);
    let mut samples = Vec::with_capacity(n_symbols * sym_len);
    let mut bins = vec![C64::new(0.0, 0.0); config.fft_size];

    for _ in 0..n_symbols {
        bins.fill(C64::new(0.0, 0.0));
        for k in 1..=upper {
            bins[k] = draw_symbol(config.constellation, rng);
        }
        for k in (config.fft_size - lower)..config.fft_size {
            bins[k] = draw_symbol(config.constellation, rng);
        }
        ifft.process(&mut bins);
        // Cyclic prefix, then the symbol body.
        samples.extend_from_slice(&bins[config.fft_size - config.cp_length..]);
        samples.extend_from_slice(&bins);
    }
    samples.truncate(n_samples);

    // Unit-power normalization over the emitted samples.
    let power = samples.iter().map(|x| x.norm_sqr()).sum::<f64>() / n_samples as f64;
    let scale = 1.0 / power.sqrt();
    for x in &mut samples {
        *x *= scale;
    }
    Frame::from_samples(samples)
}

/// Mean power (1/N)·Σ|x[n]|² of a sample sequence.
pub fn mean_power(samples: &[C64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(FdsicError::Dimension("mean_power of an empty sequence".into()));
    }
    Ok(samples.iter().map(|x| x.norm_sqr()).sum::<f64>() / samples.len() as f64)
}

/// Noise levels at or below this are treated as exactly zero noise.
pub const NOISE_FLOOR_DB: f64 = -300.0;

/// Add circularly-symmetric complex Gaussian noise at a power relative to
/// the signal's own mean power.
///
/// Per-sample noise variance is `mean_power(samples) · 10^(relative_power_db/10)`,
/// split evenly between the real and imaginary components. Levels at or
/// below [`NOISE_FLOOR_DB`] (including −∞) return the input unchanged.
pub fn add_noise(
    samples: &[C64],
    relative_power_db: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<C64>> {
    let power = mean_power(samples)?;
    if relative_power_db <= NOISE_FLOOR_DB {
        return Ok(samples.to_vec());
    }
    let noise_var = power * 10f64.powf(relative_power_db / 10.0);
    let sigma = (noise_var / 2.0).sqrt(); // per real component
    let normal = rand_distr::Normal::new(0.0, sigma)
        .map_err(|e| FdsicError::Config(format!("noise distribution: {e}")))?;
    Ok(samples
        .iter()
        .map(|x| x + C64::new(rng.sample(normal), rng.sample(normal)))
        .collect())
}
