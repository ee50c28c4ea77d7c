//! Simulation and benchmarking toolkit for adaptive digital self-interference
//! cancellation (SIC) in in-band full-duplex transceivers.
//!
//! An in-band full-duplex radio transmits and receives on the same carrier at
//! the same time, so its own transmit chain leaks into the receiver as
//! self-interference that is many orders of magnitude stronger than the signal
//! of interest. After analog suppression, the digital canceler must reproduce
//! the *nonlinearly distorted* transmit signal — IQ-mixer imbalance plus power
//! amplifier memory effects — and subtract it. This crate simulates that
//! problem end to end:
//!
//! - [`baseband`]: OFDM transmit-frame generation and noise injection.
//! - [`hwmodel`]: the time-varying transceiver model — IQ imbalance, a memory
//!   polynomial PA, AR(1) parameter drift, and dataset synthesis.
//! - [`cancelers`]: linear FIR, widely-linear memory polynomial (WLMP), and
//!   model-based neural network (MBNN) canceler structures.
//! - [`adapt`]: batch least squares plus LMS, RLS, and FTRL online adaptation,
//!   and grid-search hyperparameter tuning.
//! - [`metrics`]: cancellation ratios and per-sample arithmetic-operation
//!   accounting (instrumented and closed-form).
//! - [`harness`]: the seeded experiment sweep, CSV emission, and the CLI.
//!
//! # Example
//!
//! Generate a drifting-hardware dataset, fit a WLMP canceler on the static
//! period by least squares, and measure how well it cancels:
//!
//! ```
//! use fdsic::baseband::OfdmConfig;
//! use fdsic::hwmodel::{generate_dataset, DatasetParams, HwDistributionConfig};
//! use fdsic::cancelers::{wlmp_basis_rows, WlmpCanceler};
//! use fdsic::adapt::ls_fit;
//! use fdsic::metrics::cancellation_db;
//!
//! let params = DatasetParams { static_len: 2000, dynamic_len: 0, ..DatasetParams::default() };
//! let ds = generate_dataset(7, 0.999, &HwDistributionConfig::default(),
//!                           &OfdmConfig::default(), &params).unwrap();
//! let rows = wlmp_basis_rows(ds.x_static(), 3, 5).unwrap();
//! let fit = ls_fit(&rows, ds.y_static()).unwrap();
//! let canceler = WlmpCanceler::from_weights(3, 5, fit.weights).unwrap();
//! let est: Vec<_> = rows.iter().map(|r| canceler.predict_basis(r).unwrap()).collect();
//! let c_db = cancellation_db(ds.y_static(), &est).unwrap();
//! assert!(c_db > 35.0); // noise-limited around 40 dB
//! ```

pub mod adapt;
pub mod baseband;
pub mod cancelers;
pub mod error;
pub mod harness;
pub mod hwmodel;
pub mod metrics;
pub mod rng;

pub use error::FdsicError;

/// Complex baseband sample type used throughout the crate.
pub type C64 = num_complex::Complex64;
