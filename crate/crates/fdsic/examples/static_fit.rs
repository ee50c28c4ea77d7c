//! Least-squares canceler fits on a frozen hardware draw.
//!
//! With the hardware held fixed, the widely-linear memory polynomial
//! (WLMP) basis spans the exact interference mechanism, so a batch
//! least-squares fit is limited only by the noise floor: essentially
//! perfect cancellation without noise, and cancellation pinned at the
//! SNR (≈ 40 dB here) with noise. A purely linear FIR fit, by contrast,
//! cannot represent the nonlinear and conjugate terms and saturates far
//! below that.
//!
//! Run with: `cargo run --example static_fit`

use fdsic::adapt::ls_fit;
use fdsic::baseband::{add_noise, generate_ofdm_frame, OfdmConfig};
use fdsic::cancelers::wlmp_basis_rows;
use fdsic::hwmodel::{pa_output, sample_initial_hardware, HwDistributionConfig};
use fdsic::metrics::cancellation_db;
use fdsic::rng::stream;
use fdsic::C64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let hw_config = HwDistributionConfig::default();
    let hw = sample_initial_hardware(&hw_config, &mut stream(7, "hw_init"))?;
    let m = hw_config.memory_len;
    let p = hw_config.nonlin_order;

    let n = 6000;
    let x = generate_ofdm_frame(&OfdmConfig::default(), n, &mut stream(7, "ofdm"))?.into_samples();

    // Clean interference, then a −40 dB noisy copy of the same signal.
    let mut history = vec![C64::new(0.0, 0.0); m];
    let mut y_clean = Vec::with_capacity(n);
    for i in 0..n {
        for (lag, slot) in history.iter_mut().enumerate() {
            *slot = if i >= lag { x[i - lag] } else { C64::new(0.0, 0.0) };
        }
        y_clean.push(pa_output(&history, &hw)?);
    }
    let y_noisy = add_noise(&y_clean, -40.0, &mut stream(7, "noise"))?;

    let linear_rows: Vec<Vec<C64>> = (0..n)
        .map(|i| {
            (0..m)
                .map(|lag| if i >= lag { x[i - lag] } else { C64::new(0.0, 0.0) })
                .collect()
        })
        .collect();
    let wlmp_rows = wlmp_basis_rows(&x, m, p)?;

    let summarize = |label: &str, rows: &[Vec<C64>], y: &[C64]| -> fdsic::error::Result<f64> {
        let fit = ls_fit(rows, y)?;
        let preds: Vec<C64> = rows
            .iter()
            .map(|row| row.iter().zip(&fit.weights).map(|(&a, &b)| a * b).sum())
            .collect();
        let db = cancellation_db(y, &preds)?;
        println!("  {label:<22} {db:8.2} dB  ({} weights)", fit.weights.len());
        Ok(db)
    };

    println!("batch least-squares cancellation on {n} static samples:");
    println!("noiseless targets:");
    summarize("linear FIR", &linear_rows, &y_clean)?;
    let wlmp_clean = summarize("widely-linear poly", &wlmp_rows, &y_clean)?;
    println!("targets with -40 dB noise floor:");
    summarize("linear FIR", &linear_rows, &y_noisy)?;
    let wlmp_noisy = summarize("widely-linear poly", &wlmp_rows, &y_noisy)?;

    assert!(wlmp_clean > 120.0, "exact-basis fit should be numerics-limited");
    assert!((wlmp_noisy - 40.0).abs() < 2.0, "noisy fit should sit at the SNR");
    println!("polynomial fit is noise-limited, as expected");
    Ok(())
}
