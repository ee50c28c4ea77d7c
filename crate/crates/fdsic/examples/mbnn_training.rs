//! Train the model-based canceler with exact gradients and FTRL.
//!
//! The model-based canceler is a tiny "network" whose architecture *is*
//! the hardware model: a complex IQ-imbalance layer (k1, k2) feeding a
//! memory-polynomial layer. Training uses the closed-form Wirtinger
//! gradients produced by `mbnn_backward` and the FTRL-proximal optimizer.
//! Because FTRL's closed-form solution would otherwise discard the
//! initial point, the optimizer state is warm-started so that training
//! begins exactly at the physically sensible initialization k1 = 1,
//! k2 = 0, taps = 0.
//!
//! Run with: `cargo run --example mbnn_training`

use fdsic::adapt::{ftrl_step, FtrlState};
use fdsic::baseband::OfdmConfig;
use fdsic::cancelers::{mbnn_backward, mbnn_forward, MbnnCanceler};
use fdsic::hwmodel::{generate_dataset, DatasetParams, HwDistributionConfig};
use fdsic::metrics::cancellation_db;
use fdsic::C64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let hw = HwDistributionConfig::default();
    let params = DatasetParams { static_len: 3000, dynamic_len: 0, noise_db: -40.0 };
    let dataset = generate_dataset(21, 0.999, &hw, &OfdmConfig::default(), &params)?;
    let x = dataset.x_static();
    let y = dataset.y_static();
    let m = hw.memory_len;

    let mut canceler = MbnnCanceler::cold_start(hw.memory_len, hw.nonlin_order)?;
    let alpha = 0.1;
    let mut opt = FtrlState::new(canceler.real_param_count(), alpha)?;
    opt.warm_start(&canceler.real_params())?;

    let mut history = vec![C64::new(0.0, 0.0); m];
    let fill = |history: &mut [C64], n: usize| {
        for (lag, slot) in history.iter_mut().enumerate() {
            *slot = if n >= lag { x[n - lag] } else { C64::new(0.0, 0.0) };
        }
    };

    println!("epoch  static cancellation");
    for epoch in 1..=5 {
        let mut weights = canceler.real_params();
        for n in 0..x.len() {
            fill(&mut history, n);
            let (prediction, tape) = mbnn_forward(&canceler, &history)?;
            let error = y[n] - prediction;
            let grads = mbnn_backward(&canceler, &tape, error)?;
            ftrl_step(&mut opt, &mut weights, grads.values())?;
            canceler.set_real_params(&weights)?;
        }
        // Frozen evaluation pass over the same block.
        let mut preds = Vec::with_capacity(x.len());
        for n in 0..x.len() {
            fill(&mut history, n);
            preds.push(mbnn_forward(&canceler, &history)?.0);
        }
        println!("{epoch:>5}  {:>9.2} dB", cancellation_db(y, &preds)?);
    }

    // A complex scale can move freely between the mixer layer and the taps
    // without changing the output, so the identifiable mixer quantity is
    // the image ratio k2/k1, not k1 and k2 individually.
    let truth = &dataset.truth.initial;
    let learned_ratio = canceler.k2() / canceler.k1();
    let true_ratio = truth.mixer.k2() / truth.mixer.k1();
    println!("\nlearned vs true mixer image ratio k2/k1:");
    println!("  learned: {learned_ratio:.5}");
    println!("  true   : {true_ratio:.5}");
    println!("  error  : {:.2e}", (learned_ratio - true_ratio).norm());
    Ok(())
}
