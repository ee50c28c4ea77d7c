//! The adaptation algorithms on a bare channel-identification problem.
//!
//! Independent of the hardware model, this identifies a fixed 4-tap
//! complex channel from noisy observations with each recursive algorithm,
//! printing the weight error as samples arrive:
//!
//! * LMS — stochastic gradient, cheapest per sample, slowest to converge.
//! * RLS — tracks the inverse correlation matrix, converging in roughly
//!   one filter length's worth of samples; with forgetting factor λ = 1
//!   it reproduces the batch least-squares solution.
//! * FTRL — per-coordinate adaptive steps over real parameters; here it
//!   minimizes the same squared error via the interleaved re/im gradient.
//!
//! Run with: `cargo run --example adaptive_filters`

use fdsic::adapt::{
    ftrl_step, lms_step, ls_fit, rls_step, FtrlState, LmsState, RlsState,
};
use fdsic::rng::stream;
use fdsic::C64;
use rand_distr::{Distribution, StandardNormal};

fn weight_error(weights: &[C64], truth: &[C64]) -> f64 {
    weights
        .iter()
        .zip(truth)
        .map(|(w, t)| (w - t).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let truth = [
        C64::new(0.8, -0.3),
        C64::new(-0.25, 0.1),
        C64::new(0.05, 0.07),
        C64::new(-0.01, 0.02),
    ];
    let dim = truth.len();
    let n = 600;
    let noise_std = 1e-3;

    let mut rng = stream(99, "adaptive-filters-example");
    let mut draw = move || {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        C64::new(re, im) / 2f64.sqrt()
    };
    let mut x = Vec::with_capacity(n);
    let mut rows = Vec::with_capacity(n);
    let mut targets = Vec::with_capacity(n);
    for i in 0..n {
        x.push(draw());
        let row: Vec<C64> = (0..dim)
            .map(|lag| if i >= lag { x[i - lag] } else { C64::new(0.0, 0.0) })
            .collect();
        let clean: C64 = row.iter().zip(&truth).map(|(&a, &b)| a * b).sum();
        targets.push(clean + noise_std * draw());
        rows.push(row);
    }

    let lms = LmsState::new(0.2)?;
    let mut w_lms = vec![C64::new(0.0, 0.0); dim];
    let mut rls = RlsState::new(dim, 1.0, 100.0)?;
    let mut w_rls = vec![C64::new(0.0, 0.0); dim];
    let mut ftrl = FtrlState::new(2 * dim, 0.5)?;
    let mut w_ftrl_real = vec![0.0; 2 * dim];

    println!(
        "{:>7} {:>12} {:>12} {:>12}   (weight-vector error ‖w − w_true‖)",
        "sample", "lms", "rls", "ftrl"
    );
    for i in 0..n {
        lms_step(&lms, &mut w_lms, &rows[i], targets[i])?;
        rls_step(&mut rls, &mut w_rls, &rows[i], targets[i])?;

        // FTRL works on real parameters: interleave (re, im) and feed it
        // the Wirtinger gradient of |e|², i.e. −2·e·conj(φ) per complex
        // coordinate, expanded to its real components.
        let w_ftrl: Vec<C64> = w_ftrl_real
            .chunks_exact(2)
            .map(|c| C64::new(c[0], c[1]))
            .collect();
        let y: C64 = rows[i].iter().zip(&w_ftrl).map(|(&a, &b)| a * b).sum();
        let e = targets[i] - y;
        let mut grads = Vec::with_capacity(2 * dim);
        for &phi in &rows[i] {
            let g = -2.0 * e * phi.conj();
            grads.push(g.re);
            grads.push(g.im);
        }
        ftrl_step(&mut ftrl, &mut w_ftrl_real, &grads)?;

        if [9, 29, 99, 299, n - 1].contains(&i) {
            let w_ftrl: Vec<C64> = w_ftrl_real
                .chunks_exact(2)
                .map(|c| C64::new(c[0], c[1]))
                .collect();
            println!(
                "{:>7} {:>12.3e} {:>12.3e} {:>12.3e}",
                i + 1,
                weight_error(&w_lms, &truth),
                weight_error(&w_rls, &truth),
                weight_error(&w_ftrl, &truth)
            );
        }
    }

    // With λ = 1 (no forgetting) RLS solves the same normal equations as
    // batch least squares.
    let batch = ls_fit(&rows, &targets)?;
    let gap = weight_error(&w_rls, &batch.weights);
    println!("\n‖w_rls − w_batch_ls‖ = {gap:.3e} (λ = 1 matches the batch solution)");
    Ok(())
}
