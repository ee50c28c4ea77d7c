//! Stationary AR(1) drift processes for hardware parameters.
//!
//! Each parameter W evolves as `W[t] = c + β·W[t−1] + ε[t]` with i.i.d.
//! Gaussian innovations. The process is parameterized by its *stationary*
//! mean and variance, from which the recursion coefficients follow:
//!
//! ```text
//! c = mean·(1 − β)          σ_ε = sqrt(var·(1 − β²))
//! ```
//!
//! Innovations are drawn as unit normals and then scaled by `σ_ε`, so the
//! same RNG stream yields perfectly correlated sample paths across different
//! β values — slow and fast drift variants of one hardware instance differ
//! only in bandwidth, not in the underlying randomness.

use crate::error::{FdsicError, Result};
use crate::C64;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// One scalar AR(1) process (complex- or real-valued).
#[derive(Debug, Clone, PartialEq)]
pub struct Ar1Process {
    /// Drift constant `c = mean·(1 − β)`.
    pub c: C64,
    /// Memory coefficient β in [0, 1).
    pub beta: f64,
    /// Innovation standard deviation (total, across both components).
    pub sigma_eps: f64,
    /// Current value of the process.
    pub state: C64,
    /// Real-valued processes draw a single normal per step and keep the
    /// imaginary part exactly zero.
    pub is_real_valued: bool,
}

/// Convert stationary moments to AR(1) recursion coefficients.
///
/// Returns `(c, sigma_eps)`. Fails when β is outside `[0, 1)` or the
/// variance is negative.
pub fn ar1_moments_to_coeffs(mean: C64, var: f64, beta: f64) -> Result<(C64, f64)> {
    if !(0.0..1.0).contains(&beta) {
        return Err(FdsicError::Config(format!("AR(1) beta must be in [0, 1), got {beta}")));
    }
    if var < 0.0 {
        return Err(FdsicError::Config(format!("AR(1) variance must be non-negative, got {var}")));
    }
    Ok((mean * (1.0 - beta), (var * (1.0 - beta * beta)).sqrt()))
}

impl Ar1Process {
    /// Build a process from stationary moments, starting at `initial`.
    pub fn from_moments(
        mean: C64,
        var: f64,
        beta: f64,
        initial: C64,
        is_real_valued: bool,
    ) -> Result<Self> {
        let (c, sigma_eps) = ar1_moments_to_coeffs(mean, var, beta)?;
        Ok(Ar1Process { c, beta, sigma_eps, state: initial, is_real_valued })
    }

    /// The stationary mean `c / (1 − β)` this process relaxes toward.
    pub fn designed_mean(&self) -> C64 {
        self.c / (1.0 - self.beta)
    }

    /// The stationary variance `σ_ε² / (1 − β²)`.
    pub fn designed_var(&self) -> f64 {
        self.sigma_eps * self.sigma_eps / (1.0 - self.beta * self.beta)
    }
}

/// Advance the process one step and return the new state.
///
/// Complex processes split the innovation power evenly between components
/// (`σ_ε/√2` per component); real processes consume one normal draw and
/// keep the imaginary part exactly zero. The unit normals are drawn first
/// and scaled afterwards, so the draw sequence is independent of β and σ_ε.
pub fn ar1_step(process: &mut Ar1Process, rng: &mut ChaCha8Rng) -> C64 {
    let eps = if process.is_real_valued {
        let n1: f64 = StandardNormal.sample(rng);
        C64::new(process.sigma_eps * n1, 0.0)
    } else {
        let n1: f64 = StandardNormal.sample(rng);
        let n2: f64 = StandardNormal.sample(rng);
        let per_component = process.sigma_eps / std::f64::consts::SQRT_2;
        C64::new(per_component * n1, per_component * n2)
    };
    process.state = process.c + process.beta * process.state + eps;
    process.state
}

/// Equivalent oversampling factor for a drift memory coefficient:
/// `round(0.1 / (1 − β))`, so β = 0.9 ↔ 1× and each extra nine multiplies
/// the factor by ten.
pub fn oversampling_for_beta(beta: f64) -> u64 {
    (0.1 / (1.0 - beta)).round() as u64
}

/// Draw a value from the stationary distribution of a process (used to
/// initialize states without a burn-in).
pub fn ar1_stationary_draw(
    mean: C64,
    var: f64,
    is_real_valued: bool,
    rng: &mut ChaCha8Rng,
) -> C64 {
    if is_real_valued {
        let n1: f64 = StandardNormal.sample(rng);
        C64::new(mean.re + var.sqrt() * n1, 0.0)
    } else {
        let n1: f64 = StandardNormal.sample(rng);
        let n2: f64 = StandardNormal.sample(rng);
        let per_component = (var / 2.0).sqrt();
        mean + C64::new(per_component * n1, per_component * n2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use approx::assert_relative_eq;

    #[test]
    fn zero_beta_coeffs_reduce_to_moments() {
        let (c, sigma) = ar1_moments_to_coeffs(C64::new(0.0, 0.0), 0.25, 0.0).unwrap();
        assert_eq!(c, C64::new(0.0, 0.0));
        assert_relative_eq!(sigma, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn coeff_example_mean_one_slow_drift() {
        let (c, sigma) = ar1_moments_to_coeffs(C64::new(1.0, 0.0), 0.005, 0.9).unwrap();
        assert_relative_eq!(c.re, 0.1, epsilon = 1e-15);
        assert_relative_eq!(c.im, 0.0, epsilon = 1e-15);
        // σ_ε = sqrt(0.005·(1 − 0.81)) = sqrt(0.00095)
        assert_relative_eq!(sigma, 0.00095f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(ar1_moments_to_coeffs(C64::new(0.0, 0.0), 1.0, 1.0).is_err());
        assert!(ar1_moments_to_coeffs(C64::new(0.0, 0.0), 1.0, -0.1).is_err());
        assert!(ar1_moments_to_coeffs(C64::new(0.0, 0.0), -1.0, 0.5).is_err());
    }

    #[test]
    fn zero_variance_process_converges_to_mean() {
        let mean = C64::new(2.0, -1.0);
        let mut p = Ar1Process::from_moments(mean, 0.0, 0.9, C64::new(0.0, 0.0), false).unwrap();
        let mut rng = stream(1, "ar1-fixed");
        for _ in 0..2000 {
            ar1_step(&mut p, &mut rng);
        }
        // With σ_ε = 0 the recursion is a pure geometric relaxation onto the mean.
        assert_relative_eq!(p.state.re, mean.re, epsilon = 1e-9);
        assert_relative_eq!(p.state.im, mean.im, epsilon = 1e-9);
        // Starting exactly at the mean it stays there.
        let mut q = Ar1Process::from_moments(mean, 0.0, 0.9, mean, false).unwrap();
        ar1_step(&mut q, &mut rng);
        assert_relative_eq!(q.state.re, mean.re, epsilon = 1e-14);
    }

    #[test]
    fn real_valued_process_stays_real() {
        let mut p =
            Ar1Process::from_moments(C64::new(1.0, 0.0), 0.005, 0.99, C64::new(1.0, 0.0), true)
                .unwrap();
        let mut rng = stream(2, "ar1-real");
        for _ in 0..1000 {
            let v = ar1_step(&mut p, &mut rng);
            assert_eq!(v.im, 0.0);
        }
    }

    #[test]
    fn designed_moments_round_trip() {
        let mean = C64::new(0.3, 0.7);
        let p = Ar1Process::from_moments(mean, 0.012, 0.999, mean, false).unwrap();
        assert_relative_eq!(p.designed_mean().re, mean.re, epsilon = 1e-12);
        assert_relative_eq!(p.designed_mean().im, mean.im, epsilon = 1e-12);
        assert_relative_eq!(p.designed_var(), 0.012, epsilon = 1e-12);
    }

    #[test]
    fn oversampling_ladder() {
        assert_eq!(oversampling_for_beta(0.9), 1);
        assert_eq!(oversampling_for_beta(0.99), 10);
        assert_eq!(oversampling_for_beta(0.999), 100);
        assert_eq!(oversampling_for_beta(0.9999), 1000);
        assert_eq!(oversampling_for_beta(0.99999), 10000);
    }

    /// Empirical mean/variance over a long run must sit within three
    /// autocorrelation-corrected standard errors of the design targets.
    fn check_long_run_moments(beta: f64, is_real: bool) {
        let mean = C64::new(0.8, if is_real { 0.0 } else { -0.4 });
        let var = 0.02;
        let n = 1_000_000usize;
        let mut p = Ar1Process::from_moments(mean, var, beta, mean, is_real).unwrap();
        let mut rng = stream(7, "ar1-moments");
        let mut sum = C64::new(0.0, 0.0);
        let mut sq = 0.0;
        for _ in 0..n {
            let v = ar1_step(&mut p, &mut rng);
            sum += v;
            sq += (v - mean).norm_sqr();
        }
        let emp_mean = sum / n as f64;
        let emp_var = sq / n as f64;
        let nf = n as f64;
        // Mean of an AR(1) sample average: Var·(1+β)/(n·(1−β)) total,
        // split across two components for complex processes.
        let se_mean_total = (var * (1.0 + beta) / (nf * (1.0 - beta))).sqrt();
        let se_component = if is_real { se_mean_total } else { se_mean_total / 2f64.sqrt() };
        assert!(
            (emp_mean.re - mean.re).abs() < 3.0 * se_component,
            "mean.re off: {} vs {} (beta {beta})",
            emp_mean.re,
            mean.re
        );
        assert!(
            (emp_mean.im - mean.im).abs() < 3.0 * se_component,
            "mean.im off: {} vs {} (beta {beta})",
            emp_mean.im,
            mean.im
        );
        // Variance estimator SE with AR(1) autocorrelation of the squared
        // deviations: Var·sqrt(k·(1+β²)/(n·(1−β²))), k = 2 for real (chi²),
        // k = 1 for complex (two averaged components).
        let k = if is_real { 2.0 } else { 1.0 };
        let se_var = var * (k * (1.0 + beta * beta) / (nf * (1.0 - beta * beta))).sqrt();
        assert!(
            (emp_var - var).abs() < 3.0 * se_var,
            "variance off: {} vs {} (beta {beta}, 3se {})",
            emp_var,
            var,
            3.0 * se_var
        );
    }

    #[test]
    fn long_run_moments_fast_drift() {
        check_long_run_moments(0.9, false);
    }

    #[test]
    fn long_run_moments_slow_drift() {
        check_long_run_moments(0.99999, false);
    }

    #[test]
    fn long_run_moments_real_process() {
        check_long_run_moments(0.9, true);
    }

    #[test]
    fn identical_draws_across_beta() {
        // The innovation sequence must not depend on β: two processes stepped
        // from identical RNG states should consume identical unit normals.
        let mean = C64::new(1.0, 0.0);
        let mut slow =
            Ar1Process::from_moments(mean, 0.005, 0.9999, mean, false).unwrap();
        let mut fast = Ar1Process::from_moments(mean, 0.005, 0.9, mean, false).unwrap();
        let mut rng_a = stream(11, "ar1-shared");
        let mut rng_b = stream(11, "ar1-shared");
        for _ in 0..100 {
            let prev_a = slow.state;
            let prev_b = fast.state;
            let a = ar1_step(&mut slow, &mut rng_a);
            let b = ar1_step(&mut fast, &mut rng_b);
            let eps_a = (a - slow.c - slow.beta * prev_a) / slow.sigma_eps;
            let eps_b = (b - fast.c - fast.beta * prev_b) / fast.sigma_eps;
            assert_relative_eq!(eps_a.re, eps_b.re, epsilon = 1e-10);
            assert_relative_eq!(eps_a.im, eps_b.im, epsilon = 1e-10);
        }
    }
}
