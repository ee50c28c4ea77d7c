//! Widely-linear memory polynomial (WLMP) canceler.
//!
//! The WLMP models the received self-interference as a linear combination of
//! the monomials `x[n−m]^q · conj(x[n−m])^(p−q)` for odd total degree
//! `p ≤ P`, `q ∈ 0..=p`, and lag `m < M`. Because the mixer + PA cascade
//! expands exactly into such monomials, the WLMP *subsumes* the hardware
//! model: a least-squares fit on noiseless data reaches machine precision.
//! The price is parameter count — M(P+1)(P+3)/4 complex weights versus the
//! hardware's M(P+1)/2 taps plus two mixer coefficients.

use super::cdot;
use crate::error::{FdsicError, Result};
use crate::hwmodel::{odd_orders, HardwareParams};
use crate::metrics::ops::PlainOps;
use crate::C64;
use std::path::Path;

/// Number of complex WLMP weights for a given memory length and odd order:
/// `M·(P+1)·(P+3)/4`.
pub fn wlmp_weight_count(memory_len: usize, nonlin_order: usize) -> usize {
    memory_len * (nonlin_order + 1) * (nonlin_order + 3) / 4
}

fn validate_shape(memory_len: usize, nonlin_order: usize) -> Result<()> {
    if memory_len == 0 {
        return Err(FdsicError::Config("memory_len must be positive".into()));
    }
    if nonlin_order == 0 || nonlin_order % 2 == 0 {
        return Err(FdsicError::Config(format!(
            "nonlin_order must be odd and positive, got {nonlin_order}"
        )));
    }
    Ok(())
}

/// Widely-linear memory polynomial canceler.
///
/// Weights are stored in lexicographic `(p, q, m)` order with `p` odd
/// ascending, `q` ascending from 0 (all-conjugate) to `p` (conjugate-free),
/// and lag `m` ascending; this order is frozen in the save format.
#[derive(Debug, Clone, PartialEq)]
pub struct WlmpCanceler {
    memory_len: usize,
    nonlin_order: usize,
    weights: Vec<C64>,
}

impl WlmpCanceler {
    /// Build from a weight vector in the documented `(p, q, m)` order.
    pub fn from_weights(memory_len: usize, nonlin_order: usize, weights: Vec<C64>) -> Result<Self> {
        validate_shape(memory_len, nonlin_order)?;
        let expect = wlmp_weight_count(memory_len, nonlin_order);
        if weights.len() != expect {
            return Err(FdsicError::Dimension(format!(
                "expected {expect} weights for M={memory_len}, P={nonlin_order}, got {}",
                weights.len()
            )));
        }
        Ok(WlmpCanceler { memory_len, nonlin_order, weights })
    }

    /// All-zero canceler.
    pub fn zeros(memory_len: usize, nonlin_order: usize) -> Result<Self> {
        validate_shape(memory_len, nonlin_order)?;
        let n = wlmp_weight_count(memory_len, nonlin_order);
        Ok(WlmpCanceler { memory_len, nonlin_order, weights: vec![C64::new(0.0, 0.0); n] })
    }

    /// Memory length M.
    pub fn memory_len(&self) -> usize {
        self.memory_len
    }

    /// Nonlinearity order P.
    pub fn nonlin_order(&self) -> usize {
        self.nonlin_order
    }

    /// Weight vector in `(p, q, m)` order.
    pub fn weights(&self) -> &[C64] {
        &self.weights
    }

    /// Mutable weights (for online adaptation).
    pub fn weights_mut(&mut self) -> &mut [C64] {
        &mut self.weights
    }

    /// Position of weight `(p, q, m)` in the flat vector.
    pub fn weight_index(&self, p: usize, q: usize, m: usize) -> Result<usize> {
        if p % 2 == 0 || p == 0 || p > self.nonlin_order || q > p || m >= self.memory_len {
            return Err(FdsicError::Config(format!(
                "weight index (p={p}, q={q}, m={m}) out of range for M={}, P={}",
                self.memory_len, self.nonlin_order
            )));
        }
        // Blocks of (p+1)·M weights per odd p; Σ_{odd p' < p}(p'+1) = (p²−1)/4.
        Ok((p * p - 1) / 4 * self.memory_len + q * self.memory_len + m)
    }

    /// Predict from a precomputed basis vector (see [`wlmp_basis`]).
    pub fn predict_basis(&self, basis: &[C64]) -> Result<C64> {
        wlmp_predict(self, basis)
    }

    /// Write weights to the shared text format.
    pub fn save(&self, path: &Path) -> Result<()> {
        super::save_params(path, super::CancelerKind::Wlmp, self.memory_len, self.nonlin_order, &self.weights)
    }

    /// Read weights from the shared text format.
    pub fn load(path: &Path) -> Result<Self> {
        let (kind, memory_len, nonlin_order, params) = super::load_params(path)?;
        if kind != super::CancelerKind::Wlmp {
            return Err(FdsicError::Parse(format!("expected a wlmp canceler file, found {kind}")));
        }
        Self::from_weights(memory_len, nonlin_order, params)
    }
}

/// Evaluate the WLMP basis vector for one output sample.
///
/// `x_history[m] = x[n−m]` with exactly M entries. Entry order matches the
/// weight order: for each odd `p` ascending, `q = 0..=p` ascending, then lag
/// `m` ascending, the term `x^q·conj(x)^(p−q)`.
pub fn wlmp_basis(x_history: &[C64], memory_len: usize, nonlin_order: usize) -> Result<Vec<C64>> {
    validate_shape(memory_len, nonlin_order)?;
    if x_history.len() != memory_len {
        return Err(FdsicError::Dimension(format!(
            "basis needs {memory_len} history samples, got {}",
            x_history.len()
        )));
    }
    // Power tables per lag: x^0..x^P and conj(x)^0..conj(x)^P.
    let mut xp = vec![vec![C64::new(1.0, 0.0); nonlin_order + 1]; memory_len];
    let mut xcp = vec![vec![C64::new(1.0, 0.0); nonlin_order + 1]; memory_len];
    for (m, &x) in x_history.iter().enumerate() {
        for k in 1..=nonlin_order {
            xp[m][k] = xp[m][k - 1] * x;
            xcp[m][k] = xcp[m][k - 1] * x.conj();
        }
    }
    let mut basis = Vec::with_capacity(wlmp_weight_count(memory_len, nonlin_order));
    for p in odd_orders(nonlin_order) {
        for q in 0..=p {
            for m in 0..memory_len {
                basis.push(xp[m][q] * xcp[m][p - q]);
            }
        }
    }
    Ok(basis)
}

/// Basis vectors for every sample of a transmit sequence, with the history
/// zero-padded at the start (`x[n] = 0` for `n < 0`).
pub fn wlmp_basis_rows(x: &[C64], memory_len: usize, nonlin_order: usize) -> Result<Vec<Vec<C64>>> {
    validate_shape(memory_len, nonlin_order)?;
    let mut history = vec![C64::new(0.0, 0.0); memory_len];
    let mut rows = Vec::with_capacity(x.len());
    for n in 0..x.len() {
        for (m, slot) in history.iter_mut().enumerate() {
            *slot = if n >= m { x[n - m] } else { C64::new(0.0, 0.0) };
        }
        rows.push(wlmp_basis(&history, memory_len, nonlin_order)?);
    }
    Ok(rows)
}

/// WLMP prediction: inner product of the weights with a basis vector.
pub fn wlmp_predict(canceler: &WlmpCanceler, basis: &[C64]) -> Result<C64> {
    if basis.len() != canceler.weights.len() {
        return Err(FdsicError::Dimension(format!(
            "canceler has {} weights, basis has {} entries",
            canceler.weights.len(),
            basis.len()
        )));
    }
    Ok(cdot(&canceler.weights, basis, &mut PlainOps))
}

/// Binomial coefficient over small arguments.
fn binom(n: usize, k: usize) -> f64 {
    let mut value = 1.0;
    for i in 0..k {
        value = value * (n - i) as f64 / (i + 1) as f64;
    }
    value
}

/// Expand a hardware model into exactly equivalent WLMP weights.
///
/// Each PA term `h_p[m]·z·|z|^(p−1)` with `z = K1·x + K2·conj(x)` equals
/// `h_p[m]·z^a·conj(z)^b` for `a = (p+1)/2`, `b = (p−1)/2`; expanding both
/// binomials yields monomials `x^q·conj(x)^(p−q)` whose coefficients land on
/// the WLMP weight grid. By construction
/// `wlmp_predict(embedded, wlmp_basis(x)) == pa_output(x, params)` up to
/// floating-point rounding.
pub fn wlmp_embed_hardware(params: &HardwareParams) -> Result<WlmpCanceler> {
    let memory_len = params.taps.memory_len();
    let nonlin_order = params.taps.nonlin_order();
    let mut canceler = WlmpCanceler::zeros(memory_len, nonlin_order)?;
    let k1 = params.mixer.k1();
    let k2 = params.mixer.k2();
    let k1c = k1.conj();
    let k2c = k2.conj();
    for (p, m, h) in params.taps.iter() {
        let a = (p + 1) / 2;
        let b = (p - 1) / 2;
        for i in 0..=a {
            for j in 0..=b {
                // z^a term: C(a,i)·K1^i·K2^(a−i) carries x^i·conj(x)^(a−i);
                // conj(z)^b term: C(b,j)·conj(K1)^j·conj(K2)^(b−j) carries
                // conj(x)^j·x^(b−j). Total monomial: x^(i+b−j)·conj(x)^(p−q).
                let q = i + b - j;
                let coeff = h
                    * binom(a, i)
                    * binom(b, j)
                    * k1.powu(i as u32)
                    * k2.powu((a - i) as u32)
                    * k1c.powu(j as u32)
                    * k2c.powu((b - j) as u32);
                let idx = canceler.weight_index(p, q, m)?;
                canceler.weights[idx] += coeff;
            }
        }
    }
    Ok(canceler)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hwmodel::{pa_output, sample_initial_hardware, HwDistributionConfig, MixerParams, PaTaps};
    use crate::rng::stream;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn random_c64(rng: &mut impl Rng) -> C64 {
        C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    }

    #[test]
    fn basis_length_matches_weight_count_formula() {
        let h = [C64::new(0.1, 0.2); 3];
        assert_eq!(wlmp_basis(&h, 3, 5).unwrap().len(), 36);
        assert_eq!(wlmp_weight_count(3, 5), 36);
        assert_eq!(wlmp_weight_count(1, 1), 2);
        assert_eq!(wlmp_weight_count(4, 7), 4 * 8 * 10 / 4);
    }

    #[test]
    fn first_order_basis_is_conjugate_then_identity() {
        let x = C64::new(0.3, -0.7);
        let basis = wlmp_basis(&[x], 1, 1).unwrap();
        assert_eq!(basis, vec![x.conj(), x]);
    }

    #[test]
    fn zero_history_gives_zero_basis() {
        let basis = wlmp_basis(&[C64::new(0.0, 0.0); 3], 3, 5).unwrap();
        assert!(basis.iter().all(|v| v.norm_sqr() == 0.0));
    }

    #[test]
    fn invalid_shapes_are_rejected() {
        let h = [C64::new(0.1, 0.2); 3];
        assert!(wlmp_basis(&h, 2, 5).is_err());
        assert!(wlmp_basis(&h, 3, 4).is_err());
        assert!(WlmpCanceler::from_weights(3, 5, vec![C64::new(0.0, 0.0); 35]).is_err());
        let c = WlmpCanceler::zeros(3, 5).unwrap();
        assert!(wlmp_predict(&c, &[C64::new(0.0, 0.0); 35]).is_err());
    }

    #[test]
    fn one_hot_weight_recovers_current_sample() {
        let mut c = WlmpCanceler::zeros(3, 5).unwrap();
        let idx = c.weight_index(1, 1, 0).unwrap();
        c.weights_mut()[idx] = C64::new(1.0, 0.0);
        let mut rng = stream(40, "wlmp-onehot");
        let hist: Vec<C64> = (0..3).map(|_| random_c64(&mut rng)).collect();
        let basis = wlmp_basis(&hist, 3, 5).unwrap();
        let y = wlmp_predict(&c, &basis).unwrap();
        assert_relative_eq!(y.re, hist[0].re, epsilon = 1e-15);
        assert_relative_eq!(y.im, hist[0].im, epsilon = 1e-15);
    }

    #[test]
    fn prediction_matches_summation_oracle() {
        let mut rng = stream(41, "wlmp-oracle");
        for _ in 0..50 {
            let weights: Vec<C64> = (0..36).map(|_| random_c64(&mut rng)).collect();
            let c = WlmpCanceler::from_weights(3, 5, weights.clone()).unwrap();
            let basis: Vec<C64> = (0..36).map(|_| random_c64(&mut rng)).collect();
            let got = wlmp_predict(&c, &basis).unwrap();
            let want: C64 = weights.iter().zip(&basis).map(|(a, b)| a * b).sum();
            assert_relative_eq!(got.re, want.re, max_relative = 1e-12, epsilon = 1e-15);
            assert_relative_eq!(got.im, want.im, max_relative = 1e-12, epsilon = 1e-15);
        }
    }

    #[test]
    fn prediction_is_homogeneous_in_weights() {
        let mut rng = stream(42, "wlmp-homog");
        let weights: Vec<C64> = (0..36).map(|_| random_c64(&mut rng)).collect();
        let scale = C64::new(1.7, -2.3);
        let scaled: Vec<C64> = weights.iter().map(|&w| w * scale).collect();
        let c = WlmpCanceler::from_weights(3, 5, weights).unwrap();
        let cs = WlmpCanceler::from_weights(3, 5, scaled).unwrap();
        let basis: Vec<C64> = (0..36).map(|_| random_c64(&mut rng)).collect();
        let base = wlmp_predict(&c, &basis).unwrap() * scale;
        let got = wlmp_predict(&cs, &basis).unwrap();
        assert_relative_eq!(got.re, base.re, max_relative = 1e-12, epsilon = 1e-15);
        assert_relative_eq!(got.im, base.im, max_relative = 1e-12, epsilon = 1e-15);
    }

    #[test]
    fn basis_rows_pad_history_with_zeros() {
        let x = [C64::new(1.0, 0.0), C64::new(0.0, 1.0)];
        let rows = wlmp_basis_rows(&x, 3, 1).unwrap();
        assert_eq!(rows.len(), 2);
        // Sample 0: history [x0, 0, 0]; q=1 block carries x directly.
        let c = WlmpCanceler::zeros(3, 1).unwrap();
        let i_q1_m0 = c.weight_index(1, 1, 0).unwrap();
        let i_q1_m1 = c.weight_index(1, 1, 1).unwrap();
        assert_eq!(rows[0][i_q1_m0], x[0]);
        assert_eq!(rows[0][i_q1_m1], C64::new(0.0, 0.0));
        assert_eq!(rows[1][i_q1_m0], x[1]);
        assert_eq!(rows[1][i_q1_m1], x[0]);
    }

    #[test]
    fn ideal_mixer_embedding_maps_taps_onto_single_monomials() {
        // With K1=1, K2=0 the PA term z·|z|^(p−1) reduces to
        // x^((p+1)/2)·conj(x)^((p−1)/2), so exactly one q per (p, m) is hit.
        let mut rng = stream(43, "wlmp-embed-ideal");
        let taps: Vec<C64> = (0..9).map(|_| random_c64(&mut rng)).collect();
        let hw = HardwareParams {
            mixer: MixerParams::ideal(),
            taps: PaTaps::from_vec(3, 5, taps.clone()).unwrap(),
        };
        let c = wlmp_embed_hardware(&hw).unwrap();
        for (p, m, h) in hw.taps.iter() {
            for q in 0..=p {
                let idx = c.weight_index(p, q, m).unwrap();
                let w = c.weights()[idx];
                if q == (p + 1) / 2 {
                    assert_relative_eq!(w.re, h.re, epsilon = 1e-14);
                    assert_relative_eq!(w.im, h.im, epsilon = 1e-14);
                } else {
                    assert_eq!(w, C64::new(0.0, 0.0), "(p={p}, q={q}, m={m})");
                }
            }
        }
    }

    #[test]
    fn zero_taps_embed_to_zero_weights() {
        let hw = HardwareParams {
            mixer: MixerParams::new(1.05, 0.03).unwrap(),
            taps: PaTaps::zeros(3, 5).unwrap(),
        };
        let c = wlmp_embed_hardware(&hw).unwrap();
        assert!(c.weights().iter().all(|w| w.norm_sqr() == 0.0));
    }

    #[test]
    fn embedding_reproduces_hardware_output_on_random_histories() {
        let config = HwDistributionConfig::default();
        let mut rng = stream(44, "wlmp-embed");
        for trial in 0..5 {
            let hw = sample_initial_hardware(&config, &mut rng).unwrap();
            let c = wlmp_embed_hardware(&hw).unwrap();
            let mut max_rel: f64 = 0.0;
            for _ in 0..200 {
                let hist: Vec<C64> = (0..3).map(|_| 2.0 * random_c64(&mut rng)).collect();
                let want = pa_output(&hist, &hw).unwrap();
                let basis = wlmp_basis(&hist, 3, 5).unwrap();
                let got = wlmp_predict(&c, &basis).unwrap();
                let scale = want.norm().max(1e-3);
                max_rel = max_rel.max((got - want).norm() / scale);
            }
            assert!(max_rel < 1e-10, "trial {trial}: max relative error {max_rel}");
        }
    }

    #[test]
    fn save_load_round_trip() {
        let mut rng = stream(45, "wlmp-io");
        let weights: Vec<C64> = (0..36).map(|_| random_c64(&mut rng)).collect();
        let c = WlmpCanceler::from_weights(3, 5, weights).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("wlmp.txt");
        c.save(&path).unwrap();
        assert_eq!(WlmpCanceler::load(&path).unwrap(), c);
        // A linear file must be rejected by the WLMP loader.
        let lin = super::super::LinearCanceler::zeros(3).unwrap();
        let lin_path = dir.path().join("linear.txt");
        lin.save(&lin_path).unwrap();
        assert!(WlmpCanceler::load(&lin_path).is_err());
    }
}
