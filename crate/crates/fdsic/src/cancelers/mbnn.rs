//! Model-based neural network (MBNN) canceler.
//!
//! Instead of a generic network, the physical transceiver model itself is
//! unfolded into a computational graph: a 2-weight "mixer layer"
//! `z_m = k1·x[n−m] + k2·conj(x[n−m])`, the fixed odd nonlinearities
//! `f_p(z) = z·|z|^(p−1)`, and a tap layer summing `h_p[m]·f_p(z_m)`. The
//! trainable parameters are exactly the physical ones — `(P+1)M/2 + 2`
//! complex values, trained as independent real/imaginary pairs — which keeps
//! the model two orders of magnitude smaller than the equivalent
//! widely-linear polynomial. Gradients of the per-sample squared error are
//! computed by exact reverse traversal of the graph ([`mbnn_backward`]):
//! complex chain rule with separate `z` and `conj(z)` branches, since
//! `|z|` is not complex-differentiable.
//!
//! The forward/backward kernels are written over an arithmetic context so
//! the instrumented complexity measurements run the identical code path.

use crate::error::{FdsicError, Result};
use crate::hwmodel::{odd_orders, HardwareParams, PaTaps};
use crate::metrics::ops::{ArithOps, PlainOps};
use crate::C64;
use std::path::Path;

/// Magnitudes below this are treated as exactly zero when differentiating
/// through `|z|`, which is non-differentiable at the origin.
const MAG_GUARD: f64 = 1e-30;

/// The unfolded-model canceler: trainable mixer weights and PA taps.
#[derive(Debug, Clone, PartialEq)]
pub struct MbnnCanceler {
    k1: C64,
    k2: C64,
    taps: PaTaps,
    /// Bumped on every parameter mutation; tapes record it so a backward
    /// pass against stale intermediates is rejected.
    version: u64,
}

impl MbnnCanceler {
    /// Build from explicit mixer weights and taps.
    pub fn new(k1: C64, k2: C64, taps: PaTaps) -> Self {
        MbnnCanceler { k1, k2, taps, version: 0 }
    }

    /// Untrained starting point: identity mixer (k1=1, k2=0), zero taps.
    pub fn cold_start(memory_len: usize, nonlin_order: usize) -> Result<Self> {
        Ok(MbnnCanceler {
            k1: C64::new(1.0, 0.0),
            k2: C64::new(0.0, 0.0),
            taps: PaTaps::zeros(memory_len, nonlin_order)?,
            version: 0,
        })
    }

    /// Copy the true hardware state into the canceler (oracle
    /// initialization; the forward pass then reproduces the hardware).
    pub fn from_hardware(params: &HardwareParams) -> Self {
        MbnnCanceler {
            k1: params.mixer.k1(),
            k2: params.mixer.k2(),
            taps: params.taps.clone(),
            version: 0,
        }
    }

    /// Direct mixer weight.
    pub fn k1(&self) -> C64 {
        self.k1
    }

    /// Conjugate (image) mixer weight.
    pub fn k2(&self) -> C64 {
        self.k2
    }

    /// Tap weights in the hardware layout.
    pub fn taps(&self) -> &PaTaps {
        &self.taps
    }

    /// Memory length M.
    pub fn memory_len(&self) -> usize {
        self.taps.memory_len()
    }

    /// Nonlinearity order P.
    pub fn nonlin_order(&self) -> usize {
        self.taps.nonlin_order()
    }

    /// Number of real trainable parameters, `(P+1)·M + 4`.
    pub fn real_param_count(&self) -> usize {
        2 * (self.taps.len() + 2)
    }

    /// Flatten parameters to reals: `[Re k1, Im k1, Re k2, Im k2]` followed
    /// by the taps in `(p, m)` order as re/im pairs.
    pub fn real_params(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.real_param_count());
        v.extend_from_slice(&[self.k1.re, self.k1.im, self.k2.re, self.k2.im]);
        for t in self.taps.as_slice() {
            v.push(t.re);
            v.push(t.im);
        }
        v
    }

    /// Overwrite all parameters from a flat real vector (see
    /// [`Self::real_params`] for the order). Invalidates outstanding tapes.
    pub fn set_real_params(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.real_param_count() {
            return Err(FdsicError::Dimension(format!(
                "expected {} real parameters, got {}",
                self.real_param_count(),
                values.len()
            )));
        }
        self.k1 = C64::new(values[0], values[1]);
        self.k2 = C64::new(values[2], values[3]);
        let taps: Vec<C64> = values[4..]
            .chunks_exact(2)
            .map(|pair| C64::new(pair[0], pair[1]))
            .collect();
        self.taps = PaTaps::from_vec(self.memory_len(), self.nonlin_order(), taps)?;
        self.version += 1;
        Ok(())
    }

    /// Write parameters to the shared text format (k1, k2, then taps).
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut params = vec![self.k1, self.k2];
        params.extend_from_slice(self.taps.as_slice());
        super::save_params(
            path,
            super::CancelerKind::Mbnn,
            self.memory_len(),
            self.nonlin_order(),
            &params,
        )
    }

    /// Read parameters from the shared text format.
    pub fn load(path: &Path) -> Result<Self> {
        let (kind, memory_len, nonlin_order, params) = super::load_params(path)?;
        if kind != super::CancelerKind::Mbnn {
            return Err(FdsicError::Parse(format!("expected an mbnn canceler file, found {kind}")));
        }
        if params.len() < 2 {
            return Err(FdsicError::Parse("mbnn file is missing mixer weights".into()));
        }
        let taps = PaTaps::from_vec(memory_len, nonlin_order, params[2..].to_vec())?;
        Ok(MbnnCanceler { k1: params[0], k2: params[1], taps, version: 0 })
    }
}

/// Intermediates retained by [`mbnn_forward`] for the backward pass: the
/// inputs, the mixed signals and their squared magnitudes per lag, the
/// even-power ladder, and the nonlinearity outputs.
#[derive(Debug, Clone)]
pub struct MbnnTape {
    version: u64,
    x: Vec<C64>,
    z: Vec<C64>,
    a: Vec<f64>,
    /// `apow[m][k] = |z_m|^(2k)` for k in 0..K.
    apow: Vec<Vec<f64>>,
    /// `basis[m][k] = f_p(z_m)` with `p = 2k+1`.
    basis: Vec<Vec<C64>>,
    prediction: C64,
}

impl MbnnTape {
    /// The forward prediction this tape was produced with.
    pub fn prediction(&self) -> C64 {
        self.prediction
    }
}

/// Per-real-parameter partial derivatives of the squared error `|e|²`, in
/// the same flat order as [`MbnnCanceler::real_params`]. Always finite;
/// construction fails on NaN/Inf.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    values: Vec<f64>,
}

impl GradientSet {
    pub(crate) fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(FdsicError::Numerical(
                "non-finite gradient component (diverged parameters?)".into(),
            ));
        }
        Ok(GradientSet { values })
    }

    /// Flat gradient values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of real coordinates.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// True when the gradient has no coordinates.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Forward pass through an explicit arithmetic context (used both for
/// production prediction and instrumented complexity measurement).
pub fn mbnn_forward_counted<O: ArithOps>(
    canceler: &MbnnCanceler,
    x_history: &[C64],
    ops: &mut O,
) -> Result<(C64, MbnnTape)> {
    let m_len = canceler.memory_len();
    if x_history.len() != m_len {
        return Err(FdsicError::Dimension(format!(
            "mbnn needs {} history samples, got {}",
            m_len,
            x_history.len()
        )));
    }
    let k_pow = (canceler.nonlin_order() + 1) / 2;
    let mut z = Vec::with_capacity(m_len);
    let mut a = Vec::with_capacity(m_len);
    let mut apow = Vec::with_capacity(m_len);
    let mut basis = Vec::with_capacity(m_len);
    let mut prediction = C64::new(0.0, 0.0);
    for (m, &x) in x_history.iter().enumerate() {
        // Mixer layer: z = k1·x + k2·conj(x).
        let t1 = ops.cmul(canceler.k1, x);
        let t2 = ops.cmul(canceler.k2, x.conj());
        let zm = ops.cadd(t1, t2);
        let am = ops.abs2(zm);
        // Even-power ladder |z|^(2k); the first two rungs are free.
        let mut ladder = Vec::with_capacity(k_pow);
        ladder.push(1.0);
        if k_pow > 1 {
            ladder.push(am);
            for k in 2..k_pow {
                let next = ops.rmul(ladder[k - 1], am);
                ladder.push(next);
            }
        }
        // Nonlinearity outputs f_p(z) = z·|z|^(p−1).
        let mut fm = Vec::with_capacity(k_pow);
        fm.push(zm);
        for item in ladder.iter().take(k_pow).skip(1) {
            fm.push(ops.cscale(*item, zm));
        }
        // Tap layer partial sum for this lag.
        let mut lag_sum = C64::new(0.0, 0.0);
        for (k, p) in odd_orders(canceler.nonlin_order()).enumerate() {
            let term = ops.cmul(canceler.taps.get(p, m)?, fm[k]);
            lag_sum = ops.cadd(lag_sum, term);
        }
        prediction = ops.cadd(prediction, lag_sum);
        z.push(zm);
        a.push(am);
        apow.push(ladder);
        basis.push(fm);
    }
    let tape = MbnnTape {
        version: canceler.version,
        x: x_history.to_vec(),
        z,
        a,
        apow,
        basis,
        prediction,
    };
    Ok((prediction, tape))
}

/// Forward pass: prediction plus the tape needed for exact backprop.
pub fn mbnn_forward(canceler: &MbnnCanceler, x_history: &[C64]) -> Result<(C64, MbnnTape)> {
    mbnn_forward_counted(canceler, x_history, &mut PlainOps)
}

/// Backward pass through an explicit arithmetic context.
///
/// Computes the exact gradient of `L = |error|²` with respect to every real
/// parameter by reverse traversal: tap gradients are `−2e·conj(f_p)`; the
/// mixer gradients flow through both Wirtinger branches of each
/// nonlinearity, `∂f_p/∂z = ((p+1)/2)·f_p/z` and
/// `∂f_p/∂conj(z) = ((p−1)/2)·z²·|z|^(p−3)`.
pub fn mbnn_backward_counted<O: ArithOps>(
    canceler: &MbnnCanceler,
    tape: &MbnnTape,
    error: C64,
    ops: &mut O,
) -> Result<GradientSet> {
    if tape.version != canceler.version {
        return Err(FdsicError::Config(
            "tape is stale: canceler parameters changed since the forward pass".into(),
        ));
    }
    let m_len = canceler.memory_len();
    let k_pow = (canceler.nonlin_order() + 1) / 2;
    if tape.x.len() != m_len || tape.basis.len() != m_len {
        return Err(FdsicError::Dimension("tape shape does not match canceler".into()));
    }
    // Λ = −2e is the upstream sensitivity shared by every parameter.
    let lambda = ops.cscale(-2.0, error);
    // Tap gradients: G_h = Λ·conj(f_p).
    let mut tap_grads = Vec::with_capacity(m_len * k_pow);
    for p_idx in 0..k_pow {
        for m in 0..m_len {
            tap_grads.push(ops.cmul(lambda, tape.basis[m][p_idx].conj()));
        }
    }
    // Mixer gradients: per lag, fold the two Wirtinger branch sums into
    // D = conj(Λ)·S_zbar + Λ·conj(S_z), then G_k1 = Σ D·conj(x),
    // G_k2 = Σ D·x.
    let mut g_k1 = C64::new(0.0, 0.0);
    let mut g_k2 = C64::new(0.0, 0.0);
    for m in 0..m_len {
        let zm = tape.z[m];
        let silent = tape.a[m] < MAG_GUARD;
        let mut s_z = C64::new(0.0, 0.0);
        let mut s_zbar = C64::new(0.0, 0.0);
        if silent {
            // At z = 0 only the linear branch survives: ∂f_1/∂z = 1; the
            // magnitude derivative convention zeroes everything else.
            s_z = canceler.taps.get(1, m)?;
        } else {
            for (k, p) in odd_orders(canceler.nonlin_order()).enumerate() {
                // ∂f_p/∂z = c_p·f_p/z, realized with a conjugate multiply
                // and a real division by |z|².
                let num = ops.cmul(tape.basis[m][k], zm.conj());
                let den = ops.abs2(zm);
                let quot = ops.cdiv_re(num, den);
                let scaled = ops.cscale((p + 1) as f64 / 2.0, quot);
                let term = ops.cmul(canceler.taps.get(p, m)?, scaled);
                s_z = ops.cadd(s_z, term);
            }
            for (k, p) in odd_orders(canceler.nonlin_order()).enumerate().skip(1) {
                // ∂f_p/∂conj(z) = c'_p·z²·|z|^(p−3) (absent for p = 1).
                let zz = ops.cmul(zm, zm);
                let powed = if k >= 2 { ops.cscale(tape.apow[m][k - 1], zz) } else { zz };
                let scaled = ops.cscale((p - 1) as f64 / 2.0, powed);
                let term = ops.cmul(canceler.taps.get(p, m)?, scaled);
                s_zbar = ops.cadd(s_zbar, term);
            }
        }
        let d1 = ops.cmul(lambda.conj(), s_zbar);
        let d2 = ops.cmul(lambda, s_z.conj());
        let d = ops.cadd(d1, d2);
        let t1 = ops.cmul(d, tape.x[m].conj());
        g_k1 = ops.cadd(g_k1, t1);
        let t2 = ops.cmul(d, tape.x[m]);
        g_k2 = ops.cadd(g_k2, t2);
    }
    let mut values = Vec::with_capacity(2 * (tap_grads.len() + 2));
    values.extend_from_slice(&[g_k1.re, g_k1.im, g_k2.re, g_k2.im]);
    for g in tap_grads {
        values.push(g.re);
        values.push(g.im);
    }
    GradientSet::from_values(values)
}

/// Exact gradients of `|error|²` for all real parameters.
pub fn mbnn_backward(canceler: &MbnnCanceler, tape: &MbnnTape, error: C64) -> Result<GradientSet> {
    mbnn_backward_counted(canceler, tape, error, &mut PlainOps)
}
