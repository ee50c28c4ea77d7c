//! Self-interference canceler structures.
//!
//! Three model families estimate the transceiver's self-interference from
//! the known transmit samples:
//!
//! - [`LinearCanceler`]: an M-tap FIR filter `Σ h[m]·x[n−m]` — cheap, but
//!   blind to nonlinear distortion.
//! - [`WlmpCanceler`]: a widely-linear memory polynomial over the basis
//!   `x[n−m]^q·conj(x[n−m])^(p−q)` — linear in its weights, and rich enough
//!   to subsume the mixer + PA cascade exactly (see
//!   [`wlmp::wlmp_embed_hardware`]).
//! - [`MbnnCanceler`]: the physical model itself, unfolded into a small
//!   computational graph with the mixer weights and PA taps as trainable
//!   parameters, trained by exact reverse-mode differentiation.
//!
//! All cancelers expose their parameters as flat real vectors in a
//! documented order and share a text save/load format.

pub mod mbnn;
pub mod wlmp;

pub use mbnn::{
    mbnn_backward, mbnn_forward, GradientSet, MbnnCanceler, MbnnTape,
};
pub use wlmp::{
    wlmp_basis, wlmp_basis_rows, wlmp_embed_hardware, wlmp_predict, wlmp_weight_count,
    WlmpCanceler,
};

use crate::error::{FdsicError, Result};
use crate::metrics::ops::{ArithOps, PlainOps};
use crate::C64;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

/// Canceler family tag, used for parameter counting and file headers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CancelerKind {
    Linear,
    Wlmp,
    Mbnn,
}

impl std::fmt::Display for CancelerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CancelerKind::Linear => "linear",
            CancelerKind::Wlmp => "wlmp",
            CancelerKind::Mbnn => "mbnn",
        })
    }
}

impl std::str::FromStr for CancelerKind {
    type Err = FdsicError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(CancelerKind::Linear),
            "wlmp" => Ok(CancelerKind::Wlmp),
            "mbnn" => Ok(CancelerKind::Mbnn),
            other => Err(FdsicError::Parse(format!("unknown canceler kind {other:?}"))),
        }
    }
}

/// Number of real-valued trainable parameters for each canceler family:
/// linear 2M, WLMP M(P+1)(P+3)/2, MBNN (P+1)M + 4.
pub fn canceler_real_param_count(kind: CancelerKind, memory_len: usize, nonlin_order: usize) -> usize {
    match kind {
        CancelerKind::Linear => 2 * memory_len,
        CancelerKind::Wlmp => memory_len * (nonlin_order + 1) * (nonlin_order + 3) / 2,
        CancelerKind::Mbnn => (nonlin_order + 1) * memory_len + 4,
    }
}

/// Plain inner product `Σ a_i·b_i` (no conjugation) through an arithmetic
/// context; costs n multiplications and n−1 additions.
pub(crate) fn cdot<O: ArithOps>(a: &[C64], b: &[C64], ops: &mut O) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    let mut iter = a.iter().zip(b.iter());
    let mut acc = match iter.next() {
        Some((&x, &y)) => ops.cmul(x, y),
        None => return C64::new(0.0, 0.0),
    };
    for (&x, &y) in iter {
        let term = ops.cmul(x, y);
        acc = ops.cadd(acc, term);
    }
    acc
}

/// M-tap linear FIR canceler.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearCanceler {
    taps: Vec<C64>,
}

impl LinearCanceler {
    /// Build from explicit taps (`taps[m]` applies to `x[n−m]`).
    pub fn from_taps(taps: Vec<C64>) -> Result<Self> {
        if taps.is_empty() {
            return Err(FdsicError::Config("linear canceler needs at least one tap".into()));
        }
        Ok(LinearCanceler { taps })
    }

    /// All-zero canceler with `memory_len` taps.
    pub fn zeros(memory_len: usize) -> Result<Self> {
        Self::from_taps(vec![C64::new(0.0, 0.0); memory_len])
    }

    /// Filter memory length M.
    pub fn memory_len(&self) -> usize {
        self.taps.len()
    }

    /// Tap weights.
    pub fn taps(&self) -> &[C64] {
        &self.taps
    }

    /// Mutable tap weights (for online adaptation).
    pub fn taps_mut(&mut self) -> &mut [C64] {
        &mut self.taps
    }

    /// Write taps to the shared text format.
    pub fn save(&self, path: &Path) -> Result<()> {
        save_params(path, CancelerKind::Linear, self.taps.len(), 1, &self.taps)
    }

    /// Read taps from the shared text format.
    pub fn load(path: &Path) -> Result<Self> {
        let (kind, memory_len, _, params) = load_params(path)?;
        if kind != CancelerKind::Linear {
            return Err(FdsicError::Parse(format!("expected a linear canceler file, found {kind}")));
        }
        if params.len() != memory_len {
            return Err(FdsicError::Parse(format!(
                "linear canceler file declares {} taps but carries {}",
                memory_len,
                params.len()
            )));
        }
        Self::from_taps(params)
    }
}

/// Linear FIR prediction `Σ h[m]·x[n−m]`; `x_history[m] = x[n−m]`.
pub fn linear_predict(canceler: &LinearCanceler, x_history: &[C64]) -> Result<C64> {
    if x_history.len() != canceler.taps.len() {
        return Err(FdsicError::Dimension(format!(
            "linear canceler has {} taps, history has {} samples",
            canceler.taps.len(),
            x_history.len()
        )));
    }
    Ok(cdot(&canceler.taps, x_history, &mut PlainOps))
}

/// Write a canceler parameter file: a short self-describing header followed
/// by one `re im` pair per complex parameter, in the owning type's
/// documented order.
pub(crate) fn save_params(
    path: &Path,
    kind: CancelerKind,
    memory_len: usize,
    nonlin_order: usize,
    params: &[C64],
) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| FdsicError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| FdsicError::io(path, e);
    writeln!(w, "fdsic-canceler v1").map_err(io_err)?;
    writeln!(w, "kind {kind}").map_err(io_err)?;
    writeln!(w, "memory_len {memory_len}").map_err(io_err)?;
    writeln!(w, "nonlin_order {nonlin_order}").map_err(io_err)?;
    writeln!(w, "params {}", params.len()).map_err(io_err)?;
    for p in params {
        writeln!(w, "{} {}", p.re, p.im).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Read a canceler parameter file; returns `(kind, M, P, complex params)`.
pub(crate) fn load_params(path: &Path) -> Result<(CancelerKind, usize, usize, Vec<C64>)> {
    let file = std::fs::File::open(path).map_err(|e| FdsicError::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let mut next_line = |what: &str| -> Result<String> {
        match lines.next() {
            Some(Ok(line)) => Ok(line),
            Some(Err(e)) => Err(FdsicError::io(path, e)),
            None => Err(FdsicError::Parse(format!("canceler file ended before {what}"))),
        }
    };
    let magic = next_line("magic")?;
    if magic.trim() != "fdsic-canceler v1" {
        return Err(FdsicError::Parse(format!("not a canceler file (header {magic:?})")));
    }
    let field = |line: String, key: &str| -> Result<String> {
        let mut it = line.split_whitespace();
        match (it.next(), it.next()) {
            (Some(k), Some(v)) if k == key => Ok(v.to_string()),
            _ => Err(FdsicError::Parse(format!("expected `{key} <value>`, got {line:?}"))),
        }
    };
    let kind: CancelerKind = field(next_line("kind")?, "kind")?.parse()?;
    let memory_len: usize = field(next_line("memory_len")?, "memory_len")?
        .parse()
        .map_err(|_| FdsicError::Parse("bad memory_len".into()))?;
    let nonlin_order: usize = field(next_line("nonlin_order")?, "nonlin_order")?
        .parse()
        .map_err(|_| FdsicError::Parse("bad nonlin_order".into()))?;
    let count: usize = field(next_line("params")?, "params")?
        .parse()
        .map_err(|_| FdsicError::Parse("bad parameter count".into()))?;
    let mut params = Vec::with_capacity(count);
    for i in 0..count {
        let line = next_line(&format!("parameter {i}"))?;
        let mut it = line.split_whitespace();
        let re: f64 = it
            .next()
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| FdsicError::Parse(format!("bad parameter line {line:?}")))?;
        let im: f64 = it
            .next()
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| FdsicError::Parse(format!("bad parameter line {line:?}")))?;
        params.push(C64::new(re, im));
    }
    Ok((kind, memory_len, nonlin_order, params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn random_c64(rng: &mut impl Rng) -> C64 {
        C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    }

    #[test]
    fn identity_filter_returns_current_sample() {
        let c = LinearCanceler::from_taps(vec![
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
        ])
        .unwrap();
        let h = [C64::new(0.3, -0.2), C64::new(9.0, 9.0), C64::new(-1.0, 4.0)];
        assert_eq!(linear_predict(&c, &h).unwrap(), h[0]);
    }

    #[test]
    fn zero_filter_returns_zero() {
        let c = LinearCanceler::zeros(3).unwrap();
        let h = [C64::new(0.3, -0.2), C64::new(9.0, 9.0), C64::new(-1.0, 4.0)];
        assert_eq!(linear_predict(&c, &h).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn prediction_matches_summation_oracle() {
        let mut rng = stream(30, "linear");
        for _ in 0..100 {
            let taps: Vec<C64> = (0..3).map(|_| random_c64(&mut rng)).collect();
            let hist: Vec<C64> = (0..3).map(|_| random_c64(&mut rng)).collect();
            let c = LinearCanceler::from_taps(taps.clone()).unwrap();
            let got = linear_predict(&c, &hist).unwrap();
            let want: C64 = taps.iter().zip(&hist).map(|(a, b)| a * b).sum();
            assert_relative_eq!(got.re, want.re, max_relative = 1e-12, epsilon = 1e-15);
            assert_relative_eq!(got.im, want.im, max_relative = 1e-12, epsilon = 1e-15);
        }
    }

    #[test]
    fn history_length_is_enforced() {
        let c = LinearCanceler::zeros(3).unwrap();
        assert!(linear_predict(&c, &[C64::new(1.0, 0.0)]).is_err());
    }

    #[test]
    fn real_parameter_counts_match_model_sizes() {
        assert_eq!(canceler_real_param_count(CancelerKind::Linear, 3, 1), 6);
        assert_eq!(canceler_real_param_count(CancelerKind::Wlmp, 3, 5), 72);
        assert_eq!(canceler_real_param_count(CancelerKind::Mbnn, 3, 5), 22);
        // General shapes.
        assert_eq!(canceler_real_param_count(CancelerKind::Linear, 5, 1), 10);
        assert_eq!(canceler_real_param_count(CancelerKind::Wlmp, 1, 1), 4);
        assert_eq!(canceler_real_param_count(CancelerKind::Mbnn, 1, 1), 6);
    }

    #[test]
    fn linear_save_load_round_trip() {
        let mut rng = stream(31, "linear-io");
        let taps: Vec<C64> = (0..4).map(|_| random_c64(&mut rng)).collect();
        let c = LinearCanceler::from_taps(taps).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("linear.txt");
        c.save(&path).unwrap();
        let back = LinearCanceler::load(&path).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn load_rejects_foreign_and_corrupt_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("file.txt");
        std::fs::write(&path, "something else\n").unwrap();
        assert!(LinearCanceler::load(&path).is_err());
        std::fs::write(
            &path,
            "fdsic-canceler v1\nkind linear\nmemory_len 2\nnonlin_order 1\nparams 2\n1 0\n",
        )
        .unwrap();
        assert!(LinearCanceler::load(&path).is_err());
    }
}
