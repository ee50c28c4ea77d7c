//! Arithmetic-operation accounting.
//!
//! Every adaptation kernel in this crate is written once, generically over
//! the [`ArithOps`] context. [`PlainOps`] is a zero-sized passthrough that
//! compiles to ordinary arithmetic (the production path); [`CountingOps`]
//! performs the identical arithmetic while tallying operations under the
//! documented cost convention, so measured complexity always reflects the
//! exact code that produced the numerical results.
//!
//! ## Cost convention
//!
//! - complex add/sub: 2 real additions
//! - complex × complex: 3 real multiplications + 5 real additions
//!   (Karatsuba-style realization)
//! - real scalar × complex is *promoted* to a full complex multiplication
//! - |z|²: 2 real multiplications + 1 real addition
//! - complex ÷ real: 2 real divisions (componentwise)
//! - complex ÷ complex (not a primitive here) is realized at call sites as
//!   conjugate-multiply + |denominator|² + complex ÷ real
//! - multiply-accumulate is 1 multiplication + 1 addition; multiplications
//!   by small constants (e.g. ×2) still count
//! - dot products of length n cost n multiplications and n−1 additions;
//!   graph summations that start from a zero accumulator cost n additions

use crate::error::{FdsicError, Result};
use crate::C64;

/// Arithmetic context abstracting over "just compute" and "compute while
/// counting". All kernels that claim measured complexity go through this.
pub trait ArithOps {
    /// Complex addition.
    fn cadd(&mut self, a: C64, b: C64) -> C64;
    /// Complex subtraction (costed as an addition).
    fn csub(&mut self, a: C64, b: C64) -> C64;
    /// Complex multiplication.
    fn cmul(&mut self, a: C64, b: C64) -> C64;
    /// Real scalar × complex, promoted to a full complex multiplication.
    fn cscale(&mut self, s: f64, a: C64) -> C64;
    /// Complex ÷ real scalar: two real divisions.
    fn cdiv_re(&mut self, a: C64, d: f64) -> C64;
    /// Squared magnitude |z|²: two real multiplications, one addition.
    fn abs2(&mut self, a: C64) -> f64;
    /// Real addition.
    fn radd(&mut self, a: f64, b: f64) -> f64;
    /// Real subtraction (costed as an addition).
    fn rsub(&mut self, a: f64, b: f64) -> f64;
    /// Real multiplication.
    fn rmul(&mut self, a: f64, b: f64) -> f64;
    /// Real division.
    fn rdiv(&mut self, a: f64, b: f64) -> f64;
    /// Real square root.
    fn rsqrt(&mut self, a: f64) -> f64;
}

/// Production context: plain arithmetic, no bookkeeping, fully inlined.
#[derive(Debug, Default, Clone, Copy)]
pub struct PlainOps;

impl ArithOps for PlainOps {
    #[inline(always)]
    fn cadd(&mut self, a: C64, b: C64) -> C64 {
        a + b
    }
    #[inline(always)]
    fn csub(&mut self, a: C64, b: C64) -> C64 {
        a - b
    }
    #[inline(always)]
    fn cmul(&mut self, a: C64, b: C64) -> C64 {
        a * b
    }
    #[inline(always)]
    fn cscale(&mut self, s: f64, a: C64) -> C64 {
        s * a
    }
    #[inline(always)]
    fn cdiv_re(&mut self, a: C64, d: f64) -> C64 {
        C64::new(a.re / d, a.im / d)
    }
    #[inline(always)]
    fn abs2(&mut self, a: C64) -> f64 {
        a.norm_sqr()
    }
    #[inline(always)]
    fn radd(&mut self, a: f64, b: f64) -> f64 {
        a + b
    }
    #[inline(always)]
    fn rsub(&mut self, a: f64, b: f64) -> f64 {
        a - b
    }
    #[inline(always)]
    fn rmul(&mut self, a: f64, b: f64) -> f64 {
        a * b
    }
    #[inline(always)]
    fn rdiv(&mut self, a: f64, b: f64) -> f64 {
        a / b
    }
    #[inline(always)]
    fn rsqrt(&mut self, a: f64) -> f64 {
        a.sqrt()
    }
}

/// Raw operation tallies kept by [`CountingOps`], split into complex-domain
/// and real-domain counters before conversion.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct OpTally {
    /// Complex additions/subtractions.
    pub cadd: u64,
    /// Complex multiplications (including promoted real-scalar scalings).
    pub cmul: u64,
    /// Complex-by-real divisions.
    pub cdiv_re: u64,
    /// Native real additions/subtractions.
    pub radd: u64,
    /// Native real multiplications.
    pub rmul: u64,
    /// Native real divisions.
    pub rdiv: u64,
    /// Real square roots.
    pub rsqrt: u64,
}

impl OpTally {
    /// Fold the complex-domain counters into real-operation totals:
    /// `(n_add, n_mult, n_div, n_sqrt)`.
    pub fn to_real(&self) -> (u64, u64, u64, u64) {
        let (add_c, mult_c, div_c) = complex_ops_to_real(self.cadd, self.cmul, self.cdiv_re);
        (add_c + self.radd, mult_c + self.rmul, div_c + self.rdiv, self.rsqrt)
    }
}

/// Counting context: performs the same arithmetic as [`PlainOps`] while
/// tallying each call. The tally is run-local, so concurrent measurements
/// cannot interfere.
#[derive(Debug, Default, Clone)]
pub struct CountingOps {
    pub tally: OpTally,
}

impl ArithOps for CountingOps {
    fn cadd(&mut self, a: C64, b: C64) -> C64 {
        self.tally.cadd += 1;
        a + b
    }
    fn csub(&mut self, a: C64, b: C64) -> C64 {
        self.tally.cadd += 1;
        a - b
    }
    fn cmul(&mut self, a: C64, b: C64) -> C64 {
        self.tally.cmul += 1;
        a * b
    }
    fn cscale(&mut self, s: f64, a: C64) -> C64 {
        self.tally.cmul += 1;
        s * a
    }
    fn cdiv_re(&mut self, a: C64, d: f64) -> C64 {
        self.tally.cdiv_re += 1;
        C64::new(a.re / d, a.im / d)
    }
    fn abs2(&mut self, a: C64) -> f64 {
        self.tally.rmul += 2;
        self.tally.radd += 1;
        a.norm_sqr()
    }
    fn radd(&mut self, a: f64, b: f64) -> f64 {
        self.tally.radd += 1;
        a + b
    }
    fn rsub(&mut self, a: f64, b: f64) -> f64 {
        self.tally.radd += 1;
        a - b
    }
    fn rmul(&mut self, a: f64, b: f64) -> f64 {
        self.tally.rmul += 1;
        a * b
    }
    fn rdiv(&mut self, a: f64, b: f64) -> f64 {
        self.tally.rdiv += 1;
        a / b
    }
    fn rsqrt(&mut self, a: f64) -> f64 {
        self.tally.rsqrt += 1;
        a.sqrt()
    }
}

/// Convert complex-domain operation counts to real-operation counts:
/// one complex multiplication costs 3 real multiplications and 5 real
/// additions, one complex addition costs 2 real additions, and one
/// complex-by-real division costs 2 real divisions (componentwise; complex
/// denominators are realized at call sites before reaching this rule).
/// Returns `(radd, rmult, rdiv)`.
pub fn complex_ops_to_real(cadd: u64, cmult: u64, cdiv: u64) -> (u64, u64, u64) {
    (2 * cadd + 5 * cmult, 3 * cmult, 2 * cdiv)
}

/// Real-valued arithmetic cost of one combined prediction + parameter
/// update, in the complexity-report column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OpCountReport {
    /// Number of real-valued trainable parameters.
    pub n_params: u64,
    /// Real additions (including subtractions).
    pub n_add: u64,
    /// Real multiplications.
    pub n_mult: u64,
    /// Real divisions.
    pub n_div: u64,
    /// Real square roots.
    pub n_sqrt: u64,
}

impl OpCountReport {
    /// One CSV row in the column order `method,n_params,n_add,n_mult,n_div,n_sqrt`.
    pub fn csv_row(&self, method_label: &str) -> String {
        format!(
            "{method_label},{},{},{},{},{}",
            self.n_params, self.n_add, self.n_mult, self.n_div, self.n_sqrt
        )
    }
}

/// Projected floating-point operations per physical-rate sample interval:
/// `(n_add + n_mult) · oversampling`. Divisions and square roots are
/// excluded from the projection by convention.
pub fn flops_projection(report: &OpCountReport, oversampling: u64) -> Result<f64> {
    if oversampling == 0 {
        return Err(FdsicError::Config("oversampling must be ≥ 1".into()));
    }
    Ok((report.n_add + report.n_mult) as f64 * oversampling as f64)
}
