//! Truncated-series evaluation of multiple polylogarithms
//!
//! `Li_{n1,...,nd}(a1,...,ad) = sum_{0<m1<...<md} a1^m1 ... ad^md / (m1^n1 ... md^nd)`.
//!
//! The sum is rewritten through the suffix products `b_k = a_k a_{k+1} ... a_d`,
//! so that a term becomes `prod_k b_k^(m_k - m_{k-1})`. Every factor then has
//! modulus at most `rho = max_k |b_k|`, which gives the tail majorant
//! `sum_{m > M} binom(m-1, d-1) rho^m` and lets the individual `a_k` lie
//! outside the unit disc.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumevalError {
    #[error("composition parts must be positive integers, got {0:?}")]
    InvalidComposition(Vec<u32>),
    #[error("expected {expected} arguments, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("suffix product |a_{index}...a_d| = {modulus} exceeds rho_max = {rho_max}")]
    DivergentRequest {
        index: usize,
        modulus: f64,
        rho_max: f64,
    },
    #[error("tail bound cannot reach {target_error:e} below cutoff ceiling {max_cutoff}")]
    CutoffOverflow { target_error: f64, max_cutoff: usize },
    #[error("depth {depth} / weight {weight} exceeds caps (depth <= {max_depth}, weight <= {max_weight})")]
    CapExceeded {
        depth: usize,
        weight: u32,
        max_depth: usize,
        max_weight: u32,
    },
    #[error("parameter {name} = {value} is closer than 1/2 to a pole of the series")]
    PoleProximity { name: &'static str, value: Complex64 },
    #[error("target error must be positive and finite, got {0}")]
    InvalidTarget(f64),
}

pub type Result<T> = std::result::Result<T, NumevalError>;

/// Index tuple `(n1, ..., nd)` of a multiple polylogarithm.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Composition(Vec<u32>);

impl Composition {
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        if parts.is_empty() || parts.contains(&0) {
            return Err(NumevalError::InvalidComposition(parts));
        }
        Ok(Composition(parts))
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn weight(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl TryFrom<Vec<u32>> for Composition {
    type Error = NumevalError;

    fn try_from(parts: Vec<u32>) -> Result<Self> {
        Composition::new(parts)
    }
}

impl From<Composition> for Vec<u32> {
    fn from(c: Composition) -> Self {
        c.0
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRequest {
    pub indices: Composition,
    pub args: Vec<Complex64>,
    pub target_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalResult {
    pub value: Complex64,
    pub tail_bound: f64,
    pub cutoff: usize,
}

/// Limits applied by [`Evaluator`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub rho_max: f64,
    pub max_depth: usize,
    pub max_weight: u32,
    pub max_cutoff: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            rho_max: 0.99,
            max_depth: 4,
            max_weight: 12,
            max_cutoff: 1_000_000,
        }
    }
}

/// Suffix products `b_k = a_k * ... * a_d`.
pub fn suffix_products(args: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); args.len()];
    let mut acc = Complex64::new(1.0, 0.0);
    for (k, a) in args.iter().enumerate().rev() {
        acc *= a;
        out[k] = acc;
    }
    out
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    (0..k)
        .map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln())
        .sum()
}

/// Majorant of the mass discarded by truncating a depth-`d` nested sum at
/// `m_d <= cutoff`, given `suffix_rho = max_k |b_k|`.
///
/// Returns `+inf` when the geometric majorant is not yet usable at this
/// cutoff (term ratio still >= 1).
pub fn tail_bound(depth: usize, suffix_rho: f64, cutoff: usize) -> f64 {
    assert!(depth >= 1);
    assert!((0.0..1.0).contains(&suffix_rho), "suffix_rho must lie in [0, 1)");
    if suffix_rho == 0.0 {
        return 0.0;
    }
    // binom(m-1, d-1) vanishes for m < d
    let first = (cutoff + 1).max(depth);
    let ratio = suffix_rho * first as f64 / (first + 1 - depth) as f64;
    if ratio >= 1.0 {
        return f64::INFINITY;
    }
    let ln_term = ln_binomial(first - 1, depth - 1) + first as f64 * suffix_rho.ln();
    ln_term.exp() / (1.0 - ratio)
}

/// Smallest cutoff `M >= 1` with `tail_bound(depth, suffix_rho, M) <= target_error`.
pub fn choose_cutoff(
    depth: usize,
    suffix_rho: f64,
    target_error: f64,
    max_cutoff: usize,
) -> Result<usize> {
    if !(target_error > 0.0 && target_error.is_finite()) {
        return Err(NumevalError::InvalidTarget(target_error));
    }
    let ok = |m: usize| tail_bound(depth, suffix_rho, m) <= target_error;
    if ok(1) {
        return Ok(1);
    }
    let overflow = NumevalError::CutoffOverflow {
        target_error,
        max_cutoff,
    };
    let mut hi = 2usize;
    while !ok(hi) {
        if hi >= max_cutoff {
            return Err(overflow);
        }
        hi = (hi * 2).min(max_cutoff);
    }
    // invariant: !ok(lo), ok(hi)
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Nested sum `sum_{0<m1<...<md<=cutoff} prod_k b_k^(m_k - m_{k-1}) w_k(m_k)`.
///
/// Iterated prefix sums: `H_k(m+1) = b_k (H_k(m) + G_{k-1}(m))`,
/// `G_k(m) = w_k(m) H_k(m)`, `G_0 = delta_0`. Cost is `O(d * cutoff)`.
pub fn nested_sum<W>(suffix: &[Complex64], weight: W, cutoff: usize) -> Complex64
where
    W: Fn(usize, usize) -> Complex64,
{
    let zero = Complex64::new(0.0, 0.0);
    let mut prev = vec![zero; cutoff + 1];
    prev[0] = Complex64::new(1.0, 0.0);
    let mut cur = vec![zero; cutoff + 1];
    for (level, &b) in suffix.iter().enumerate() {
        let mut h = zero;
        cur[0] = zero;
        for m in 1..=cutoff {
            h = b * (h + prev[m - 1]);
            cur[m] = weight(level, m) * h;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let mut sum = zero;
    for v in &prev[1..] {
        sum += v;
    }
    sum
}

/// Raw truncation of the series at `m_d <= cutoff`, no closed forms.
pub fn truncated_li(indices: &Composition, suffix: &[Complex64], cutoff: usize) -> Complex64 {
    let parts = indices.parts();
    nested_sum(
        suffix,
        |level, m| Complex64::new((m as f64).powi(-(parts[level] as i32)), 0.0),
        cutoff,
    )
}

/// Stateless evaluator carrying the configured caps.
#[derive(Debug, Clone, Copy, Default)]
pub struct Evaluator {
    pub config: EvalConfig,
}

impl Evaluator {
    pub fn new(config: EvalConfig) -> Self {
        Evaluator { config }
    }

    pub fn eval_li(&self, req: &EvalRequest) -> Result<EvalResult> {
        if req.args.len() != req.indices.depth() {
            return Err(NumevalError::LengthMismatch {
                expected: req.indices.depth(),
                got: req.args.len(),
            });
        }
        self.eval_li_suffix(&req.indices, &suffix_products(&req.args), req.target_error)
    }

    /// Evaluate given the suffix products directly.
    pub fn eval_li_suffix(
        &self,
        indices: &Composition,
        suffix: &[Complex64],
        target_error: f64,
    ) -> Result<EvalResult> {
        let cfg = &self.config;
        let (depth, weight) = (indices.depth(), indices.weight());
        if suffix.len() != depth {
            return Err(NumevalError::LengthMismatch {
                expected: depth,
                got: suffix.len(),
            });
        }
        if depth > cfg.max_depth || weight > cfg.max_weight {
            return Err(NumevalError::CapExceeded {
                depth,
                weight,
                max_depth: cfg.max_depth,
                max_weight: cfg.max_weight,
            });
        }
        if !(target_error > 0.0 && target_error.is_finite()) {
            return Err(NumevalError::InvalidTarget(target_error));
        }
        let rho = self.check_suffix(suffix)?;
        if indices.parts() == [1] {
            return Ok(EvalResult {
                value: -(Complex64::new(1.0, 0.0) - suffix[0]).ln(),
                tail_bound: 0.0,
                cutoff: 1,
            });
        }
        let cutoff = choose_cutoff(depth, rho, target_error, cfg.max_cutoff)?;
        Ok(EvalResult {
            value: truncated_li(indices, suffix, cutoff),
            tail_bound: tail_bound(depth, rho, cutoff),
            cutoff,
        })
    }

    /// Largest suffix modulus, or `DivergentRequest`.
    pub fn check_suffix(&self, suffix: &[Complex64]) -> Result<f64> {
        let mut rho: f64 = 0.0;
        for (k, b) in suffix.iter().enumerate() {
            let modulus = b.norm();
            if !(modulus <= self.config.rho_max) {
                return Err(NumevalError::DivergentRequest {
                    index: k + 1,
                    modulus,
                    rho_max: self.config.rho_max,
                });
            }
            rho = rho.max(modulus);
        }
        Ok(rho)
    }

    /// `L(x,y|t1,t2) = sum_{m,n>0} x^m y^n / ((m - t1)(m + n - t2))`.
    pub fn eval_generating_l(
        &self,
        x: Complex64,
        y: Complex64,
        t1: Complex64,
        t2: Complex64,
        target_error: f64,
    ) -> Result<EvalResult> {
        for (k, v) in [x, y].iter().enumerate() {
            if !(v.norm() < 1.0) {
                return Err(NumevalError::DivergentRequest {
                    index: k + 1,
                    modulus: v.norm(),
                    rho_max: 1.0,
                });
            }
        }
        for (name, t) in [("t1", t1), ("t2", t2)] {
            if !(t.norm() <= 0.5) {
                return Err(NumevalError::PoleProximity { name, value: t });
            }
        }
        if !(target_error > 0.0 && target_error.is_finite()) {
            return Err(NumevalError::InvalidTarget(target_error));
        }
        let rho = x.norm().max(y.norm());
        // |m - t1| >= 1/2 and |m + n - t2| >= 3/2, so each term is at most (4/3) rho^(m+n)
        let scale = 4.0 / 3.0;
        let cutoff = choose_cutoff(2, rho, target_error / scale, self.config.max_cutoff)?;
        let shifts = [t1, t2];
        let value = nested_sum(
            &[x, y],
            |level, m| (Complex64::new(m as f64, 0.0) - shifts[level]).inv(),
            cutoff,
        );
        Ok(EvalResult {
            value,
            tail_bound: scale * tail_bound(2, rho, cutoff),
            cutoff,
        })
    }
}

/// [`Evaluator::eval_li`] under the default configuration.
pub fn eval_li(req: &EvalRequest) -> Result<EvalResult> {
    Evaluator::default().eval_li(req)
}

/// [`Evaluator::eval_generating_l`] under the default configuration.
pub fn eval_generating_l(
    x: Complex64,
    y: Complex64,
    t1: Complex64,
    t2: Complex64,
    target_error: f64,
) -> Result<EvalResult> {
    Evaluator::default().eval_generating_l(x, y, t1, t2, target_error)
}
