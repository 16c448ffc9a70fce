//! Exact symbolic algebra of polylogarithm expressions.
//!
//! Arguments are formal monomials in named variables (rational exponents,
//! times a root of unity); coefficients are exact rationals. Floating point
//! only appears when an expression is instantiated at a point.

mod expr;
mod monomial;

pub use expr::{
    eval_factor, rat, stuffle_product, Expr, ExprValue, Identity, MplFactor, Term,
    STUFFLE_DEPTH_CAP,
};
pub use monomial::ArgMonomial;

use crate::numeval::NumevalError;
use thiserror::Error;

pub type Rational = num_rational::BigRational;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymalgError {
    #[error("variable {0} has no assigned value")]
    UnboundVariable(String),
    #[error("variable {0} is assigned zero but carries an exponent")]
    ZeroBase(String),
    #[error("expected {expected} arguments, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("product depth {depth} exceeds cap {cap}")]
    DepthCapExceeded { depth: usize, cap: usize },
    #[error("terms of mixed weights {0:?}")]
    WeightMismatch(Vec<u32>),
    #[error("invalid monomial: {0}")]
    InvalidMonomial(String),
    #[error("evaluating {term}: {source}")]
    Evaluation {
        term: String,
        #[source]
        source: Box<SymalgError>,
    },
    #[error(transparent)]
    Numeval(#[from] NumevalError),
}
