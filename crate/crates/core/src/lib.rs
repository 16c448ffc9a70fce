//! Constructive multiple-polylogarithm identities.
//!
//! * [`numeval`]: certified truncated-series evaluation of `Li_{n1..nd}` and
//!   of the depth-2 generating function `L(x,y|t1,t2)`.
//! * [`symalg`]: exact rational combinations of polylogarithm products with
//!   formal monomial arguments.
//! * [`reduction`]: explicit identities expressing any `Li_{k,l}(x,y)` through
//!   `Li_{n-1,1}` and `Li_n` at root-of-unity twisted monomial arguments.
//! * [`coalgebra`]: preimages of tensor words of classical polylogarithm
//!   symbols under the iterated truncated cobracket.
//! * [`verify`]: seeded numerical verification of identities.
//! * [`format`]: JSON interchange and LaTeX rendering.
//! * [`cli`]: the `mplkit` command-line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod coalgebra;
pub mod format;
pub mod linalg;
pub mod numeval;
pub mod reduction;
pub mod symalg;
pub mod verify;
