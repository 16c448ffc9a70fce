//! Explicit reduction of depth-2 polylogarithms `Li_{k,l}(x,y)` to
//! `Li_{n-1,1}` and `Li_n` at root-of-unity twisted monomial arguments.
//!
//! Starting point is the generating series
//! `L(x,y|t1,t2) = sum_{k,l} Li_{k,l}(x/y,y) t1^(k-1) t2^(l-1)`. For
//! `gamma = alpha + beta`, summing `L` over all roots `X^alpha = x`,
//! `Y^beta = y`, `Z^gamma = xy` gives
//!
//! ```text
//! sum [ L(X,Y|ab t,0)/gamma - L(Z,Y|gb t,0)/alpha + L(Z,X|-ga t,0)/beta ]
//!     = L(xy,x|-alpha t, beta t) + (1/(gamma t)) sum_{k>=2} Li_k(xy) (beta t)^(k-1)
//! ```
//!
//! and the coefficient of `t^(n-2)` expresses
//! `U_n^{alpha,beta}(x,y) = sum_{k+l=n} Li_{k,l}(y,x) (-alpha)^(k-1) beta^(l-1)`
//! through `Li_{n-1,1}` and `Li_n` only. The `n-1` functions
//! `U_n^{i,n-i}` are related to the `Li_{k,n-k}(y,x)` by an invertible
//! Vandermonde-type matrix.

use num_bigint::BigInt;
use num_traits::{One, Pow};
use std::collections::BTreeMap;
use thiserror::Error;

use crate::linalg::{identity, inverse_fraction_free, mat_mul, to_rational, RatMatrix};
use crate::symalg::{rat, ArgMonomial, Expr, Identity, MplFactor, Rational, SymalgError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReductionError {
    #[error("weight {0} is too small, need n >= 3")]
    WeightTooSmall(u32),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("reduction matrix for weight {0} is singular")]
    SingularMatrix(u32),
    #[error(transparent)]
    Symalg(#[from] SymalgError),
}

pub type Result<T> = std::result::Result<T, ReductionError>;

fn x() -> ArgMonomial {
    ArgMonomial::var("x")
}

fn y() -> ArgMonomial {
    ArgMonomial::var("y")
}

fn li(indices: &[u32], args: Vec<ArgMonomial>) -> MplFactor {
    MplFactor::li(indices, args)
}

fn int_pow(base: i64, exp: u32) -> Rational {
    Rational::from_integer(BigInt::from(base).pow(exp))
}

/// `U_n^{alpha,beta}` in both of its forms.
#[derive(Debug, Clone, PartialEq)]
pub struct UFunction {
    pub n: u32,
    pub alpha: u32,
    pub beta: u32,
    /// `sum_{k+l=n} (-alpha)^(k-1) beta^(l-1) Li_{k,l}(y,x)`
    pub as_depth2: Expr,
    /// The same function through `Li_{n-1,1}` and `Li_n` only.
    pub as_li31: Expr,
}

fn check_params(n: u32, alpha: u32, beta: u32) -> Result<()> {
    if n < 3 {
        return Err(ReductionError::WeightTooSmall(n));
    }
    if alpha == 0 || beta == 0 {
        return Err(ReductionError::InvalidParameter(format!(
            "alpha and beta must be positive, got ({alpha}, {beta})"
        )));
    }
    Ok(())
}

fn u_depth2(n: u32, alpha: u32, beta: u32) -> Expr {
    let terms = (1..n).map(|k| {
        let l = n - k;
        let c = int_pow(-(alpha as i64), k - 1) * int_pow(beta as i64, l - 1);
        Expr::term(c, vec![li(&[k, l], vec![y(), x()])])
    });
    terms.fold(Expr::zero(), |acc, t| &acc + &t)
}

/// Root-summed left-hand side: coefficient of `t^(n-2)`, written in `x, y`.
fn root_sum_side(n: u32, alpha: u32, beta: u32) -> Expr {
    let gamma = alpha + beta;
    let (a, b, g) = (alpha as i64, beta as i64, gamma as i64);
    let (cx, cy, cz) = (
        ArgMonomial::var("X"),
        ArgMonomial::var("Y"),
        ArgMonomial::var("Z"),
    );
    let top = n - 1;
    let e = [
        (
            int_pow(a * b, n - 2) * rat(1, g),
            li(&[top, 1], vec![cx.div(&cy), cy.clone()]),
        ),
        (
            -int_pow(g * b, n - 2) * rat(1, a),
            li(&[top, 1], vec![cz.div(&cy), cy.clone()]),
        ),
        (
            int_pow(-g * a, n - 2) * rat(1, b),
            li(&[top, 1], vec![cz.div(&cx), cx.clone()]),
        ),
    ]
    .into_iter()
    .fold(Expr::zero(), |acc, (c, f)| &acc + &Expr::term(c, vec![f]));

    let expanded = e
        .root_expand("X", alpha as u64)
        .root_expand("Y", beta as u64)
        .root_expand("Z", gamma as u64);
    let renames: BTreeMap<String, String> = [("X", "x"), ("Y", "y")]
        .into_iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    expanded
        .rename(&renames)
        .substitute("Z", &x().mul(&y()))
}

fn li_n_of_xy(n: u32) -> MplFactor {
    li(&[n], vec![x().mul(&y())])
}

/// Coefficient of `t^(n-2)` in the root-sum identity for `L`:
/// the root-summed `Li_{n-1,1}` combination on the left, and
/// `U_n^{alpha,beta}(x,y) + (beta^(n-1)/gamma) Li_n(xy)` on the right.
pub fn main1_coefficient_identity(n: u32, alpha: u32, beta: u32) -> Result<Identity> {
    check_params(n, alpha, beta)?;
    let gamma = (alpha + beta) as i64;
    let lhs = root_sum_side(n, alpha, beta);
    let li_n = Expr::term(int_pow(beta as i64, n - 1) * rat(1, gamma), vec![li_n_of_xy(n)]);
    let rhs = &u_depth2(n, alpha, beta) + &li_n;
    Ok(Identity::new(
        lhs,
        rhs,
        format!(
            "coefficient of t^{} in the root-summed generating-series identity, alpha={alpha}, beta={beta}, gamma={gamma}",
            n - 2
        ),
    )?)
}

pub fn u_function(n: u32, alpha: u32, beta: u32) -> Result<UFunction> {
    check_params(n, alpha, beta)?;
    let gamma = (alpha + beta) as i64;
    let li_n = Expr::term(int_pow(beta as i64, n - 1) * rat(1, gamma), vec![li_n_of_xy(n)]);
    Ok(UFunction {
        n,
        alpha,
        beta,
        as_depth2: u_depth2(n, alpha, beta),
        as_li31: &root_sum_side(n, alpha, beta) - &li_n,
    })
}

/// `M[i][k] = (-i)^(k-1) (n-i)^(n-k-1)`, `i, k = 1..n-1`, so that
/// `U_n^{i,n-i} = sum_k M[i][k] Li_{k,n-k}(y,x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionMatrix {
    pub n: u32,
    pub entries: Vec<Vec<BigInt>>,
    pub inverse: RatMatrix,
}

impl ReductionMatrix {
    pub fn entries_rational(&self) -> RatMatrix {
        to_rational(&self.entries)
    }

    /// `M * M^{-1} == I` in exact arithmetic.
    pub fn is_exact_inverse(&self) -> bool {
        let size = self.entries.len();
        mat_mul(&self.entries_rational(), &self.inverse) == identity(size)
            && mat_mul(&self.inverse, &self.entries_rational()) == identity(size)
    }
}

pub fn build_reduction_matrix(n: u32) -> Result<ReductionMatrix> {
    if n < 3 {
        return Err(ReductionError::WeightTooSmall(n));
    }
    let entries: Vec<Vec<BigInt>> = (1..n)
        .map(|i| {
            (1..n)
                .map(|k| BigInt::from(-(i as i64)).pow(k - 1) * BigInt::from(n - i).pow(n - k - 1))
                .collect()
        })
        .collect();
    let inverse = inverse_fraction_free(&entries).ok_or(ReductionError::SingularMatrix(n))?;
    Ok(ReductionMatrix {
        n,
        entries,
        inverse,
    })
}

/// Identity `Li_{k,l}(x,y) = (combination of Li_{n-1,1} and Li_n)`.
pub fn reduce_li(k: u32, l: u32) -> Result<Identity> {
    if k == 0 || l == 0 {
        return Err(ReductionError::InvalidParameter(format!(
            "indices must be positive, got ({k}, {l})"
        )));
    }
    let n = k + l;
    if n < 3 {
        return Err(ReductionError::WeightTooSmall(n));
    }
    let target = Expr::factor(li(&[k, l], vec![x(), y()]));
    if l == 1 {
        return Ok(Identity::new(
            target.clone(),
            target,
            format!("Li_{{{k},1}} is already of reduced shape"),
        )?);
    }
    let matrix = build_reduction_matrix(n)?;
    let row = &matrix.inverse[k as usize - 1];
    // Li_{k,l}(y,x) = sum_i row[i] U_n^{i+1, n-i-1}(x,y)
    let mut rhs_yx = Expr::zero();
    for (i, c) in row.iter().enumerate() {
        let alpha = i as u32 + 1;
        let u = u_function(n, alpha, n - alpha)?;
        rhs_yx = &rhs_yx + &u.as_li31.scale(c);
    }
    let swap: BTreeMap<String, String> = [("x", "y"), ("y", "x")]
        .into_iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    Ok(Identity::new(
        target,
        rhs_yx.rename(&swap),
        format!(
            "Li_{{{k},{l}}}(y,x) solved from U_{n}^{{i,{n}-i}}, i=1..{}, via the inverse reduction matrix; variables x and y swapped",
            n - 1
        ),
    )?)
}

/// The classical weight-4 example expressing `Li_{2,2}` through `Li_{3,1}`,
/// `Li_4` and a product of classical polylogarithms.
pub fn classic_weight_four_identity() -> Identity {
    let half = rat(1, 2);
    let sx = ArgMonomial::var_pow("x", half.clone());
    let sy = ArgMonomial::var_pow("y", half.clone());
    let minus = ArgMonomial::root_of_unity(2, 1);
    let r = sx.div(&sy);
    let r_inv = sy.div(&sx);
    let terms: Vec<(Rational, Vec<MplFactor>)> = vec![
        (rat(-4, 1), vec![li(&[3, 1], vec![minus.mul(&r), y()])]),
        (rat(-4, 1), vec![li(&[3, 1], vec![r.clone(), y()])]),
        (rat(4, 1), vec![li(&[3, 1], vec![minus.mul(&r_inv), x()])]),
        (rat(4, 1), vec![li(&[3, 1], vec![r_inv.clone(), x()])]),
        (rat(1, 1), vec![li(&[3, 1], vec![x(), y()])]),
        (rat(-1, 1), vec![li(&[3, 1], vec![y(), x()])]),
        (rat(-1, 1), vec![li(&[3, 1], vec![y().div(&x()), x()])]),
        (-half, vec![li(&[4], vec![x().mul(&y())])]),
        (Rational::one(), vec![li(&[1], vec![x()]), li(&[3], vec![y()])]),
    ];
    let rhs = terms
        .into_iter()
        .fold(Expr::zero(), |acc, (c, fs)| &acc + &Expr::term(c, fs));
    let lhs = Expr::factor(li(&[2, 2], vec![x(), y()]));
    Identity::new(lhs, rhs, "classical weight-4 depth-2 example")
        .expect("fixture is weight-homogeneous")
}

/// Structural check: true iff every depth-2 factor on the right-hand side has
/// indices `(n-1, 1)` and every other factor is a classical `Li_n`.
pub fn rhs_is_reduced(id: &Identity) -> bool {
    let n = id.weight;
    id.rhs.terms().iter().all(|t| {
        t.factors.len() == 1 && {
            let p = t.factors[0].indices().parts();
            p == [n - 1, 1] || p == [n]
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeval::Evaluator;
    use num_complex::Complex64;

    fn point(xv: Complex64, yv: Complex64) -> BTreeMap<String, Complex64> {
        [("x".to_string(), xv), ("y".to_string(), yv)].into_iter().collect()
    }

    fn residual(id: &Identity, p: &BTreeMap<String, Complex64>) -> f64 {
        let ev = Evaluator::default();
        let l = id.lhs.eval(p, 1e-13, &ev).unwrap();
        let r = id.rhs.eval(p, 1e-13, &ev).unwrap();
        (l.value - r.value).norm() / (l.l1_mass + r.l1_mass).max(1.0)
    }

    fn sample() -> Vec<BTreeMap<String, Complex64>> {
        vec![
            point(Complex64::new(0.3, 0.0), Complex64::new(0.4, 0.0)),
            point(Complex64::new(-0.5, 0.2), Complex64::new(0.1, -0.6)),
            point(Complex64::new(0.05, 0.66), Complex64::new(-0.45, -0.3)),
        ]
    }

    #[test]
    fn matrix_n3() {
        let m = build_reduction_matrix(3).unwrap();
        let e: Vec<Vec<i64>> = vec![vec![2, -1], vec![1, -2]];
        assert_eq!(
            m.entries,
            e.iter()
                .map(|r| r.iter().map(|&v| BigInt::from(v)).collect::<Vec<_>>())
                .collect::<Vec<_>>()
        );
        assert_eq!(m.inverse[0], vec![rat(2, 3), rat(-1, 3)]);
        assert!(m.is_exact_inverse());
    }

    #[test]
    fn matrix_rows_are_u_coefficients() {
        let n = 5;
        let m = build_reduction_matrix(n).unwrap();
        for i in 1..n {
            let u = u_function(n, i, n - i).unwrap();
            for t in u.as_depth2.terms() {
                let k = t.factors[0].indices().parts()[0];
                assert_eq!(
                    t.coeff,
                    Rational::from_integer(m.entries[i as usize - 1][k as usize - 1].clone())
                );
            }
        }
    }

    #[test]
    fn weight_too_small() {
        assert_eq!(
            main1_coefficient_identity(2, 1, 1),
            Err(ReductionError::WeightTooSmall(2))
        );
        assert_eq!(reduce_li(1, 1), Err(ReductionError::WeightTooSmall(2)));
        assert!(matches!(reduce_li(0, 3), Err(ReductionError::InvalidParameter(_))));
    }

    #[test]
    fn coefficient_extraction_shape() {
        let id = main1_coefficient_identity(4, 1, 1).unwrap();
        assert_eq!(id.weight, 4);
        assert!(id
            .lhs
            .factors()
            .all(|f| f.indices().parts() == [3, 1]));
        // beta^(n-1)/gamma = 1/2 in front of Li_4(xy)
        let li4 = id
            .rhs
            .terms()
            .iter()
            .find(|t| t.factors[0].indices().parts() == [4])
            .unwrap();
        assert_eq!(li4.coeff, rat(1, 2));
        for p in sample() {
            assert!(residual(&id, &p) < 1e-9);
        }
    }

    #[test]
    fn exponent_denominators_divide_lcm() {
        let id = main1_coefficient_identity(5, 2, 3).unwrap();
        for f in id.lhs.factors() {
            for a in f.args() {
                for e in a.exponents().values() {
                    assert_eq!(BigInt::from(30) % e.denom(), BigInt::from(0));
                }
            }
        }
    }

    #[test]
    fn n3_hand_solved_system() {
        let u12 = u_function(3, 1, 2).unwrap();
        let u21 = u_function(3, 2, 1).unwrap();
        let combo = &u12.as_depth2.scale(&rat(2, 3)) - &u21.as_depth2.scale(&rat(1, 3));
        assert_eq!(combo, Expr::factor(li(&[1, 2], vec![y(), x()])));
        let id = reduce_li(1, 2).unwrap();
        assert!(rhs_is_reduced(&id));
        for p in sample() {
            assert!(residual(&id, &p) < 1e-9);
        }
    }

    #[test]
    fn reduce_22_verifies() {
        let id = reduce_li(2, 2).unwrap();
        assert!(rhs_is_reduced(&id));
        for p in sample() {
            assert!(residual(&id, &p) < 1e-9, "{p:?}");
        }
    }

    #[test]
    fn already_reduced_shape_is_trivial() {
        let id = reduce_li(3, 1).unwrap();
        assert_eq!(id.lhs, id.rhs);
        assert!(id.difference().is_zero());
    }

    #[test]
    fn classic_identity_holds() {
        let id = classic_weight_four_identity();
        assert_eq!(id.weight, 4);
        assert!(id.lhs.terms().iter().chain(id.rhs.terms()).all(|t| t.weight() == 4));
        for p in sample() {
            assert!(residual(&id, &p) < 1e-9);
        }
    }
}
