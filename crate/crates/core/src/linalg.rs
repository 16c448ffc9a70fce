//! Small dense exact linear algebra over the integers and rationals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::symalg::Rational;

pub type RatMatrix = Vec<Vec<Rational>>;

pub fn identity(n: usize) -> RatMatrix {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Rational::one() } else { Rational::zero() })
                .collect()
        })
        .collect()
}

pub fn mat_mul(a: &RatMatrix, b: &RatMatrix) -> RatMatrix {
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            assert_eq!(row.len(), inner, "dimension mismatch");
            (0..cols)
                .map(|j| {
                    row.iter()
                        .zip(b.iter())
                        .fold(Rational::zero(), |acc, (x, brow)| acc + x * &brow[j])
                })
                .collect()
        })
        .collect()
}

pub fn mat_vec(a: &RatMatrix, v: &[Rational]) -> Vec<Rational> {
    a.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
        })
        .collect()
}

pub fn to_rational(m: &[Vec<BigInt>]) -> RatMatrix {
    m.iter()
        .map(|r| r.iter().map(|x| Rational::from_integer(x.clone())).collect())
        .collect()
}

/// Inverse of a square integer matrix by Bareiss fraction-free elimination
/// on `[A | I]` followed by rational back substitution. `None` if singular.
pub fn inverse_fraction_free(a: &[Vec<BigInt>]) -> Option<RatMatrix> {
    let n = a.len();
    let width = 2 * n;
    let mut m: Vec<Vec<BigInt>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            assert_eq!(row.len(), n, "matrix must be square");
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }));
            r
        })
        .collect();

    let mut prev = BigInt::one();
    for k in 0..n {
        let pivot_row = (k..n).find(|&i| !m[i][k].is_zero())?;
        m.swap(k, pivot_row);
        for i in k + 1..n {
            for j in k + 1..width {
                let num = &m[k][k] * &m[i][j] - &m[i][k] * &m[k][j];
                let (q, r) = num.div_rem(&prev);
                assert!(r.is_zero(), "Bareiss division must be exact");
                m[i][j] = q;
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }

    // upper-triangular integer system U X = B
    let mut inv = vec![vec![Rational::zero(); n]; n];
    for col in 0..n {
        for i in (0..n).rev() {
            let mut acc = Rational::from_integer(m[i][n + col].clone());
            for j in i + 1..n {
                acc -= Rational::from_integer(m[i][j].clone()) * &inv[j][col];
            }
            inv[i][col] = acc / Rational::from_integer(m[i][i].clone());
        }
    }
    Some(inv)
}

/// Solve `A x = b` over the rationals by Gauss-Jordan elimination.
/// `None` if `A` is singular.
pub fn solve(a: &RatMatrix, b: &[Rational]) -> Option<Vec<Rational>> {
    let n = a.len();
    assert_eq!(b.len(), n);
    let mut m: RatMatrix = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            assert_eq!(row.len(), n, "matrix must be square");
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    for k in 0..n {
        let p = (k..n).find(|&i| !m[i][k].is_zero())?;
        m.swap(k, p);
        let pivot = m[k][k].clone();
        for x in m[k].iter_mut() {
            *x /= &pivot;
        }
        let pivot_row = m[k].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == k || row[k].is_zero() {
                continue;
            }
            let f = row[k].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                *x -= &f * p;
            }
        }
    }
    Some(m.into_iter().map(|mut r| r.pop().unwrap()).collect())
}
