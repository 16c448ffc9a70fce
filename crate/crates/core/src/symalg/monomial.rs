use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use super::{Rational, SymalgError};

/// Formal argument `zeta_N^j * prod_v v^(e_v)` with rational exponents.
///
/// Kept in canonical form: `j/N` is a reduced fraction in `[0, 1)` (so the
/// trivial root is `zeta_1^0`) and no exponent is zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArgMonomial {
    exponents: BTreeMap<String, Rational>,
    zeta_order: u64,
    zeta_power: u64,
}

fn reduce_zeta(order: u64, power: i64) -> (u64, u64) {
    assert!(order > 0, "root of unity order must be positive");
    let p = power.rem_euclid(order as i64) as u64;
    if p == 0 {
        return (1, 0);
    }
    let g = p.gcd(&order);
    (order / g, p / g)
}

impl ArgMonomial {
    pub fn new(
        zeta_order: u64,
        zeta_power: i64,
        exponents: impl IntoIterator<Item = (String, Rational)>,
    ) -> Self {
        let (zeta_order, zeta_power) = reduce_zeta(zeta_order, zeta_power);
        let mut map: BTreeMap<String, Rational> = BTreeMap::new();
        for (v, e) in exponents {
            *map.entry(v).or_insert_with(Rational::zero) += e;
        }
        map.retain(|_, e| !e.is_zero());
        ArgMonomial {
            exponents: map,
            zeta_order,
            zeta_power,
        }
    }

    pub fn one() -> Self {
        ArgMonomial::new(1, 0, [])
    }

    pub fn var(name: &str) -> Self {
        ArgMonomial::new(1, 0, [(name.to_string(), Rational::one())])
    }

    pub fn var_pow(name: &str, exponent: Rational) -> Self {
        ArgMonomial::new(1, 0, [(name.to_string(), exponent)])
    }

    /// `zeta_order`-th root of unity raised to `power`.
    pub fn root_of_unity(order: u64, power: i64) -> Self {
        ArgMonomial::new(order, power, [])
    }

    /// Reject non-canonical raw data (used by parsers).
    pub fn from_canonical_parts(
        zeta_order: u64,
        zeta_power: u64,
        exponents: BTreeMap<String, Rational>,
    ) -> Result<Self, SymalgError> {
        if zeta_order == 0 {
            return Err(SymalgError::InvalidMonomial("zeta_order must be positive".into()));
        }
        if (zeta_order, zeta_power) != reduce_zeta(zeta_order, zeta_power as i64) {
            return Err(SymalgError::InvalidMonomial(format!(
                "root of unity zeta_{zeta_order}^{zeta_power} is not in lowest terms"
            )));
        }
        if let Some((v, _)) = exponents.iter().find(|(_, e)| e.is_zero()) {
            return Err(SymalgError::InvalidMonomial(format!("zero exponent for {v}")));
        }
        Ok(ArgMonomial {
            exponents,
            zeta_order,
            zeta_power,
        })
    }

    pub fn zeta_order(&self) -> u64 {
        self.zeta_order
    }

    pub fn zeta_power(&self) -> u64 {
        self.zeta_power
    }

    pub fn exponents(&self) -> &BTreeMap<String, Rational> {
        &self.exponents
    }

    pub fn exponent(&self, var: &str) -> Rational {
        self.exponents.get(var).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_one(&self) -> bool {
        self.zeta_order == 1 && self.exponents.is_empty()
    }

    /// Sum of all exponents; for nonnegative exponents, `|m| <= R^degree`
    /// whenever every variable has modulus at most `R`.
    pub fn total_degree(&self) -> Rational {
        self.exponents.values().fold(Rational::zero(), |a, e| a + e)
    }

    pub fn mul(&self, other: &ArgMonomial) -> ArgMonomial {
        let order = self.zeta_order.lcm(&other.zeta_order);
        let power = self.zeta_power * (order / self.zeta_order)
            + other.zeta_power * (order / other.zeta_order);
        let exps = self
            .exponents
            .iter()
            .chain(other.exponents.iter())
            .map(|(v, e)| (v.clone(), e.clone()));
        ArgMonomial::new(order, power as i64, exps)
    }

    pub fn inv(&self) -> ArgMonomial {
        ArgMonomial::new(
            self.zeta_order,
            -(self.zeta_power as i64),
            self.exponents.iter().map(|(v, e)| (v.clone(), -e.clone())),
        )
    }

    pub fn div(&self, other: &ArgMonomial) -> ArgMonomial {
        self.mul(&other.inv())
    }

    /// Formal power with rational exponent `p/q`: exponents are scaled and the
    /// root of unity `zeta_N^j` becomes `zeta_{Nq}^{jp}`, one fixed choice
    /// among the `q` candidates.
    pub fn pow(&self, e: &Rational) -> ArgMonomial {
        let p = e.numer().to_i64().expect("exponent numerator fits in i64");
        let q = e.denom().to_u64().expect("exponent denominator fits in u64");
        let exps = self
            .exponents
            .iter()
            .map(|(v, x)| (v.clone(), x * e));
        ArgMonomial::new(self.zeta_order * q, self.zeta_power as i64 * p, exps)
    }

    /// All `r` formal `r`-th roots, `zeta_r^i * self^(1/r)`, `i = 0..r`.
    pub fn roots(&self, r: u64) -> Vec<ArgMonomial> {
        let base = self.pow(&Rational::new(BigInt::one(), BigInt::from(r)));
        (0..r)
            .map(|i| base.mul(&ArgMonomial::root_of_unity(r, i as i64)))
            .collect()
    }

    /// Replace `var^e` by `replacement^e` (see [`ArgMonomial::pow`]).
    pub fn substitute(&self, var: &str, replacement: &ArgMonomial) -> ArgMonomial {
        match self.exponents.get(var) {
            None => self.clone(),
            Some(e) => {
                let mut rest = self.clone();
                rest.exponents.remove(var);
                rest.mul(&replacement.pow(e))
            }
        }
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.exponents.keys().map(|s| s.as_str())
    }

    /// Numeric value: `exp(2 pi i j / N) * prod_v exp(e_v Log v)` with the
    /// principal logarithm.
    pub fn instantiate(
        &self,
        assignment: &BTreeMap<String, Complex64>,
    ) -> Result<Complex64, SymalgError> {
        let mut value = root_of_unity_value(self.zeta_order, self.zeta_power);
        for (v, e) in &self.exponents {
            let z = *assignment
                .get(v)
                .ok_or_else(|| SymalgError::UnboundVariable(v.clone()))?;
            if z == Complex64::new(0.0, 0.0) {
                return Err(SymalgError::ZeroBase(v.clone()));
            }
            value *= if e.is_integer() {
                let k = e.to_integer().to_i32().expect("integer exponent fits in i32");
                z.powi(k)
            } else {
                let ex = e.to_f64().expect("exponent is finite");
                (z.ln() * ex).exp()
            };
        }
        Ok(value)
    }

    pub fn to_latex(&self) -> String {
        let mut parts = Vec::new();
        let sign = match (self.zeta_order, self.zeta_power) {
            (1, _) => "",
            (2, _) => "-",
            (n, j) => {
                parts.push(format!("\\zeta_{{{n}}}^{{{j}}}"));
                ""
            }
        };
        for (v, e) in &self.exponents {
            if e.is_one() {
                parts.push(v.clone());
            } else {
                parts.push(format!("{v}^{{{e}}}"));
            }
        }
        if parts.is_empty() {
            parts.push("1".into());
        }
        format!("{sign}{}", parts.join(" "))
    }
}

fn root_of_unity_value(order: u64, power: u64) -> Complex64 {
    // exact values where the trigonometric route would leave rounding noise
    match (order, power) {
        (1, _) => Complex64::new(1.0, 0.0),
        (2, 1) => Complex64::new(-1.0, 0.0),
        (4, 1) => Complex64::new(0.0, 1.0),
        (4, 3) => Complex64::new(0.0, -1.0),
        _ => Complex64::from_polar(1.0, 2.0 * PI * power as f64 / order as f64),
    }
}

impl fmt::Display for ArgMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        let sign = match (self.zeta_order, self.zeta_power) {
            (1, _) => "",
            (2, _) => "-",
            (n, j) => {
                parts.push(format!("zeta{n}^{j}"));
                ""
            }
        };
        for (v, e) in &self.exponents {
            if e.is_one() {
                parts.push(v.clone());
            } else if e.is_integer() && e.is_positive() {
                parts.push(format!("{v}^{e}"));
            } else {
                parts.push(format!("{v}^({e})"));
            }
        }
        if parts.is_empty() {
            parts.push("1".into());
        }
        write!(f, "{sign}{}", parts.join("*"))
    }
}
