use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::{ArgMonomial, Rational, SymalgError};
use crate::numeval::{Composition, Evaluator};

/// One multiple polylogarithm `Li_{n1..nd}(a1..ad)` with formal arguments.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MplFactor {
    indices: Composition,
    args: Vec<ArgMonomial>,
}

impl MplFactor {
    pub fn new(indices: Composition, args: Vec<ArgMonomial>) -> Result<Self, SymalgError> {
        if indices.depth() != args.len() {
            return Err(SymalgError::LengthMismatch {
                expected: indices.depth(),
                got: args.len(),
            });
        }
        Ok(MplFactor { indices, args })
    }

    /// Shorthand for tests and fixtures; panics on malformed input.
    pub fn li(indices: &[u32], args: Vec<ArgMonomial>) -> Self {
        let c = Composition::new(indices.to_vec()).expect("valid composition");
        MplFactor::new(c, args).expect("argument count matches depth")
    }

    pub fn indices(&self) -> &Composition {
        &self.indices
    }

    pub fn args(&self) -> &[ArgMonomial] {
        &self.args
    }

    pub fn weight(&self) -> u32 {
        self.indices.weight()
    }

    pub fn depth(&self) -> usize {
        self.indices.depth()
    }

    /// Formal suffix products `a_k * ... * a_d`.
    pub fn suffix_monomials(&self) -> Vec<ArgMonomial> {
        let mut out = vec![ArgMonomial::one(); self.args.len()];
        let mut acc = ArgMonomial::one();
        for (k, a) in self.args.iter().enumerate().rev() {
            acc = a.mul(&acc);
            out[k] = acc.clone();
        }
        out
    }

    fn map_args(&self, f: impl Fn(&ArgMonomial) -> ArgMonomial) -> MplFactor {
        MplFactor {
            indices: self.indices.clone(),
            args: self.args.iter().map(f).collect(),
        }
    }

    pub fn to_latex(&self) -> String {
        let args: Vec<String> = self.args.iter().map(|a| a.to_latex()).collect();
        let idx = self.indices.to_string();
        if idx.len() == 1 {
            format!("\\Li_{}({})", idx, args.join(", "))
        } else {
            format!("\\Li_{{{}}}({})", idx, args.join(", "))
        }
    }
}

impl Ord for MplFactor {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.weight(), self.depth(), &self.indices, &self.args).cmp(&(
            other.weight(),
            other.depth(),
            &other.indices,
            &other.args,
        ))
    }
}

impl PartialOrd for MplFactor {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MplFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args: Vec<String> = self.args.iter().map(|a| a.to_string()).collect();
        write!(f, "Li_{{{}}}({})", self.indices, args.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Term {
    pub coeff: Rational,
    pub factors: Vec<MplFactor>,
}

impl Term {
    pub fn new(coeff: Rational, mut factors: Vec<MplFactor>) -> Self {
        factors.sort();
        Term { coeff, factors }
    }

    pub fn weight(&self) -> u32 {
        self.factors.iter().map(|f| f.weight()).sum()
    }

    fn depth(&self) -> usize {
        self.factors.iter().map(|f| f.depth()).sum()
    }

    fn sort_key(&self) -> (u32, usize, &[MplFactor]) {
        (self.weight(), self.depth(), &self.factors)
    }
}

/// Rational linear combination of products of [`MplFactor`]s.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Expr {
    terms: Vec<Term>,
}

impl Expr {
    pub fn zero() -> Self {
        Expr::default()
    }

    /// Raw construction, no merging.
    pub fn from_terms(terms: Vec<Term>) -> Self {
        Expr { terms }
    }

    pub fn factor(f: MplFactor) -> Self {
        Expr::from_terms(vec![Term::new(Rational::one(), vec![f])])
    }

    pub fn term(coeff: Rational, factors: Vec<MplFactor>) -> Self {
        Expr::from_terms(vec![Term::new(coeff, factors)]).normalize()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Merge like terms, drop zeros, sort deterministically. Idempotent.
    pub fn normalize(&self) -> Expr {
        let mut merged: BTreeMap<Vec<MplFactor>, Rational> = BTreeMap::new();
        for t in &self.terms {
            let mut factors = t.factors.clone();
            factors.sort();
            *merged.entry(factors).or_insert_with(Rational::zero) += &t.coeff;
        }
        let mut terms: Vec<Term> = merged
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(factors, coeff)| Term { coeff, factors })
            .collect();
        terms.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        Expr { terms }
    }

    pub fn scale(&self, c: &Rational) -> Expr {
        Expr::from_terms(
            self.terms
                .iter()
                .map(|t| Term::new(&t.coeff * c, t.factors.clone()))
                .collect(),
        )
        .normalize()
    }

    /// Distinct weights of the terms.
    pub fn weights(&self) -> BTreeSet<u32> {
        self.terms.iter().map(|t| t.weight()).collect()
    }

    pub fn variables(&self) -> BTreeSet<String> {
        self.factors()
            .flat_map(|f| f.args.iter())
            .flat_map(|a| a.variables().map(str::to_string))
            .collect()
    }

    pub fn factors(&self) -> impl Iterator<Item = &MplFactor> {
        self.terms.iter().flat_map(|t| t.factors.iter())
    }

    pub fn max_abs_coeff(&self) -> Rational {
        self.terms
            .iter()
            .map(|t| t.coeff.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    fn map_args(&self, f: impl Fn(&ArgMonomial) -> ArgMonomial) -> Expr {
        Expr::from_terms(
            self.terms
                .iter()
                .map(|t| {
                    Term::new(
                        t.coeff.clone(),
                        t.factors.iter().map(|g| g.map_args(&f)).collect(),
                    )
                })
                .collect(),
        )
        .normalize()
    }

    /// Replace `var^e` by `replacement^e` in every argument.
    pub fn substitute(&self, var: &str, replacement: &ArgMonomial) -> Expr {
        self.map_args(|a| a.substitute(var, replacement))
    }

    /// Simultaneous renaming of variables.
    pub fn rename(&self, renames: &BTreeMap<String, String>) -> Expr {
        self.map_args(|a| {
            ArgMonomial::new(
                a.zeta_order(),
                a.zeta_power() as i64,
                a.exponents()
                    .iter()
                    .map(|(v, e)| (renames.get(v).unwrap_or(v).clone(), e.clone())),
            )
        })
    }

    /// Sum over the `r` choices `v -> zeta_r^i v^(1/r)`, each substituted into
    /// the whole expression at once.
    pub fn root_expand(&self, var: &str, r: u64) -> Expr {
        assert!(r >= 1, "root order must be positive");
        let roots = ArgMonomial::var(var).roots(r);
        let terms = roots
            .iter()
            .flat_map(|root| self.substitute(var, root).terms)
            .collect();
        Expr::from_terms(terms).normalize()
    }

    /// Evaluate numerically, also returning `sum |c| prod |f|`.
    pub fn eval(
        &self,
        assignment: &BTreeMap<String, Complex64>,
        target_error: f64,
        evaluator: &Evaluator,
    ) -> Result<ExprValue, SymalgError> {
        let evaluations: usize = self.terms.iter().map(|t| t.factors.len()).sum();
        if evaluations == 0 {
            let value = self
                .terms
                .iter()
                .map(|t| t.coeff.to_f64().unwrap_or(f64::NAN))
                .sum::<f64>();
            return Ok(ExprValue {
                value: Complex64::new(value, 0.0),
                l1_mass: value.abs(),
            });
        }
        let max_coeff = self.max_abs_coeff().to_f64().unwrap_or(f64::MAX).max(1.0);
        let budget = target_error / (evaluations as f64 * max_coeff);
        let mut cache: BTreeMap<&MplFactor, Complex64> = BTreeMap::new();
        let mut value = Complex64::new(0.0, 0.0);
        let mut l1_mass = 0.0;
        for t in &self.terms {
            let c = t.coeff.to_f64().unwrap_or(f64::NAN);
            let mut prod = Complex64::new(1.0, 0.0);
            for f in &t.factors {
                let v = match cache.get(f) {
                    Some(v) => *v,
                    None => {
                        let v = eval_factor(f, assignment, budget, evaluator).map_err(|e| {
                            SymalgError::Evaluation {
                                term: f.to_string(),
                                source: Box::new(e),
                            }
                        })?;
                        cache.insert(f, v);
                        v
                    }
                };
                prod *= v;
            }
            value += prod * c;
            l1_mass += c.abs() * prod.norm();
        }
        Ok(ExprValue { value, l1_mass })
    }

    pub fn to_latex(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, t) in self.terms.iter().enumerate() {
            let neg = t.coeff.is_negative();
            let mag = t.coeff.abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if !mag.is_one() || t.factors.is_empty() {
                if mag.is_integer() {
                    out.push_str(&mag.to_string());
                } else {
                    out.push_str(&format!("\\frac{{{}}}{{{}}}", mag.numer(), mag.denom()));
                }
                if !t.factors.is_empty() {
                    out.push(' ');
                }
            }
            let fs: Vec<String> = t.factors.iter().map(|f| f.to_latex()).collect();
            out.push_str(&fs.join(" "));
        }
        out
    }
}

/// Numeric value of a factor through its formal suffix products.
pub fn eval_factor(
    f: &MplFactor,
    assignment: &BTreeMap<String, Complex64>,
    target_error: f64,
    evaluator: &Evaluator,
) -> Result<Complex64, SymalgError> {
    let suffix = f
        .suffix_monomials()
        .iter()
        .map(|m| m.instantiate(assignment))
        .collect::<Result<Vec<_>, _>>()?;
    let r = evaluator.eval_li_suffix(&f.indices, &suffix, target_error.max(f64::MIN_POSITIVE))?;
    Ok(r.value)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExprValue {
    pub value: Complex64,
    pub l1_mass: f64,
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            let neg = t.coeff.is_negative();
            let mag = t.coeff.abs();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if !mag.is_one() || t.factors.is_empty() {
                write!(f, "{mag}")?;
                if !t.factors.is_empty() {
                    write!(f, "*")?;
                }
            }
            let fs: Vec<String> = t.factors.iter().map(|g| g.to_string()).collect();
            write!(f, "{}", fs.join("*"))?;
        }
        Ok(())
    }
}

impl Add for &Expr {
    type Output = Expr;

    fn add(self, rhs: &Expr) -> Expr {
        let mut terms = self.terms.clone();
        terms.extend(rhs.terms.iter().cloned());
        Expr::from_terms(terms).normalize()
    }
}

impl Sub for &Expr {
    type Output = Expr;

    fn sub(self, rhs: &Expr) -> Expr {
        self + &(-rhs)
    }
}

impl Neg for &Expr {
    type Output = Expr;

    fn neg(self) -> Expr {
        Expr::from_terms(
            self.terms
                .iter()
                .map(|t| Term {
                    coeff: -t.coeff.clone(),
                    factors: t.factors.clone(),
                })
                .collect(),
        )
    }
}

impl Mul for &Expr {
    type Output = Expr;

    fn mul(self, rhs: &Expr) -> Expr {
        let mut terms = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for a in &self.terms {
            for b in &rhs.terms {
                let mut fs = a.factors.clone();
                fs.extend(b.factors.iter().cloned());
                terms.push(Term::new(&a.coeff * &b.coeff, fs));
            }
        }
        Expr::from_terms(terms).normalize()
    }
}

pub const STUFFLE_DEPTH_CAP: usize = 4;

type Letter = (u32, ArgMonomial);

/// Quasi-shuffle expansion of the pointwise product `f * g` into depth-graded
/// multiple polylogarithms, following the `0 < m1 < ... < md` ordering.
pub fn stuffle_product(f: &MplFactor, g: &MplFactor) -> Result<Expr, SymalgError> {
    let depth = f.depth() + g.depth();
    if depth > STUFFLE_DEPTH_CAP {
        return Err(SymalgError::DepthCapExceeded {
            depth,
            cap: STUFFLE_DEPTH_CAP,
        });
    }
    let word = |h: &MplFactor| -> Vec<Letter> {
        h.indices
            .parts()
            .iter()
            .copied()
            .zip(h.args.iter().cloned())
            .collect()
    };
    let mut terms = Vec::new();
    for w in quasi_shuffle(&word(f), &word(g)) {
        let (idx, args): (Vec<u32>, Vec<ArgMonomial>) = w.into_iter().unzip();
        let c = Composition::new(idx).expect("merged indices stay positive");
        terms.push(Term::new(Rational::one(), vec![MplFactor::new(c, args)?]));
    }
    Ok(Expr::from_terms(terms).normalize())
}

fn quasi_shuffle(u: &[Letter], v: &[Letter]) -> Vec<Vec<Letter>> {
    match (u.split_last(), v.split_last()) {
        (None, _) => vec![v.to_vec()],
        (_, None) => vec![u.to_vec()],
        (Some((a, u0)), Some((b, v0))) => {
            let mut out = Vec::new();
            for mut w in quasi_shuffle(u0, v) {
                w.push(a.clone());
                out.push(w);
            }
            for mut w in quasi_shuffle(u, v0) {
                w.push(b.clone());
                out.push(w);
            }
            for mut w in quasi_shuffle(u0, v0) {
                w.push((a.0 + b.0, a.1.mul(&b.1)));
                out.push(w);
            }
            out
        }
    }
}

/// An equation `lhs = rhs` homogeneous in weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Identity {
    pub lhs: Expr,
    pub rhs: Expr,
    pub weight: u32,
    pub variables: BTreeSet<String>,
    pub provenance: String,
}

impl Identity {
    pub fn new(lhs: Expr, rhs: Expr, provenance: impl Into<String>) -> Result<Self, SymalgError> {
        let lhs = lhs.normalize();
        let rhs = rhs.normalize();
        let weights: BTreeSet<u32> = lhs.weights().union(&rhs.weights()).copied().collect();
        if weights.len() > 1 {
            return Err(SymalgError::WeightMismatch(weights.into_iter().collect()));
        }
        let weight = weights.into_iter().next().unwrap_or(0);
        let mut variables = lhs.variables();
        variables.extend(rhs.variables());
        Ok(Identity {
            lhs,
            rhs,
            weight,
            variables,
            provenance: provenance.into(),
        })
    }

    /// `lhs - rhs`, normalized.
    pub fn difference(&self) -> Expr {
        &self.lhs - &self.rhs
    }

    pub fn to_latex(&self) -> String {
        format!("{} = {}", self.lhs.to_latex(), self.rhs.to_latex())
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

/// `p/q` as a [`Rational`].
pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeval::suffix_products;

    fn x() -> ArgMonomial {
        ArgMonomial::var("x")
    }

    fn y() -> ArgMonomial {
        ArgMonomial::var("y")
    }

    fn li(idx: &[u32], args: Vec<ArgMonomial>) -> Expr {
        Expr::factor(MplFactor::li(idx, args))
    }

    fn pt(xv: Complex64, yv: Complex64) -> BTreeMap<String, Complex64> {
        [("x".to_string(), xv), ("y".to_string(), yv)].into_iter().collect()
    }

    // truncated series at a generous cutoff, evaluated on the raw arguments
    fn oracle(idx: &[u32], args: &[Complex64]) -> Complex64 {
        let c = Composition::new(idx.to_vec()).unwrap();
        crate::numeval::truncated_li(&c, &suffix_products(args), 3000)
    }

    #[test]
    fn normalize_merges_and_cancels() {
        let a = li(&[2], vec![x()]).scale(&rat(2, 1));
        let b = li(&[2], vec![x()]).scale(&rat(3, 1));
        let s = &a + &b;
        assert_eq!(s.terms().len(), 1);
        assert_eq!(s.terms()[0].coeff, rat(5, 1));
        let z = &li(&[2], vec![x()]) - &li(&[2], vec![x()]);
        assert!(z.is_zero());
    }

    #[test]
    fn normalize_reduces_roots_of_unity() {
        let arg = ArgMonomial::root_of_unity(4, 6).mul(&x());
        let e = li(&[2], vec![arg]).normalize();
        let a = &e.terms()[0].factors[0].args()[0];
        assert_eq!((a.zeta_order(), a.zeta_power()), (2, 1));
    }

    #[test]
    fn normalize_is_idempotent_and_value_preserving() {
        let raw = Expr::from_terms(vec![
            Term::new(rat(1, 2), vec![MplFactor::li(&[1], vec![x()]), MplFactor::li(&[2], vec![y()])]),
            Term::new(rat(3, 1), vec![MplFactor::li(&[3], vec![x()])]),
            Term::new(rat(1, 3), vec![MplFactor::li(&[2], vec![y()]), MplFactor::li(&[1], vec![x()])]),
            Term::new(rat(-3, 1), vec![MplFactor::li(&[3], vec![x()])]),
        ]);
        let n = raw.normalize();
        assert_eq!(n, n.normalize());
        assert_eq!(n.terms().len(), 1);
        let ev = Evaluator::default();
        let p = pt(Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.4));
        let a = raw.eval(&p, 1e-13, &ev).unwrap().value;
        let b = n.eval(&p, 1e-13, &ev).unwrap().value;
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn eval_product_and_empty() {
        let ev = Evaluator::default();
        let e = Expr::term(
            Rational::one(),
            vec![MplFactor::li(&[1], vec![x()]), MplFactor::li(&[3], vec![y()])],
        );
        let (xv, yv) = (Complex64::new(0.3, 0.0), Complex64::new(0.4, 0.0));
        let v = e.eval(&pt(xv, yv), 1e-13, &ev).unwrap();
        let want = oracle(&[1], &[xv]) * oracle(&[3], &[yv]);
        assert!((v.value - want).norm() < 1e-12);
        assert!((v.l1_mass - want.norm()).abs() < 1e-12);

        let z = Expr::zero().eval(&pt(xv, yv), 1e-13, &ev).unwrap();
        assert_eq!((z.value, z.l1_mass), (Complex64::new(0.0, 0.0), 0.0));

        let raw = Expr::from_terms(vec![
            Term::new(rat(1, 1), vec![MplFactor::li(&[2], vec![x()])]),
            Term::new(rat(-1, 1), vec![MplFactor::li(&[2], vec![x()])]),
        ]);
        let v = raw.normalize().eval(&pt(xv, yv), 1e-13, &ev).unwrap();
        assert_eq!((v.value, v.l1_mass), (Complex64::new(0.0, 0.0), 0.0));
    }

    #[test]
    fn eval_reports_offending_term() {
        let ev = Evaluator::default();
        let e = li(&[2, 1], vec![x(), y().inv()]);
        let err = e
            .eval(&pt(Complex64::new(0.5, 0.0), Complex64::new(0.3, 0.0)), 1e-12, &ev)
            .unwrap_err();
        match err {
            SymalgError::Evaluation { term, .. } => assert!(term.contains("Li_{2,1}")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn stuffle_depth_one() {
        let p = stuffle_product(&MplFactor::li(&[1], vec![x()]), &MplFactor::li(&[1], vec![y()]))
            .unwrap();
        let want = &(&li(&[1, 1], vec![x(), y()]) + &li(&[1, 1], vec![y(), x()]))
            + &li(&[2], vec![x().mul(&y())]);
        assert_eq!(p, want);
    }

    #[test]
    fn stuffle_mixed_depth_numerically() {
        let f = MplFactor::li(&[2], vec![x()]);
        let g = MplFactor::li(&[1, 1], vec![ArgMonomial::var("u"), ArgMonomial::var("v")]);
        let p = stuffle_product(&f, &g).unwrap();
        assert_eq!(p.terms().len(), 5);
        let assignment: BTreeMap<String, Complex64> = [
            ("x", Complex64::new(0.4, -0.2)),
            ("u", Complex64::new(-0.5, 0.3)),
            ("v", Complex64::new(0.35, 0.4)),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        let ev = Evaluator::default();
        let lhs = Expr::term(Rational::one(), vec![f, g]).eval(&assignment, 1e-13, &ev).unwrap();
        let rhs = p.eval(&assignment, 1e-13, &ev).unwrap();
        assert!((lhs.value - rhs.value).norm() < 1e-10);
    }

    #[test]
    fn stuffle_cap() {
        let f = MplFactor::li(&[1, 1, 1], vec![x(), x(), x()]);
        let g = MplFactor::li(&[1, 1], vec![y(), y()]);
        assert!(matches!(
            stuffle_product(&f, &g),
            Err(SymalgError::DepthCapExceeded { depth: 5, .. })
        ));
    }

    #[test]
    fn root_expand_distribution_instance() {
        let e = li(&[2], vec![x()]);
        let r = e.root_expand("x", 2);
        assert_eq!(r.terms().len(), 2);
        let ev = Evaluator::default();
        let p = pt(Complex64::new(0.3, 0.5), Complex64::new(0.1, 0.0));
        let got = r.eval(&p, 1e-13, &ev).unwrap().value;
        let want = e.eval(&p, 1e-13, &ev).unwrap().value * 0.5;
        assert!((got - want).norm() < 1e-12);
        assert_eq!(e.root_expand("x", 1), e.normalize());
    }

    #[test]
    fn root_expand_commutes_across_variables() {
        let e = &li(&[2, 1], vec![x().div(&y()), y()]) + &li(&[3], vec![x().mul(&y())]);
        assert_eq!(
            e.root_expand("x", 2).root_expand("y", 3),
            e.root_expand("y", 3).root_expand("x", 2)
        );
    }

    #[test]
    fn identity_weight_check() {
        assert!(Identity::new(li(&[2], vec![x()]), li(&[3], vec![x()]), "bad").is_err());
        let id = Identity::new(li(&[2], vec![x()]), li(&[2], vec![x()]), "trivial").unwrap();
        assert_eq!(id.weight, 2);
        assert!(id.difference().is_zero());
    }

    #[test]
    fn latex_rendering() {
        let e = &li(&[3, 1], vec![x(), y()]).scale(&rat(-1, 2)) + &li(&[4], vec![x().mul(&y())]);
        assert_eq!(e.to_latex(), "\\Li_4(x y) - \\frac{1}{2} \\Li_{3,1}(x, y)");
    }
}
