//! Depth-`d` generators `Li_{n-d;1,...,1}(a1..ad)`, their iterated truncated
//! cobracket images as tensor words of classical symbols, and the
//! construction of explicit preimages for single tensor words.
//!
//! Images live in the free span of words `Li_{n1}(a1) (x) ... (x) Li_{nd}(ad)`
//! with `n_i >= 2`. Distribution relations
//! `Li_n(a^r) = r^(n-1) sum_{zeta^r=1} Li_n(zeta a)` are applied only through
//! explicit rewriting ([`distribution_contract`], [`distribution_expand`]).
//!
//! Summing a generator over the `2^s` square-root-tower preimages of its
//! `j`-th argument rescales every word by `2^(-s(m-1))`, `m` being the
//! weight in slot `j`. Solving the resulting Vandermonde system in
//! `lambda_m = 2^(-(m-1))` isolates a single slot weight; peeling slots from
//! the last one down yields a preimage of any single word.

use num_bigint::BigInt;
use num_traits::{One, Pow, Zero};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

use crate::linalg::{mat_vec, solve, RatMatrix};
use crate::symalg::{rat, ArgMonomial, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoalgebraError {
    #[error("group element {0} has an exponent whose denominator is not a power of 2")]
    NotTwoPower(String),
    #[error("root sum would produce {terms} generator terms, above the cap of {cap}")]
    RootCapExceeded { terms: usize, cap: usize },
    #[error("infeasible weights {0:?}: every weight must be at least 2")]
    InfeasibleWeights(Vec<u32>),
    #[error("slot {slot} out of range for depth {depth}")]
    InvalidSlot { slot: usize, depth: usize },
    #[error("invalid generator: {0}")]
    InvalidGenerator(String),
    #[error("combination mixes (weight, depth) = {0:?} and {1:?}")]
    Inhomogeneous((u32, usize), (u32, usize)),
    #[error("Vandermonde system for slot {0} is singular")]
    SingularSystem(usize),
}

pub type Result<T> = std::result::Result<T, CoalgebraError>;

pub const DEFAULT_ROOT_CAP: usize = 1 << 12;

/// Element of the multiplicative group: a root of unity times a monomial in
/// abstract generators with exponent denominators that are powers of 2.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement(ArgMonomial);

fn is_two_power(d: &BigInt) -> bool {
    let mut d = d.clone();
    let two = BigInt::from(2);
    while (&d % &two).is_zero() {
        d /= &two;
    }
    d.is_one()
}

impl GroupElement {
    pub fn new(m: ArgMonomial) -> Result<Self> {
        if m.exponents().values().all(|e| is_two_power(e.denom())) {
            Ok(GroupElement(m))
        } else {
            Err(CoalgebraError::NotTwoPower(m.to_string()))
        }
    }

    pub fn generator(name: &str) -> Self {
        GroupElement(ArgMonomial::var(name))
    }

    /// Generators `a1, ..., ad`.
    pub fn generators(d: usize) -> Vec<GroupElement> {
        (1..=d).map(|i| GroupElement::generator(&format!("a{i}"))).collect()
    }

    pub fn monomial(&self) -> &ArgMonomial {
        &self.0
    }

    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        GroupElement(self.0.mul(&other.0))
    }

    pub fn pow(&self, r: u64) -> GroupElement {
        GroupElement(self.0.pow(&rat(r as i64, 1)))
    }

    /// All `r`-th roots `zeta_r^i b` of `self`, `b` a fixed formal root.
    pub fn roots(&self, r: u64) -> Result<Vec<GroupElement>> {
        self.0.roots(r).into_iter().map(GroupElement::new).collect()
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Classical symbol `Li_n(a)`, `n >= 2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BSymbol {
    pub n: u32,
    pub arg: GroupElement,
}

impl BSymbol {
    pub fn new(n: u32, arg: GroupElement) -> Self {
        assert!(n >= 2, "classical symbols in the image have weight >= 2");
        BSymbol { n, arg }
    }
}

impl fmt::Display for BSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Li_{}({})", self.n, self.arg)
    }
}

fn add_into<K: Ord + Clone>(map: &mut BTreeMap<K, Rational>, key: &K, c: &Rational) {
    if let Some(v) = map.get_mut(key) {
        *v += c;
        if v.is_zero() {
            map.remove(key);
        }
    } else if !c.is_zero() {
        map.insert(key.clone(), c.clone());
    }
}

/// Rational combination of classical symbols.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BElement {
    terms: BTreeMap<BSymbol, Rational>,
}

impl BElement {
    pub fn zero() -> Self {
        BElement::default()
    }

    pub fn symbol(s: BSymbol) -> Self {
        Self::from_terms([(s, Rational::one())])
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (BSymbol, Rational)>) -> Self {
        let mut map = BTreeMap::new();
        for (s, c) in terms {
            add_into(&mut map, &s, &c);
        }
        BElement { terms: map }
    }

    pub fn terms(&self) -> &BTreeMap<BSymbol, Rational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &BElement) -> BElement {
        let mut out = self.clone();
        for (s, c) in &other.terms {
            add_into(&mut out.terms, s, c);
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> BElement {
        BElement::from_terms(self.terms.iter().map(|(s, v)| (s.clone(), v * c)))
    }
}

/// Replace every complete orbit `{Li_n(zeta b) : zeta^r = 1}` carrying one
/// common coefficient `c` by `c r^(1-n) Li_n(b^r)`. Partial orbits stay.
pub fn distribution_contract(e: &BElement, r: u64) -> BElement {
    assert!(r >= 1);
    if r == 1 {
        return e.clone();
    }
    let mut orbits: BTreeMap<(u32, GroupElement), Vec<(&BSymbol, &Rational)>> = BTreeMap::new();
    for (s, c) in &e.terms {
        orbits.entry((s.n, s.arg.pow(r))).or_default().push((s, c));
    }
    let mut out = BTreeMap::new();
    for ((n, power), members) in orbits {
        let complete = members.len() as u64 == r && members.iter().all(|(_, c)| *c == members[0].1);
        if complete {
            let scale = Rational::new(BigInt::one(), BigInt::from(r).pow(n - 1));
            add_into(&mut out, &BSymbol::new(n, power), &(members[0].1 * scale));
        } else {
            for (s, c) in members {
                add_into(&mut out, s, c);
            }
        }
    }
    BElement { terms: out }
}

/// `Li_n(a) -> r^(n-1) sum_{zeta^r=1} Li_n(zeta a^(1/r))`.
pub fn distribution_expand(e: &BElement, r: u64) -> Result<BElement> {
    let mut out = BTreeMap::new();
    for (s, c) in &e.terms {
        let scale = Rational::from_integer(BigInt::from(r).pow(s.n - 1));
        for root in s.arg.roots(r)? {
            add_into(&mut out, &BSymbol::new(s.n, root), &(c * &scale));
        }
    }
    Ok(BElement { terms: out })
}

pub type Word = Vec<BSymbol>;

/// Rational combination of tensor words of equal length.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TensorElement {
    terms: BTreeMap<Word, Rational>,
}

impl TensorElement {
    pub fn zero() -> Self {
        TensorElement::default()
    }

    pub fn word(w: Word) -> Self {
        TensorElement::from_terms([(w, Rational::one())])
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Word, Rational)>) -> Self {
        let mut map = BTreeMap::new();
        for (w, c) in terms {
            add_into(&mut map, &w, &c);
        }
        let out = TensorElement { terms: map };
        debug_assert!(out.is_homogeneous());
        out
    }

    pub fn terms(&self) -> &BTreeMap<Word, Rational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// All words share one length and one total weight.
    pub fn is_homogeneous(&self) -> bool {
        let mut shapes = self
            .terms
            .keys()
            .map(|w| (w.len(), w.iter().map(|s| s.n).sum::<u32>()));
        match shapes.next() {
            None => true,
            Some(first) => shapes.all(|s| s == first),
        }
    }

    pub fn add(&self, other: &TensorElement) -> TensorElement {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            add_into(&mut out.terms, w, c);
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> TensorElement {
        TensorElement::from_terms(self.terms.iter().map(|(w, v)| (w.clone(), v * c)))
    }

    pub fn sub(&self, other: &TensorElement) -> TensorElement {
        self.add(&other.scale(&-Rational::one()))
    }

    /// Apply [`distribution_contract`] in one slot, other slots held fixed.
    pub fn contract_slot(&self, slot: usize, r: u64) -> TensorElement {
        let mut groups: BTreeMap<(Word, Word), BElement> = BTreeMap::new();
        for (w, c) in &self.terms {
            let key = (w[..slot].to_vec(), w[slot + 1..].to_vec());
            let entry = groups.entry(key).or_default();
            add_into(&mut entry.terms, &w[slot], c);
        }
        let mut out = BTreeMap::new();
        for ((pre, post), elem) in groups {
            for (s, c) in distribution_contract(&elem, r).terms {
                let mut w = pre.clone();
                w.push(s);
                w.extend(post.iter().cloned());
                add_into(&mut out, &w, &c);
            }
        }
        TensorElement { terms: out }
    }

    /// Contract at `r` in every slot until nothing changes.
    pub fn contract(&self, r: u64) -> TensorElement {
        let len = self.terms.keys().next().map_or(0, |w| w.len());
        let mut cur = self.clone();
        loop {
            let mut next = cur.clone();
            for slot in 0..len {
                next = next.contract_slot(slot, r);
            }
            if next == cur {
                return cur;
            }
            cur = next;
        }
    }
}

impl fmt::Display for TensorElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (w, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let ws: Vec<String> = w.iter().map(|s| s.to_string()).collect();
            write!(f, "({c}) {}", ws.join(" (x) "))?;
        }
        Ok(())
    }
}

/// `Li_{n-d;1,...,1}(a1..ad)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GeneratorTerm {
    weight: u32,
    args: Vec<GroupElement>,
}

impl GeneratorTerm {
    pub fn new(weight: u32, args: Vec<GroupElement>) -> Result<Self> {
        if args.is_empty() || (weight as usize) < args.len() {
            return Err(CoalgebraError::InvalidGenerator(format!(
                "need weight >= depth >= 1, got weight {weight}, depth {}",
                args.len()
            )));
        }
        Ok(GeneratorTerm { weight, args })
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn depth(&self) -> usize {
        self.args.len()
    }

    pub fn args(&self) -> &[GroupElement] {
        &self.args
    }
}

impl fmt::Display for GeneratorTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ones = vec!["1"; self.depth()].join(",");
        let args: Vec<String> = self.args.iter().map(|a| a.to_string()).collect();
        write!(
            f,
            "Li_{{{};{}}}({})",
            self.weight as usize - self.depth(),
            ones,
            args.join(", ")
        )
    }
}

/// Compositions of `n` into `d` parts, each at least 2.
pub fn compositions_at_least_two(n: u32, d: usize) -> Vec<Vec<u32>> {
    fn rec(n: u32, d: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if d == 0 {
            if n == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        let reserve = 2 * (d as u32 - 1);
        if n < 2 + reserve {
            return;
        }
        for first in 2..=n - reserve {
            prefix.push(first);
            rec(n - first, d - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, d, &mut Vec::new(), &mut out);
    out
}

/// `sum_{n1+...+nd=n, n_i>=2} Li_{n1}(a1) (x) ... (x) Li_{nd}(ad)`.
pub fn cobracket_image(g: &GeneratorTerm) -> TensorElement {
    TensorElement::from_terms(compositions_at_least_two(g.weight, g.depth()).into_iter().map(
        |parts| {
            let w = parts
                .into_iter()
                .zip(&g.args)
                .map(|(n, a)| BSymbol::new(n, a.clone()))
                .collect();
            (w, Rational::one())
        },
    ))
}

/// Rational combination of generators of one weight and depth.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GeneratorCombination {
    terms: BTreeMap<GeneratorTerm, Rational>,
}

impl GeneratorCombination {
    pub fn single(g: GeneratorTerm) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(g, Rational::one());
        GeneratorCombination { terms }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (GeneratorTerm, Rational)>) -> Result<Self> {
        let mut map: BTreeMap<GeneratorTerm, Rational> = BTreeMap::new();
        for (g, c) in terms {
            add_into(&mut map, &g, &c);
        }
        let out = GeneratorCombination { terms: map };
        out.shape()?;
        Ok(out)
    }

    pub fn terms(&self) -> &BTreeMap<GeneratorTerm, Rational> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Common `(weight, depth)`, `None` when empty.
    pub fn shape(&self) -> Result<Option<(u32, usize)>> {
        let mut it = self.terms.keys().map(|g| (g.weight, g.depth()));
        let first = match it.next() {
            None => return Ok(None),
            Some(f) => f,
        };
        for s in it {
            if s != first {
                return Err(CoalgebraError::Inhomogeneous(first, s));
            }
        }
        Ok(Some(first))
    }

    pub fn scale(&self, c: &Rational) -> GeneratorCombination {
        let mut terms = BTreeMap::new();
        for (g, v) in &self.terms {
            add_into(&mut terms, g, &(v * c));
        }
        GeneratorCombination { terms }
    }

    pub fn add(&self, other: &GeneratorCombination) -> Result<GeneratorCombination> {
        let mut out = self.clone();
        for (g, c) in &other.terms {
            add_into(&mut out.terms, g, c);
        }
        out.shape()?;
        Ok(out)
    }

    /// Linear extension of [`cobracket_image`].
    pub fn image(&self) -> TensorElement {
        let mut out = BTreeMap::new();
        for (g, c) in &self.terms {
            for (w, v) in cobracket_image(g).terms {
                add_into(&mut out, &w, &(v * c));
            }
        }
        TensorElement { terms: out }
    }
}

impl fmt::Display for GeneratorCombination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (g, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c}) {g}")?;
        }
        Ok(())
    }
}

/// Replace the argument `a` in `slot` (1-based) by the sum over its `2^s`
/// roots `zeta_{2^s}^j a^(1/2^s)`.
pub fn root_sum_generator(
    c: &GeneratorCombination,
    slot: usize,
    s: u32,
    cap: usize,
) -> Result<GeneratorCombination> {
    let r = 1u64 << s;
    let projected = c.terms.len().saturating_mul(r as usize);
    if projected > cap {
        return Err(CoalgebraError::RootCapExceeded {
            terms: projected,
            cap,
        });
    }
    let mut terms = BTreeMap::new();
    for (g, coeff) in &c.terms {
        if slot == 0 || slot > g.depth() {
            return Err(CoalgebraError::InvalidSlot {
                slot,
                depth: g.depth(),
            });
        }
        for root in g.args[slot - 1].roots(r)? {
            let mut args = g.args.clone();
            args[slot - 1] = root;
            add_into(
                &mut terms,
                &GeneratorTerm {
                    weight: g.weight,
                    args,
                },
                coeff,
            );
        }
    }
    Ok(GeneratorCombination { terms })
}

/// `lambda_m = 2^(-(m-1))`.
fn lambda(m: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::from(2).pow(m - 1))
}

/// Coefficients `c_s`, `s = 0..count`, with `sum_s c_s lambda_m^s = [m == target]`
/// for every `m` in `2..2+count`.
pub fn peeling_coefficients(count: u32, target: u32) -> Option<Vec<Rational>> {
    let (matrix, rhs) = peeling_system(count, target);
    solve(&matrix, &rhs)
}

fn peeling_system(count: u32, target: u32) -> (RatMatrix, Vec<Rational>) {
    let matrix: RatMatrix = (2..2 + count)
        .map(|m| (0..count).map(|s| lambda(m).pow(s as i32)).collect())
        .collect();
    let rhs = (2..2 + count)
        .map(|m| if m == target { Rational::one() } else { Rational::zero() })
        .collect();
    (matrix, rhs)
}

/// Target word `Li_{n1}(a1) (x) ... (x) Li_{nd}(ad)`.
pub fn target_word(weights: &[u32], args: &[GroupElement]) -> Result<TensorElement> {
    if weights.is_empty() || weights.iter().any(|&w| w < 2) {
        return Err(CoalgebraError::InfeasibleWeights(weights.to_vec()));
    }
    if weights.len() != args.len() {
        return Err(CoalgebraError::InvalidGenerator(format!(
            "{} weights but {} arguments",
            weights.len(),
            args.len()
        )));
    }
    Ok(TensorElement::word(
        weights
            .iter()
            .zip(args)
            .map(|(&n, a)| BSymbol::new(n, a.clone()))
            .collect(),
    ))
}

/// A combination of root-summed generators whose image, after contracting
/// all 2-power distribution orbits, is exactly the target word.
pub fn construct_preimage(
    weights: &[u32],
    args: &[GroupElement],
    cap: usize,
) -> Result<GeneratorCombination> {
    target_word(weights, args)?;
    let d = weights.len();
    let n: u32 = weights.iter().sum();
    let mut p = GeneratorCombination::single(GeneratorTerm::new(n, args.to_vec())?);
    let mut remaining = n;
    for slot in (2..=d).rev() {
        let wanted = weights[slot - 1];
        // slot weights range over 2..=remaining - 2(slot-1)
        let count = remaining - 2 * (slot as u32 - 1) - 1;
        if count > 1 {
            let coeffs =
                peeling_coefficients(count, wanted).ok_or(CoalgebraError::SingularSystem(slot))?;
            let mut next = GeneratorCombination::default();
            for (s, c) in coeffs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let summed = root_sum_generator(&p, slot, s as u32, cap)?;
                next = next.add(&summed.scale(c))?;
                if next.len() > cap {
                    return Err(CoalgebraError::RootCapExceeded {
                        terms: next.len(),
                        cap,
                    });
                }
            }
            p = next;
        }
        remaining -= wanted;
    }
    Ok(p)
}

/// Contract the image at every power of 2 (repeated square-root orbits).
pub fn contracted_image(p: &GeneratorCombination) -> TensorElement {
    p.image().contract(2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreimageReport {
    pub weights: Vec<u32>,
    pub target: TensorElement,
    pub contracted_image: TensorElement,
    /// `contracted_image - target`; empty iff exact.
    pub residual: TensorElement,
}

impl PreimageReport {
    pub fn exact(&self) -> bool {
        self.residual.is_zero()
    }
}

pub fn verify_preimage(
    p: &GeneratorCombination,
    weights: &[u32],
    args: &[GroupElement],
) -> Result<PreimageReport> {
    let target = target_word(weights, args)?;
    let image = contracted_image(p);
    let residual = image.sub(&target);
    Ok(PreimageReport {
        weights: weights.to_vec(),
        target,
        contracted_image: image,
        residual,
    })
}

/// Exact residual `A c - e` of the peeling system; all zero for the returned
/// coefficients.
pub fn peeling_residual(count: u32, target: u32, coeffs: &[Rational]) -> Vec<Rational> {
    let (matrix, rhs) = peeling_system(count, target);
    mat_vec(&matrix, coeffs)
        .into_iter()
        .zip(rhs)
        .map(|(a, b)| a - b)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gens(d: usize) -> Vec<GroupElement> {
        GroupElement::generators(d)
    }

    fn word(parts: &[u32], args: &[GroupElement]) -> Word {
        parts
            .iter()
            .zip(args)
            .map(|(&n, a)| BSymbol::new(n, a.clone()))
            .collect()
    }

    #[test]
    fn image_examples() {
        let a = gens(3);
        let g = GeneratorTerm::new(4, a[..2].to_vec()).unwrap();
        assert_eq!(cobracket_image(&g), TensorElement::word(word(&[2, 2], &a)));

        let g = GeneratorTerm::new(5, a[..2].to_vec()).unwrap();
        let want = TensorElement::from_terms([
            (word(&[2, 3], &a), Rational::one()),
            (word(&[3, 2], &a), Rational::one()),
        ]);
        assert_eq!(cobracket_image(&g), want);

        let g = GeneratorTerm::new(3, a[..2].to_vec()).unwrap();
        assert!(cobracket_image(&g).is_zero());

        let g = GeneratorTerm::new(7, a.clone()).unwrap();
        let img = cobracket_image(&g);
        let mut got: Vec<Vec<u32>> = img
            .terms()
            .keys()
            .map(|w| w.iter().map(|s| s.n).collect())
            .collect();
        got.sort();
        assert_eq!(got, vec![vec![2, 2, 3], vec![2, 3, 2], vec![3, 2, 2]]);
    }

    #[test]
    fn compositions_match_brute_force() {
        for n in 0..12u32 {
            for d in 1..4usize {
                let mut brute = Vec::new();
                let top = n.max(2);
                let ranges: Vec<u32> = (2..=top).collect();
                fn go(d: usize, n: u32, r: &[u32], pre: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
                    if pre.len() == d {
                        if pre.iter().sum::<u32>() == n {
                            out.push(pre.clone());
                        }
                        return;
                    }
                    for &v in r {
                        pre.push(v);
                        go(d, n, r, pre, out);
                        pre.pop();
                    }
                }
                go(d, n, &ranges, &mut Vec::new(), &mut brute);
                assert_eq!(compositions_at_least_two(n, d), brute, "n={n} d={d}");
            }
        }
    }

    #[test]
    fn contract_square_orbit() {
        let b = GroupElement::generator("b");
        let minus_b = b.mul(&GroupElement::new(ArgMonomial::root_of_unity(2, 1)).unwrap());
        let e = BElement::from_terms([
            (BSymbol::new(2, b.clone()), Rational::one()),
            (BSymbol::new(2, minus_b), Rational::one()),
        ]);
        let got = distribution_contract(&e, 2);
        assert_eq!(
            got,
            BElement::from_terms([(BSymbol::new(2, b.pow(2)), rat(1, 2))])
        );
        let single = BElement::symbol(BSymbol::new(2, b));
        assert_eq!(distribution_contract(&single, 2), single);
        assert_eq!(distribution_contract(&got, 2), got);
    }

    #[test]
    fn contract_rejects_unequal_coefficients() {
        let b = GroupElement::generator("b");
        let minus_b = b.mul(&GroupElement::new(ArgMonomial::root_of_unity(2, 1)).unwrap());
        let e = BElement::from_terms([
            (BSymbol::new(3, b), Rational::one()),
            (BSymbol::new(3, minus_b), rat(2, 1)),
        ]);
        assert_eq!(distribution_contract(&e, 2), e);
    }

    #[test]
    fn expand_contract_round_trip() {
        let a = GroupElement::generator("a");
        for n in 2..6 {
            let e = BElement::symbol(BSymbol::new(n, a.clone()));
            let ex = distribution_expand(&e, 2).unwrap();
            assert_eq!(ex.terms().len(), 2);
            assert_eq!(distribution_contract(&ex, 2), e);
            let cube = BElement::symbol(BSymbol::new(n, a.pow(3)));
            let ex3 = distribution_expand(&cube, 3).unwrap();
            assert_eq!(ex3.terms().len(), 3);
            assert_eq!(distribution_contract(&ex3, 3), cube);
        }
        assert!(matches!(
            distribution_expand(&BElement::symbol(BSymbol::new(2, a)), 3),
            Err(CoalgebraError::NotTwoPower(_))
        ));
    }

    #[test]
    fn root_sum_identity_and_commutation() {
        let a = gens(2);
        let c = GeneratorCombination::single(GeneratorTerm::new(6, a).unwrap());
        assert_eq!(root_sum_generator(&c, 1, 0, DEFAULT_ROOT_CAP).unwrap(), c);
        let ab = root_sum_generator(&root_sum_generator(&c, 1, 1, 64).unwrap(), 2, 2, 64).unwrap();
        let ba = root_sum_generator(&root_sum_generator(&c, 2, 2, 64).unwrap(), 1, 1, 64).unwrap();
        assert_eq!(ab, ba);
        assert_eq!(ab.len(), 8);
        assert!(matches!(
            root_sum_generator(&c, 3, 1, 64),
            Err(CoalgebraError::InvalidSlot { .. })
        ));
        assert!(matches!(
            root_sum_generator(&ab, 1, 3, 32),
            Err(CoalgebraError::RootCapExceeded { .. })
        ));
    }

    #[test]
    fn depth_one_root_sum_scaling() {
        let a = gens(1);
        let c = GeneratorCombination::single(GeneratorTerm::new(3, a.clone()).unwrap());
        let summed = root_sum_generator(&c, 1, 1, 64).unwrap();
        let got = contracted_image(&summed);
        assert_eq!(got, TensorElement::word(word(&[3], &a)).scale(&rat(1, 4)));
    }

    #[test]
    fn scaling_law_holds_slotwise() {
        let a = gens(3);
        let g = GeneratorTerm::new(8, a).unwrap();
        let base = cobracket_image(&g);
        for slot in 1..=3 {
            for s in 0..3u32 {
                let c = GeneratorCombination::single(g.clone());
                let got = contracted_image(&root_sum_generator(&c, slot, s, 64).unwrap());
                let want = TensorElement::from_terms(base.terms().iter().map(|(w, c)| {
                    let m = w[slot - 1].n;
                    (w.clone(), c * lambda(m).pow(s as i32))
                }));
                assert_eq!(got, want, "slot {slot}, s {s}");
            }
        }
    }

    #[test]
    fn preimage_examples() {
        let a = gens(2);
        let p = construct_preimage(&[2, 2], &a, DEFAULT_ROOT_CAP).unwrap();
        assert_eq!(
            p,
            GeneratorCombination::single(GeneratorTerm::new(4, a.clone()).unwrap())
        );

        assert_eq!(peeling_coefficients(2, 2).unwrap(), vec![rat(-1, 1), rat(4, 1)]);
        assert_eq!(peeling_coefficients(2, 3).unwrap(), vec![rat(2, 1), rat(-4, 1)]);

        let p = construct_preimage(&[3, 2], &a, DEFAULT_ROOT_CAP).unwrap();
        let base = GeneratorTerm::new(5, a.clone()).unwrap();
        assert_eq!(p.terms().get(&base), Some(&rat(-1, 1)));
        assert_eq!(p.len(), 3);
        assert!(p.terms().iter().filter(|(g, _)| **g != base).all(|(_, c)| *c == rat(4, 1)));
        assert!(verify_preimage(&p, &[3, 2], &a).unwrap().exact());

        let p = construct_preimage(&[2, 3], &a, DEFAULT_ROOT_CAP).unwrap();
        assert_eq!(p.terms().get(&base), Some(&rat(2, 1)));
        assert!(verify_preimage(&p, &[2, 3], &a).unwrap().exact());

        let p = construct_preimage(&[5], &gens(1), DEFAULT_ROOT_CAP).unwrap();
        assert_eq!(p, GeneratorCombination::single(GeneratorTerm::new(5, gens(1)).unwrap()));
    }

    #[test]
    fn checker_flags_perturbation() {
        let a = gens(2);
        let p = construct_preimage(&[3, 2], &a, DEFAULT_ROOT_CAP).unwrap();
        let base = GeneratorTerm::new(5, a.clone()).unwrap();
        let bumped = p
            .add(&GeneratorCombination::single(base))
            .unwrap();
        let report = verify_preimage(&bumped, &[3, 2], &a).unwrap();
        assert!(!report.exact());
        assert!(report.residual.to_string().contains("Li_2(a2)"));
    }

    #[test]
    fn depth_three_flat() {
        let a = gens(3);
        let p = construct_preimage(&[2, 2, 2], &a, DEFAULT_ROOT_CAP).unwrap();
        assert_eq!(p.len(), 1);
        assert!(verify_preimage(&p, &[2, 2, 2], &a).unwrap().exact());
    }

    #[test]
    fn infeasible_weights() {
        assert_eq!(
            construct_preimage(&[1, 3], &gens(2), DEFAULT_ROOT_CAP),
            Err(CoalgebraError::InfeasibleWeights(vec![1, 3]))
        );
        assert!(matches!(
            construct_preimage(&[4, 4], &gens(2), 2),
            Err(CoalgebraError::RootCapExceeded { .. })
        ));
    }

    #[test]
    fn peeling_residual_is_zero() {
        for count in 1..6 {
            for target in 2..2 + count {
                let c = peeling_coefficients(count, target).unwrap();
                assert!(peeling_residual(count, target, &c).iter().all(|v| v.is_zero()));
            }
        }
    }

    #[test]
    fn image_is_linear() {
        let a = gens(2);
        let g1 = GeneratorTerm::new(6, a.clone()).unwrap();
        let g2 = GeneratorTerm::new(6, vec![a[1].clone(), a[0].clone()]).unwrap();
        let combo = GeneratorCombination::from_terms([(g1.clone(), rat(3, 2)), (g2.clone(), rat(-2, 1))])
            .unwrap();
        let want = cobracket_image(&g1)
            .scale(&rat(3, 2))
            .add(&cobracket_image(&g2).scale(&rat(-2, 1)));
        assert_eq!(combo.image(), want);
    }
}
