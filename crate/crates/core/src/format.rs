//! JSON interchange and file output.
//!
//! Rationals are written as `{"num": "...", "den": "..."}` decimal strings in
//! lowest terms with a positive denominator. Parsing is strict: anything that
//! would not be produced by the serializer (unreduced fractions, zero
//! coefficients, unmerged terms, wrong weight) is rejected, so a successful
//! parse always round-trips byte for byte.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

use crate::coalgebra::{
    CoalgebraError, GeneratorCombination, GeneratorTerm, GroupElement, PreimageReport,
    TensorElement,
};
use crate::numeval::Composition;
use crate::symalg::{ArgMonomial, Expr, Identity, MplFactor, Rational, Term};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid content: {0}")]
    Invalid(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, FormatError> {
    Err(FormatError::Invalid(msg.into()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RationalJson {
    pub num: String,
    pub den: String,
}

impl RationalJson {
    pub fn from_rational(q: &Rational) -> Self {
        RationalJson {
            num: q.numer().to_string(),
            den: q.denom().to_string(),
        }
    }

    pub fn to_rational(&self) -> Result<Rational, FormatError> {
        let num: BigInt = self
            .num
            .parse()
            .map_err(|_| FormatError::Invalid(format!("bad integer {:?}", self.num)))?;
        let den: BigInt = self
            .den
            .parse()
            .map_err(|_| FormatError::Invalid(format!("bad integer {:?}", self.den)))?;
        if !den.is_positive() {
            return invalid(format!("denominator {den} must be positive"));
        }
        let q = Rational::new(num, den);
        if RationalJson::from_rational(&q) != *self {
            return invalid(format!("{}/{} is not in canonical lowest terms", self.num, self.den));
        }
        Ok(q)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialJson {
    pub zeta_order: u64,
    pub zeta_pow: u64,
    pub exponents: BTreeMap<String, RationalJson>,
}

impl MonomialJson {
    pub fn from_monomial(m: &ArgMonomial) -> Self {
        MonomialJson {
            zeta_order: m.zeta_order(),
            zeta_pow: m.zeta_power(),
            exponents: m
                .exponents()
                .iter()
                .map(|(v, e)| (v.clone(), RationalJson::from_rational(e)))
                .collect(),
        }
    }

    pub fn to_monomial(&self) -> Result<ArgMonomial, FormatError> {
        let mut exps = BTreeMap::new();
        for (v, e) in &self.exponents {
            if v.is_empty() {
                return invalid("empty variable name");
            }
            exps.insert(v.clone(), e.to_rational()?);
        }
        ArgMonomial::from_canonical_parts(self.zeta_order, self.zeta_pow, exps)
            .map_err(|e| FormatError::Invalid(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorJson {
    pub indices: Vec<u32>,
    pub args: Vec<MonomialJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub coeff: RationalJson,
    pub factors: Vec<FactorJson>,
}

/// On-disk form of an [`Identity`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityFile {
    pub schema_version: u32,
    pub weight: u32,
    pub variables: Vec<String>,
    pub lhs: Vec<TermJson>,
    pub rhs: Vec<TermJson>,
    pub provenance: String,
}

fn expr_to_json(e: &Expr) -> Vec<TermJson> {
    e.terms()
        .iter()
        .map(|t| TermJson {
            coeff: RationalJson::from_rational(&t.coeff),
            factors: t
                .factors
                .iter()
                .map(|f| FactorJson {
                    indices: f.indices().parts().to_vec(),
                    args: f.args().iter().map(MonomialJson::from_monomial).collect(),
                })
                .collect(),
        })
        .collect()
}

fn expr_from_json(terms: &[TermJson], side: &str) -> Result<Expr, FormatError> {
    let mut out = Vec::with_capacity(terms.len());
    for (i, t) in terms.iter().enumerate() {
        let coeff = t.coeff.to_rational()?;
        if coeff.is_zero() {
            return invalid(format!("{side} term {i} has zero coefficient"));
        }
        let mut factors = Vec::with_capacity(t.factors.len());
        for f in &t.factors {
            let comp = Composition::new(f.indices.clone())
                .map_err(|e| FormatError::Invalid(format!("{side} term {i}: {e}")))?;
            let args = f
                .args
                .iter()
                .map(MonomialJson::to_monomial)
                .collect::<Result<Vec<_>, _>>()?;
            factors.push(
                MplFactor::new(comp, args)
                    .map_err(|e| FormatError::Invalid(format!("{side} term {i}: {e}")))?,
            );
        }
        let term = Term::new(coeff, factors.clone());
        if term.factors != factors {
            return invalid(format!("{side} term {i}: factors are not in canonical order"));
        }
        out.push(term);
    }
    let expr = Expr::from_terms(out);
    if expr.normalize() != expr {
        return invalid(format!("{side} terms are not merged and sorted"));
    }
    Ok(expr)
}

impl IdentityFile {
    pub fn from_identity(id: &Identity) -> Self {
        IdentityFile {
            schema_version: SCHEMA_VERSION,
            weight: id.weight,
            variables: id.variables.iter().cloned().collect(),
            lhs: expr_to_json(&id.lhs),
            rhs: expr_to_json(&id.rhs),
            provenance: id.provenance.clone(),
        }
    }

    pub fn to_identity(&self) -> Result<Identity, FormatError> {
        if self.schema_version != SCHEMA_VERSION {
            return invalid(format!("unsupported schema_version {}", self.schema_version));
        }
        let lhs = expr_from_json(&self.lhs, "lhs")?;
        let rhs = expr_from_json(&self.rhs, "rhs")?;
        let id = Identity::new(lhs, rhs, self.provenance.clone())
            .map_err(|e| FormatError::Invalid(e.to_string()))?;
        if id.weight != self.weight {
            return invalid(format!("declared weight {} but terms have weight {}", self.weight, id.weight));
        }
        let vars: Vec<String> = id.variables.iter().cloned().collect();
        if vars != self.variables {
            return invalid(format!("declared variables {:?} but terms use {:?}", self.variables, vars));
        }
        Ok(id)
    }
}

pub fn identity_to_json(id: &Identity) -> String {
    let mut s = serde_json::to_string_pretty(&IdentityFile::from_identity(id))
        .expect("identity serialization cannot fail");
    s.push('\n');
    s
}

pub fn identity_from_json(text: &str) -> Result<Identity, FormatError> {
    let file: IdentityFile = serde_json::from_str(text)?;
    file.to_identity()
}

/// Standalone LaTeX snippet of an identity.
pub fn identity_to_latex(id: &Identity) -> String {
    let mut s = String::new();
    if !id.provenance.is_empty() {
        for line in id.provenance.lines() {
            s.push_str("% ");
            s.push_str(line);
            s.push('\n');
        }
    }
    s.push_str("\\begin{multline*}\n");
    s.push_str(&id.lhs.to_latex());
    s.push_str("\n= ");
    s.push_str(&id.rhs.to_latex());
    s.push_str("\n\\end{multline*}\n");
    s
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorJson {
    pub coeff: RationalJson,
    pub weight: u32,
    pub args: Vec<MonomialJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorCombinationFile {
    pub schema_version: u32,
    pub weight: u32,
    pub depth: usize,
    pub terms: Vec<GeneratorJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolJson {
    pub n: u32,
    pub arg: MonomialJson,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WordJson {
    pub coeff: RationalJson,
    pub word: Vec<SymbolJson>,
}

fn group_from_json(m: &MonomialJson) -> Result<GroupElement, FormatError> {
    GroupElement::new(m.to_monomial()?).map_err(|e: CoalgebraError| FormatError::Invalid(e.to_string()))
}

impl GeneratorCombinationFile {
    pub fn from_combination(c: &GeneratorCombination) -> Self {
        let (weight, depth) = c.shape().ok().flatten().unwrap_or((0, 0));
        GeneratorCombinationFile {
            schema_version: SCHEMA_VERSION,
            weight,
            depth,
            terms: c
                .terms()
                .iter()
                .map(|(g, q)| GeneratorJson {
                    coeff: RationalJson::from_rational(q),
                    weight: g.weight(),
                    args: g
                        .args()
                        .iter()
                        .map(|a| MonomialJson::from_monomial(a.monomial()))
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn to_combination(&self) -> Result<GeneratorCombination, FormatError> {
        if self.schema_version != SCHEMA_VERSION {
            return invalid(format!("unsupported schema_version {}", self.schema_version));
        }
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let q = t.coeff.to_rational()?;
            if q.is_zero() {
                return invalid("zero coefficient");
            }
            let args = t.args.iter().map(group_from_json).collect::<Result<Vec<_>, _>>()?;
            let g = GeneratorTerm::new(t.weight, args).map_err(|e| FormatError::Invalid(e.to_string()))?;
            terms.push((g, q));
        }
        let c = GeneratorCombination::from_terms(terms.clone())
            .map_err(|e| FormatError::Invalid(e.to_string()))?;
        if c.len() != terms.len() || !c.terms().keys().eq(terms.iter().map(|(g, _)| g)) {
            return invalid("generator terms are not merged and sorted");
        }
        let (weight, depth) = c.shape().ok().flatten().unwrap_or((0, 0));
        if (weight, depth) != (self.weight, self.depth) {
            return invalid("declared weight/depth do not match terms");
        }
        Ok(c)
    }
}

pub fn tensor_to_json(t: &TensorElement) -> Vec<WordJson> {
    t.terms()
        .iter()
        .map(|(w, q)| WordJson {
            coeff: RationalJson::from_rational(q),
            word: w
                .iter()
                .map(|s| SymbolJson {
                    n: s.n,
                    arg: MonomialJson::from_monomial(s.arg.monomial()),
                })
                .collect(),
        })
        .collect()
}

pub fn tensor_from_json(words: &[WordJson]) -> Result<TensorElement, FormatError> {
    let mut terms = Vec::with_capacity(words.len());
    for w in words {
        let q = w.coeff.to_rational()?;
        if q.is_zero() {
            return invalid("zero coefficient");
        }
        let mut word = Vec::with_capacity(w.word.len());
        for s in &w.word {
            if s.n < 2 {
                return invalid(format!("symbol weight {} below 2", s.n));
            }
            word.push(crate::coalgebra::BSymbol::new(s.n, group_from_json(&s.arg)?));
        }
        terms.push((word, q));
    }
    let len = terms.first().map(|(w, _)| w.len());
    if terms.iter().any(|(w, _)| Some(w.len()) != len) {
        return invalid("tensor words of different lengths");
    }
    let t = TensorElement::from_terms(terms.clone());
    if t.terms().len() != terms.len() || !t.terms().keys().eq(terms.iter().map(|(w, _)| w)) {
        return invalid("tensor words are not merged and sorted");
    }
    Ok(t)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreimageFile {
    pub schema_version: u32,
    pub weights: Vec<u32>,
    pub preimage: GeneratorCombinationFile,
    pub target: Vec<WordJson>,
    pub contracted_image: Vec<WordJson>,
    pub residual: Vec<WordJson>,
    pub exact: bool,
}

impl PreimageFile {
    pub fn new(p: &GeneratorCombination, report: &PreimageReport) -> Self {
        PreimageFile {
            schema_version: SCHEMA_VERSION,
            weights: report.weights.clone(),
            preimage: GeneratorCombinationFile::from_combination(p),
            target: tensor_to_json(&report.target),
            contracted_image: tensor_to_json(&report.contracted_image),
            residual: tensor_to_json(&report.residual),
            exact: report.exact(),
        }
    }
}

pub fn to_pretty_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialization cannot fail");
    s.push('\n');
    s
}

/// Write through a temporary file in the target directory, then rename, so
/// a failed run never leaves a partial file behind.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), FormatError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| FormatError::Io(e.error))?;
    Ok(())
}

/// Parse `"a"`, `"a+bi"`, `"a-bi"`, `"bi"`, `"i"` into a complex number.
pub fn parse_complex(s: &str) -> Result<num_complex::Complex64, String> {
    let s = s.trim();
    let err = || format!("cannot parse complex number {s:?}");
    if s.is_empty() {
        return Err(err());
    }
    let Some(body) = s.strip_suffix(['i', 'j']) else {
        return s.parse::<f64>().map(|re| num_complex::Complex64::new(re, 0.0)).map_err(|_| err());
    };
    // split at the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => t.parse::<f64>().map_err(|_| err())?,
    };
    let re = re.parse::<f64>().map_err(|_| err())?;
    Ok(num_complex::Complex64::new(re, im))
}
