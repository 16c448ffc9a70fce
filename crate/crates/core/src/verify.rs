//! Seeded numerical verification of identities.
//!
//! Residuals are measured relative to the evaluated L1 mass of both sides,
//! `|lhs - rhs| / max(1, mass(lhs) + mass(rhs))`, since generated identities
//! carry large rational coefficients.

use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fmt::Write as _;
use thiserror::Error;

use crate::numeval::Evaluator;
use crate::symalg::{Identity, SymalgError};

/// Samples never come closer than this to the origin.
pub const MIN_MODULUS: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("factor {factor}: suffix product {suffix} can reach modulus {bound:.6} > rho_max {rho_max}")]
    ConvergenceViolation {
        factor: String,
        suffix: String,
        bound: f64,
        rho_max: f64,
    },
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error(transparent)]
    Evaluation(#[from] SymalgError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationPlan {
    pub seed: u64,
    pub point_count: usize,
    pub radius: f64,
    pub tolerance: f64,
    pub allow_complex: bool,
    /// Absolute truncation budget handed to each side's evaluation.
    pub target_error: f64,
}

impl Default for VerificationPlan {
    fn default() -> Self {
        VerificationPlan {
            seed: 42,
            point_count: 20,
            radius: 0.7,
            tolerance: 1e-9,
            allow_complex: true,
            target_error: 1e-12,
        }
    }
}

pub type Assignment = BTreeMap<String, Complex64>;

/// Deterministic points: each variable, in sorted order, uniform on the
/// annulus `MIN_MODULUS <= |v| <= radius` (complex) or on
/// `[MIN_MODULUS, radius]` (real mode).
pub fn sample_points(plan: &VerificationPlan, variables: &BTreeSet<String>) -> Vec<Assignment> {
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let lo = MIN_MODULUS.min(plan.radius);
    let hi = plan.radius;
    (0..plan.point_count)
        .map(|_| {
            variables
                .iter()
                .map(|v| {
                    let z = if plan.allow_complex {
                        let u: f64 = rng.random();
                        let r = (lo * lo + u * (hi * hi - lo * lo)).sqrt();
                        let theta = 2.0 * PI * rng.random::<f64>();
                        Complex64::from_polar(r.clamp(lo, hi), theta)
                    } else {
                        Complex64::new(rng.random_range(lo..=hi), 0.0)
                    };
                    (v.clone(), z)
                })
                .collect()
        })
        .collect()
}

/// Every factor's suffix products stay within `rho_max` for all variables in
/// `MIN_MODULUS <= |v| <= radius`.
pub fn check_convergence(id: &Identity, radius: f64, rho_max: f64) -> Result<(), VerifyError> {
    let lo = MIN_MODULUS.min(radius);
    for f in id.lhs.factors().chain(id.rhs.factors()) {
        for m in f.suffix_monomials() {
            let bound: f64 = m
                .exponents()
                .values()
                .map(|e| {
                    let ex = e.to_f64().unwrap_or(f64::NAN);
                    if e.is_positive() {
                        radius.powf(ex)
                    } else {
                        lo.powf(ex)
                    }
                })
                .product();
            if !(bound <= rho_max) {
                return Err(VerifyError::ConvergenceViolation {
                    factor: f.to_string(),
                    suffix: m.to_string(),
                    bound,
                    rho_max,
                });
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointRecord {
    pub assignment: Assignment,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
    pub l1_mass: f64,
    pub relative_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub records: Vec<PointRecord>,
    pub max_relative_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn verify_identity(id: &Identity, plan: &VerificationPlan) -> Result<VerificationReport, VerifyError> {
    verify_identity_with(id, plan, &Evaluator::default())
}

pub fn verify_identity_with(
    id: &Identity,
    plan: &VerificationPlan,
    evaluator: &Evaluator,
) -> Result<VerificationReport, VerifyError> {
    if !(plan.radius > 0.0 && plan.radius < 1.0) {
        return Err(VerifyError::InvalidPlan(format!(
            "radius must lie in (0, 1), got {}",
            plan.radius
        )));
    }
    if !(plan.tolerance > 0.0) || !(plan.target_error > 0.0) {
        return Err(VerifyError::InvalidPlan(
            "tolerance and target error must be positive".into(),
        ));
    }
    check_convergence(id, plan.radius, evaluator.config.rho_max)?;
    let points = sample_points(plan, &id.variables);
    let records = points
        .into_par_iter()
        .map(|assignment| {
            let l = id.lhs.eval(&assignment, plan.target_error, evaluator)?;
            let r = id.rhs.eval(&assignment, plan.target_error, evaluator)?;
            let residual = (l.value - r.value).norm();
            let l1_mass = l.l1_mass + r.l1_mass;
            Ok(PointRecord {
                assignment,
                lhs: l.value,
                rhs: r.value,
                residual,
                l1_mass,
                relative_residual: residual / l1_mass.max(1.0),
            })
        })
        .collect::<Result<Vec<_>, SymalgError>>()?;
    let max_relative_residual = records
        .iter()
        .map(|r| r.relative_residual)
        .fold(0.0, f64::max);
    Ok(VerificationReport {
        pass: max_relative_residual <= plan.tolerance,
        records,
        max_relative_residual,
        tolerance: plan.tolerance,
    })
}

/// 17 significant digits.
pub fn decimal(x: f64) -> String {
    format!("{x:.16e}")
}

fn complex_json(z: Complex64) -> Value {
    json!({ "re": decimal(z.re), "im": decimal(z.im) })
}

impl VerificationReport {
    pub fn to_json(&self) -> Value {
        let records: Vec<Value> = self
            .records
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let assignment: serde_json::Map<String, Value> = r
                    .assignment
                    .iter()
                    .map(|(k, v)| (k.clone(), complex_json(*v)))
                    .collect();
                json!({
                    "index": i,
                    "assignment": assignment,
                    "lhs": complex_json(r.lhs),
                    "rhs": complex_json(r.rhs),
                    "residual": decimal(r.residual),
                    "l1_mass": decimal(r.l1_mass),
                    "relative_residual": decimal(r.relative_residual),
                })
            })
            .collect();
        json!({
            "pass": self.pass,
            "tolerance": decimal(self.tolerance),
            "max_relative_residual": decimal(self.max_relative_residual),
            "points": records,
        })
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:>5}  {:>24}  {:>12}  {:>12}  {:>12}",
            "point", "lhs", "residual", "l1_mass", "relative"
        );
        for (i, r) in self.records.iter().enumerate() {
            let _ = writeln!(
                out,
                "{:>5}  {:>24}  {:>12.3e}  {:>12.3e}  {:>12.3e}",
                i,
                format!("{:.6}{:+.6}i", r.lhs.re, r.lhs.im),
                r.residual,
                r.l1_mass,
                r.relative_residual
            );
        }
        let _ = writeln!(
            out,
            "max relative residual {:.3e} (tolerance {:.1e}): {}",
            self.max_relative_residual,
            self.tolerance,
            if self.pass { "PASS" } else { "FAIL" }
        );
        out
    }
}
