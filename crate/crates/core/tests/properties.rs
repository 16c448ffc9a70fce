use std::collections::BTreeMap;

use mplkit::numeval::Evaluator;
use mplkit::symalg::{rat, stuffle_product, ArgMonomial, Expr, MplFactor, Rational, Term};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

fn var(v: &str) -> ArgMonomial {
    ArgMonomial::var(v)
}

fn point(pairs: &[(&str, Complex64)]) -> BTreeMap<String, Complex64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn disc(rng: &mut ChaCha8Rng, radius: f64) -> Complex64 {
    Complex64::from_polar(radius * rng.random::<f64>().sqrt().max(0.05), TAU * rng.random::<f64>())
}

#[test]
fn symbolic_stuffle_matches_pointwise_product() {
    let ev = Evaluator::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let k = rng.random_range(1..=3u32);
        let l = rng.random_range(1..=3u32);
        let m = rng.random_range(1..=2u32);
        let f = MplFactor::li(&[k], vec![var("x")]);
        let g = MplFactor::li(&[l, m], vec![var("y"), var("z")]);
        let prod = stuffle_product(&f, &g).unwrap();
        let p = point(&[("x", disc(&mut rng, 0.6)), ("y", disc(&mut rng, 0.6)), ("z", disc(&mut rng, 0.6))]);
        let lhs = Expr::term(rat(1, 1), vec![f, g]).eval(&p, 1e-13, &ev).unwrap();
        let rhs = prod.eval(&p, 1e-13, &ev).unwrap();
        assert!((lhs.value - rhs.value).norm() < 1e-11, "{}", prod);
    }
}

#[test]
fn root_expansion_does_not_depend_on_the_branch() {
    // Sum over the r-th roots of x, then set x = w^r: the result must be
    // invariant under w -> zeta_r w.
    let ev = Evaluator::default();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let e = &Expr::factor(MplFactor::li(&[2, 1], vec![var("x").div(&var("y")), var("y")]))
        + &Expr::factor(MplFactor::li(&[3], vec![var("x").mul(&var("y"))]));
    for r in 2..=4u64 {
        let w_r = ArgMonomial::var_pow("w", rat(r as i64, 1));
        let expanded = e.root_expand("x", r).substitute("x", &w_r);
        // the expansion carries x^(1/r), which becomes w after substitution
        assert!(expanded.variables().iter().all(|v| v == "w" || v == "y"));
        for _ in 0..5 {
            let w0 = disc(&mut rng, 0.7f64.powf(1.0 / r as f64));
            let y0 = disc(&mut rng, 0.7);
            let base = expanded.eval(&point(&[("w", w0), ("y", y0)]), 1e-13, &ev).unwrap().value;
            for j in 1..r {
                let zeta = Complex64::from_polar(1.0, TAU * j as f64 / r as f64);
                let v = expanded
                    .eval(&point(&[("w", zeta * w0), ("y", y0)]), 1e-13, &ev)
                    .unwrap()
                    .value;
                assert!((v - base).norm() < 1e-11, "r = {r}, j = {j}: {v} vs {base}");
            }
        }
    }
}

fn arb_factor() -> impl Strategy<Value = MplFactor> {
    let monomial = (1u64..5, 0i64..5, -2i64..3, -2i64..3).prop_map(|(o, p, ex, ey)| {
        ArgMonomial::new(o, p, [("x".to_string(), rat(ex, 2)), ("y".to_string(), rat(ey, 1))])
    });
    proptest::collection::vec((1u32..4, monomial), 1..3).prop_map(|parts| {
        let (idx, args): (Vec<u32>, Vec<ArgMonomial>) = parts.into_iter().unzip();
        MplFactor::li(&idx, args)
    })
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    proptest::collection::vec(
        (-6i64..7, 1i64..4, proptest::collection::vec(arb_factor(), 1..3)),
        0..8,
    )
    .prop_map(|ts| Expr::from_terms(ts.into_iter().map(|(p, q, fs)| Term::new(rat(p, q), fs)).collect()))
}

proptest! {
    #[test]
    fn normalize_is_idempotent(e in arb_expr()) {
        let n = e.normalize();
        prop_assert_eq!(n.normalize(), n.clone());
        prop_assert!(n.terms().iter().all(|t| t.coeff != Rational::from_integer(0.into())));
    }

    #[test]
    fn subtraction_cancels(e in arb_expr()) {
        prop_assert!((&e - &e).is_zero());
        let twice = &e + &e;
        prop_assert_eq!(twice, e.scale(&rat(2, 1)).normalize());
    }

    #[test]
    fn monomial_group_laws(a in -6i64..7, b in 1i64..5, order in 1u64..7, pow in 0i64..7) {
        let m = ArgMonomial::new(order, pow, [("x".to_string(), rat(a, b))]);
        prop_assert!(m.mul(&m.inv()).is_one());
        prop_assert_eq!(m.pow(&rat(b, 1)).pow(&rat(1, b)).exponent("x"), m.exponent("x"));
    }
}
