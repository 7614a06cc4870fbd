use std::sync::Arc;

use cuspvar::polysys::{divides, gcd, resultant, square_free, GaussianRational, PolySystem, Polynomial, VarSet};
use cuspvar::C64;
use proptest::prelude::*;

fn xyz() -> Arc<VarSet> {
    VarSet::polynomial_vars(&["x", "y", "z"])
}

fn var(vars: &Arc<VarSet>, name: &str) -> Polynomial {
    Polynomial::var(vars, name).unwrap()
}

fn int(vars: &Arc<VarSet>, c: i64) -> Polynomial {
    Polynomial::from_int(vars, c)
}

/// Polynomial from `(exponents, coefficient)` pairs.
fn poly(vars: &Arc<VarSet>, terms: &[(Vec<i32>, i64)]) -> Polynomial {
    terms.iter().fold(Polynomial::zero(vars), |acc, (e, c)| {
        acc + Polynomial::monomial(vars, e.clone(), GaussianRational::from_int(*c))
    })
}

fn same_up_to_unit(a: &Polynomial, b: &Polynomial) -> bool {
    divides(a, b) && divides(b, a)
}

#[test]
fn resultant_of_linear_and_quadratic() {
    // Res_x(x^2 - y, x - z) = z^2 - y
    let v = xyz();
    let p = var(&v, "x").pow(2) - var(&v, "y");
    let q = var(&v, "x") - var(&v, "z");
    let r = resultant(&p, &q, "x").unwrap();
    let expect = var(&v, "z").pow(2) - var(&v, "y");
    assert!(same_up_to_unit(&r, &expect), "{r}");
    assert_eq!(r.degree_of("x").unwrap(), 0);
}

#[test]
fn resultant_matches_product_of_root_differences() {
    // (x - 1)(x - 2) against (x - 3)(x + 1): prod (a_i - b_j) = (-2)(2)(-1)(3) = 12
    let v = VarSet::polynomial_vars(&["x"]);
    let x = var(&v, "x");
    let p = (x.clone() - int(&v, 1)) * (x.clone() - int(&v, 2));
    let q = (x.clone() - int(&v, 3)) * (x + int(&v, 1));
    let r = resultant(&p, &q, "x").unwrap();
    assert!(r.is_constant());
    assert_eq!(r.constant_term(), GaussianRational::from_int(12));
}

#[test]
fn resultant_vanishes_on_common_factor() {
    let v = xyz();
    let common = var(&v, "x") - var(&v, "y");
    let p = common.clone() * (var(&v, "x") + int(&v, 3));
    let q = common * (var(&v, "x").pow(2) + var(&v, "z"));
    assert!(resultant(&p, &q, "x").unwrap().is_zero());
}

#[test]
fn gcd_recovers_shared_factor() {
    let v = xyz();
    let g = var(&v, "x") * var(&v, "y") - int(&v, 1);
    let a = g.clone() * (var(&v, "x") + var(&v, "z"));
    let b = g.clone() * (var(&v, "y").pow(2) - int(&v, 5));
    assert!(same_up_to_unit(&gcd(&a, &b), &g));
}

#[test]
fn gcd_of_coprime_is_constant() {
    let v = xyz();
    let a = var(&v, "x").pow(3) - var(&v, "y") + int(&v, 2);
    let b = var(&v, "z") * var(&v, "x") + int(&v, 7);
    assert!(gcd(&a, &b).is_constant());
}

#[test]
fn square_free_drops_repeated_factors() {
    let v = xyz();
    let f = var(&v, "x") - var(&v, "y");
    let g = var(&v, "z").pow(2) + int(&v, 1);
    let p = f.pow(3) * g.clone();
    assert!(same_up_to_unit(&square_free(&p), &(f * g)));
}

#[test]
fn gaussian_coefficients() {
    // (x - i)(x + i) = x^2 + 1
    let v = VarSet::polynomial_vars(&["x"]);
    let i = Polynomial::constant(&v, GaussianRational::i());
    let p = (var(&v, "x") - i.clone()) * (var(&v, "x") + i);
    assert_eq!(p, var(&v, "x").pow(2) + int(&v, 1));
}

#[test]
fn laurent_variables_evaluate_negative_powers() {
    let v = VarSet::new([("m", true), ("x", false)]);
    let p = Polynomial::var_index(&v, 0, -2) + Polynomial::var_index(&v, 1, 1);
    let z = p.evaluate(&[C64::new(2.0, 0.0), C64::new(3.0, 0.0)]).unwrap();
    assert!((z - C64::new(3.25, 0.0)).norm() < 1e-15);
    assert!(p.evaluate(&[C64::new(0.0, 0.0), C64::new(1.0, 0.0)]).is_err());
}

#[test]
fn json_round_trip() {
    let v = xyz();
    let p = poly(&v, &[(vec![2, 1, 0], 3), (vec![0, 0, 4], -7), (vec![0, 0, 0], 1)]);
    let back = Polynomial::from_json(&p.to_json()).unwrap();
    assert_eq!(p, back);
}

#[test]
fn system_rejects_mixed_variable_sets() {
    let a = var(&xyz(), "x");
    let b = var(&VarSet::polynomial_vars(&["x"]), "x");
    assert!(PolySystem::new(xyz(), vec![a, b], "mixed").is_err());
}

fn small_poly() -> impl Strategy<Value = Vec<(Vec<i32>, i64)>> {
    prop::collection::vec((prop::collection::vec(0..3i32, 3), -4..5i64), 1..5)
}

fn point() -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.5..1.5f64, -1.5..1.5f64).prop_map(|(a, b)| C64::new(a, b)), 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_identities(a in small_poly(), b in small_poly(), c in small_poly()) {
        let v = xyz();
        let (a, b, c) = (poly(&v, &a), poly(&v, &b), poly(&v, &c));
        prop_assert_eq!(a.clone() * b.clone(), b.clone() * a.clone());
        prop_assert_eq!(a.clone() * (b.clone() + c.clone()), a.clone() * b.clone() + a.clone() * c.clone());
        prop_assert!((a.clone() - a).is_zero());
    }

    #[test]
    fn evaluation_is_a_ring_map(a in small_poly(), b in small_poly(), x in point()) {
        let v = xyz();
        let (a, b) = (poly(&v, &a), poly(&v, &b));
        let pa = a.evaluate(&x).unwrap();
        let pb = b.evaluate(&x).unwrap();
        let pab = (a * b).evaluate(&x).unwrap();
        prop_assert!((pab - pa * pb).norm() <= 1e-9 * (1.0 + pa.norm() * pb.norm()));
    }

    #[test]
    fn derivative_matches_difference_quotient(a in small_poly(), x in point()) {
        let v = xyz();
        let p = poly(&v, &a);
        let h = 1e-6;
        let mut xp = x.clone();
        xp[0] += h;
        let mut xm = x.clone();
        xm[0] -= h;
        let fd = (p.evaluate(&xp).unwrap() - p.evaluate(&xm).unwrap()) / (2.0 * h);
        let d = p.differentiate("x").unwrap().evaluate(&x).unwrap();
        prop_assert!((fd - d).norm() <= 1e-6 * (1.0 + d.norm()));
    }

    #[test]
    fn resultant_eliminates_and_vanishes_at_common_roots(r in -3..4i64, s in -3..4i64, k in 1..4i64) {
        // p = (x - r)(x + k y), q = (x - r)(y - s) + x^2 - r^2 share the root x = r for every y
        let v = xyz();
        let x = var(&v, "x");
        let y = var(&v, "y");
        let p = (x.clone() - int(&v, r)) * (x.clone() + int(&v, k) * y.clone());
        let q = (x.clone() - int(&v, r)) * (y.clone() - int(&v, s)) + x.pow(2) - int(&v, r * r);
        let res = resultant(&p, &q, "x").unwrap();
        prop_assert!(res.is_zero());
        let q2 = q + int(&v, 1);
        let res2 = resultant(&p, &q2, "x").unwrap();
        prop_assert_eq!(res2.degree_of("x").unwrap(), 0);
    }

    #[test]
    fn gcd_divides_both(a in small_poly(), b in small_poly(), g in small_poly()) {
        let v = xyz();
        let g = poly(&v, &g);
        let a = poly(&v, &a) * g.clone();
        let b = poly(&v, &b) * g.clone();
        prop_assume!(!a.is_zero() && !b.is_zero());
        let d = gcd(&a, &b);
        prop_assert!(divides(&d, &a) && divides(&d, &b));
        prop_assert!(g.is_constant() || divides(&g, &d) || g.is_zero());
    }
}
