//! Exact polynomial arithmetic over the Gaussian rationals.

mod compiled;
mod gaussian;
mod matrix;
mod poly;
mod resultant;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use compiled::{CompiledPoly, CompiledSystem, Powers};
pub use gaussian::GaussianRational;
pub use matrix::{trace_poly, word_matrix, SymMatrix2};
pub use poly::{Exponent, Polynomial, PolynomialJson, TermJson, VarSet};
pub use resultant::{content_in, divides, gcd, prem, resultant, resultant_index, square_free};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("polynomials use different variable orderings")]
    VariableMismatch,
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("expected {expected} coordinates, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("Laurent variable {0} is zero at the evaluation point")]
    ZeroAtLaurent(String),
    #[error("negative exponent for polynomial variable {0}")]
    NegativeExponent(String),
    #[error("polynomial has degree 0 in {0}")]
    Degree0(String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Polynomials sharing one variable ordering.
#[derive(Clone, Debug)]
pub struct PolySystem {
    pub vars: Arc<VarSet>,
    pub polynomials: Vec<Polynomial>,
    pub description: String,
}

impl PolySystem {
    pub fn new(vars: Arc<VarSet>, polynomials: Vec<Polynomial>, description: impl Into<String>) -> Result<Self, PolyError> {
        if polynomials.iter().any(|p| p.vars() != &vars) {
            return Err(PolyError::VariableMismatch);
        }
        Ok(PolySystem {
            vars,
            polynomials,
            description: description.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.polynomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polynomials.is_empty()
    }

    pub fn evaluate(&self, point: &[num_complex::Complex<f64>]) -> Result<Vec<num_complex::Complex<f64>>, PolyError> {
        self.polynomials.iter().map(|p| p.evaluate(point)).collect()
    }

    /// Largest absolute residual over all polynomials.
    pub fn residual(&self, point: &[num_complex::Complex<f64>]) -> Result<f64, PolyError> {
        Ok(self.evaluate(point)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    /// Symbolic Jacobian, row per polynomial.
    pub fn jacobian(&self) -> Vec<Vec<Polynomial>> {
        self.polynomials
            .iter()
            .map(|p| (0..self.vars.len()).map(|i| p.diff_index(i)).collect())
            .collect()
    }

    pub fn to_json(&self) -> PolySystemJson {
        PolySystemJson {
            description: self.description.clone(),
            polynomials: self.polynomials.iter().map(Polynomial::to_json).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolySystemJson {
    pub description: String,
    pub polynomials: Vec<PolynomialJson>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex;
    use proptest::prelude::*;

    fn vars() -> Arc<VarSet> {
        VarSet::new([("x", false), ("y", false), ("m", true)])
    }

    fn poly_strategy() -> impl Strategy<Value = Polynomial> {
        prop::collection::vec(((0i32..3, 0i32..3, -2i32..3), -5i64..6, -3i64..4), 0..6).prop_map(|terms| {
            let v = vars();
            Polynomial::from_terms(
                &v,
                terms
                    .into_iter()
                    .map(|((a, b, c), re, im)| (vec![a, b, c], GaussianRational::from_ints(re, im))),
            )
            .unwrap()
        })
    }

    fn point() -> Vec<Complex<f64>> {
        vec![Complex::new(0.7, -0.3), Complex::new(-1.1, 0.4), Complex::new(0.9, 0.6)]
    }

    #[test]
    fn trivial_arithmetic() {
        let v = vars();
        let x = Polynomial::var(&v, "x").unwrap();
        assert!((&x + &(-&x)).is_zero());
        let i = Polynomial::constant(&v, GaussianRational::i());
        let prod = &(&x + &i) * &(&x - &i);
        assert_eq!(prod, &(&x * &x) + &Polynomial::one(&v));
        let m = Polynomial::var(&v, "m").unwrap();
        let mi = Polynomial::var_index(&v, 2, -1);
        assert_eq!(&m * &mi, Polynomial::one(&v));
    }

    #[test]
    fn mismatched_orderings_are_rejected() {
        let a = Polynomial::var(&vars(), "x").unwrap();
        let b = Polynomial::var(&VarSet::polynomial_vars(&["y", "x"]), "x").unwrap();
        assert_eq!(a.try_add(&b), Err(PolyError::VariableMismatch));
    }

    #[test]
    fn evaluation_examples() {
        let v = VarSet::polynomial_vars(&["x"]);
        let x = Polynomial::var(&v, "x").unwrap();
        let p = &(&x * &x) + &Polynomial::one(&v);
        assert!(p.evaluate(&[Complex::new(0.0, 1.0)]).unwrap().norm() < 1e-15);
        let v = VarSet::new([("m", true)]);
        let m = Polynomial::var(&v, "m").unwrap();
        let im = &m + &Polynomial::var_index(&v, 0, -1);
        assert_eq!(im.evaluate(&[Complex::new(1.0, 0.0)]).unwrap(), Complex::new(2.0, 0.0));
        assert!(matches!(im.evaluate(&[Complex::new(0.0, 0.0)]), Err(PolyError::ZeroAtLaurent(_))));
        let d = im.differentiate("m").unwrap();
        assert_eq!(d, &Polynomial::one(&v) - &Polynomial::var_index(&v, 0, -2));
        assert!(Polynomial::one(&v).differentiate("m").unwrap().is_zero());
        assert!(im.differentiate("q").is_err());
    }

    #[test]
    fn json_round_trip() {
        let v = vars();
        let p = Polynomial::from_terms(
            &v,
            [
                (vec![1, 0, -1], GaussianRational::parse_parts("3/4", "-1").unwrap()),
                (vec![0, 2, 0], GaussianRational::from_int(5)),
            ],
        )
        .unwrap();
        let text = serde_json::to_string(&p.to_json()).unwrap();
        let back = Polynomial::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(p, back);
    }

    proptest! {
        #[test]
        fn ring_axioms(a in poly_strategy(), b in poly_strategy(), c in poly_strategy()) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a + &b, &b + &a);
        }

        #[test]
        fn derivative_rules(a in poly_strategy(), b in poly_strategy(), i in 0usize..3) {
            prop_assert_eq!((&a + &b).diff_index(i), &a.diff_index(i) + &b.diff_index(i));
            prop_assert_eq!(
                (&a * &b).diff_index(i),
                &(&a.diff_index(i) * &b) + &(&a * &b.diff_index(i))
            );
        }

        #[test]
        fn evaluation_matches_term_sum(a in poly_strategy()) {
            let pt = point();
            let fast = a.evaluate(&pt).unwrap();
            let mut brute = Complex::new(0.0, 0.0);
            for (e, c) in a.terms() {
                let mut t = c.to_complex::<f64>();
                for (z, &k) in pt.iter().zip(e) {
                    for _ in 0..k.abs() {
                        t = if k > 0 { t * z } else { t / z };
                    }
                }
                brute += t;
            }
            prop_assert!((fast - brute).norm() <= 1e-12 * (1.0 + brute.norm()));
        }

        #[test]
        fn derivative_matches_central_difference(a in poly_strategy(), i in 0usize..3) {
            let pt = point();
            let h = 1e-6;
            let mut plus = pt.clone();
            let mut minus = pt.clone();
            plus[i] += Complex::new(h, 0.0);
            minus[i] -= Complex::new(h, 0.0);
            let fd = (a.evaluate(&plus).unwrap() - a.evaluate(&minus).unwrap()) / (2.0 * h);
            let exact = a.diff_index(i).evaluate(&pt).unwrap();
            let scale = a.evaluate_abs(&pt).max(1.0);
            prop_assert!((fd - exact).norm() <= 1e-6 * scale, "{} vs {}", fd, exact);
        }

        #[test]
        fn exact_division_inverts_multiplication(a in poly_strategy(), b in poly_strategy()) {
            let (a, _) = a.clear_denominators();
            let (b, _) = b.clear_denominators();
            prop_assume!(!b.is_zero());
            let prod = &a * &b;
            prop_assert_eq!(prod.exact_div(&b), Some(a));
        }
    }
}
