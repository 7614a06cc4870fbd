use std::sync::Arc;

use super::poly::{Polynomial, VarSet};
use crate::manifold::Word;

/// 2x2 matrix with polynomial entries `[[a, b], [c, d]]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymMatrix2 {
    pub a: Polynomial,
    pub b: Polynomial,
    pub c: Polynomial,
    pub d: Polynomial,
}

impl SymMatrix2 {
    pub fn new(a: Polynomial, b: Polynomial, c: Polynomial, d: Polynomial) -> Self {
        SymMatrix2 { a, b, c, d }
    }

    pub fn identity(vars: &Arc<VarSet>) -> Self {
        let one = Polynomial::one(vars);
        let zero = Polynomial::zero(vars);
        SymMatrix2::new(one.clone(), zero.clone(), zero, one)
    }

    pub fn mul(&self, o: &SymMatrix2) -> SymMatrix2 {
        SymMatrix2 {
            a: &(&self.a * &o.a) + &(&self.b * &o.c),
            b: &(&self.a * &o.b) + &(&self.b * &o.d),
            c: &(&self.c * &o.a) + &(&self.d * &o.c),
            d: &(&self.c * &o.b) + &(&self.d * &o.d),
        }
    }

    /// Adjugate `[[d, -b], [-c, a]]`; the inverse when the determinant is 1.
    pub fn adjugate(&self) -> SymMatrix2 {
        SymMatrix2 {
            a: self.d.clone(),
            b: -&self.b,
            c: -&self.c,
            d: self.a.clone(),
        }
    }

    pub fn determinant(&self) -> Polynomial {
        &(&self.a * &self.d) - &(&self.b * &self.c)
    }

    pub fn trace(&self) -> Polynomial {
        &self.a + &self.d
    }

    pub fn entries(&self) -> [&Polynomial; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }
}

/// Symbolic image of a word.  Inverse letters use the adjugate, so the
/// result is the true image only where every generator has determinant 1.
pub fn word_matrix(w: &Word, gens: &[SymMatrix2]) -> SymMatrix2 {
    assert!(!gens.is_empty(), "no generator matrices");
    let vars = gens[0].a.vars().clone();
    let inverses: Vec<SymMatrix2> = gens.iter().map(SymMatrix2::adjugate).collect();
    let mut acc = SymMatrix2::identity(&vars);
    for &x in w.free_reduce().letters() {
        let k = x.unsigned_abs() as usize - 1;
        acc = acc.mul(if x > 0 { &gens[k] } else { &inverses[k] });
    }
    acc
}

pub fn trace_poly(w: &Word, gens: &[SymMatrix2]) -> Polynomial {
    word_matrix(w, gens).trace()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polysys::GaussianRational;
    use num_complex::Complex;
    use proptest::prelude::*;

    fn gauge() -> Vec<SymMatrix2> {
        let v = VarSet::new([("s", true), ("p", true), ("t", false)]);
        let s = Polynomial::var(&v, "s").unwrap();
        let p = Polynomial::var(&v, "p").unwrap();
        let t = Polynomial::var(&v, "t").unwrap();
        let si = Polynomial::var_index(&v, 0, -1);
        let pi = Polynomial::var_index(&v, 1, -1);
        vec![
            SymMatrix2::new(s, Polynomial::one(&v), Polynomial::zero(&v), si),
            SymMatrix2::new(p, Polynomial::zero(&v), t, pi),
        ]
    }

    #[test]
    fn small_words() {
        let g = gauge();
        let v = g[0].a.vars().clone();
        assert_eq!(word_matrix(&Word::identity(), &g), SymMatrix2::identity(&v));
        assert_eq!(word_matrix(&Word::new(vec![1]), &g), g[0]);
        assert_eq!(word_matrix(&Word::new(vec![1, -1]), &g), SymMatrix2::identity(&v));
        assert_eq!(trace_poly(&Word::identity(), &g), Polynomial::from_int(&v, 2));
        let expected = &Polynomial::var_index(&v, 0, 1) + &Polynomial::var_index(&v, 0, -1);
        assert_eq!(trace_poly(&Word::new(vec![1]), &g), expected);
        assert_eq!(g[1].determinant(), Polynomial::one(&v));
    }

    #[test]
    fn non_reduced_product_still_inverts() {
        let g = gauge();
        let v = g[0].a.vars().clone();
        let m = g[1].mul(&g[1].adjugate());
        assert_eq!(m, SymMatrix2::identity(&v));
        let _ = GaussianRational::from_int(0);
    }

    proptest! {
        #[test]
        fn trace_is_conjugation_invariant(
            w in prop::collection::vec(prop_oneof![-2i32..=-1, 1i32..=2], 1..8),
            u in prop::collection::vec(prop_oneof![-2i32..=-1, 1i32..=2], 1..5),
        ) {
            let g = gauge();
            let w = Word::new(w);
            let u = Word::new(u);
            let conj = u.conjugate_by(&w);
            let a = trace_poly(&w, &g);
            let b = trace_poly(&conj, &g);
            prop_assert_eq!(&a, &b);
            // Cyclic rotation is conjugation too.
            let mut rot = w.letters().to_vec();
            rot.rotate_left(1);
            let c = trace_poly(&Word::new(rot), &g);
            let pt = [Complex::new(1.3, 0.2), Complex::new(-0.7, 0.9), Complex::new(0.4, -1.1)];
            prop_assert!((a.evaluate(&pt).unwrap() - c.evaluate(&pt).unwrap()).norm() < 1e-9);
        }
    }
}
