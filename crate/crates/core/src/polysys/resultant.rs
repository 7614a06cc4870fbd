//! Resultants, pseudo-remainders, gcds and square-free parts.
//!
//! Everything here works on polynomials with nonnegative exponents; the
//! public entry points clear Laurent denominators first.  Univariate views
//! are dense coefficient vectors with entries in the full polynomial ring.

use super::poly::Polynomial;
use super::gaussian::GaussianRational;
use super::PolyError;

type Dense = Vec<Polynomial>;

fn dense(p: &Polynomial, i: usize) -> Dense {
    let mut c = p.coefficients_in(i);
    trim(&mut c);
    c
}

fn trim(c: &mut Dense) {
    while c.len() > 1 && c.last().unwrap().is_zero() {
        c.pop();
    }
}

fn deg(c: &Dense) -> usize {
    c.len() - 1
}

fn is_zero_dense(c: &Dense) -> bool {
    c.len() == 1 && c[0].is_zero()
}

fn undense(p: &Polynomial, i: usize, c: &Dense) -> Polynomial {
    Polynomial::from_coefficients(p.vars(), i, c)
}

/// Pseudo-remainder on dense vectors: `lc(b)^(deg a - deg b + 1) * a mod b`.
fn prem_dense(a: &Dense, b: &Dense) -> Dense {
    let db = deg(b);
    if deg(a) < db {
        return a.clone();
    }
    let lcb = b.last().unwrap().clone();
    let mut r = a.clone();
    let mut steps = deg(a) - db + 1;
    while !is_zero_dense(&r) && deg(&r) >= db {
        let shift = deg(&r) - db;
        let lcr = r.last().unwrap().clone();
        let top = r.len() - 1;
        for k in 0..top {
            let mut v = &lcb * &r[k];
            if k >= shift {
                v = &v - &(&lcr * &b[k - shift]);
            }
            r[k] = v;
        }
        r.pop();
        if r.is_empty() {
            r.push(Polynomial::zero(lcb.vars()));
        }
        trim(&mut r);
        steps -= 1;
    }
    if steps > 0 {
        let f = lcb.pow(steps as u32);
        for x in r.iter_mut() {
            *x = &*x * &f;
        }
    }
    r
}

fn div_dense(c: &Dense, d: &Polynomial) -> Dense {
    c.iter()
        .map(|x| x.exact_div(d).expect("inexact division in subresultant sequence"))
        .collect()
}

/// Pseudo-remainder of `a` by `b` with respect to variable `i`.
pub fn prem(a: &Polynomial, b: &Polynomial, i: usize) -> Polynomial {
    undense(a, i, &prem_dense(&dense(a, i), &dense(b, i)))
}

/// Sylvester resultant with respect to variable `i`, by the subresultant
/// pseudo-remainder sequence.  Inputs must have nonnegative exponents.
pub fn resultant_index(p: &Polynomial, q: &Polynomial, i: usize) -> Polynomial {
    let vars = p.vars().clone();
    if p.is_zero() || q.is_zero() {
        return Polynomial::zero(&vars);
    }
    let mut a = dense(p, i);
    let mut b = dense(q, i);
    let mut sign_negative = false;
    if deg(&a) < deg(&b) {
        if deg(&a) % 2 == 1 && deg(&b) % 2 == 1 {
            sign_negative = true;
        }
        std::mem::swap(&mut a, &mut b);
    }
    if deg(&b) == 0 {
        return b[0].pow(deg(&a) as u32);
    }
    let one = Polynomial::one(&vars);
    let mut g = one.clone();
    let mut h = one.clone();
    loop {
        let delta = deg(&a) - deg(&b);
        if deg(&a) % 2 == 1 && deg(&b) % 2 == 1 {
            sign_negative = !sign_negative;
        }
        let r = prem_dense(&a, &b);
        if is_zero_dense(&r) {
            return Polynomial::zero(&vars);
        }
        a = b;
        let divisor = &g * &h.pow(delta as u32);
        b = div_dense(&r, &divisor);
        g = a.last().unwrap().clone();
        if delta > 0 {
            h = g.pow(delta as u32).exact_div(&h.pow(delta as u32 - 1)).expect("inexact h update");
        }
        if deg(&b) == 0 {
            break;
        }
    }
    let da = deg(&a) as u32;
    let lb = b[0].clone();
    let res = if da == 0 {
        one
    } else {
        lb.pow(da).exact_div(&h.pow(da - 1)).expect("inexact final subresultant step")
    };
    if sign_negative {
        -res
    } else {
        res
    }
}

/// Resultant of `p` and `q` with respect to the named variable, after
/// clearing Laurent denominators.
pub fn resultant(p: &Polynomial, q: &Polynomial, var: &str) -> Result<Polynomial, PolyError> {
    let i = p.vars().index(var)?;
    if p.vars() != q.vars() {
        return Err(PolyError::VariableMismatch);
    }
    let (p, _) = p.clear_denominators();
    let (q, _) = q.clear_denominators();
    if p.degree(i) == 0 || q.degree(i) == 0 {
        return Err(PolyError::Degree0(var.to_string()));
    }
    Ok(resultant_index(&p, &q, i))
}

/// Main variable for a gcd: one that only one operand involves if there is
/// such a variable, otherwise the shared variable of least degree.
fn main_var(a: &Polynomial, b: &Polynomial) -> Option<usize> {
    let n = a.vars().len();
    if let Some(i) = (0..n).find(|&i| a.involves(i) != b.involves(i)) {
        return Some(i);
    }
    (0..n)
        .filter(|&i| a.involves(i))
        .min_by_key(|&i| (a.degree(i).max(b.degree(i)), a.degree(i).min(b.degree(i))))
}

/// Prime for modular coprimality certificates; `1 mod 4`, so `i` has an
/// image.
const P: u64 = 998_244_353;

fn pow_mod(mut b: u64, mut e: u64) -> u64 {
    let mut acc = 1;
    b %= P;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % P;
        }
        b = b * b % P;
        e >>= 1;
    }
    acc
}

fn ratio_mod(r: &num_rational::BigRational) -> Option<u64> {
    use num_bigint::BigInt;
    use num_traits::ToPrimitive;
    let p = BigInt::from(P);
    let m = |x: &BigInt| ((x % &p + &p) % &p).to_u64().unwrap();
    let d = m(r.denom());
    (d != 0).then(|| m(r.numer()) * pow_mod(d, P - 2) % P)
}

fn coeff_mod(c: &GaussianRational) -> Option<u64> {
    // 3 is a primitive root, so 3^((P-1)/4) squares to -1.
    let i = pow_mod(3, (P - 1) / 4);
    Some((ratio_mod(&c.re)? + ratio_mod(&c.im)? * i) % P)
}

/// Dense univariate image mod `P` in `x_i` with the other variables set to
/// `at`.
fn specialize_mod(p: &Polynomial, i: usize, at: &[u64]) -> Option<Vec<u64>> {
    let d = p.degree(i).max(0) as usize;
    let mut out = vec![0u64; d + 1];
    for (e, c) in p.terms() {
        let mut v = coeff_mod(c)?;
        for (j, &k) in e.iter().enumerate() {
            if j != i && k != 0 {
                v = v * pow_mod(at[j], k as u64) % P;
            }
        }
        out[e[i] as usize] = (out[e[i] as usize] + v) % P;
    }
    Some(out)
}

fn uni_trim(c: &mut Vec<u64>) {
    while c.len() > 1 && *c.last().unwrap() == 0 {
        c.pop();
    }
}

/// Degree of the gcd of two univariate polynomials over `Z/P`.
fn uni_gcd_degree(mut a: Vec<u64>, mut b: Vec<u64>) -> usize {
    uni_trim(&mut a);
    uni_trim(&mut b);
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    while !(b.len() == 1 && b[0] == 0) {
        let inv = pow_mod(*b.last().unwrap(), P - 2);
        while a.len() >= b.len() && !(a.len() == 1 && a[0] == 0) {
            let q = a.last().unwrap() * inv % P;
            let shift = a.len() - b.len();
            for (k, bk) in b.iter().enumerate() {
                a[k + shift] = (a[k + shift] + P - bk * q % P) % P;
            }
            a.pop();
            if a.is_empty() {
                a.push(0);
            }
            uni_trim(&mut a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len() - 1
}

/// Whether the gcd of `a` and `b` certainly has degree zero in `x_i`: some
/// specialization of the other variables that keeps both leading
/// coefficients has a constant gcd mod `P`.  Degree can only drop under
/// such a specialization, so `true` is a proof.
fn coprime_in(a: &Polynomial, b: &Polynomial, i: usize) -> bool {
    let n = a.vars().len();
    for attempt in 0..3u64 {
        let at: Vec<u64> = (0..n as u64).map(|j| (12_345 + 7_919 * j + 104_729 * attempt) % P).collect();
        let (Some(sa), Some(sb)) = (specialize_mod(a, i, &at), specialize_mod(b, i, &at)) else {
            return false;
        };
        if *sa.last().unwrap() == 0 || *sb.last().unwrap() == 0 {
            continue;
        }
        if sa.len() as i32 - 1 != a.degree(i) || sb.len() as i32 - 1 != b.degree(i) {
            continue;
        }
        return uni_gcd_degree(sa, sb) == 0;
    }
    false
}

/// Certificate that `gcd(a, b)` is constant.
fn certainly_coprime(a: &Polynomial, b: &Polynomial) -> bool {
    let n = a.vars().len();
    (0..n)
        .filter(|&i| a.involves(i) && b.involves(i))
        .all(|i| coprime_in(a, b, i))
}

/// Content of `p` with respect to variable `i`: the gcd of its coefficients.
pub fn content_in(p: &Polynomial, i: usize) -> Polynomial {
    let coeffs = dense(p, i);
    let mut g = Polynomial::zero(p.vars());
    for c in coeffs.iter().rev() {
        if c.is_zero() {
            continue;
        }
        g = gcd_cleared(&g, c);
        if g.is_constant() {
            break;
        }
    }
    g
}

fn primitive_part_in(p: &Polynomial, i: usize) -> Polynomial {
    let c = content_in(p, i);
    if c.is_constant() {
        return p.primitive();
    }
    p.exact_div(&c).expect("content divides").primitive()
}

fn gcd_cleared(a: &Polynomial, b: &Polynomial) -> Polynomial {
    let vars = a.vars().clone();
    if a.is_zero() {
        return if b.is_zero() { b.clone() } else { b.primitive() };
    }
    if b.is_zero() {
        return a.primitive();
    }
    let Some(i) = main_var(a, b) else {
        return Polynomial::one(&vars);
    };
    if certainly_coprime(a, b) {
        return Polynomial::one(&vars);
    }
    if !a.involves(i) {
        return gcd_cleared(a, &content_in(b, i));
    }
    if !b.involves(i) {
        return gcd_cleared(&content_in(a, i), b);
    }
    let ca = content_in(a, i);
    let cb = content_in(b, i);
    let c = gcd_cleared(&ca, &cb);
    let pa = if ca.is_constant() { a.clone() } else { a.exact_div(&ca).unwrap() };
    let pb = if cb.is_constant() { b.clone() } else { b.exact_div(&cb).unwrap() };
    if coprime_in(&pa, &pb, i) {
        return c.primitive();
    }

    let mut x = dense(&pa, i);
    let mut y = dense(&pb, i);
    if deg(&x) < deg(&y) {
        std::mem::swap(&mut x, &mut y);
    }
    let one = Polynomial::one(&vars);
    let mut g = one.clone();
    let mut h = one.clone();
    let tail = loop {
        let delta = deg(&x) - deg(&y);
        let r = prem_dense(&x, &y);
        if is_zero_dense(&r) {
            break Some(y);
        }
        if deg(&r) == 0 {
            break None;
        }
        x = y;
        let divisor = &g * &h.pow(delta as u32);
        y = div_dense(&r, &divisor);
        g = x.last().unwrap().clone();
        if delta > 0 {
            h = g.pow(delta as u32).exact_div(&h.pow(delta as u32 - 1)).expect("inexact h update");
        }
    };
    match tail {
        None => c.primitive(),
        Some(y) => {
            let pp = primitive_part_in(&undense(a, i, &y), i);
            (&c * &pp).primitive()
        }
    }
}

/// Greatest common divisor, normalized by [`Polynomial::primitive`].
/// Monomial factors in Laurent variables are units and are ignored.
pub fn gcd(a: &Polynomial, b: &Polynomial) -> Polynomial {
    let (a, _) = a.clear_denominators();
    let (b, _) = b.clear_denominators();
    let g = gcd_cleared(&a, &b);
    g.clear_denominators().0
}

/// Square-free part: the product of the distinct irreducible factors, up to
/// a constant.
pub fn square_free(p: &Polynomial) -> Polynomial {
    let (p, _) = p.clear_denominators();
    square_free_cleared(&p).clear_denominators().0.primitive()
}

fn square_free_cleared(p: &Polynomial) -> Polynomial {
    if p.is_zero() {
        return p.clone();
    }
    let Some(i) = (0..p.vars().len()).filter(|&i| p.involves(i)).min_by_key(|&i| p.degree(i)) else {
        return Polynomial::one(p.vars());
    };
    let d = p.diff_index(i);
    if certainly_coprime(p, &d) {
        return p.clone();
    }
    let c = content_in(p, i);
    let pp = if c.is_constant() { p.clone() } else { p.exact_div(&c).unwrap() };
    let d = pp.diff_index(i);
    let g = gcd_cleared(&pp, &d);
    let part = if g.is_constant() { pp } else { pp.exact_div(&g).unwrap() };
    &square_free_cleared(&c) * &part
}

/// Whether `q` divides `p` exactly (after clearing Laurent denominators).
pub fn divides(q: &Polynomial, p: &Polynomial) -> bool {
    if q.is_zero() {
        return p.is_zero();
    }
    let (p, _) = p.clear_denominators();
    let (q, _) = q.clear_denominators();
    p.exact_div(&q).is_some() || p.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polysys::poly::VarSet;
    use crate::polysys::GaussianRational;
    use num_traits::Zero;

    fn parse(vars: &std::sync::Arc<VarSet>, terms: &[(&[i32], i64)]) -> Polynomial {
        Polynomial::from_terms(
            vars,
            terms.iter().map(|(e, c)| (e.to_vec(), GaussianRational::from_int(*c))),
        )
        .unwrap()
    }

    #[test]
    fn linear_resultant() {
        let v = VarSet::polynomial_vars(&["x", "a", "b"]);
        let p = parse(&v, &[(&[1, 0, 0], 1), (&[0, 1, 0], -1)]);
        let q = parse(&v, &[(&[1, 0, 0], 1), (&[0, 0, 1], -1)]);
        let r = resultant(&p, &q, "x").unwrap();
        // res_x(x - a, x - b) = a - b up to the sign convention of Sylvester.
        let expected = parse(&v, &[(&[0, 1, 0], 1), (&[0, 0, 1], -1)]);
        assert!(r == expected || r == -&expected, "{r}");
    }

    #[test]
    fn quadratic_resultant() {
        let v = VarSet::polynomial_vars(&["x", "c", "d"]);
        let p = parse(&v, &[(&[2, 0, 0], 1), (&[0, 1, 0], -1)]);
        let q = parse(&v, &[(&[1, 0, 0], 1), (&[0, 0, 1], -1)]);
        let r = resultant(&p, &q, "x").unwrap();
        assert_eq!(r, parse(&v, &[(&[0, 0, 2], 1), (&[0, 1, 0], -1)]));
    }

    #[test]
    fn resultant_matches_sylvester_determinant() {
        // res_x(x^3 + 2x + y, 3x^2 - y) computed independently.
        let v = VarSet::polynomial_vars(&["x", "y"]);
        let p = parse(&v, &[(&[3, 0], 1), (&[1, 0], 2), (&[0, 1], 1)]);
        let q = parse(&v, &[(&[2, 0], 3), (&[0, 1], -1)]);
        let r = resultant(&p, &q, "x").unwrap();
        // det of the 5x5 Sylvester matrix: 27y^2 + y^3 + 12y^2 + ... evaluated
        // numerically at y = 2 and y = -1 below.
        for y in [2.0f64, -1.0, 0.5] {
            let pt = [num_complex::Complex::new(0.0, 0.0), num_complex::Complex::new(y, 0.0)];
            let got = r.evaluate(&pt).unwrap().re;
            let syl = nalgebra::DMatrix::from_row_slice(
                5,
                5,
                &[
                    1.0, 0.0, 2.0, y, 0.0, //
                    0.0, 1.0, 0.0, 2.0, y, //
                    3.0, 0.0, -y, 0.0, 0.0, //
                    0.0, 3.0, 0.0, -y, 0.0, //
                    0.0, 0.0, 3.0, 0.0, -y,
                ],
            );
            assert!((got - syl.determinant()).abs() < 1e-9, "{got} vs {}", syl.determinant());
        }
    }

    #[test]
    fn degree_zero_is_an_error() {
        let v = VarSet::polynomial_vars(&["x", "y"]);
        let p = parse(&v, &[(&[0, 1], 1)]);
        let q = parse(&v, &[(&[1, 0], 1)]);
        assert!(matches!(resultant(&p, &q, "x"), Err(PolyError::Degree0(_))));
    }

    #[test]
    fn gcd_and_square_free() {
        let v = VarSet::polynomial_vars(&["x", "y"]);
        let a = parse(&v, &[(&[1, 0], 1), (&[0, 1], -1)]); // x - y
        let b = parse(&v, &[(&[1, 1], 1), (&[0, 0], -1)]); // xy - 1
        let c = parse(&v, &[(&[2, 0], 1), (&[0, 1], 1)]); // x^2 + y
        let f = &(&a * &a) * &b;
        let g = &(&a * &c) * &b;
        assert_eq!(gcd(&f, &g), (&a * &b).primitive());
        assert_eq!(square_free(&(&f * &f)), (&a * &b).primitive());
        assert!(gcd(&a, &c).is_constant());
        assert_eq!(content_in(&(&a * &parse(&v, &[(&[0, 2], 1), (&[0, 0], 1)])), 0).degree(1), 2);
    }

    #[test]
    fn prem_reduces_degree() {
        let v = VarSet::polynomial_vars(&["x", "y"]);
        let a = parse(&v, &[(&[3, 1], 2), (&[1, 0], 1), (&[0, 0], 5)]);
        let b = parse(&v, &[(&[2, 0], 1), (&[0, 1], 3)]);
        let r = prem(&a, &b, 0);
        assert!(r.degree(0) < 2);
    }

    #[test]
    fn gaussian_coefficients_gcd() {
        let v = VarSet::polynomial_vars(&["x"]);
        let i = GaussianRational::i();
        let x = Polynomial::var(&v, "x").unwrap();
        let a = &x - &Polynomial::constant(&v, i.clone());
        let b = &x + &Polynomial::constant(&v, i);
        let g = gcd(&(&a * &b), &(&a * &a));
        assert_eq!(g.monic(), a.monic());
        assert!(!Zero::is_zero(&g.leading().unwrap().1.clone()));
    }
}
