use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::gaussian::GaussianRational;
use super::PolyError;
use crate::scalar::Scalar;

/// Ordered variable names with a per-variable Laurent flag.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VarSet {
    names: Vec<String>,
    laurent: Vec<bool>,
}

impl VarSet {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = (S, bool)>) -> Arc<Self> {
        let (names, laurent) = names.into_iter().map(|(n, l)| (n.into(), l)).unzip();
        Arc::new(VarSet { names, laurent })
    }

    pub fn polynomial_vars(names: &[&str]) -> Arc<Self> {
        Self::new(names.iter().map(|n| (*n, false)))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn is_laurent(&self, i: usize) -> bool {
        self.laurent[i]
    }

    pub fn index(&self, name: &str) -> Result<usize, PolyError> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| PolyError::UnknownVariable(name.to_string()))
    }
}

pub type Exponent = Vec<i32>;

/// Sparse multivariate (Laurent) polynomial over `Q(i)`.
///
/// Terms are stored in lexicographic order of exponent vectors, so the last
/// entry of the map is the lex-leading term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    vars: Arc<VarSet>,
    terms: BTreeMap<Exponent, GaussianRational>,
}

impl Polynomial {
    pub fn zero(vars: &Arc<VarSet>) -> Self {
        Polynomial {
            vars: vars.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: &Arc<VarSet>, c: GaussianRational) -> Self {
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            p.terms.insert(vec![0; vars.len()], c);
        }
        p
    }

    pub fn from_int(vars: &Arc<VarSet>, c: i64) -> Self {
        Self::constant(vars, GaussianRational::from_int(c))
    }

    pub fn one(vars: &Arc<VarSet>) -> Self {
        Self::from_int(vars, 1)
    }

    pub fn var(vars: &Arc<VarSet>, name: &str) -> Result<Self, PolyError> {
        let i = vars.index(name)?;
        Ok(Self::var_index(vars, i, 1))
    }

    /// `x_i^e`; negative `e` requires a Laurent variable.
    pub fn var_index(vars: &Arc<VarSet>, i: usize, e: i32) -> Self {
        assert!(e >= 0 || vars.is_laurent(i), "negative power of polynomial variable");
        let mut exp = vec![0; vars.len()];
        exp[i] = e;
        Self::monomial(vars, exp, GaussianRational::one())
    }

    pub fn monomial(vars: &Arc<VarSet>, exp: Exponent, c: GaussianRational) -> Self {
        assert_eq!(exp.len(), vars.len());
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            p.terms.insert(exp, c);
        }
        p
    }

    /// Builds from raw terms, merging duplicates and dropping zeros.
    pub fn from_terms(
        vars: &Arc<VarSet>,
        terms: impl IntoIterator<Item = (Exponent, GaussianRational)>,
    ) -> Result<Self, PolyError> {
        let mut p = Self::zero(vars);
        for (e, c) in terms {
            if e.len() != vars.len() {
                return Err(PolyError::Arity {
                    expected: vars.len(),
                    got: e.len(),
                });
            }
            for (i, &x) in e.iter().enumerate() {
                if x < 0 && !vars.is_laurent(i) {
                    return Err(PolyError::NegativeExponent(vars.names[i].clone()));
                }
            }
            p.add_term(e, &c);
        }
        Ok(p)
    }

    pub fn vars(&self) -> &Arc<VarSet> {
        &self.vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &GaussianRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms.keys().next().unwrap().iter().all(|&e| e == 0))
    }

    pub fn constant_term(&self) -> GaussianRational {
        self.terms
            .get(&vec![0; self.vars.len()])
            .cloned()
            .unwrap_or_else(GaussianRational::zero)
    }

    pub fn leading(&self) -> Option<(&Exponent, &GaussianRational)> {
        self.terms.last_key_value()
    }

    fn add_term(&mut self, e: Exponent, c: &GaussianRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check(&self, other: &Self) -> Result<(), PolyError> {
        if Arc::ptr_eq(&self.vars, &other.vars) || self.vars == other.vars {
            Ok(())
        } else {
            Err(PolyError::VariableMismatch)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, PolyError> {
        self.check(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c);
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, PolyError> {
        self.check(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), &-c);
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, PolyError> {
        self.check(other)?;
        let mut out = Self::zero(&self.vars);
        if self.is_zero() || other.is_zero() {
            return Ok(out);
        }
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Exponent = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, &(c1 * c2));
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        if c.is_zero() {
            return Self::zero(&self.vars);
        }
        Polynomial {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, x)| (e.clone(), x * c)).collect(),
        }
    }

    /// Multiplies by the monomial `c * x^shift`.
    pub fn mul_monomial(&self, shift: &[i32], c: &GaussianRational) -> Self {
        Polynomial {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(e, x)| (e.iter().zip(shift).map(|(a, b)| a + b).collect(), x * c))
                .collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(&self.vars);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Largest exponent of variable `i` (0 for the zero polynomial).
    pub fn degree(&self, i: usize) -> i32 {
        self.terms.keys().map(|e| e[i]).max().unwrap_or(0)
    }

    /// Smallest exponent of variable `i` (0 for the zero polynomial).
    pub fn min_degree(&self, i: usize) -> i32 {
        self.terms.keys().map(|e| e[i]).min().unwrap_or(0)
    }

    pub fn degree_of(&self, name: &str) -> Result<i32, PolyError> {
        Ok(self.degree(self.vars.index(name)?))
    }

    pub fn total_degree(&self) -> i32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn degrees(&self) -> Vec<i32> {
        (0..self.vars.len()).map(|i| self.degree(i)).collect()
    }

    /// Whether variable `i` occurs in some term.
    pub fn involves(&self, i: usize) -> bool {
        self.terms.keys().any(|e| e[i] != 0)
    }

    pub fn support(&self) -> Vec<bool> {
        (0..self.vars.len()).map(|i| self.involves(i)).collect()
    }

    /// Evaluates at a complex point.
    pub fn evaluate<T: Scalar>(&self, point: &[Complex<T>]) -> Result<Complex<T>, PolyError> {
        if point.len() != self.vars.len() {
            return Err(PolyError::Arity {
                expected: self.vars.len(),
                got: point.len(),
            });
        }
        for (i, z) in point.iter().enumerate() {
            if self.vars.is_laurent(i) && z.norm_sqr() == T::zero() && self.min_degree(i) < 0 {
                return Err(PolyError::ZeroAtLaurent(self.vars.names[i].clone()));
            }
        }
        let mut acc = Complex::new(T::zero(), T::zero());
        for (e, c) in &self.terms {
            let mut term: Complex<T> = c.to_complex();
            for (z, &k) in point.iter().zip(e) {
                if k != 0 {
                    term = term * z.powi(k);
                }
            }
            acc = acc + term;
        }
        Ok(acc)
    }

    /// Sum of `|c| * prod |x_i|^e_i`; scale for relative residuals.
    pub fn evaluate_abs(&self, point: &[Complex<f64>]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut t = c.to_complex::<f64>().norm();
                for (z, &k) in point.iter().zip(e) {
                    t *= z.norm().powi(k);
                }
                t
            })
            .sum()
    }

    pub fn differentiate(&self, name: &str) -> Result<Self, PolyError> {
        Ok(self.diff_index(self.vars.index(name)?))
    }

    pub fn diff_index(&self, i: usize) -> Self {
        let mut out = Self::zero(&self.vars);
        for (e, c) in &self.terms {
            if e[i] != 0 {
                let mut f = e.clone();
                f[i] -= 1;
                out.add_term(f, &c.scale_int(e[i] as i64));
            }
        }
        out
    }

    /// Multiplies by the monomial making every exponent nonnegative and
    /// removes monomial factors of Laurent variables.  Returns the shift that
    /// was applied.
    pub fn clear_denominators(&self) -> (Self, Vec<i32>) {
        let n = self.vars.len();
        let mut shift = vec![0; n];
        if self.is_zero() {
            return (self.clone(), shift);
        }
        for (i, s) in shift.iter_mut().enumerate() {
            let lo = self.min_degree(i);
            if lo < 0 || (lo > 0 && self.vars.is_laurent(i)) {
                *s = -lo;
            }
        }
        if shift.iter().all(|&s| s == 0) {
            return (self.clone(), shift);
        }
        (self.mul_monomial(&shift, &GaussianRational::one()), shift)
    }

    /// Scales to Gaussian-integer coefficients with coprime integer parts and
    /// a canonical sign on the lex-leading coefficient.
    pub fn primitive(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut lcm = BigInt::one();
        for c in self.terms.values() {
            lcm = lcm.lcm(&c.denominator_lcm());
        }
        let mut g = BigInt::zero();
        for c in self.terms.values() {
            let re = (&c.re * BigRational::from_integer(lcm.clone())).to_integer();
            let im = (&c.im * BigRational::from_integer(lcm.clone())).to_integer();
            g = g.gcd(&re).gcd(&im);
            if g.is_one() {
                break;
            }
        }
        let mut factor = GaussianRational::new(BigRational::new(lcm, g), BigRational::zero());
        let lead = self.leading().unwrap().1;
        // Multiply by a unit so the leading coefficient has positive real part,
        // or zero real part and positive imaginary part.
        if lead.re.is_zero() {
            if lead.im.is_negative() {
                factor = -factor;
            }
        } else if lead.re.is_negative() {
            factor = -factor;
        }
        self.scale(&factor)
    }

    /// Divides by the lex-leading coefficient.
    pub fn monic(&self) -> Self {
        match self.leading() {
            None => self.clone(),
            Some((_, c)) => self.scale(&c.inv().unwrap()),
        }
    }

    /// Exact quotient `self / d` in the polynomial ring, if it exists.
    /// Both operands must have nonnegative exponents.
    pub fn exact_div(&self, d: &Self) -> Option<Self> {
        if d.is_zero() {
            return None;
        }
        let mut rem = self.clone();
        let mut quo = Self::zero(&self.vars);
        let (de, dc) = d.leading().map(|(e, c)| (e.clone(), c.clone()))?;
        let dc_inv = dc.inv().unwrap();
        if d.len() == 1 {
            // Monomial divisor.
            for (e, c) in &self.terms {
                let f: Exponent = e.iter().zip(&de).map(|(a, b)| a - b).collect();
                if f.iter().enumerate().any(|(i, &x)| x < 0 && !self.vars.is_laurent(i)) {
                    return None;
                }
                quo.terms.insert(f, c * &dc_inv);
            }
            return Some(quo);
        }
        while let Some((e, c)) = rem.leading().map(|(e, c)| (e.clone(), c.clone())) {
            let f: Exponent = e.iter().zip(&de).map(|(a, b)| a - b).collect();
            if f.iter().any(|&x| x < 0) {
                return None;
            }
            let q = &c * &dc_inv;
            for (e2, c2) in &d.terms {
                let g: Exponent = e2.iter().zip(&f).map(|(a, b)| a + b).collect();
                rem.add_term(g, &-(c2 * &q));
            }
            quo.terms.insert(f, q);
        }
        Some(quo)
    }

    /// Coefficients with respect to variable `i`: entry `k` multiplies
    /// `x_i^k`.  Requires nonnegative exponents in `x_i`.
    pub fn coefficients_in(&self, i: usize) -> Vec<Polynomial> {
        let d = self.degree(i).max(0) as usize;
        let mut out = vec![Self::zero(&self.vars); d + 1];
        for (e, c) in &self.terms {
            assert!(e[i] >= 0, "negative exponent in coefficient extraction");
            let mut f = e.clone();
            f[i] = 0;
            out[e[i] as usize].terms.insert(f, c.clone());
        }
        out
    }

    pub fn from_coefficients(vars: &Arc<VarSet>, i: usize, coeffs: &[Polynomial]) -> Self {
        let mut out = Self::zero(vars);
        for (k, c) in coeffs.iter().enumerate() {
            for (e, x) in &c.terms {
                let mut f = e.clone();
                f[i] += k as i32;
                out.add_term(f, x);
            }
        }
        out
    }

    /// Substitutes `x_i -> x_i^-1` (a Laurent variable).
    pub fn invert_var(&self, i: usize) -> Self {
        assert!(self.vars.is_laurent(i), "inverting a non-Laurent variable");
        Polynomial {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut f = e.clone();
                    f[i] = -f[i];
                    (f, c.clone())
                })
                .collect(),
        }
    }

    /// Re-expresses the polynomial over a larger variable set containing all
    /// current names.
    pub fn embed(&self, target: &Arc<VarSet>) -> Result<Self, PolyError> {
        let map: Vec<usize> = self
            .vars
            .names
            .iter()
            .map(|n| target.index(n))
            .collect::<Result<_, _>>()?;
        let mut out = Self::zero(target);
        for (e, c) in &self.terms {
            let mut f = vec![0; target.len()];
            for (k, &j) in map.iter().enumerate() {
                f[j] = e[k];
            }
            out.terms.insert(f, c.clone());
        }
        Ok(out)
    }

    pub fn to_json(&self) -> PolynomialJson {
        PolynomialJson {
            vars: self.vars.names.clone(),
            laurent: self.vars.laurent.clone(),
            terms: self
                .terms
                .iter()
                .map(|(e, c)| TermJson {
                    exp: e.clone(),
                    re: c.re_string(),
                    im: c.im_string(),
                })
                .collect(),
        }
    }

    pub fn from_json(j: &PolynomialJson) -> Result<Self, PolyError> {
        let laurent = if j.laurent.is_empty() {
            vec![false; j.vars.len()]
        } else {
            j.laurent.clone()
        };
        if laurent.len() != j.vars.len() {
            return Err(PolyError::Parse("laurent flags do not match variables".into()));
        }
        let vars = VarSet::new(j.vars.iter().cloned().zip(laurent));
        let terms = j
            .terms
            .iter()
            .map(|t| {
                GaussianRational::parse_parts(&t.re, &t.im)
                    .map(|c| (t.exp.clone(), c))
                    .map_err(PolyError::Parse)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_terms(&vars, terms)
    }
}

impl GaussianRational {
    pub(crate) fn scale_int(&self, k: i64) -> GaussianRational {
        let k = BigRational::from_integer(k.into());
        GaussianRational::new(&self.re * &k, &self.im * &k)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub exp: Vec<i32>,
    pub re: String,
    pub im: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolynomialJson {
    pub vars: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub laurent: Vec<bool>,
    pub terms: Vec<TermJson>,
}

impl fmt::Display for Polynomial {
    /// Plain-text notation, highest terms first: `2*m^4*l - l^-1 + 3`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            let mut coeff = c.clone();
            let negative = c.im.is_zero() && c.re.is_negative();
            if negative {
                coeff = -coeff;
            }
            if first {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if negative { "-" } else { "+" })?;
            }
            first = false;
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k != 0)
                .map(|(i, &k)| {
                    if k == 1 {
                        self.vars.names[i].clone()
                    } else {
                        format!("{}^{}", self.vars.names[i], k)
                    }
                })
                .collect();
            if mono.is_empty() {
                write!(f, "{coeff}")?;
            } else if coeff.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{}*{}", coeff, mono.join("*"))?;
            }
        }
        Ok(())
    }
}

impl<'a> Add<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn add(self, o: &Polynomial) -> Polynomial {
        self.try_add(o).expect("variable ordering mismatch")
    }
}

impl<'a> Sub<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn sub(self, o: &Polynomial) -> Polynomial {
        self.try_sub(o).expect("variable ordering mismatch")
    }
}

impl<'a> Mul<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn mul(self, o: &Polynomial) -> Polynomial {
        self.try_mul(o).expect("variable ordering mismatch")
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }
}

impl Add for Polynomial {
    type Output = Polynomial;
    fn add(self, o: Polynomial) -> Polynomial {
        &self + &o
    }
}

impl Sub for Polynomial {
    type Output = Polynomial;
    fn sub(self, o: Polynomial) -> Polynomial {
        &self - &o
    }
}

impl Mul for Polynomial {
    type Output = Polynomial;
    fn mul(self, o: Polynomial) -> Polynomial {
        &self * &o
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}
