use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::scalar::Scalar;

/// Exact element of `Q(i)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussianRational { re, im }
    }

    pub fn from_ints(re: i64, im: i64) -> Self {
        GaussianRational {
            re: BigRational::from_integer(re.into()),
            im: BigRational::from_integer(im.into()),
        }
    }

    pub fn from_int(x: i64) -> Self {
        Self::from_ints(x, 0)
    }

    pub fn i() -> Self {
        Self::from_ints(0, 1)
    }

    pub fn conj(&self) -> Self {
        GaussianRational::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sqr();
        Some(GaussianRational::new(&self.re / &n, -(&self.im / &n)))
    }

    pub fn is_integral(&self) -> bool {
        self.re.is_integer() && self.im.is_integer()
    }

    pub fn to_complex<T: Scalar>(&self) -> Complex<T> {
        Complex::new(ratio_to_scalar(&self.re), ratio_to_scalar(&self.im))
    }

    /// Positive when the leading nonzero part (real first) is positive.
    pub fn is_canonical_sign(&self) -> bool {
        if !self.re.is_zero() {
            self.re.is_positive()
        } else {
            self.im.is_positive()
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = GaussianRational::one();
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

    pub(crate) fn denominator_lcm(&self) -> BigInt {
        self.re.denom().lcm(self.im.denom())
    }
}

fn ratio_to_scalar<T: Scalar>(r: &BigRational) -> T {
    // Direct f64 conversion overflows for huge numerators and denominators,
    // so scale both by a shared power of two first.
    let n = r.numer();
    let d = r.denom();
    let shift = n.bits().max(d.bits()).saturating_sub(1000) as usize;
    let nf = (n >> shift).to_f64().unwrap_or(f64::NAN);
    let df = (d >> shift).to_f64().unwrap_or(f64::NAN);
    T::lit(nf / df)
}

fn parse_ratio(s: &str) -> Result<BigRational, String> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|e| e.to_string())?;
            let d = BigInt::from_str(d.trim()).map_err(|e| e.to_string())?;
            if d.is_zero() {
                return Err("zero denominator".into());
            }
            Ok(BigRational::new(n, d))
        }
        None => BigInt::from_str(s)
            .map(BigRational::from_integer)
            .map_err(|e| e.to_string()),
    }
}

pub(crate) fn ratio_string(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl GaussianRational {
    pub fn parse_parts(re: &str, im: &str) -> Result<Self, String> {
        Ok(GaussianRational::new(parse_ratio(re)?, parse_ratio(im)?))
    }

    pub fn re_string(&self) -> String {
        ratio_string(&self.re)
    }

    pub fn im_string(&self) -> String {
        ratio_string(&self.im)
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", ratio_string(&self.re)),
            (true, false) => write!(f, "{}*I", ratio_string(&self.im)),
            (false, false) => write!(
                f,
                "({}{}{}*I)",
                ratio_string(&self.re),
                if self.im.is_negative() { "-" } else { "+" },
                ratio_string(&self.im.abs())
            ),
        }
    }
}

impl Zero for GaussianRational {
    fn zero() -> Self {
        GaussianRational::new(BigRational::zero(), BigRational::zero())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for GaussianRational {
    fn one() -> Self {
        GaussianRational::new(BigRational::one(), BigRational::zero())
    }
}

impl<'a> Add<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn add(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl<'a> Sub<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn sub(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl<'a> Mul<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn mul(self, o: &GaussianRational) -> GaussianRational {
        if self.im.is_zero() && o.im.is_zero() {
            return GaussianRational::new(&self.re * &o.re, BigRational::zero());
        }
        GaussianRational::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
}

impl<'a> Div<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn div(self, o: &GaussianRational) -> GaussianRational {
        self * &o.inv().expect("division by zero Gaussian rational")
    }
}

impl Add for GaussianRational {
    type Output = GaussianRational;
    fn add(self, o: Self) -> Self {
        &self + &o
    }
}

impl Sub for GaussianRational {
    type Output = GaussianRational;
    fn sub(self, o: Self) -> Self {
        &self - &o
    }
}

impl Mul for GaussianRational {
    type Output = GaussianRational;
    fn mul(self, o: Self) -> Self {
        &self * &o
    }
}

impl Div for GaussianRational {
    type Output = GaussianRational;
    fn div(self, o: Self) -> Self {
        &self / &o
    }
}

impl Neg for GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> Self {
        GaussianRational::new(-self.re, -self.im)
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::new(-self.re.clone(), -self.im.clone())
    }
}

impl AddAssign<&GaussianRational> for GaussianRational {
    fn add_assign(&mut self, o: &GaussianRational) {
        self.re += &o.re;
        self.im += &o.im;
    }
}

impl SubAssign<&GaussianRational> for GaussianRational {
    fn sub_assign(&mut self, o: &GaussianRational) {
        self.re -= &o.re;
        self.im -= &o.im;
    }
}
