//! Scalar abstractions shared by the numeric layers.
//!
//! Exact work (ideal construction, elimination) happens over
//! [`GaussianRational`](crate::polysys::GaussianRational); everything that
//! evaluates, integrates or tracks is written against [`Scalar`] so the same
//! code runs in `f32` or `f64`.  Path tracking and certification are pinned to
//! `f64` through the aliases at the crate root.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from `f64`; used for literal constants.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Complex number over a [`Scalar`].
pub type ComplexOf<T> = Complex<T>;

/// Numerically stable `log` of a complex number with the branch picked
/// closest to `reference` (continuation of the argument).
pub fn log_near<T: Scalar>(z: Complex<T>, reference: Complex<T>) -> Complex<T> {
    let principal = z.ln();
    let two_pi = T::PI() + T::PI();
    let turns = ((reference.im - principal.im) / two_pi).round();
    Complex::new(principal.re, principal.im + turns * two_pi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_near_picks_nearest_branch() {
        let z = Complex::new(-1.0f64, 1e-12);
        let w = log_near(z, Complex::new(0.0, 3.0 * std::f64::consts::PI));
        assert!((w.im - 3.0 * std::f64::consts::PI).abs() < 1e-9);
        let z32 = Complex::new(1.0f32, 0.0);
        let w32 = log_near(z32, Complex::new(0.0, -6.0));
        assert!((w32.im + 2.0 * std::f32::consts::PI).abs() < 1e-5);
    }
}
