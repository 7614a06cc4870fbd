//! Character varieties, eigenvalue varieties and the volume differential of
//! cusped hyperbolic 3-manifolds given by finite presentations.
//!
//! The exact layer ([`polysys`]) builds the representation and extended
//! ideals over `Q(i)` and eliminates to eigenvalue-variety equations.  The
//! numeric layer tracks points on a gauge slice of the representation
//! variety ([`continuation`]), integrates the volume 1-form along tracked
//! paths ([`volume`]) and counts fibers of the restriction map.

pub mod continuation;
pub mod eigenvar;
pub mod linalg;
pub mod manifold;
pub mod polysys;
pub mod repvar;
pub mod scalar;
pub mod volume;

pub use scalar::{ComplexOf, Scalar};

/// Real scalar used by the numeric pipeline.
pub type Real = f64;
/// Complex scalar used by the numeric pipeline.
pub type C64 = num_complex::Complex<f64>;
/// Numeric 2x2 complex matrix.
pub type Mat2 = nalgebra::Matrix2<C64>;
/// Exact polynomial over the Gaussian rationals.
pub type Poly = polysys::Polynomial;
