//! Small numeric helpers over `C64`.

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex;

use crate::manifold::Word;
use crate::{Mat2, C64};

pub fn identity() -> Mat2 {
    Matrix2::identity()
}

pub fn inverse_sl2(m: &Mat2) -> Mat2 {
    Matrix2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)])
}

/// Numeric image of a word; inverses use the adjugate.
pub fn eval_word(w: &Word, gens: &[Mat2]) -> Mat2 {
    let mut acc = identity();
    for &x in w.letters() {
        let g = &gens[x.unsigned_abs() as usize - 1];
        acc *= if x > 0 { *g } else { inverse_sl2(g) };
    }
    acc
}

/// `min(|W - I|, |W + I|)` in the Frobenius norm.
pub fn distance_to_pm_identity(w: &Mat2) -> f64 {
    let i = identity();
    (w - i).norm().min((w + i).norm())
}

pub fn trace(m: &Mat2) -> C64 {
    m[(0, 0)] + m[(1, 1)]
}

/// Minimum-norm least-squares solution of `a x = b` and the ratio of the
/// smallest to largest singular value used.
pub fn least_squares(a: &DMatrix<C64>, b: &DVector<C64>) -> Option<(DVector<C64>, f64)> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if !(smax > 0.0) || !smax.is_finite() {
        return None;
    }
    let rank = a.nrows().min(a.ncols());
    let smin = svd.singular_values.iter().take(rank).cloned().fold(f64::INFINITY, f64::min);
    let x = svd.solve(b, smax * 1e-14).ok()?;
    Some((x, smin / smax))
}

/// Singular values in decreasing order.
pub fn singular_values(a: &DMatrix<C64>) -> Vec<f64> {
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().cloned().collect();
    s.sort_by(|x, y| y.partial_cmp(x).unwrap());
    s
}

/// Number of singular values above `tol` times the largest (and above `tol`
/// absolutely when the matrix is tiny).
pub fn numerical_rank(a: &DMatrix<C64>, tol: f64) -> usize {
    if a.is_empty() {
        return 0;
    }
    let s = singular_values(a);
    let smax = s[0];
    s.iter().filter(|&&x| x > tol * smax.max(1.0)).count()
}

pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}
