use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::ContinuationError;
use crate::linalg;
use crate::polysys::{CompiledSystem, PolySystem};
use crate::C64;

#[derive(Clone, Debug, Serialize)]
pub struct NewtonReport {
    pub point: Vec<C64>,
    pub residual: f64,
    pub iterations: usize,
    /// Some step satisfied `r_{k+1} <= 10 r_k^2` or the start was exact.
    pub quadratic: bool,
    /// Ratio of largest to smallest singular value at the start.
    pub condition: f64,
    pub history: Vec<f64>,
}

/// Jacobian condition threshold for [`newton_correct`].
pub const MAX_CONDITION: f64 = 1e8;

fn max_abs(v: &DVector<C64>) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Newton's method with least-squares steps on a (possibly overdetermined,
/// consistent) polynomial system.
pub fn newton_correct(system: &PolySystem, start: &[C64], tol: f64) -> Result<NewtonReport, ContinuationError> {
    let compiled = CompiledSystem::new(&system.polynomials, system.vars.len());
    let f = |z: &[C64]| {
        let (v, j) = compiled.eval_with_jacobian(z);
        (DVector::from_vec(v), j)
    };
    newton_with(&f, start, tol, 40, Some(MAX_CONDITION))
}

/// Newton iteration on an arbitrary residual map.  `max_condition` guards
/// against singular starts; `None` skips the check.
pub fn newton_with<F>(
    f: &F,
    start: &[C64],
    tol: f64,
    max_iter: usize,
    max_condition: Option<f64>,
) -> Result<NewtonReport, ContinuationError>
where
    F: Fn(&[C64]) -> (DVector<C64>, DMatrix<C64>),
{
    let mut z = start.to_vec();
    let (mut fv, mut j) = f(&z);
    let mut r = max_abs(&fv);
    let sv = linalg::singular_values(&j);
    let rank = j.nrows().min(j.ncols());
    let condition = if rank == 0 { 1.0 } else { sv[0] / sv[rank - 1] };
    if r < tol && !r.is_nan() {
        return Ok(NewtonReport {
            point: z,
            residual: r,
            iterations: 0,
            quadratic: true,
            condition,
            history: vec![r],
        });
    }
    if let Some(cmax) = max_condition {
        if !(condition < cmax) {
            return Err(ContinuationError::Singular { condition });
        }
    }
    let mut history = vec![r];
    for it in 1..=max_iter {
        let (dz, _) = linalg::least_squares(&j, &(-&fv)).ok_or(ContinuationError::Divergence { residual: r })?;
        for (zi, d) in z.iter_mut().zip(dz.iter()) {
            *zi += d;
        }
        let next = f(&z);
        fv = next.0;
        j = next.1;
        r = max_abs(&fv);
        history.push(r);
        if !r.is_finite() {
            return Err(ContinuationError::Divergence { residual: r });
        }
        let step = dz.norm();
        let scale = 1.0 + z.iter().map(|w| w.norm()).fold(0.0, f64::max);
        if r < tol && step < 1e-10 * scale {
            let quadratic = history.windows(2).any(|w| w[1] <= 10.0 * w[0] * w[0]);
            return Ok(NewtonReport {
                point: z,
                residual: r,
                iterations: it,
                quadratic,
                condition,
                history,
            });
        }
    }
    if r < tol {
        let quadratic = history.windows(2).any(|w| w[1] <= 10.0 * w[0] * w[0]);
        return Ok(NewtonReport {
            point: z,
            residual: r,
            iterations: max_iter,
            quadratic,
            condition,
            history,
        });
    }
    Err(ContinuationError::Divergence { residual: r })
}

/// Levenberg-Marquardt minimisation of `|F|^2`; returns the point once the
/// residual drops below `tol`.
pub fn levenberg_marquardt<F>(f: &F, start: &[C64], tol: f64, max_iter: usize) -> Option<Vec<C64>>
where
    F: Fn(&[C64]) -> (DVector<C64>, DMatrix<C64>),
{
    let mut z = start.to_vec();
    let (mut fv, mut j) = f(&z);
    let mut r = fv.norm();
    let mut lambda = 1e-3;
    for _ in 0..max_iter {
        if max_abs(&fv) < tol {
            return Some(z);
        }
        let jh = j.adjoint();
        let a = &jh * &j;
        let g = &jh * &fv;
        let mut damped = a.clone();
        for i in 0..damped.nrows() {
            let d = a[(i, i)].re.max(1e-12);
            damped[(i, i)] += C64::new(lambda * d, 0.0);
        }
        let Some(dz) = damped.lu().solve(&(-g)) else {
            lambda *= 10.0;
            continue;
        };
        let trial: Vec<C64> = z.iter().zip(dz.iter()).map(|(a, b)| a + b).collect();
        let (ft, jt) = f(&trial);
        let rt = ft.norm();
        if rt.is_finite() && rt < r {
            z = trial;
            fv = ft;
            j = jt;
            r = rt;
            lambda = (lambda / 10.0).max(1e-15);
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                return None;
            }
        }
    }
    (max_abs(&fv) < tol).then_some(z)
}
