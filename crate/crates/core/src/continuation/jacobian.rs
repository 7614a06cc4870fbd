use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::deform::{Deformation, State};
use super::ContinuationError;
use crate::linalg::c;
use crate::polysys::{CompiledSystem, PolySystem};
use crate::C64;

pub const FD_STEP: f64 = 1e-6;
pub const JACOBIAN_TOL: f64 = 1e-5;

/// Analytic Jacobian against central differences.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JacobianReport {
    pub rows: usize,
    pub cols: usize,
    pub step: f64,
    /// Largest `|J_fd - J| / max(1, |J|)` over all entries.
    pub max_rel_error: f64,
    pub worst_entry: (usize, usize),
    pub passed: bool,
}

/// Compares the Jacobian returned by `f` with central differences along the
/// real axis of each coordinate (the maps are holomorphic, so one direction
/// suffices).
pub fn fd_compare<F>(f: F, x: &[C64], step: f64) -> JacobianReport
where
    F: Fn(&[C64]) -> (DVector<C64>, DMatrix<C64>),
{
    let (_, j) = f(x);
    let mut worst = (0.0f64, (0, 0));
    let mut xp = x.to_vec();
    for k in 0..x.len() {
        xp[k] = x[k] + step;
        let (fp, _) = f(&xp);
        xp[k] = x[k] - step;
        let (fm, _) = f(&xp);
        xp[k] = x[k];
        for r in 0..j.nrows() {
            let fd = (fp[r] - fm[r]) / c(2.0 * step, 0.0);
            let err = (fd - j[(r, k)]).norm() / j[(r, k)].norm().max(1.0);
            if err > worst.0 {
                worst = (err, (r, k));
            }
        }
    }
    JacobianReport {
        rows: j.nrows(),
        cols: j.ncols(),
        step,
        max_rel_error: worst.0,
        worst_entry: worst.1,
        passed: worst.0 < JACOBIAN_TOL,
    }
}

/// Checks the compiled gradients of a polynomial system.
pub fn jacobian_check(system: &PolySystem, x: &[C64]) -> Result<JacobianReport, ContinuationError> {
    if x.len() != system.vars.len() {
        return Err(ContinuationError::Other(format!(
            "point has {} coordinates, system has {} variables",
            x.len(),
            system.vars.len()
        )));
    }
    let compiled = CompiledSystem::new(&system.polynomials, system.vars.len());
    let report = fd_compare(
        |y| {
            let (f, j) = compiled.eval_with_jacobian(y);
            (DVector::from_vec(f), j)
        },
        x,
        FD_STEP,
    );
    finish(report)
}

/// Checks the tracked system in its unknowns and its `t`-derivative (the
/// last column of the report).
pub fn deformation_jacobian_check(def: &Deformation, st: &State, t: f64) -> Result<JacobianReport, ContinuationError> {
    let n = st.z.len();
    let mut y = st.z.clone();
    y.push(c(t, 0.0));
    let report = fd_compare(
        |y| {
            let (f, j, ft) = def.eval_z(&y[..n], &st.frames, y[n].re);
            let mut full = DMatrix::zeros(j.nrows(), n + 1);
            full.view_mut((0, 0), (j.nrows(), n)).copy_from(&j);
            full.set_column(n, &ft);
            (f, full)
        },
        &y,
        FD_STEP,
    );
    finish(report)
}

fn finish(report: JacobianReport) -> Result<JacobianReport, ContinuationError> {
    if report.passed {
        Ok(report)
    } else {
        Err(ContinuationError::Other(format!(
            "Jacobian mismatch {:.3e} at entry {:?}",
            report.max_rel_error, report.worst_entry
        )))
    }
}
