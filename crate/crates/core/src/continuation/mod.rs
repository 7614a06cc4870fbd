//! Path tracking on the gauge slice, Dehn filling and fiber counting.

mod deform;
mod fiber;
mod filling;
mod jacobian;
mod loops;
mod newton;
mod track;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

pub use deform::{common_eigenvector, Control, CuspMode, Deformation, State};
pub use fiber::{fiber_over, FiberOptions, FiberPoint, FiberReport, FiberSource, FiberStatus, TwistPair};
pub use filling::{filling_modes, sample_dense_set, solve_filling, DenseSample, FillingCoefficients, FillingResult};
pub use jacobian::{deformation_jacobian_check, fd_compare, jacobian_check, JacobianReport, FD_STEP, JACOBIAN_TOL};
pub use loops::{
    exactness_loops, log_loop_deformation, log_segment_round_trip, random_log_ellipses, track_loop, ClosedLoop, Ellipse,
    RoundTrip,
};
pub use newton::{levenberg_marquardt, newton_correct, newton_with, NewtonReport, MAX_CONDITION};
pub use track::{bootstrap, correct, tangent, track, PathSample, TrackOptions, TrackedPath};

use crate::linalg::c;
use crate::repvar::GaugedSystem;
use crate::C64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContinuationError {
    #[error("Jacobian condition number {condition:.3e} exceeds the threshold")]
    Singular { condition: f64 },
    #[error("Newton diverged (residual {residual:.3e})")]
    Divergence { residual: f64 },
    #[error("step size fell to {step:.3e} at t = {t}")]
    MinStep { t: f64, step: f64 },
    #[error("start point does not satisfy the system at t = {t}")]
    StartOffPath { t: f64 },
    #[error("interior sample at t = {t} lies on V")]
    OnV { t: f64 },
    #[error("cusp {cusp}: peripheral matrices have no distinguished eigenvector")]
    Degenerate { cusp: usize },
    #[error("could not leave the parabolic point")]
    Bootstrap,
    #[error("{0}")]
    Other(String),
}

/// Seeded random slice coordinates for multistart.
pub fn random_starts(nvars: usize, count: usize, seed: u64) -> Vec<Vec<C64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            (0..nvars)
                .map(|_| c(rng.random::<f64>() * 4.0 - 2.0, rng.random::<f64>() * 4.0 - 2.0))
                .collect()
        })
        .collect()
}

/// Relators plus `I_{M_i}^2 - 4` on slice coordinates.
fn parabolic_system(gs: &GaugedSystem, x: &[C64]) -> (DVector<C64>, nalgebra::DMatrix<C64>) {
    let (rv, rj, scale) = gs.relator_system().eval_scaled(x);
    let (pv, pj) = gs.peripheral_system().eval_with_jacobian(x);
    let h = gs.cusp_count();
    let n = gs.nvars();
    let rows = rv.len() + h;
    let mut f = DVector::zeros(rows);
    let mut j = nalgebra::DMatrix::zeros(rows, n);
    for (r, v) in rv.iter().enumerate() {
        f[r] = *v / scale[r];
        for k in 0..n {
            j[(r, k)] = rj[(r, k)] / scale[r];
        }
    }
    for i in 0..h {
        let tr = pv[8 * i] + pv[8 * i + 3];
        let r = rv.len() + i;
        f[r] = tr * tr - 4.0;
        for k in 0..n {
            j[(r, k)] = tr * 2.0 * (pj[(8 * i, k)] + pj[(8 * i + 3, k)]);
        }
    }
    (f, j)
}

/// Refine candidate complete structures.  Convergence is only linear where
/// the slice is branched over the character variety.
pub fn refine_parabolic(gs: &GaugedSystem, starts: &[Vec<C64>], tol: f64) -> Vec<Option<Vec<C64>>> {
    starts
        .par_iter()
        .map(|x| {
            let f = |z: &[C64]| parabolic_system(gs, z);
            let z = levenberg_marquardt(&f, x, 1e-6, 500)?;
            if z[..2].iter().any(|w| w.norm() < 1e-8 || !w.is_finite()) {
                return None;
            }
            let rep = newton_with(&f, &z, tol, 200, None).ok()?;
            // tol applies to term-scaled rows
            Some(rep.point)
        })
        .collect()
}

/// Cusp shapes `(v_i - v0_i)/(u_i - u0_i)` from a nearby deformation.
pub fn cusp_shapes(gs: &GaugedSystem, x: &[C64], logs: &[(C64, C64)]) -> Result<Vec<C64>, ContinuationError> {
    let delta = 1e-5;
    let targets: Vec<(C64, C64)> = logs
        .iter()
        .enumerate()
        .map(|(i, &(u0, v0))| (u0 + c(0.0, 0.7 + 0.3 * i as f64).exp() * delta, v0))
        .collect();
    let modes = targets
        .iter()
        .map(|&(u, _)| CuspMode::Active(Control::LogSegment { start: u, end: u }))
        .collect();
    let def = Deformation::new(gs, modes);
    let st = bootstrap(&def, x, logs, &targets, 0.0, 1e-11, 7)?;
    Ok(def
        .logs(&st.z)
        .iter()
        .zip(logs)
        .map(|(&(u, v), &(u0, v0))| (v - v0) / (u - u0))
        .collect())
}
