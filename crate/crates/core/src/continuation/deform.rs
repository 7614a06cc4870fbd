//! The square system tracked along deformations.
//!
//! Unknowns are the slice coordinates `x` followed, for every active cusp,
//! by a common eigenvector `w` of `rho(M_i)`, `rho(L_i)` and the log
//! eigenvalues `(u_i, v_i)`.  Equations are the relator entries,
//! `(rho(M_i) - e^u) w = 0`, `(rho(L_i) - e^v) w = 0`, a normalisation
//! `c_i . w = 1` and one control equation per active cusp.  A held cusp
//! stays parabolic through `I_{M_i}(x) = 2 m0_i` and carries no extra
//! unknowns.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use super::ContinuationError;
use crate::linalg::{c, trace};
use crate::repvar::{CharacterPoint, GaugedSystem, Orientation};
use crate::scalar::log_near;
use crate::C64;

/// One scalar constraint per active cusp, parametrised by `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Control {
    /// `p (u - u0) + q (v - v0) = t pi i`.
    Filling { p: f64, q: f64, u0: C64, v0: C64 },
    /// `u = start + (end - start) t`.
    LogSegment { start: C64, end: C64 },
    /// `u = center + a cos(2 pi t) + b sin(2 pi t)`.
    LogEllipse { center: C64, a: C64, b: C64 },
    /// `e^u + e^-u = start + (end - start) t`.
    TraceSegment { start: C64, end: C64 },
    /// `e^u + e^-u = center + a cos(2 pi t) + b sin(2 pi t)`.
    TraceEllipse { center: C64, a: C64, b: C64 },
}

impl Control {
    /// `(value, d/du, d/dv, d/dt)`.
    fn eval(&self, u: C64, v: C64, t: f64) -> (C64, C64, C64, C64) {
        let zero = c(0.0, 0.0);
        let w = 2.0 * PI;
        match *self {
            Control::Filling { p, q, u0, v0 } => {
                let ipi = c(0.0, PI);
                ((u - u0) * p + (v - v0) * q - ipi * t, c(p, 0.0), c(q, 0.0), -ipi)
            }
            Control::LogSegment { start, end } => (u - start - (end - start) * t, c(1.0, 0.0), zero, start - end),
            Control::LogEllipse { center, a, b } => {
                let (s, co) = (w * t).sin_cos();
                (u - center - a * co - b * s, c(1.0, 0.0), zero, -(b * co - a * s) * w)
            }
            Control::TraceSegment { start, end } => {
                let e = u.exp();
                (e + 1.0 / e - start - (end - start) * t, e - 1.0 / e, zero, start - end)
            }
            Control::TraceEllipse { center, a, b } => {
                let e = u.exp();
                let (s, co) = (w * t).sin_cos();
                (e + 1.0 / e - center - a * co - b * s, e - 1.0 / e, zero, -(b * co - a * s) * w)
            }
        }
    }
}

/// How a cusp enters the tracked system.
#[derive(Clone, Debug, PartialEq)]
pub enum CuspMode {
    Active(Control),
    /// Parabolic with the given lifts `(u0, v0)`.
    Held { u0: C64, v0: C64 },
}

/// Unknown vector plus the per-cusp normalisation covectors.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub z: Vec<C64>,
    pub frames: Vec<[C64; 2]>,
}

pub struct Deformation<'a> {
    pub gs: &'a GaugedSystem,
    pub modes: Vec<CuspMode>,
    offsets: Vec<Option<usize>>,
    nunknowns: usize,
}

impl<'a> Deformation<'a> {
    pub fn new(gs: &'a GaugedSystem, modes: Vec<CuspMode>) -> Self {
        assert_eq!(modes.len(), gs.cusp_count(), "one mode per cusp");
        let mut off = gs.nvars();
        let offsets = modes
            .iter()
            .map(|m| match m {
                CuspMode::Active(_) => {
                    let o = off;
                    off += 4;
                    Some(o)
                }
                CuspMode::Held { .. } => None,
            })
            .collect();
        Deformation {
            gs,
            modes,
            offsets,
            nunknowns: off,
        }
    }

    pub fn nunknowns(&self) -> usize {
        self.nunknowns
    }

    pub fn active(&self) -> impl Iterator<Item = (usize, usize, &Control)> + '_ {
        self.modes.iter().enumerate().filter_map(|(i, m)| match m {
            CuspMode::Active(ctl) => Some((i, self.offsets[i].expect("active"), ctl)),
            CuspMode::Held { .. } => None,
        })
    }

    /// Per-cusp `(u, v)` at a state.
    pub fn logs(&self, z: &[C64]) -> Vec<(C64, C64)> {
        self.modes
            .iter()
            .zip(&self.offsets)
            .map(|(m, o)| match (m, o) {
                (CuspMode::Held { u0, v0 }, _) => (*u0, *v0),
                (_, Some(o)) => (z[o + 2], z[o + 3]),
                _ => unreachable!(),
            })
            .collect()
    }

    pub fn to_point(&self, st: &State, orientation: Orientation) -> CharacterPoint {
        let n = self.gs.nvars();
        self.gs.point(st.z[..n].to_vec(), &self.logs(&st.z), orientation)
    }

    /// Residual, Jacobian and `t`-derivative of the system.
    pub fn eval(&self, st: &State, t: f64) -> (DVector<C64>, DMatrix<C64>, DVector<C64>) {
        self.eval_z(&st.z, &st.frames, t)
    }

    pub fn eval_z(&self, z: &[C64], frames: &[[C64; 2]], t: f64) -> (DVector<C64>, DMatrix<C64>, DVector<C64>) {
        let n = self.gs.nvars();
        let x = &z[..n];
        let (rv, rj, scale) = self.gs.relator_system().eval_scaled(x);
        let (pv, pj) = self.gs.peripheral_system().eval_with_jacobian(x);
        let nact = self.offsets.iter().filter(|o| o.is_some()).count();
        let nheld = self.modes.len() - nact;
        let rows = rv.len() + nheld + 6 * nact;
        let mut f = DVector::zeros(rows);
        let mut j = DMatrix::zeros(rows, self.nunknowns);
        let mut ft = DVector::zeros(rows);
        // Relator rows are weighted by their term scale so tolerances are
        // relative to cancellation error.
        for (r, val) in rv.iter().enumerate() {
            f[r] = *val / scale[r];
            for k in 0..n {
                j[(r, k)] = rj[(r, k)] / scale[r];
            }
        }
        let mut row = rv.len();
        let mut active_idx = 0;
        for (i, mode) in self.modes.iter().enumerate() {
            let b = 8 * i;
            match mode {
                CuspMode::Held { u0, .. } => {
                    let target = u0.exp() + (-*u0).exp();
                    f[row] = pv[b] + pv[b + 3] - target;
                    for k in 0..n {
                        j[(row, k)] = pj[(b, k)] + pj[(b + 3, k)];
                    }
                    row += 1;
                }
                CuspMode::Active(ctl) => {
                    let o = self.offsets[i].expect("active");
                    let w = [z[o], z[o + 1]];
                    let (u, v) = (z[o + 2], z[o + 3]);
                    for (sub, lam, lam_col) in [(0usize, u.exp(), o + 2), (4usize, v.exp(), o + 3)] {
                        let e = |q: usize| pv[b + sub + q];
                        let de = |q: usize, k: usize| pj[(b + sub + q, k)];
                        // Row 0: e0 w0 + e1 w1 - lam w0; row 1: e2 w0 + e3 w1 - lam w1.
                        f[row] = e(0) * w[0] + e(1) * w[1] - lam * w[0];
                        f[row + 1] = e(2) * w[0] + e(3) * w[1] - lam * w[1];
                        for k in 0..n {
                            j[(row, k)] = de(0, k) * w[0] + de(1, k) * w[1];
                            j[(row + 1, k)] = de(2, k) * w[0] + de(3, k) * w[1];
                        }
                        j[(row, o)] = e(0) - lam;
                        j[(row, o + 1)] = e(1);
                        j[(row + 1, o)] = e(2);
                        j[(row + 1, o + 1)] = e(3) - lam;
                        j[(row, lam_col)] = -lam * w[0];
                        j[(row + 1, lam_col)] = -lam * w[1];
                        row += 2;
                    }
                    let fr = frames[active_idx];
                    f[row] = fr[0] * w[0] + fr[1] * w[1] - 1.0;
                    j[(row, o)] = fr[0];
                    j[(row, o + 1)] = fr[1];
                    row += 1;
                    let (cv, du, dv, dt) = ctl.eval(u, v, t);
                    f[row] = cv;
                    j[(row, o + 2)] = du;
                    j[(row, o + 3)] = dv;
                    ft[row] = dt;
                    row += 1;
                    active_idx += 1;
                }
            }
        }
        (f, j, ft)
    }

    /// Whether some active cusp has both peripheral traces at `+-2`.  Held
    /// cusps are parabolic by construction and do not count.
    pub fn active_on_v(&self, pt: &CharacterPoint, tol: f64) -> bool {
        let four = c(4.0, 0.0);
        self.active().any(|(i, _, _)| {
            let t = &pt.traces[i];
            (t.meridian * t.meridian - four).norm() < tol && (t.longitude * t.longitude - four).norm() < tol
        })
    }

    /// Rescale each eigenvector to unit length and reset its frame.
    pub fn renormalise(&self, st: &mut State) {
        for (k, (_, o, _)) in self.active().enumerate() {
            let w = Vector2::new(st.z[o], st.z[o + 1]);
            let nw = w.norm();
            let w = w / c(nw, 0.0);
            st.z[o] = w[0];
            st.z[o + 1] = w[1];
            st.frames[k] = [w[0].conj(), w[1].conj()];
        }
    }

    /// Build a state from slice coordinates and reference lifts.  The
    /// eigenvector is taken from whichever peripheral matrix is farther
    /// from parabolic, matched to the reference eigenvalue.
    pub fn state_from(&self, x: &[C64], logs: &[(C64, C64)]) -> Result<State, ContinuationError> {
        let mut z = x.to_vec();
        z.resize(self.nunknowns, c(0.0, 0.0));
        let mut frames = Vec::new();
        let mats = self.gs.peripheral_matrices(x);
        for (i, o, _) in self.active() {
            let (m, l) = mats[i];
            let (u_ref, v_ref) = logs[i];
            let (w, mu, lu) = common_eigenvector(&m, &l, u_ref.exp(), v_ref.exp())
                .ok_or(ContinuationError::Degenerate { cusp: i })?;
            z[o] = w[0];
            z[o + 1] = w[1];
            z[o + 2] = log_near(mu, u_ref);
            z[o + 3] = log_near(lu, v_ref);
            frames.push([w[0].conj(), w[1].conj()]);
        }
        Ok(State { z, frames })
    }
}

/// Unit common eigenvector of commuting `m`, `l` chosen from the less
/// degenerate matrix, with its two Rayleigh-quotient eigenvalues.
pub fn common_eigenvector(m: &Matrix2<C64>, l: &Matrix2<C64>, m_ref: C64, l_ref: C64) -> Option<(Vector2<C64>, C64, C64)> {
    let dm = (trace(m) * trace(m) - 4.0).norm();
    let dl = (trace(l) * trace(l) - 4.0).norm();
    let (a, target) = if dm >= dl { (m, m_ref) } else { (l, l_ref) };
    let tr = trace(a);
    let disc = (tr * tr - 4.0).sqrt();
    let e1 = (tr + disc) / 2.0;
    let e2 = (tr - disc) / 2.0;
    let lam = if (e1 - target).norm() <= (e2 - target).norm() { e1 } else { e2 };
    let (p, q, r, s) = (a[(0, 0)] - lam, a[(0, 1)], a[(1, 0)], a[(1, 1)] - lam);
    let w = if p.norm() + q.norm() >= r.norm() + s.norm() {
        Vector2::new(q, -p)
    } else {
        Vector2::new(s, -r)
    };
    let nw = w.norm();
    if !(nw > 1e-300) {
        return None;
    }
    let w = w / c(nw, 0.0);
    let rq = |b: &Matrix2<C64>| (w.adjoint() * b * w)[(0, 0)];
    Some((w, rq(m), rq(l)))
}
