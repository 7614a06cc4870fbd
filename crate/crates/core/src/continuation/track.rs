use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::deform::{common_eigenvector, Deformation, State};
use super::newton::levenberg_marquardt;
use super::ContinuationError;
use crate::linalg::{self, c};
use crate::repvar::{on_v, CharacterPoint, Orientation};
use crate::C64;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrackOptions {
    /// Uniform sample intervals on `[t0, t1]`.
    pub intervals: usize,
    /// Residual tolerance at every sample.
    pub tol: f64,
    pub min_step: f64,
    pub max_corrector: usize,
    pub max_steps: usize,
}

impl Default for TrackOptions {
    fn default() -> Self {
        TrackOptions {
            intervals: 128,
            tol: 1e-10,
            min_step: 1e-9,
            max_corrector: 6,
            max_steps: 500_000,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PathSample {
    pub t: f64,
    pub point: CharacterPoint,
    /// `du_i/dt`, `dv_i/dt` per cusp.
    pub du: Vec<C64>,
    pub dv: Vec<C64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrackedPath {
    pub samples: Vec<PathSample>,
    pub steps: usize,
    pub rejected: usize,
    pub smallest_step: f64,
    pub start_on_v: bool,
    pub end_on_v: bool,
}

impl TrackedPath {
    pub fn first(&self) -> &CharacterPoint {
        &self.samples[0].point
    }

    pub fn last(&self) -> &CharacterPoint {
        &self.samples.last().expect("nonempty path").point
    }

    /// Concatenate, dropping the duplicated junction sample.
    pub fn join(mut self, other: TrackedPath) -> TrackedPath {
        let mut rest = other.samples.into_iter();
        if !self.samples.is_empty() {
            rest.next();
        }
        self.samples.extend(rest);
        self.steps += other.steps;
        self.rejected += other.rejected;
        self.smallest_step = self.smallest_step.min(other.smallest_step);
        self.end_on_v = other.end_on_v;
        self
    }

    pub fn reversed(&self) -> TrackedPath {
        let mut samples = self.samples.clone();
        samples.reverse();
        for s in &mut samples {
            for d in s.du.iter_mut().chain(s.dv.iter_mut()) {
                *d = -*d;
            }
        }
        let t_end = self.samples.last().map(|s| s.t).unwrap_or(0.0);
        let t_start = self.samples.first().map(|s| s.t).unwrap_or(0.0);
        for s in &mut samples {
            s.t = t_start + t_end - s.t;
        }
        TrackedPath {
            samples,
            start_on_v: self.end_on_v,
            end_on_v: self.start_on_v,
            ..self.clone()
        }
    }
}

fn max_abs(v: &DVector<C64>) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn inf_norm(z: &[C64]) -> f64 {
    z.iter().map(|w| w.norm()).fold(0.0, f64::max)
}

/// `dz/dt` from `J dz = -H_t`.
pub fn tangent(def: &Deformation, st: &State, t: f64) -> Result<DVector<C64>, ContinuationError> {
    let (_, j, ft) = def.eval(st, t);
    let (dz, ratio) = linalg::least_squares(&j, &(-ft)).ok_or(ContinuationError::Singular { condition: f64::INFINITY })?;
    if ratio < 1e-13 {
        return Err(ContinuationError::Singular { condition: 1.0 / ratio });
    }
    Ok(dz)
}

/// Newton corrector at fixed `t`.  Returns the iteration count.
pub fn correct(def: &Deformation, st: &mut State, t: f64, tol: f64, max_iter: usize) -> Option<usize> {
    let mut prev = f64::INFINITY;
    let (mut f, mut j, _) = def.eval(st, t);
    for it in 0..max_iter {
        if !max_abs(&f).is_finite() {
            return None;
        }
        let (dz, _) = linalg::least_squares(&j, &(-&f))?;
        let step = dz.norm();
        for (z, d) in st.z.iter_mut().zip(dz.iter()) {
            *z += d;
        }
        (f, j, _) = def.eval(st, t);
        let small = 1e-9 * (1.0 + inf_norm(&st.z));
        if step < small && max_abs(&f) < tol {
            return Some(it + 1);
        }
        if it > 0 && step > 0.5 * prev && step > small {
            return None;
        }
        prev = step;
    }
    (max_abs(&f) < tol).then_some(max_iter)
}

fn branch_jump(def: &Deformation, a: &[C64], b: &[C64]) -> bool {
    def.logs(a)
        .iter()
        .zip(def.logs(b))
        .any(|(p, q)| (p.0.im - q.0.im).abs() >= std::f64::consts::FRAC_PI_2 || (p.1.im - q.1.im).abs() >= std::f64::consts::FRAC_PI_2)
}

fn sample(def: &Deformation, st: &State, t: f64, orientation: Orientation) -> Result<PathSample, ContinuationError> {
    let dz = tangent(def, st, t)?;
    let h = def.gs.cusp_count();
    let mut du = vec![c(0.0, 0.0); h];
    let mut dv = vec![c(0.0, 0.0); h];
    for (i, o, _) in def.active() {
        du[i] = dz[o + 2];
        dv[i] = dz[o + 3];
    }
    Ok(PathSample {
        t,
        point: def.to_point(st, orientation),
        du,
        dv,
    })
}

/// Predictor-corrector tracking from `t0` to `t1` with samples on a uniform
/// grid and adaptive substeps between grid points.
pub fn track(
    def: &Deformation,
    start: &State,
    t0: f64,
    t1: f64,
    opts: &TrackOptions,
    orientation: Orientation,
) -> Result<(TrackedPath, State), ContinuationError> {
    let mut st = start.clone();
    def.renormalise(&mut st);
    if correct(def, &mut st, t0, opts.tol, 2 * opts.max_corrector).is_none() {
        return Err(ContinuationError::StartOffPath { t: t0 });
    }
    def.renormalise(&mut st);
    let n = opts.intervals.max(1);
    let span = t1 - t0;
    let grid = |k: usize| if k == n { t1 } else { t0 + span * k as f64 / n as f64 };
    let mut samples = vec![sample(def, &st, t0, orientation)?];
    let mut h = span.abs() / n as f64;
    let (mut steps, mut rejected) = (0usize, 0usize);
    let mut smallest = f64::INFINITY;
    let dir = span.signum();
    let mut t = t0;
    for k in 1..=n {
        let target = grid(k);
        while (target - t) * dir > 0.0 {
            let hs = h.min((target - t).abs());
            let tn = if hs >= (target - t).abs() { target } else { t + dir * hs };
            let dz = tangent(def, &st, t)?;
            let mut trial = st.clone();
            for (z, d) in trial.z.iter_mut().zip(dz.iter()) {
                *z += d * (tn - t);
            }
            let pred = trial.z.clone();
            let ok = correct(def, &mut trial, tn, opts.tol, opts.max_corrector).filter(|_| {
                let travel: f64 = trial.z.iter().zip(&pred).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
                let stepn: f64 = pred.iter().zip(&st.z).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
                travel <= 0.2 * stepn + 1e-9 && !branch_jump(def, &st.z, &trial.z)
            });
            steps += 1;
            if steps > opts.max_steps {
                return Err(ContinuationError::MinStep { t, step: hs });
            }
            match ok {
                Some(iters) => {
                    smallest = smallest.min(hs);
                    st = trial;
                    def.renormalise(&mut st);
                    t = tn;
                    if iters <= 3 {
                        h = (hs * 2.0).min(span.abs() / n as f64);
                    }
                }
                None => {
                    rejected += 1;
                    h = hs / 2.0;
                    if h < opts.min_step {
                        return Err(ContinuationError::MinStep { t, step: h });
                    }
                }
            }
        }
        let s = sample(def, &st, target, orientation)?;
        if k < n && def.active_on_v(&s.point, 1e-6) {
            return Err(ContinuationError::OnV { t: target });
        }
        samples.push(s);
    }
    let start_on_v = on_v(&samples[0].point, 1e-6);
    let end_on_v = on_v(&samples[n].point, 1e-6);
    Ok((
        TrackedPath {
            samples,
            steps,
            rejected,
            smallest_step: smallest,
            start_on_v,
            end_on_v,
        },
        st,
    ))
}

/// Solve the deformation system at `t` starting from a parabolic point,
/// where the system is singular.  Damped Newton from seeded random
/// perturbations of size comparable to the log guesses; either eigenvalue
/// sheet is acceptable since both carry the same character.
pub fn bootstrap(
    def: &Deformation,
    x0: &[C64],
    logs0: &[(C64, C64)],
    guess: &[(C64, C64)],
    t: f64,
    tol: f64,
    seed: u64,
) -> Result<State, ContinuationError> {
    let n = def.gs.nvars();
    let mats = def.gs.peripheral_matrices(x0);
    let mut delta: f64 = 0.0;
    for (i, _, _) in def.active() {
        delta = delta.max((guess[i].0 - logs0[i].0).norm());
    }
    let delta = delta.max(1e-8);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_b007);
    for _attempt in 0..32 {
        let mut z = x0.to_vec();
        for zi in z.iter_mut() {
            *zi += c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * (2.0 * delta);
        }
        z.resize(def.nunknowns(), c(0.0, 0.0));
        let mut frames = Vec::new();
        for (i, o, _) in def.active() {
            let (m, l) = mats[i];
            let (w, _, _) = common_eigenvector(&m, &l, logs0[i].0.exp(), logs0[i].1.exp())
                .ok_or(ContinuationError::Degenerate { cusp: i })?;
            frames.push([w[0].conj(), w[1].conj()]);
            z[o] = w[0] + c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * delta;
            z[o + 1] = w[1] + c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * delta;
            z[o + 2] = guess[i].0;
            z[o + 3] = guess[i].1;
        }
        let fr = frames.clone();
        let f = |zz: &[C64]| {
            let (f, j, _) = def.eval_z(zz, &fr, t);
            (f, j)
        };
        let Some(z) = levenberg_marquardt(&f, &z, tol, 400) else {
            continue;
        };
        let mut st = State { z, frames };
        if correct(def, &mut st, t, tol, 12).is_none() {
            continue;
        }
        let dx: f64 = st.z[..n].iter().zip(x0).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        if dx > 100.0 * delta {
            continue;
        }
        def.renormalise(&mut st);
        return Ok(st);
    }
    Err(ContinuationError::Bootstrap)
}
