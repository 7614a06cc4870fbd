use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::deform::{Control, CuspMode, Deformation, State};
use super::track::{track, TrackOptions, TrackedPath};
use super::ContinuationError;
use crate::linalg::c;
use crate::repvar::{CharacterPoint, GaugedSystem};
use crate::C64;

/// Per-cusp ellipse `center + a cos(2 pi t) + b sin(2 pi t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ellipse {
    pub center: Vec<C64>,
    pub a: Vec<C64>,
    pub b: Vec<C64>,
}

impl Ellipse {
    /// Ellipse through `start` at `t = 0`.
    pub fn through(start: &[C64], a: Vec<C64>, b: Vec<C64>) -> Self {
        Ellipse {
            center: start.iter().zip(&a).map(|(s, a)| s - a).collect(),
            a,
            b,
        }
    }

    pub fn at(&self, i: usize, t: f64) -> C64 {
        let (s, co) = (2.0 * PI * t).sin_cos();
        self.center[i] + self.a[i] * co + self.b[i] * s
    }

    /// Smallest distance of the curve to a set of points, on a fine grid.
    pub fn clearance(&self, i: usize, avoid: &[C64]) -> f64 {
        (0..512)
            .map(|k| self.at(i, k as f64 / 512.0))
            .flat_map(|z| avoid.iter().map(move |p| (z - p).norm()))
            .fold(f64::INFINITY, f64::min)
    }
}

/// A tracked loop, traversed until the start point recurs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClosedLoop {
    pub ellipse: Ellipse,
    pub traversals: usize,
    pub path: TrackedPath,
    pub closure_gap: f64,
}

fn gap(a: &CharacterPoint, b: &CharacterPoint) -> f64 {
    let scale = 1.0 + a.coords.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let dx = a.coords.iter().zip(&b.coords).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let dl = a
        .peripheral
        .iter()
        .zip(&b.peripheral)
        .map(|(p, q)| (p.u - q.u).norm().max((p.v - q.v).norm()))
        .fold(0.0, f64::max);
    dx.max(dl) / scale
}

/// Track `ellipse` repeatedly from `start` (which must lie over `t = 0`)
/// until the path closes up, at most `max_traversals` times.
pub fn track_loop(
    def: &Deformation,
    start: &State,
    ellipse: &Ellipse,
    opts: &TrackOptions,
    max_traversals: usize,
    orientation: crate::repvar::Orientation,
) -> Result<ClosedLoop, ContinuationError> {
    let mut st = start.clone();
    let mut path: Option<TrackedPath> = None;
    let origin = def.to_point(start, orientation);
    for k in 0..max_traversals {
        let (seg, end) = track(def, &st, k as f64, (k + 1) as f64, opts, orientation)?;
        path = Some(match path {
            None => seg,
            Some(p) => p.join(seg),
        });
        st = end;
        let g = gap(&origin, &def.to_point(&st, orientation));
        if g < 1e-9 {
            return Ok(ClosedLoop {
                ellipse: ellipse.clone(),
                traversals: k + 1,
                path: path.expect("tracked"),
                closure_gap: g,
            });
        }
    }
    Err(ContinuationError::Other(format!("loop did not close after {max_traversals} traversals")))
}

/// Loops in the meridian log coordinates `u_i` through `start`.
pub fn log_loop_deformation<'a>(gs: &'a GaugedSystem, ellipse: &Ellipse) -> Deformation<'a> {
    let modes = (0..gs.cusp_count())
        .map(|i| {
            CuspMode::Active(Control::LogEllipse {
                center: ellipse.center[i],
                a: ellipse.a[i],
                b: ellipse.b[i],
            })
        })
        .collect();
    Deformation::new(gs, modes)
}

/// Random log-coordinate ellipses through `start.u`, sized relative to the
/// distance from the parabolic lifts and kept `clearance` away from `i pi Z`.
pub fn random_log_ellipses(start: &CharacterPoint, count: usize, seed: u64, clearance: f64) -> Vec<Ellipse> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u: Vec<C64> = start.peripheral.iter().map(|p| p.u).collect();
    let mut out = Vec::new();
    let mut guard = 0;
    while out.len() < count && guard < 1000 * count.max(1) {
        guard += 1;
        let mut a = Vec::new();
        let mut b = Vec::new();
        for &ui in &u {
            let lift = c(0.0, (ui.im / PI).round() * PI);
            let r = (ui - lift).norm().max(0.05);
            let ra = r * rng.random_range(0.2..1.6);
            let rb = ra * rng.random_range(0.4..1.0);
            let phi = rng.random_range(0.0..2.0 * PI);
            let rot = c(0.0, phi).exp();
            a.push(rot * ra);
            b.push(rot * c(0.0, rb));
        }
        let e = Ellipse::through(&u, a, b);
        let ok = (0..u.len()).all(|i| {
            let k0 = (e.center[i].im / PI).round() as i64;
            let avoid: Vec<C64> = (k0 - 3..=k0 + 3).map(|k| c(0.0, k as f64 * PI)).collect();
            e.clearance(i, &avoid) > clearance
        });
        if ok {
            out.push(e);
        }
    }
    out
}

/// Closed log-coordinate loops through `start`, tracked in parallel with
/// results in input order.
pub fn exactness_loops(
    gs: &GaugedSystem,
    start: &CharacterPoint,
    ellipses: &[Ellipse],
    opts: &TrackOptions,
    max_traversals: usize,
) -> Vec<Result<ClosedLoop, ContinuationError>> {
    ellipses
        .par_iter()
        .map(|e| {
            let def = log_loop_deformation(gs, e);
            let st = def.state_from(&start.coords, &start.logs())?;
            track_loop(&def, &st, e, opts, max_traversals, start.orientation)
        })
        .collect()
}

/// A log-coordinate segment tracked out and back.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RoundTrip {
    pub forward: TrackedPath,
    pub backward: TrackedPath,
    /// Relative distance between the start and the returned point.
    pub reversal_error: f64,
}

/// Track `u_i` linearly from `start` to `end[i]` and back again.
pub fn log_segment_round_trip(
    gs: &GaugedSystem,
    start: &CharacterPoint,
    end: &[C64],
    opts: &TrackOptions,
) -> Result<RoundTrip, ContinuationError> {
    let modes = start
        .peripheral
        .iter()
        .zip(end)
        .map(|(p, &e)| CuspMode::Active(Control::LogSegment { start: p.u, end: e }))
        .collect();
    let def = Deformation::new(gs, modes);
    let st = def.state_from(&start.coords, &start.logs())?;
    let (forward, mid) = track(&def, &st, 0.0, 1.0, opts, start.orientation)?;
    let (backward, back) = track(&def, &mid, 1.0, 0.0, opts, start.orientation)?;
    let reversal_error = gap(start, &def.to_point(&back, start.orientation));
    Ok(RoundTrip {
        forward,
        backward,
        reversal_error,
    })
}
