use std::f64::consts::PI;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::deform::{Control, CuspMode, Deformation};
use super::loops::Ellipse;
use super::newton::{levenberg_marquardt, newton_with};
use super::track::{track, TrackOptions};
use super::{random_starts, ContinuationError};
use crate::linalg::{self, c};
use crate::repvar::{
    apply_twist, enumerate_twists, on_v, restriction_traces, trace_jacobian_on_slice, CharacterPoint, GaugedSystem,
    Orientation,
};
use crate::volume::{integrate_eta, VolumeLabel, VOLUME_SCALE};
use crate::C64;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FiberOptions {
    /// Monodromy loops; the same number of multistart runs.
    pub budget: usize,
    pub seed: u64,
    pub dedup_tol: f64,
    /// Relative tolerance for matching boundary traces to the base point.
    pub match_tol: f64,
    pub track: TrackOptions,
    /// Keep monodromy loops this far from `I_M = +-2`.
    pub u_clearance: f64,
}

impl Default for FiberOptions {
    fn default() -> Self {
        FiberOptions {
            budget: 24,
            seed: 0,
            dedup_tol: 1e-6,
            match_tol: 1e-7,
            track: TrackOptions {
                intervals: 64,
                ..TrackOptions::default()
            },
            u_clearance: 1e-3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FiberSource {
    Seed,
    Monodromy,
    Multistart,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FiberPoint {
    pub point: CharacterPoint,
    pub source: FiberSource,
    /// Index of the twist orbit.
    pub orbit: usize,
    /// Anchored volume, when a path from the complete structure is known.
    pub volume: Option<VolumeLabel>,
    pub on_v: bool,
    /// Rank of `d(I_M)` on the slice falls below the cusp count.
    pub branch_locus: bool,
    pub trace_rank: usize,
    /// Budget step at which the point was first found.
    pub found_at: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FiberStatus {
    Stable,
    Inconclusive,
    /// Base point on `p(U)`; no degree claim.
    Excluded,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TwistPair {
    pub a: usize,
    pub b: usize,
    pub epsilon: Vec<i8>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FiberReport {
    pub base: Vec<C64>,
    pub fiber: Vec<FiberPoint>,
    pub twist_pairs: Vec<TwistPair>,
    pub psl2_count: usize,
    pub sl2_count: usize,
    /// Points over the meridian traces alone, found by monodromy.
    pub meridian_fiber_size: usize,
    /// `r`-fiber size in the confirmation run with doubled budget.
    pub confirm_count: usize,
    pub status: FiberStatus,
    pub base_on_u: bool,
    pub loops_tracked: usize,
    pub loops_failed: usize,
    pub budget: usize,
    pub seed: u64,
    pub notes: Vec<String>,
}

fn char_dist(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn matches_base(pt: &CharacterPoint, z: &[C64], tol: f64) -> bool {
    restriction_traces(pt)
        .iter()
        .zip(z)
        .all(|(a, b)| (a - b).norm() <= tol * (1.0 + b.norm()))
}

struct Known {
    point: CharacterPoint,
    character: Vec<C64>,
    volume: Option<f64>,
    volume_error: f64,
    found_at: usize,
    source: FiberSource,
}

fn meridian_traces(z: &[C64]) -> Vec<C64> {
    z.chunks(3).map(|t| t[0]).collect()
}

fn random_trace_ellipse(rng: &mut ChaCha8Rng, zm: &[C64], clearance: f64) -> Ellipse {
    loop {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for &w in zm {
            let r = (w - 2.0).norm().min((w + 2.0).norm()).max(0.1);
            let ra = r * rng.random_range(0.3..2.5);
            let rb = ra * rng.random_range(0.3..1.0);
            let rot = c(0.0, rng.random_range(0.0..2.0 * PI)).exp();
            a.push(rot * ra);
            b.push(rot * c(0.0, rb) * if rng.random::<bool>() { 1.0 } else { -1.0 });
        }
        let e = Ellipse::through(zm, a, b);
        let avoid = [c(2.0, 0.0), c(-2.0, 0.0)];
        if (0..zm.len()).all(|i| e.clearance(i, &avoid) > clearance) {
            return e;
        }
    }
}

fn trace_loop_deformation<'a>(gs: &'a GaugedSystem, e: &Ellipse) -> Deformation<'a> {
    let modes = (0..gs.cusp_count())
        .map(|i| {
            CuspMode::Active(Control::TraceEllipse {
                center: e.center[i],
                a: e.a[i],
                b: e.b[i],
            })
        })
        .collect();
    Deformation::new(gs, modes)
}

/// Traces plus relators on the slice, equal to `z`.
fn fiber_system(gs: &GaugedSystem, z: &[C64], x: &[C64]) -> (DVector<C64>, nalgebra::DMatrix<C64>) {
    let (rv, rj, scale) = gs.relator_system().eval_scaled(x);
    let (pv, pj) = gs.peripheral_system().eval_with_jacobian(x);
    let h = gs.cusp_count();
    let n = gs.nvars();
    let rows = rv.len() + 3 * h;
    let mut f = DVector::zeros(rows);
    let mut j = nalgebra::DMatrix::zeros(rows, n);
    for (r, v) in rv.iter().enumerate() {
        f[r] = *v / scale[r];
        for k in 0..n {
            j[(r, k)] = rj[(r, k)] / scale[r];
        }
    }
    // peripheral rows per cusp: M (a,b,c,d), L (a,b,c,d); ML trace via products.
    for i in 0..h {
        let b = 8 * i;
        let r = rv.len() + 3 * i;
        let m = [pv[b], pv[b + 1], pv[b + 2], pv[b + 3]];
        let l = [pv[b + 4], pv[b + 5], pv[b + 6], pv[b + 7]];
        f[r] = m[0] + m[3] - z[3 * i];
        f[r + 1] = l[0] + l[3] - z[3 * i + 1];
        f[r + 2] = m[0] * l[0] + m[1] * l[2] + m[2] * l[1] + m[3] * l[3] - z[3 * i + 2];
        for k in 0..n {
            let dm = [pj[(b, k)], pj[(b + 1, k)], pj[(b + 2, k)], pj[(b + 3, k)]];
            let dl = [pj[(b + 4, k)], pj[(b + 5, k)], pj[(b + 6, k)], pj[(b + 7, k)]];
            j[(r, k)] = dm[0] + dm[3];
            j[(r + 1, k)] = dl[0] + dl[3];
            j[(r + 2, k)] = dm[0] * l[0] + m[0] * dl[0] + dm[1] * l[2] + m[1] * dl[2] + dm[2] * l[1] + m[2] * dl[1] + dm[3] * l[3]
                + m[3] * dl[3];
        }
    }
    (f, j)
}

struct RunOutcome {
    known: Vec<Known>,
    tracked: usize,
    failed: usize,
}

fn push_known(known: &mut Vec<Known>, k: Known, tol: f64) -> bool {
    if known.iter().any(|o| char_dist(&o.character, &k.character) < tol) {
        return false;
    }
    known.push(k);
    true
}

/// Monodromy over the meridian traces plus multistart on the full base
/// point; deterministic for a given seed.
fn run(
    gs: &GaugedSystem,
    z: &[C64],
    seeds: &[(CharacterPoint, Option<VolumeLabel>)],
    budget: usize,
    seed: u64,
    opts: &FiberOptions,
    hand: f64,
) -> RunOutcome {
    let zm = meridian_traces(z);
    let mut known: Vec<Known> = Vec::new();
    for (p, vol) in seeds {
        push_known(
            &mut known,
            Known {
                character: gs.character(&p.coords),
                point: p.clone(),
                volume: vol.as_ref().map(|v| v.value),
                volume_error: vol.as_ref().map(|v| v.error).unwrap_or(0.0),
                found_at: 0,
                source: FiberSource::Seed,
            },
            opts.dedup_tol,
        );
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut tracked, mut failed) = (0, 0);
    let batch = 8;
    let mut done = 0;
    while done < budget && !known.is_empty() {
        let plan: Vec<(usize, Ellipse)> = (0..batch.min(budget - done))
            .map(|_| {
                let parent = rng.random_range(0..known.len());
                (parent, random_trace_ellipse(&mut rng, &zm, opts.u_clearance))
            })
            .collect();
        let results: Vec<Result<(CharacterPoint, f64, f64), ContinuationError>> = plan
            .par_iter()
            .map(|(parent, e)| {
                let p = &known[*parent].point;
                let def = trace_loop_deformation(gs, e);
                let st = def.state_from(&p.coords, &p.logs())?;
                let (path, end) = track(&def, &st, 0.0, 1.0, &opts.track, p.orientation)?;
                let integral = integrate_eta(&path, hand).map_err(|e| ContinuationError::Other(e.to_string()))?;
                Ok((def.to_point(&end, p.orientation), integral.value, integral.error))
            })
            .collect();
        for (k, ((parent, _), res)) in plan.iter().zip(results).enumerate() {
            tracked += 1;
            match res {
                Ok((pt, integral, err)) => {
                    let (pv, pe) = (known[*parent].volume, known[*parent].volume_error);
                    let cand = Known {
                        character: gs.character(&pt.coords),
                        point: pt,
                        volume: pv.map(|v| v + VOLUME_SCALE * integral),
                        volume_error: pe + VOLUME_SCALE * err,
                        found_at: done + k + 1,
                        source: FiberSource::Monodromy,
                    };
                    push_known(&mut known, cand, opts.dedup_tol);
                }
                Err(_) => failed += 1,
            }
        }
        done += plan.len();
    }
    let starts = random_starts(gs.nvars(), budget, seed ^ 0xf1be_5eed);
    let solved: Vec<Option<Vec<C64>>> = starts
        .par_iter()
        .map(|x| {
            let f = |y: &[C64]| fiber_system(gs, z, y);
            let y = levenberg_marquardt(&f, x, 1e-8, 400)?;
            newton_with(&f, &y, opts.track.tol, 50, None).ok().map(|r| r.point)
        })
        .collect();
    let orientation = seeds.first().map(|s| s.0.orientation).unwrap_or(Orientation::Unassigned);
    for (k, x) in solved.into_iter().enumerate() {
        let Some(x) = x else { continue };
        if gs.commutator_defect(&x).norm() < 1e-6 {
            continue;
        }
        let logs = logs_near_reference(gs, &x, seeds);
        let pt = gs.point(x, &logs, orientation);
        if !matches_base(&pt, z, opts.match_tol) {
            continue;
        }
        push_known(
            &mut known,
            Known {
                character: gs.character(&pt.coords),
                point: pt,
                volume: None,
                volume_error: 0.0,
                found_at: budget + k + 1,
                source: FiberSource::Multistart,
            },
            opts.dedup_tol,
        );
    }
    RunOutcome { known, tracked, failed }
}

/// Eigenvalue logs of the peripheral matrices, on the branch of the first
/// seed.
fn logs_near_reference(gs: &GaugedSystem, x: &[C64], seeds: &[(CharacterPoint, Option<VolumeLabel>)]) -> Vec<(C64, C64)> {
    let reference: Vec<(C64, C64)> = seeds
        .first()
        .map(|s| s.0.logs())
        .unwrap_or_else(|| vec![(c(0.0, 0.0), c(0.0, 0.0)); gs.cusp_count()]);
    gs.peripheral_matrices(x)
        .iter()
        .zip(&reference)
        .map(|((m, l), &(u, v))| {
            match super::common_eigenvector(m, l, u.exp(), v.exp()) {
                Some((_, mu, lu)) => (crate::scalar::log_near(mu, u), crate::scalar::log_near(lu, v)),
                None => (u, v),
            }
        })
        .collect()
}

/// Preimages of the boundary-trace point `z` on the component through the
/// seeds, found by monodromy in the meridian traces and by multistart, with
/// twist classification and a doubled-budget confirmation run.
pub fn fiber_over(
    gs: &GaugedSystem,
    z: &[C64],
    seeds: &[(CharacterPoint, Option<VolumeLabel>)],
    opts: &FiberOptions,
) -> Result<FiberReport, ContinuationError> {
    let h = gs.cusp_count();
    if z.len() != 3 * h {
        return Err(ContinuationError::Other(format!("base point has {} traces, expected {}", z.len(), 3 * h)));
    }
    for (p, _) in seeds {
        if !matches_base(p, z, opts.match_tol) {
            return Err(ContinuationError::StartOffPath { t: 0.0 });
        }
    }
    let hand = gs.spec.orientation_sign();
    let base_on_u = z.chunks(3).any(|t| (t[0] * t[0] - 4.0).norm() < 1e-3 && (t[1] * t[1] - 4.0).norm() < 1e-3);
    let mut notes = Vec::new();
    if base_on_u {
        notes.push("base point lies on p(U); excluded from degree claims".to_string());
    }
    let main = run(gs, z, seeds, opts.budget, opts.seed, opts, hand);
    let confirm = run(gs, z, seeds, 2 * opts.budget, opts.seed.wrapping_add(0x9e37_79b9), opts, hand);
    let meridian_fiber_size = main.known.len();
    let in_fiber = |k: &Known| matches_base(&k.point, z, opts.match_tol);
    let confirm_count = confirm.known.iter().filter(|k| in_fiber(k)).count();
    let chosen: Vec<&Known> = main.known.iter().filter(|k| in_fiber(k)).collect();
    let quarter = |k: &Known| match k.source {
        FiberSource::Seed => false,
        FiberSource::Monodromy => 4 * k.found_at > 3 * opts.budget,
        FiberSource::Multistart => 4 * (k.found_at - opts.budget) > 3 * opts.budget,
    };
    let late = chosen.iter().any(|k| quarter(k));
    let twists = enumerate_twists(&gs.spec);
    let mut orbit: Vec<usize> = (0..chosen.len()).collect();
    fn find(o: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while o[r] != r {
            r = o[r];
        }
        o[i] = r;
        r
    }
    let mut twist_pairs = Vec::new();
    for (a, ka) in chosen.iter().enumerate() {
        for tw in twists.iter().filter(|t| !t.is_trivial()) {
            let Ok(tp) = apply_twist(gs, &ka.point, tw) else { continue };
            let ch = gs.character(&tp.coords);
            for (b, kb) in chosen.iter().enumerate() {
                if b > a && char_dist(&ch, &kb.character) < opts.dedup_tol {
                    twist_pairs.push(TwistPair {
                        a,
                        b,
                        epsilon: tw.epsilon.clone(),
                    });
                    let (ra, rb) = (find(&mut orbit, a), find(&mut orbit, b));
                    orbit[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }
    let real_base = z.iter().all(|w| w.im.abs() < 1e-9);
    if real_base {
        for a in 0..chosen.len() {
            let conj: Vec<C64> = chosen[a].character.iter().map(|w| w.conj()).collect();
            for b in a + 1..chosen.len() {
                if char_dist(&conj, &chosen[b].character) < opts.dedup_tol {
                    let (ra, rb) = (find(&mut orbit, a), find(&mut orbit, b));
                    orbit[ra.max(rb)] = ra.min(rb);
                }
            }
        }
        notes.push("real base point: complex-conjugate characters merged".to_string());
    }
    let mut roots: Vec<usize> = (0..chosen.len()).map(|i| find(&mut orbit, i)).collect();
    let mut distinct = roots.clone();
    distinct.sort_unstable();
    distinct.dedup();
    for r in roots.iter_mut() {
        *r = distinct.binary_search(r).expect("root");
    }
    let fiber: Vec<FiberPoint> = chosen
        .iter()
        .zip(&roots)
        .map(|(k, &o)| {
            let tj = trace_jacobian_on_slice(gs, &k.point.coords);
            let trace_rank = linalg::numerical_rank(&tj, 1e-6);
            FiberPoint {
                point: k.point.clone(),
                source: k.source,
                orbit: o,
                volume: k.volume.map(|v| VolumeLabel {
                    value: v,
                    anchor: "complete structure".into(),
                    path_id: format!("{:?} at step {}", k.source, k.found_at).to_lowercase(),
                    error: k.volume_error,
                    halved: v,
                }),
                on_v: on_v(&k.point, 1e-6),
                branch_locus: trace_rank < h || tj.ncols() != h,
                trace_rank,
                found_at: k.found_at,
            }
        })
        .collect();
    if fiber.iter().any(|f| f.source == FiberSource::Multistart) {
        notes.push("multistart found points not reached by monodromy".to_string());
    }
    let sl2_count = fiber.len();
    let psl2_count = distinct.len();
    let status = if base_on_u {
        FiberStatus::Excluded
    } else if late || confirm_count != sl2_count || sl2_count == 0 {
        FiberStatus::Inconclusive
    } else {
        FiberStatus::Stable
    };
    Ok(FiberReport {
        base: z.to_vec(),
        fiber,
        twist_pairs,
        psl2_count,
        sl2_count,
        meridian_fiber_size,
        confirm_count,
        status,
        base_on_u,
        loops_tracked: main.tracked + confirm.tracked,
        loops_failed: main.failed + confirm.failed,
        budget: opts.budget,
        seed: opts.seed,
        notes,
    })
}
