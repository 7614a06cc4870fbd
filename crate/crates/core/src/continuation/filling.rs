use std::f64::consts::PI;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::deform::{Control, CuspMode, Deformation};
use super::track::{bootstrap, track, PathSample, TrackOptions, TrackedPath};
use super::ContinuationError;
use crate::linalg::c;
use crate::repvar::{on_v, CharacterPoint, CompleteStructure, GaugedSystem};
use crate::C64;

/// Per-cusp Dehn filling coefficient; `None` leaves the cusp complete.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FillingCoefficients(pub Vec<Option<(i64, i64)>>);

impl FillingCoefficients {
    pub fn unfilled(h: usize) -> Self {
        FillingCoefficients(vec![None; h])
    }

    pub fn validate(&self, h: usize) -> Result<(), ContinuationError> {
        if self.0.len() != h {
            return Err(ContinuationError::Other(format!("{} filling coefficients for {h} cusps", self.0.len())));
        }
        for (i, k) in self.0.iter().enumerate() {
            if let Some((p, q)) = *k {
                if p.gcd(&q) != 1 {
                    return Err(ContinuationError::Other(format!("cusp {i}: ({p},{q}) is not a coprime pair")));
                }
            }
        }
        Ok(())
    }

    pub fn is_unfilled(&self) -> bool {
        self.0.iter().all(Option::is_none)
    }

    pub fn label(&self) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|k| match k {
                Some((p, q)) => format!("({p},{q})"),
                None => "inf".to_string(),
            })
            .collect();
        parts.join(";")
    }
}

impl std::str::FromStr for FillingCoefficients {
    type Err = String;

    /// Parses `"(1,5);inf"` or `"1,5;1,7"`: one entry per cusp, `inf` for
    /// an unfilled cusp.
    fn from_str(s: &str) -> Result<Self, String> {
        s.split(';')
            .map(|part| {
                let part = part.trim().trim_start_matches('(').trim_end_matches(')').trim();
                if part.eq_ignore_ascii_case("inf") || part == "∞" {
                    return Ok(None);
                }
                let (p, q) = part.split_once(',').ok_or_else(|| format!("bad filling entry `{part}`"))?;
                let p = p.trim().parse::<i64>().map_err(|e| format!("`{p}`: {e}"))?;
                let q = q.trim().parse::<i64>().map_err(|e| format!("`{q}`: {e}"))?;
                Ok(Some((p, q)))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(FillingCoefficients)
    }
}

/// A filled character with the path that reached it from the complete
/// structure.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FillingResult {
    pub coefficients: FillingCoefficients,
    pub point: CharacterPoint,
    pub path: TrackedPath,
    /// `max_i |p_i (u_i - u0_i) + q_i (v_i - v0_i) - pi i|`.
    pub equation_residual: f64,
}

/// First-order log deformation at parameter `t` along a filling path:
/// `u - u0 = t pi i / (p + q tau)`, `v - v0 = tau (u - u0)`.
fn predicted_logs(cs: &CompleteStructure, kappa: &FillingCoefficients, t: f64) -> (Vec<(C64, C64)>, Vec<C64>, Vec<C64>) {
    let logs0 = cs.point.logs();
    let mut logs = Vec::new();
    let (mut du, mut dv) = (Vec::new(), Vec::new());
    for (i, &(u0, v0)) in logs0.iter().enumerate() {
        match kappa.0[i] {
            Some((p, q)) => {
                let tau = cs.cusp_shapes[i];
                let d = c(0.0, PI) / (tau * q as f64 + p as f64);
                logs.push((u0 + d * t, v0 + tau * d * t));
                du.push(d);
                dv.push(tau * d);
            }
            None => {
                logs.push((u0, v0));
                du.push(c(0.0, 0.0));
                dv.push(c(0.0, 0.0));
            }
        }
    }
    (logs, du, dv)
}

pub fn filling_modes(cs: &CompleteStructure, kappa: &FillingCoefficients) -> Vec<CuspMode> {
    cs.point
        .logs()
        .iter()
        .zip(&kappa.0)
        .map(|(&(u0, v0), k)| match *k {
            Some((p, q)) => CuspMode::Active(Control::Filling {
                p: p as f64,
                q: q as f64,
                u0,
                v0,
            }),
            None => CuspMode::Held { u0, v0 },
        })
        .collect()
}

/// Solve the filling equations `p_i (u_i - u0_i) + q_i (v_i - v0_i) = pi i`
/// (`SL(2)` eigenvalue logs, so the `PSL(2)` condition is halved) by
/// continuation in `t` from the complete structure; unfilled cusps stay
/// parabolic.  The path sample at `t = 0` is the complete structure itself.
pub fn solve_filling(
    gs: &GaugedSystem,
    cs: &CompleteStructure,
    kappa: &FillingCoefficients,
    opts: &TrackOptions,
    seed: u64,
) -> Result<FillingResult, ContinuationError> {
    kappa.validate(gs.cusp_count())?;
    let (_, du0, dv0) = predicted_logs(cs, kappa, 0.0);
    let start = PathSample {
        t: 0.0,
        point: cs.point.clone(),
        du: du0,
        dv: dv0,
    };
    if kappa.is_unfilled() {
        return Ok(FillingResult {
            coefficients: kappa.clone(),
            point: cs.point.clone(),
            path: TrackedPath {
                samples: vec![start],
                steps: 0,
                rejected: 0,
                smallest_step: f64::INFINITY,
                start_on_v: true,
                end_on_v: true,
            },
            equation_residual: 0.0,
        });
    }
    let def = Deformation::new(gs, filling_modes(cs, kappa));
    let n = opts.intervals.max(2);
    let t1 = 1.0 / n as f64;
    let (guess, _, _) = predicted_logs(cs, kappa, t1);
    let logs0 = cs.point.logs();
    let st = bootstrap(&def, &cs.point.coords, &logs0, &guess, t1, opts.tol, seed)?;
    let sub = TrackOptions {
        intervals: n - 1,
        ..opts.clone()
    };
    let (rest, end) = track(&def, &st, t1, 1.0, &sub, cs.point.orientation)?;
    let mut samples = vec![start];
    samples.extend(rest.samples);
    let point = def.to_point(&end, cs.point.orientation);
    let equation_residual = point
        .logs()
        .iter()
        .zip(&logs0)
        .zip(&kappa.0)
        .filter_map(|((&(u, v), &(u0, v0)), k)| k.map(|(p, q)| ((u - u0) * p as f64 + (v - v0) * q as f64 - c(0.0, PI)).norm()))
        .fold(0.0, f64::max);
    let end_on_v = on_v(&point, 1e-6);
    Ok(FillingResult {
        coefficients: kappa.clone(),
        point,
        path: TrackedPath {
            samples,
            steps: rest.steps,
            rejected: rest.rejected,
            smallest_step: rest.smallest_step,
            start_on_v: true,
            end_on_v,
        },
        equation_residual,
    })
}

/// Outcome of one filling in a dense-set sample.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DenseSample {
    pub coefficients: FillingCoefficients,
    pub result: Result<FillingResult, String>,
}

/// Filled characters for `kappa = (1, q_1; ...; 1, q_h)` over all choices of
/// `q_i` from `primes` (cartesian product over cusps).
pub fn sample_dense_set(
    gs: &GaugedSystem,
    cs: &CompleteStructure,
    primes: &[i64],
    opts: &TrackOptions,
    seed: u64,
) -> Vec<DenseSample> {
    use rayon::prelude::*;
    let h = gs.cusp_count();
    if primes.is_empty() {
        return Vec::new();
    }
    let mut combos: Vec<Vec<i64>> = vec![Vec::new()];
    for _ in 0..h {
        combos = combos
            .into_iter()
            .flat_map(|c| primes.iter().map(move |&q| [c.clone(), vec![q]].concat()))
            .collect();
    }
    combos
        .par_iter()
        .map(|qs| {
            let kappa = FillingCoefficients(qs.iter().map(|&q| Some((1, q))).collect());
            let result = solve_filling(gs, cs, &kappa, opts, seed).map_err(|e| e.to_string());
            DenseSample {
                coefficients: kappa,
                result,
            }
        })
        .collect()
}
