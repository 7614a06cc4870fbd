//! The volume 1-form on peripheral log coordinates, its integrals along
//! tracked paths, and a Lobachevsky-function oracle.
//!
//! With `u = log m`, `v = log l` on a tracked branch,
//! `eta = -sum_i (Re v_i dIm u_i - Re u_i dIm v_i)`.  Volumes are anchored
//! at the complete structure: `Vol = +-Vol(M) + VOLUME_SCALE * int eta`.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::continuation::{FiberReport, TrackedPath};
use crate::eigenvar::EigenvaluePoint;
use crate::manifold::ManifoldSpec;
use crate::repvar::Orientation;
use crate::scalar::Scalar;
use crate::{ComplexOf, C64};

/// `eta` is written in `SL(2)` eigenvalue logs; the holonomy of a peripheral
/// curve has complex length `2u`, which doubles the volume differential.
pub const VOLUME_SCALE: f64 = 2.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VolumeError {
    #[error("eigenvalue point carries no branch lifts")]
    MissingLifts,
    #[error("path has no samples")]
    Empty,
    #[error("branch jump between samples {0} and {1}")]
    BranchJump(usize, usize),
    #[error("interior sample {0} lies on U")]
    OnU(usize),
    #[error("loop endpoints differ by {0:.3e}")]
    OpenLoop(f64),
}

/// Per-cusp coefficients of `eta` on `(dIm u_i, dIm v_i)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtaValue<T = f64> {
    pub coefficients: Vec<(T, T)>,
}

impl<T: Scalar> EtaValue<T> {
    pub fn max_abs(&self) -> T {
        self.coefficients.iter().fold(T::zero(), |m, &(a, b)| m.max(a.abs()).max(b.abs()))
    }

    /// Pair with a tangent `(dIm u_i, dIm v_i)`.
    pub fn apply(&self, d_arg: &[(T, T)]) -> T {
        self.coefficients
            .iter()
            .zip(d_arg)
            .fold(T::zero(), |acc, (&(a, b), &(x, y))| acc + a * x + b * y)
    }
}

/// `eta` from branch lifts; `hand` is `-1` for right-handed bases.
pub fn eta_from_logs<T: Scalar>(logs: &[(ComplexOf<T>, ComplexOf<T>)], hand: T) -> EtaValue<T> {
    EtaValue {
        coefficients: logs.iter().map(|&(u, v)| (-v.re * hand, u.re * hand)).collect(),
    }
}

pub fn eta_at(x: &EigenvaluePoint, hand: f64) -> Result<EtaValue, VolumeError> {
    let lifts = x.lifts.as_ref().ok_or(VolumeError::MissingLifts)?;
    Ok(eta_from_logs(lifts, hand))
}

/// `eta(dz/dt)` at one sample.
fn integrand(logs: &[(C64, C64)], du: &[C64], dv: &[C64], hand: f64) -> f64 {
    let eta = eta_from_logs(logs, hand);
    let d: Vec<(f64, f64)> = du.iter().zip(dv).map(|(a, b)| (a.im, b.im)).collect();
    eta.apply(&d)
}

/// Quadrature of `eta` along a path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtaIntegral {
    pub value: f64,
    /// Same rule on every other sample.
    pub halved: f64,
    /// `|value - halved|`, or the last Romberg correction.
    pub error: f64,
    pub rule: String,
}

fn uniform(ts: &[f64]) -> bool {
    if ts.len() < 2 {
        return true;
    }
    let h = (ts[ts.len() - 1] - ts[0]) / (ts.len() - 1) as f64;
    ts.iter()
        .enumerate()
        .all(|(k, &t)| (t - (ts[0] + h * k as f64)).abs() <= 1e-12 * (1.0 + t.abs()))
}

fn trapezoid<T: Scalar>(ts: &[T], g: &[T]) -> T {
    let two = T::lit(2.0);
    ts.windows(2)
        .zip(g.windows(2))
        .fold(T::zero(), |acc, (t, y)| acc + (t[1] - t[0]) * (y[0] + y[1]) / two)
}

/// Romberg extrapolation of trapezoid sums on `2^k + 1` equispaced samples.
/// Returns the table diagonal and the last correction.
pub fn romberg<T: Scalar>(a: T, b: T, g: &[T]) -> Option<(T, T)> {
    let n = g.len().checked_sub(1)?;
    if n == 0 || !n.is_power_of_two() {
        return None;
    }
    let levels = n.trailing_zeros() as usize;
    let mut rows: Vec<T> = Vec::with_capacity(levels + 1);
    for lvl in 0..=levels {
        let stride = n >> lvl;
        let h = (b - a) / T::from_usize(1 << lvl).expect("small");
        let mut s = (g[0] + g[n]) / T::lit(2.0);
        let mut k = stride;
        while k < n {
            s = s + g[k];
            k += stride;
        }
        rows.push(s * h);
    }
    let mut table = rows;
    let mut last = T::zero();
    let mut factor = T::lit(4.0);
    for _ in 0..levels {
        let next: Vec<T> = table.windows(2).map(|w| w[1] + (w[1] - w[0]) / (factor - T::one())).collect();
        last = (next[next.len() - 1] - table[table.len() - 1]).abs();
        table = next;
        factor = factor * T::lit(4.0);
    }
    Some((table[table.len() - 1], last))
}

fn check_path(path: &TrackedPath, u_tol: f64) -> Result<(), VolumeError> {
    let s = &path.samples;
    let h = s.first().map(|x| x.point.peripheral.len()).unwrap_or(0);
    let moving: Vec<bool> = (0..h)
        .map(|i| s.iter().any(|x| x.du[i].norm() + x.dv[i].norm() > 0.0))
        .collect();
    for k in 1..s.len() {
        for (a, b) in s[k - 1].point.peripheral.iter().zip(&s[k].point.peripheral) {
            if (a.u.im - b.u.im).abs() >= std::f64::consts::FRAC_PI_2 || (a.v.im - b.v.im).abs() >= std::f64::consts::FRAC_PI_2 {
                return Err(VolumeError::BranchJump(k - 1, k));
            }
        }
        if k + 1 < s.len() {
            let one = C64::new(1.0, 0.0);
            let hit = s[k].point.peripheral.iter().zip(&moving).any(|(p, &mv)| {
                mv && (p.m * p.m - one).norm() < u_tol && (p.l * p.l - one).norm() < u_tol
            });
            if hit {
                return Err(VolumeError::OnU(k));
            }
        }
    }
    Ok(())
}

fn integrand_samples(path: &TrackedPath, hand: f64) -> (Vec<f64>, Vec<f64>) {
    let ts = path.samples.iter().map(|s| s.t).collect();
    let g = path
        .samples
        .iter()
        .map(|s| integrand(&s.point.logs(), &s.du, &s.dv, hand))
        .collect();
    (ts, g)
}

/// `int eta` along an open path: Romberg on `2^k + 1` uniform samples,
/// composite trapezoid with a half-step Richardson estimate otherwise.
pub fn integrate_eta(path: &TrackedPath, hand: f64) -> Result<EtaIntegral, VolumeError> {
    if path.samples.is_empty() {
        return Err(VolumeError::Empty);
    }
    check_path(path, 1e-6)?;
    let (ts, g) = integrand_samples(path, hand);
    if ts.len() == 1 {
        return Ok(EtaIntegral {
            value: 0.0,
            halved: 0.0,
            error: 0.0,
            rule: "empty".into(),
        });
    }
    let (a, b) = (ts[0], ts[ts.len() - 1]);
    if uniform(&ts) {
        if let Some((value, last)) = romberg(a, b, &g) {
            let half: Vec<f64> = g.iter().step_by(2).cloned().collect();
            let halved = romberg(a, b, &half).map(|r| r.0).unwrap_or(value);
            return Ok(EtaIntegral {
                value,
                halved,
                error: last.max((value - halved).abs()),
                rule: "romberg".into(),
            });
        }
    }
    let full = trapezoid(&ts, &g);
    let half_t: Vec<f64> = ts.iter().step_by(2).cloned().collect();
    let half_g: Vec<f64> = g.iter().step_by(2).cloned().collect();
    let halved = if half_t.last() == ts.last() { trapezoid(&half_t, &half_g) } else { full };
    let value = full + (full - halved) / 3.0;
    Ok(EtaIntegral {
        value,
        halved,
        error: (full - halved).abs() / 3.0,
        rule: "trapezoid-richardson".into(),
    })
}

fn endpoint_gap(path: &TrackedPath) -> f64 {
    let (a, b) = (path.first(), path.last());
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

/// `oint eta` over a closed path sampled on a uniform periodic grid, by the
/// periodic trapezoid rule.
pub fn loop_integral(path: &TrackedPath, hand: f64) -> Result<EtaIntegral, VolumeError> {
    if path.samples.is_empty() {
        return Err(VolumeError::Empty);
    }
    let gap = endpoint_gap(path);
    if gap > 1e-9 {
        return Err(VolumeError::OpenLoop(gap));
    }
    check_path(path, 1e-6)?;
    let (ts, g) = integrand_samples(path, hand);
    if ts.len() < 2 {
        return Ok(EtaIntegral {
            value: 0.0,
            halved: 0.0,
            error: 0.0,
            rule: "empty".into(),
        });
    }
    let n = ts.len() - 1;
    let h = (ts[n] - ts[0]) / n as f64;
    let value = h * g[..n].iter().sum::<f64>();
    let halved = if n % 2 == 0 {
        2.0 * h * g[..n].iter().step_by(2).sum::<f64>()
    } else {
        value
    };
    Ok(EtaIntegral {
        value,
        halved,
        error: (value - halved).abs(),
        rule: "periodic-trapezoid".into(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeLabel {
    pub value: f64,
    pub anchor: String,
    pub path_id: String,
    pub error: f64,
    /// The label recomputed on every other sample.
    pub halved: f64,
}

/// `+-Vol(M)` by orientation plus the scaled integral of `eta`.
pub fn anchored_volume(
    spec: &ManifoldSpec,
    orientation: Orientation,
    path: &TrackedPath,
    path_id: &str,
) -> Result<VolumeLabel, VolumeError> {
    let anchor = spec.reference_volume.value * orientation.sign();
    let label = |integral: f64| anchor + VOLUME_SCALE * integral;
    if path.samples.is_empty() {
        return Ok(VolumeLabel {
            value: anchor,
            anchor: format!("complete structure, volume {anchor}"),
            path_id: path_id.to_string(),
            error: 0.0,
            halved: anchor,
        });
    }
    let r = integrate_eta(path, spec.orientation_sign())?;
    Ok(VolumeLabel {
        value: label(r.value),
        anchor: format!("complete structure, volume {anchor}"),
        path_id: path_id.to_string(),
        error: VOLUME_SCALE * r.error,
        halved: label(r.halved),
    })
}

/// Anchored volume at every sample by cumulative trapezoid.
pub fn running_volume(spec: &ManifoldSpec, orientation: Orientation, path: &TrackedPath) -> Vec<f64> {
    let anchor = spec.reference_volume.value * orientation.sign();
    let (ts, g) = integrand_samples(path, spec.orientation_sign());
    let mut out = Vec::with_capacity(ts.len());
    let mut acc = 0.0;
    for k in 0..ts.len() {
        if k > 0 {
            acc += (ts[k] - ts[k - 1]) * (g[k] + g[k - 1]) / 2.0;
        }
        out.push(anchor + VOLUME_SCALE * acc);
    }
    out
}

/// Even Bernoulli numbers `|B_2|, |B_4|, ...` as exact rationals.
fn bernoulli_even(count: usize) -> Vec<BigRational> {
    let m = 2 * count;
    let mut b: Vec<BigRational> = vec![BigRational::one()];
    for n in 1..=m {
        // sum_{k<n} C(n+1, k) B_k = -(n+1) B_n
        let mut acc = BigRational::zero();
        let mut binom = BigInt::one();
        for (k, bk) in b.iter().enumerate() {
            acc += BigRational::from_integer(binom.clone()) * bk;
            binom = binom * BigInt::from(n + 1 - k) / BigInt::from(k + 1);
        }
        b.push(-acc / BigRational::from_integer(BigInt::from(n + 1)));
    }
    (1..=count).map(|k| num_traits::Signed::abs(&b[2 * k])).collect()
}

const LOBACHEVSKY_TERMS: usize = 40;

/// `zeta(2k) / (k (2k + 1))` for `k = 1..`.
fn lobachevsky_coefficients() -> &'static [f64] {
    static COEFFS: OnceLock<Vec<f64>> = OnceLock::new();
    COEFFS.get_or_init(|| {
        let two_pi = 2.0 * std::f64::consts::PI;
        let mut fact = BigInt::one();
        let mut out = Vec::new();
        for (i, b) in bernoulli_even(LOBACHEVSKY_TERMS).into_iter().enumerate() {
            let k = i + 1;
            fact = fact * BigInt::from(2 * k - 1) * BigInt::from(2 * k);
            // zeta(2k) = |B_2k| (2 pi)^{2k} / (2 (2k)!)
            let ratio = (b / BigRational::from_integer(fact.clone())).to_f64().expect("finite");
            let zeta = ratio * two_pi.powi(2 * k as i32) / 2.0;
            out.push(zeta / (k as f64 * (2 * k + 1) as f64));
        }
        out
    })
}

/// Lobachevsky function `-int_0^theta log|2 sin t| dt`.
///
/// Reduced to `|theta| <= pi/2` by oddness and period `pi`, then
/// `theta (1 - log|2 theta|) + sum_k zeta(2k) theta (theta/pi)^{2k} / (k (2k+1))`.
pub fn lobachevsky<T: Scalar>(theta: T) -> T {
    let pi = T::PI();
    let mut x = theta - (theta / pi).round() * pi;
    let mut sign = T::one();
    if x < T::zero() {
        x = -x;
        sign = -sign;
    }
    if x == T::zero() {
        return T::zero();
    }
    let r2 = (x / pi) * (x / pi);
    let mut pow = r2;
    let mut sum = x * (T::one() - (T::lit(2.0) * x).ln());
    for &c in lobachevsky_coefficients() {
        let term = T::lit(c) * x * pow;
        sum = sum + term;
        if term.abs() < T::epsilon() * T::lit(1e-3) {
            break;
        }
        pow = pow * r2;
    }
    sign * sum
}

/// Pairwise agreement of anchored volumes over one fiber.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberVolumeCheck {
    pub compared: usize,
    pub excluded: Vec<String>,
    pub max_difference: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Largest pairwise difference among fiber volumes, skipping points
/// flagged on `V` or on the branch locus.
pub fn fiber_volume_equality(report: &FiberReport, tol: f64) -> FiberVolumeCheck {
    let mut vals = Vec::new();
    let mut excluded = Vec::new();
    for (k, fp) in report.fiber.iter().enumerate() {
        match (&fp.volume, fp.branch_locus || fp.on_v) {
            (Some(v), false) => vals.push(v.value),
            (_, true) => excluded.push(format!("point {k}: on V or the branch locus")),
            (None, false) => excluded.push(format!("point {k}: no volume path")),
        }
    }
    let mut max_difference: f64 = 0.0;
    for i in 0..vals.len() {
        for j in i + 1..vals.len() {
            max_difference = max_difference.max((vals[i] - vals[j]).abs());
        }
    }
    FiberVolumeCheck {
        compared: vals.len(),
        excluded,
        max_difference,
        tolerance: tol,
        pass: max_difference < tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn romberg_is_exact_on_quartics() {
        let g: Vec<f64> = (0..=8).map(|k| (k as f64 / 8.0).powi(4)).collect();
        let (v, _) = romberg(0.0, 1.0, &g).unwrap();
        assert!((v - 0.2).abs() < 1e-15);
    }

    #[test]
    fn bernoulli_start() {
        let b = bernoulli_even(3);
        assert_eq!(b[0], BigRational::new(1.into(), 6.into()));
        assert_eq!(b[1], BigRational::new(1.into(), 30.into()));
        assert_eq!(b[2], BigRational::new(1.into(), 42.into()));
    }
}
