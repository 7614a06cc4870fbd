//! Gauge-fixed SL(2,C) representation variety, peripheral traces and the
//! sign-twist action of `H^1(M; Z/2)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::continuation::{self, ContinuationError};
use crate::linalg::{self, c, eval_word, trace};
use crate::manifold::{z2_cocycle_basis, ManifoldSpec, Word};
use crate::polysys::{word_matrix, CompiledSystem, PolyError, PolySystem, Polynomial, SymMatrix2, VarSet};
use crate::{Mat2, C64};

#[derive(Debug, Error)]
pub enum RepError {
    #[error("the gauge needs at least two generators, got {0}")]
    TooFewGenerators(usize),
    #[error("gauge failure: {0}")]
    Gauge(String),
    #[error("seed representation has no SL(2,C) lift with all relators at +I")]
    NoLift,
    #[error("sign twist sends relator {0} to -1")]
    TwistNotHomomorphism(usize),
    #[error("peripheral image of cusp {0} is +-identity")]
    PeripheralTrivial(usize),
    #[error("no convergent irreducible parabolic candidate in {0} starts")]
    NoCandidate(usize),
    #[error("{0} distinct positively oriented parabolic candidates")]
    Ambiguous(usize),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Continuation(#[from] Box<ContinuationError>),
}

impl From<ContinuationError> for RepError {
    fn from(e: ContinuationError) -> Self {
        RepError::Continuation(Box::new(e))
    }
}

/// The representation-variety slice
/// `g1 = [[s, 1], [0, 1/s]]`, `g2 = [[p, 0], [t, 1/p]]`, `gk = [[a, b], [c, d]]`.
#[derive(Clone, Debug)]
pub struct GaugedSystem {
    pub spec: ManifoldSpec,
    pub system: PolySystem,
    pub generators: Vec<SymMatrix2>,
    pub gauge_description: String,
    relators: CompiledSystem,
    peripheral: CompiledSystem,
    character_words: Vec<Word>,
}

pub fn build_gauged_system(spec: &ManifoldSpec) -> Result<GaugedSystem, RepError> {
    let n = spec.generators;
    if n < 2 {
        return Err(RepError::TooFewGenerators(n));
    }
    let mut names: Vec<(String, bool)> = vec![("s".into(), true), ("p".into(), true), ("t".into(), false)];
    for k in 3..=n {
        for e in ["a", "b", "c", "d"] {
            names.push((format!("{e}{k}"), false));
        }
    }
    let vars = VarSet::new(names);
    let one = Polynomial::one(&vars);
    let zero = Polynomial::zero(&vars);
    let mut generators = vec![
        SymMatrix2::new(
            Polynomial::var_index(&vars, 0, 1),
            one.clone(),
            zero.clone(),
            Polynomial::var_index(&vars, 0, -1),
        ),
        SymMatrix2::new(
            Polynomial::var_index(&vars, 1, 1),
            zero.clone(),
            Polynomial::var_index(&vars, 2, 1),
            Polynomial::var_index(&vars, 1, -1),
        ),
    ];
    for k in 3..=n {
        let base = 3 + 4 * (k - 3);
        let v = |j: usize| Polynomial::var_index(&vars, base + j, 1);
        generators.push(SymMatrix2::new(v(0), v(1), v(2), v(3)));
    }
    let mut polys = Vec::new();
    for r in &spec.relators {
        let w = word_matrix(r, &generators);
        for (i, e) in w.entries().into_iter().enumerate() {
            let p = if i == 0 || i == 3 { e - &one } else { e.clone() };
            if !p.is_zero() {
                polys.push(p);
            }
        }
    }
    for g in &generators[2..] {
        polys.push(&g.determinant() - &one);
    }
    let nvars = vars.len();
    let system = PolySystem::new(vars, polys, format!("{}: relator entries and det-1 relations", spec.name))?;
    let mut periph = Vec::new();
    for cusp in &spec.cusps {
        for w in [&cusp.meridian, &cusp.longitude] {
            let m = word_matrix(w, &generators);
            periph.extend(m.entries().into_iter().cloned());
        }
    }
    let mut character_words = Vec::new();
    for i in 1..=n as i32 {
        character_words.push(Word::new(vec![i]));
    }
    for i in 1..=n as i32 {
        for j in i + 1..=n as i32 {
            character_words.push(Word::new(vec![i, j]));
        }
    }
    for i in 1..=n as i32 {
        for j in i + 1..=n as i32 {
            for k in j + 1..=n as i32 {
                character_words.push(Word::new(vec![i, j, k]));
            }
        }
    }
    let gauge_description = "g1 = [[s, 1], [0, 1/s]], g2 = [[p, 0], [t, 1/p]], remaining generators free with det = 1".to_string();
    Ok(GaugedSystem {
        relators: CompiledSystem::new(&system.polynomials, nvars),
        peripheral: CompiledSystem::new(&periph, nvars),
        spec: spec.clone(),
        system,
        generators,
        gauge_description,
        character_words,
    })
}

impl GaugedSystem {
    pub fn nvars(&self) -> usize {
        self.system.vars.len()
    }

    pub fn cusp_count(&self) -> usize {
        self.spec.cusp_count()
    }

    /// Numeric generator matrices at gauge coordinates `x`.
    pub fn matrices(&self, x: &[C64]) -> Vec<Mat2> {
        let one = c(1.0, 0.0);
        let zero = c(0.0, 0.0);
        let mut out = vec![
            Matrix2::new(x[0], one, zero, one / x[0]),
            Matrix2::new(x[1], zero, x[2], one / x[1]),
        ];
        for k in 3..=self.spec.generators {
            let b = 3 + 4 * (k - 3);
            out.push(Matrix2::new(x[b], x[b + 1], x[b + 2], x[b + 3]));
        }
        out
    }

    pub fn relator_values(&self, x: &[C64]) -> Vec<C64> {
        self.relators.eval(x)
    }

    pub fn relator_system(&self) -> &CompiledSystem {
        &self.relators
    }

    /// Compiled entries of `rho(M_i)` and `rho(L_i)`, 8 rows per cusp.
    pub fn peripheral_system(&self) -> &CompiledSystem {
        &self.peripheral
    }

    /// Largest absolute relator residual.
    pub fn residual(&self, x: &[C64]) -> f64 {
        self.relators.eval(x).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Relator residual relative to the size of the cancelling terms.
    pub fn scaled_residual(&self, x: &[C64]) -> f64 {
        self.relators.scaled_residual(x)
    }

    pub fn peripheral_matrices(&self, x: &[C64]) -> Vec<(Mat2, Mat2)> {
        let e = self.peripheral.eval(x);
        e.chunks(8)
            .map(|q| (Matrix2::new(q[0], q[1], q[2], q[3]), Matrix2::new(q[4], q[5], q[6], q[7])))
            .collect()
    }

    pub fn boundary_traces(&self, x: &[C64]) -> Vec<BoundaryTraces> {
        self.peripheral_matrices(x)
            .into_iter()
            .map(|(m, l)| BoundaryTraces {
                meridian: trace(&m),
                longitude: trace(&l),
                product: trace(&(m * l)),
            })
            .collect()
    }

    /// Traces of all generator words of length at most three; these
    /// determine the character.
    pub fn character(&self, x: &[C64]) -> Vec<C64> {
        let mats = self.matrices(x);
        self.character_words.iter().map(|w| trace(&eval_word(w, &mats))).collect()
    }

    /// `tr [g1, g2] - 2`, zero exactly on reducible pairs.
    pub fn commutator_defect(&self, x: &[C64]) -> C64 {
        let m = self.matrices(x);
        let k = m[0] * m[1] * linalg::inverse_sl2(&m[0]) * linalg::inverse_sl2(&m[1]);
        trace(&k) - c(2.0, 0.0)
    }

    /// Assemble a point from gauge coordinates and per-cusp log lifts.
    pub fn point(&self, x: Vec<C64>, logs: &[(C64, C64)], orientation: Orientation) -> CharacterPoint {
        let traces = self.boundary_traces(&x);
        let residual = self.residual(&x);
        CharacterPoint {
            peripheral: logs
                .iter()
                .map(|&(u, v)| CuspLogs {
                    u,
                    v,
                    m: u.exp(),
                    l: v.exp(),
                })
                .collect(),
            coords: x,
            traces,
            residual,
            orientation,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Positive,
    Negative,
    Unassigned,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Negative => -1.0,
            _ => 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CuspLogs {
    pub u: C64,
    pub v: C64,
    pub m: C64,
    pub l: C64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTraces {
    pub meridian: C64,
    pub longitude: C64,
    pub product: C64,
}

/// A point of the gauge slice with branch-tracked peripheral logs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharacterPoint {
    pub coords: Vec<C64>,
    pub peripheral: Vec<CuspLogs>,
    pub traces: Vec<BoundaryTraces>,
    pub residual: f64,
    pub orientation: Orientation,
}

impl CharacterPoint {
    pub fn logs(&self) -> Vec<(C64, C64)> {
        self.peripheral.iter().map(|p| (p.u, p.v)).collect()
    }
}

/// The `3h` boundary traces `(I_M, I_L, I_ML)` per cusp.
pub fn restriction_traces(pt: &CharacterPoint) -> Vec<C64> {
    pt.traces.iter().flat_map(|t| [t.meridian, t.longitude, t.product]).collect()
}

pub fn on_v(pt: &CharacterPoint, tol: f64) -> bool {
    let four = c(4.0, 0.0);
    pt.traces
        .iter()
        .any(|t| (t.meridian * t.meridian - four).norm() < tol && (t.longitude * t.longitude - four).norm() < tol)
}

/// A homomorphism `pi_1 -> {+-1}` given by its generator values.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SignTwist {
    pub epsilon: Vec<i8>,
}

impl SignTwist {
    pub fn trivial(n: usize) -> Self {
        SignTwist { epsilon: vec![1; n] }
    }

    pub fn is_trivial(&self) -> bool {
        self.epsilon.iter().all(|&e| e == 1)
    }

    pub fn on_word(&self, w: &Word) -> i8 {
        w.letters()
            .iter()
            .map(|&x| self.epsilon[x.unsigned_abs() as usize - 1])
            .product()
    }

    pub fn compose(&self, other: &SignTwist) -> SignTwist {
        SignTwist {
            epsilon: self.epsilon.iter().zip(&other.epsilon).map(|(a, b)| a * b).collect(),
        }
    }
}

/// All `2^{h1}` sign twists, trivial first, in a fixed order.
pub fn enumerate_twists(spec: &ManifoldSpec) -> Vec<SignTwist> {
    let basis = z2_cocycle_basis(spec.generators, &spec.relators);
    let n = spec.generators;
    (0..1u64 << basis.len())
        .map(|mask| {
            let mut bits = vec![0u8; n];
            for (j, b) in basis.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    for (x, y) in bits.iter_mut().zip(b) {
                        *x ^= y;
                    }
                }
            }
            SignTwist {
                epsilon: bits.iter().map(|&b| if b == 1 { -1 } else { 1 }).collect(),
            }
        })
        .collect()
}

/// Multiply each generator by its sign and re-gauge.  The slice form is
/// kept by conjugating with `diag(i, -i)` when `eps(g1) eps(g2) = -1`.
pub fn apply_twist(gs: &GaugedSystem, pt: &CharacterPoint, tw: &SignTwist) -> Result<CharacterPoint, RepError> {
    let spec = &gs.spec;
    if tw.epsilon.len() != spec.generators {
        return Err(RepError::Gauge("twist arity differs from generator count".into()));
    }
    for (i, r) in spec.relators.iter().enumerate() {
        if tw.on_word(r) != 1 {
            return Err(RepError::TwistNotHomomorphism(i));
        }
    }
    let e1 = tw.epsilon[0] as f64;
    let e2 = tw.epsilon[1] as f64;
    let x = &pt.coords;
    let mut y = x.clone();
    y[0] = x[0] * e1;
    y[1] = x[1] * e2;
    y[2] = x[2] * (e1 * e2);
    for k in 3..=spec.generators {
        let b = 3 + 4 * (k - 3);
        let e = tw.epsilon[k - 1] as f64;
        y[b] = x[b] * e;
        y[b + 1] = x[b + 1] * (e * e1);
        y[b + 2] = x[b + 2] * (e * e1);
        y[b + 3] = x[b + 3] * e;
    }
    let shift = |z: C64| if z.im < 0.0 { z + c(0.0, PI) } else { z - c(0.0, PI) };
    let logs: Vec<(C64, C64)> = spec
        .cusps
        .iter()
        .zip(&pt.peripheral)
        .map(|(cusp, lg)| {
            let u = if tw.on_word(&cusp.meridian) == -1 { shift(lg.u) } else { lg.u };
            let v = if tw.on_word(&cusp.longitude) == -1 { shift(lg.v) } else { lg.v };
            (u, v)
        })
        .collect();
    Ok(gs.point(y, &logs, pt.orientation))
}

/// Flip generator signs so every relator evaluates near `+I`.
pub fn lift_seed(spec: &ManifoldSpec, mats: &[Mat2]) -> Result<Vec<Mat2>, RepError> {
    let id = linalg::identity();
    let n = spec.generators;
    // Z/2 system: sum_g e(r, g) x_g = b_r.
    let mut rows: Vec<(Vec<u8>, u8)> = spec
        .relators
        .iter()
        .map(|r| {
            let w = eval_word(r, mats);
            let b = u8::from((w - id).norm() > (w + id).norm());
            let e = r.exponent_sums(n).into_iter().map(|e| e.rem_euclid(2) as u8).collect();
            (e, b)
        })
        .collect();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..n {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r].0[col] == 1) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row.0[col] == 1 {
                for j in 0..n {
                    row.0[j] ^= pivot.0[j];
                }
                row.1 ^= pivot.1;
            }
        }
        pivots.push(col);
        rank += 1;
    }
    if rows[rank..].iter().any(|r| r.1 == 1) {
        return Err(RepError::NoLift);
    }
    let mut flip = vec![0u8; n];
    for (row, &col) in rows.iter().zip(&pivots) {
        flip[col] = row.1;
    }
    Ok(mats
        .iter()
        .zip(&flip)
        .map(|(m, &f)| if f == 1 { -m } else { *m })
        .collect())
}

fn eigenpairs(m: &Mat2) -> Result<[(C64, nalgebra::Vector2<C64>); 2], RepError> {
    let tr = trace(m);
    let det = m.determinant();
    let disc = (tr * tr - det * 4.0).sqrt();
    let mut out = Vec::with_capacity(2);
    for lam in [(tr + disc) / 2.0, (tr - disc) / 2.0] {
        let a = m[(0, 0)] - lam;
        let b = m[(0, 1)];
        let cc = m[(1, 0)];
        let d = m[(1, 1)] - lam;
        let v = if a.norm() + b.norm() >= cc.norm() + d.norm() {
            nalgebra::Vector2::new(b, -a)
        } else {
            nalgebra::Vector2::new(d, -cc)
        };
        let nv = v.norm();
        if nv < 1e-14 {
            return Err(RepError::Gauge("scalar generator has no distinguished eigenvector".into()));
        }
        out.push((lam, v / c(nv, 0.0)));
    }
    Ok([out[0], out[1]])
}

/// All gauge-slice coordinates conjugate to the given matrices (up to four:
/// the eigenvalue choices for `g1` and `g2`), in a fixed order.
pub fn gauge_from_matrices(gs: &GaugedSystem, mats: &[Mat2]) -> Result<Vec<Vec<C64>>, RepError> {
    if mats.len() != gs.spec.generators {
        return Err(RepError::Gauge("matrix count differs from generator count".into()));
    }
    let a = mats[0];
    let b = mats[1];
    let ea = eigenpairs(&a)?;
    let eb = eigenpairs(&b)?;
    let mut out: Vec<Vec<C64>> = Vec::new();
    for (s, v1) in ea.iter() {
        for (k, (_, w)) in eb.iter().enumerate() {
            // w has eigenvalue 1/p, so p is the other one.
            let p = eb[1 - k].0;
            let p0 = Matrix2::from_columns(&[*v1, *w]);
            let d0 = p0.determinant();
            if d0.norm() < 1e-10 {
                continue;
            }
            let inv = p0.try_inverse().ok_or_else(|| RepError::Gauge("singular frame".into()))?;
            let x0 = (inv * a * p0)[(0, 1)];
            if x0.norm() < 1e-10 {
                continue;
            }
            let lam = (x0 / d0).sqrt();
            let mu = lam / x0;
            let pm = p0 * Matrix2::new(lam, c(0.0, 0.0), c(0.0, 0.0), mu);
            let pinv = linalg::inverse_sl2(&pm);
            let conj: Vec<Mat2> = mats.iter().map(|m| pinv * m * pm).collect();
            let mut x = vec![*s, p, conj[1][(1, 0)]];
            for m in &conj[2..] {
                x.extend([m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]]);
            }
            if out.iter().all(|y| dist(y, &x) > 1e-8) {
                out.push(x);
            }
        }
    }
    if out.is_empty() {
        return Err(RepError::Gauge("g1 and g2 share an eigenvector (reducible pair)".into()));
    }
    Ok(out)
}

fn dist(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// Options for [`find_complete`].
#[derive(Clone, Debug)]
pub struct CompleteOptions {
    /// Random starts when the spec has no seed.
    pub multistart: usize,
    pub seed: u64,
    pub residual_tol: f64,
}

impl Default for CompleteOptions {
    fn default() -> Self {
        CompleteOptions {
            multistart: 96,
            seed: 0,
            residual_tol: 1e-12,
        }
    }
}

/// The complete structure with its cusp shapes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CompleteStructure {
    pub point: CharacterPoint,
    /// `(v_i - v0_i) / (u_i - u0_i)` at the complete structure.
    pub cusp_shapes: Vec<C64>,
    /// `I_{M_i}(chi_0) / 2`.
    pub epsilon: Vec<i8>,
    /// Dimension of the slice tangent space at the complete structure.
    pub slice_dimension: usize,
    /// Numerical rank (threshold `1e-6`) of `d(I_M1, ..., I_Mh)` on the
    /// slice tangent space.
    pub trace_rank: usize,
    pub candidates: usize,
}

/// Parabolic lift data `(u0, v0)` read off boundary traces.
pub fn parabolic_logs(traces: &[BoundaryTraces]) -> Vec<(C64, C64)> {
    let lift = |z: C64| if z.re >= 0.0 { c(0.0, 0.0) } else { c(0.0, PI) };
    traces.iter().map(|t| (lift(t.meridian), lift(t.longitude))).collect()
}

/// Gauss-Newton on relators plus `I_{M_i}^2 = 4`, then orientation from
/// the sign of the cusp shapes.
pub fn find_complete(gs: &GaugedSystem, opts: &CompleteOptions) -> Result<CompleteStructure, RepError> {
    let starts: Vec<Vec<C64>> = match &gs.spec.seed {
        Some(seed) => {
            let lifted = lift_seed(&gs.spec, seed)?;
            gauge_from_matrices(gs, &lifted)?.into_iter().take(1).collect()
        }
        None => continuation::random_starts(gs.nvars(), opts.multistart, opts.seed),
    };
    let tried = starts.len();
    let refined = continuation::refine_parabolic(gs, &starts, opts.residual_tol);
    let mut candidates: Vec<(Vec<C64>, Vec<C64>)> = Vec::new();
    let mut last_err = None;
    for x in refined.into_iter().flatten() {
        if gs.commutator_defect(&x).norm() < 1e-6 {
            continue;
        }
        let trivial = gs
            .peripheral_matrices(&x)
            .iter()
            .position(|(m, l)| linalg::distance_to_pm_identity(m) < 1e-6 || linalg::distance_to_pm_identity(l) < 1e-6);
        if let Some(i) = trivial {
            last_err = Some(RepError::PeripheralTrivial(i));
            continue;
        }
        let ch = gs.character(&x);
        if candidates.iter().all(|(_, c2)| dist(c2, &ch) > 1e-6) {
            candidates.push((x, ch));
        }
    }
    if candidates.is_empty() {
        return Err(last_err.unwrap_or(RepError::NoCandidate(tried)));
    }
    let total = candidates.len();
    let mut assessed = Vec::new();
    for (x, _) in candidates {
        let traces = gs.boundary_traces(&x);
        let logs = parabolic_logs(&traces);
        let shapes = continuation::cusp_shapes(gs, &x, &logs)?;
        let orientation = orientation_from_shapes(gs, &shapes);
        assessed.push((x, logs, shapes, orientation));
    }
    let chosen = if gs.spec.seed.is_some() {
        assessed.swap_remove(0)
    } else {
        let mut positive: Vec<_> = assessed.into_iter().filter(|a| a.3 == Orientation::Positive).collect();
        match positive.len() {
            0 => return Err(RepError::NoCandidate(tried)),
            1 => positive.swap_remove(0),
            k => return Err(RepError::Ambiguous(k)),
        }
    };
    let (x, logs, shapes, orientation) = chosen;
    let tj = trace_jacobian_on_slice(gs, &x);
    let slice_dimension = tj.ncols();
    let trace_rank = linalg::numerical_rank(&tj, 1e-6);
    let epsilon = gs
        .boundary_traces(&x)
        .iter()
        .map(|t| if t.meridian.re >= 0.0 { 1 } else { -1 })
        .collect();
    Ok(CompleteStructure {
        point: gs.point(x, &logs, orientation),
        cusp_shapes: shapes,
        epsilon,
        slice_dimension,
        trace_rank,
        candidates: total,
    })
}

/// Positive orientation has `Im tau < 0` in a left-handed basis.
pub fn orientation_from_shapes(gs: &GaugedSystem, shapes: &[C64]) -> Orientation {
    let hand = gs.spec.orientation_sign();
    let signs: Vec<f64> = shapes.iter().map(|t| (t.im * hand).signum()).collect();
    if signs.iter().all(|&s| s < 0.0) {
        Orientation::Positive
    } else if signs.iter().all(|&s| s > 0.0) {
        Orientation::Negative
    } else {
        Orientation::Unassigned
    }
}

/// Jacobian of the boundary traces `I_{M_i}` on the tangent space of the
/// slice at `x`, as an `h x dim` matrix.
pub fn trace_jacobian_on_slice(gs: &GaugedSystem, x: &[C64]) -> DMatrix<C64> {
    let jr = gs.relators.jacobian(x);
    let n = gs.nvars();
    let gram = jr.adjoint() * &jr;
    let svd = gram.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let sv: Vec<f64> = svd.singular_values.iter().map(|s| s.sqrt()).collect();
    let smax = sv.iter().cloned().fold(0.0, f64::max).max(1e-300);
    let jp = gs.peripheral.jacobian(x);
    let h = gs.cusp_count();
    let tangent: Vec<nalgebra::DVector<C64>> =
        (0..n).filter(|&k| sv[k] <= smax * 1e-6).map(|k| vt.row(k).adjoint()).collect();
    DMatrix::from_fn(h, tangent.len(), |i, j| {
        let row_a = jp.row(8 * i);
        let row_d = jp.row(8 * i + 3);
        (row_a + row_d).transpose().dot(&tangent[j])
    })
}
