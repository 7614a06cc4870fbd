//! Extended variety and eigenvalue variety.
//!
//! The extended system adjoins Laurent variables `m_i, l_i` and the
//! generators `I_{M_i} - (m_i + 1/m_i)`, `I_{L_i} - (l_i + 1/l_i)`,
//! `I_{M_i L_i} - (m_i l_i + 1/(m_i l_i))` to the gauged representation
//! ideal.  Elimination runs on an equivalent pairing form: the meridian
//! generator together with `l (m^2 - 1) - (m I_{ML} - I_L)`, which follows from
//! the three generators and fixes `l` on the sheet of `m`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::continuation::{self, common_eigenvector, Control, CuspMode, Deformation, TrackOptions};
use crate::linalg::{self, c};
use crate::manifold::ManifoldSpec;
use crate::polysys::{
    content_in, gcd, prem, resultant_index, square_free, trace_poly, PolyError, PolySystem, Polynomial, PolynomialJson,
    VarSet,
};
use crate::repvar::{build_gauged_system, CharacterPoint, GaugedSystem, RepError};
use crate::scalar::log_near;
use crate::C64;

/// Most variables a resultant tree is attempted on.
pub const ELIMINATION_BUDGET: usize = 6;

#[derive(Debug, Error)]
pub enum EigenError {
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("{vars} variables exceed the elimination budget of {budget}; sample the variety numerically instead (`apoly --sample N`)")]
    Budget { vars: usize, budget: usize },
    #[error("resultant in {0} vanished identically")]
    ZeroResultant(String),
    #[error("elimination left no polynomial in the peripheral variables")]
    Empty,
    #[error("cusp {0}: peripheral image is +-identity")]
    PeripheralTrivial(usize),
    #[error("cusp {cusp}: eigenvalues inconsistent with boundary traces ({defect:.3e})")]
    Pairing { cusp: usize, defect: f64 },
}

#[derive(Clone, Debug)]
pub struct ExtendedSystem {
    pub system: PolySystem,
    /// Index of the first peripheral variable; `m_i, l_i` follow in order.
    pub peripheral_offset: usize,
    pub cusp_count: usize,
    /// `l_i (m_i^2 - 1) - (m_i I_{M_i L_i} - I_{L_i})` per cusp.
    pub pairing: Vec<Polynomial>,
    /// `I_{M_i} - (m_i + 1/m_i)` per cusp.
    pub meridian: Vec<Polynomial>,
    pub relator_count: usize,
}

impl ExtendedSystem {
    pub fn vars(&self) -> &Arc<VarSet> {
        &self.system.vars
    }

    pub fn m_index(&self, i: usize) -> usize {
        self.peripheral_offset + 2 * i
    }

    pub fn l_index(&self, i: usize) -> usize {
        self.peripheral_offset + 2 * i + 1
    }
}

pub fn build_extended(spec: &ManifoldSpec) -> Result<ExtendedSystem, EigenError> {
    let gs = build_gauged_system(spec)?;
    build_extended_from(&gs)
}

pub fn build_extended_from(gs: &GaugedSystem) -> Result<ExtendedSystem, EigenError> {
    let base = &gs.system.vars;
    let h = gs.cusp_count();
    let mut names: Vec<(String, bool)> = base
        .names()
        .iter()
        .enumerate()
        .map(|(i, n)| (n.clone(), base.is_laurent(i)))
        .collect();
    let peripheral_offset = names.len();
    for i in 1..=h {
        let suffix = if h == 1 { String::new() } else { i.to_string() };
        names.push((format!("m{suffix}"), true));
        names.push((format!("l{suffix}"), true));
    }
    let vars = VarSet::new(names);
    let embed = |p: &Polynomial| p.embed(&vars);
    let mut polys: Vec<Polynomial> = gs.system.polynomials.iter().map(embed).collect::<Result<_, _>>()?;
    let relator_count = polys.len();
    let gens: Vec<_> = gs
        .generators
        .iter()
        .map(|g| {
            let [a, b, cc, d] = g.entries();
            Ok::<_, PolyError>(crate::polysys::SymMatrix2::new(embed(a)?, embed(b)?, embed(cc)?, embed(d)?))
        })
        .collect::<Result<_, _>>()?;
    let mut pairing = Vec::new();
    let mut meridian = Vec::new();
    for (i, cusp) in gs.spec.cusps.iter().enumerate() {
        let mi = peripheral_offset + 2 * i;
        let m = Polynomial::var_index(&vars, mi, 1);
        let m_inv = Polynomial::var_index(&vars, mi, -1);
        let l = Polynomial::var_index(&vars, mi + 1, 1);
        let l_inv = Polynomial::var_index(&vars, mi + 1, -1);
        let im = trace_poly(&cusp.meridian, &gens);
        let il = trace_poly(&cusp.longitude, &gens);
        let iml = trace_poly(&cusp.meridian.concat(&cusp.longitude), &gens);
        let em = &im - &(&m + &m_inv);
        let el = &il - &(&l + &l_inv);
        let ml = &m * &l;
        let eml = &iml - &(&ml + &(&m_inv * &l_inv));
        let one = Polynomial::one(&vars);
        let pair = &(&l * &(&(&m * &m) - &one)) - &(&(&m * &iml) - &il);
        polys.extend([em.clone(), el, eml]);
        meridian.push(em);
        pairing.push(pair);
    }
    let system = PolySystem::new(
        vars,
        polys,
        format!("{}: gauged ideal plus peripheral trace generators", gs.spec.name),
    )?;
    Ok(ExtendedSystem {
        system,
        peripheral_offset,
        cusp_count: h,
        pairing,
        meridian,
        relator_count,
    })
}

/// Peripheral eigenvalues `(m_i, l_i)` with optional branch lifts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenvaluePoint {
    pub values: Vec<(C64, C64)>,
    pub lifts: Option<Vec<(C64, C64)>>,
}

impl EigenvaluePoint {
    pub fn from_lifts(lifts: Vec<(C64, C64)>) -> Self {
        EigenvaluePoint {
            values: lifts.iter().map(|&(u, v)| (u.exp(), v.exp())).collect(),
            lifts: Some(lifts),
        }
    }

    /// Coordinates `(m_1, l_1, ..., m_h, l_h)`.
    pub fn flat(&self) -> Vec<C64> {
        self.values.iter().flat_map(|&(m, l)| [m, l]).collect()
    }
}

/// Eigenvalues of the peripheral matrices on a common eigenvector.  Near
/// parabolic cusps (both traces within `1e-4` of `+-2`) keep the tracked
/// values carried by `pt`.
pub fn sample_point(gs: &GaugedSystem, pt: &CharacterPoint) -> Result<EigenvaluePoint, EigenError> {
    let mats = gs.peripheral_matrices(&pt.coords);
    let mut lifts = Vec::new();
    for (i, ((m, l), logs)) in mats.iter().zip(&pt.peripheral).enumerate() {
        if linalg::distance_to_pm_identity(m) < 1e-9 && linalg::distance_to_pm_identity(l) < 1e-9 {
            return Err(EigenError::PeripheralTrivial(i));
        }
        let tm = linalg::trace(m);
        let tl = linalg::trace(l);
        let near = |z: C64| (z.norm() - 2.0).abs() < 1e-4 && z.im.abs() < 1e-4;
        let (u, v) = if near(tm) && near(tl) {
            (logs.u, logs.v)
        } else {
            let (_, mu, lu) = common_eigenvector(m, l, logs.m, logs.l).ok_or(EigenError::PeripheralTrivial(i))?;
            (log_near(mu, logs.u), log_near(lu, logs.v))
        };
        let (me, le) = (u.exp(), v.exp());
        let ml = linalg::trace(&(m * l));
        let defect = (me + 1.0 / me - tm)
            .norm()
            .max((le + 1.0 / le - tl).norm())
            .max((me * le + 1.0 / (me * le) - ml).norm());
        if defect > 1e-8 * (1.0 + tm.norm() + tl.norm() + ml.norm()) {
            return Err(EigenError::Pairing { cusp: i, defect });
        }
        lifts.push((u, v));
    }
    Ok(EigenvaluePoint::from_lifts(lifts))
}

/// Inverts `(m_i, l_i)` for `i` in `subset`; lifts are negated.
pub fn gamma_act(x: &EigenvaluePoint, subset: &[usize]) -> EigenvaluePoint {
    let mut out = x.clone();
    for &i in subset {
        let (m, l) = out.values[i];
        out.values[i] = (1.0 / m, 1.0 / l);
        if let Some(lifts) = out.lifts.as_mut() {
            lifts[i] = (-lifts[i].0, -lifts[i].1);
        }
    }
    out
}

pub fn on_u(x: &EigenvaluePoint, tol: f64) -> bool {
    let one = c(1.0, 0.0);
    x.values
        .iter()
        .any(|&(m, l)| (m * m - one).norm() < tol && (l * l - one).norm() < tol)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EliminantSet {
    pub polynomials: Vec<PolynomialJson>,
    /// Variable names of the peripheral coordinates.
    pub variables: Vec<String>,
    pub tree: Vec<String>,
    pub flags: Vec<String>,
    #[serde(skip)]
    pub exact: Vec<Polynomial>,
}

impl EliminantSet {
    /// `|f(x)| / sum |terms of f at x|` per polynomial.
    pub fn scaled_residuals(&self, x: &EigenvaluePoint) -> Vec<f64> {
        let pt = x.flat();
        self.exact
            .iter()
            .map(|f| {
                let v = f.evaluate(&pt).map(|z| z.norm()).unwrap_or(f64::INFINITY);
                v / f.evaluate_abs(&pt).max(f64::MIN_POSITIVE)
            })
            .collect()
    }

    /// Plain-text rendering, one polynomial per line.
    pub fn to_text(&self) -> String {
        self.exact.iter().map(|p| format!("{p}\n")).collect()
    }
}

/// Drops monomial factors in the Laurent variables and normalizes the
/// content.
fn clean(p: &Polynomial) -> Option<Polynomial> {
    if p.is_zero() {
        return None;
    }
    let p = p.clear_denominators().0.primitive();
    (!p.is_constant()).then_some(p)
}

fn reduce(p: &Polynomial) -> Option<Polynomial> {
    clean(&square_free(&clean(p)?))
}

fn support_key(p: &Polynomial) -> Vec<bool> {
    p.support()
}

fn size(p: &Polynomial) -> (i32, usize) {
    (p.total_degree(), p.len())
}

/// Replace each group of polynomials with the same variable support by
/// its gcd when that is nonconstant, otherwise keep the two smallest.
fn compress(polys: Vec<Polynomial>, tree: &mut Vec<String>) -> Vec<Polynomial> {
    let mut groups: Vec<(Vec<bool>, Vec<Polynomial>)> = Vec::new();
    for p in polys {
        let key = support_key(&p);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, g)) => g.push(p),
            None => groups.push((key, vec![p])),
        }
    }
    let mut out = Vec::new();
    for (_, mut grp) in groups {
        grp.sort_by_key(size);
        if grp.len() > 1 {
            let mut g = grp[0].clone();
            for q in &grp[1..] {
                g = gcd(&g, q);
                if g.is_constant() {
                    break;
                }
            }
            if let Some(g) = (!g.is_constant()).then(|| reduce(&g)).flatten() {
                tree.push(format!("  gcd of {} -> degrees {:?}, {} terms", grp.len(), g.degrees(), g.len()));
                out.push(g);
                continue;
            }
        }
        out.extend(grp.into_iter().take(2));
    }
    out
}

/// One resultant step in variable `v`: pseudo-reduce every polynomial by
/// the lowest-degree pivot, then take resultants with it.
/// A cleaned polynomial that is a power of a single non-Laurent variable
/// forces that variable to vanish; substitute zero everywhere.
fn substitute_zeros(mut polys: Vec<Polynomial>, tree: &mut Vec<String>) -> Vec<Polynomial> {
    loop {
        let hit = polys.iter().find_map(|p| {
            let (e, _) = p.terms().next().filter(|_| p.len() == 1)?;
            let nz: Vec<usize> = (0..e.len()).filter(|&i| e[i] != 0).collect();
            (nz.len() == 1 && !p.vars().is_laurent(nz[0])).then_some(nz[0])
        });
        let Some(v) = hit else { return polys };
        tree.push(format!("{} = 0 on every component left", polys[0].vars().names()[v]));
        polys = polys
            .iter()
            .filter_map(|p| reduce(&p.coefficients_in(v).swap_remove(0)))
            .collect();
    }
}

/// Pseudo-division by a polynomial whose leading coefficient in a gauge
/// variable is a Laurent monomial (a unit) stays inside the ideal; use every
/// such polynomial to lower the degrees of the others.
fn unit_reduce(mut polys: Vec<Polynomial>, gauge: &[usize], peripheral: bool) -> Vec<Polynomial> {
    let unit_lead = |g: &Polynomial, v: usize| {
        let lc = g.coefficients_in(v).pop().unwrap();
        lc.len() == 1 && lc.terms().all(|(e, _)| e.iter().enumerate().all(|(i, &k)| k == 0 || g.vars().is_laurent(i)))
    };
    let mut k = 0;
    while k < polys.len() {
        let g = polys[k].clone();
        for &v in gauge {
            if g.degree(v) == 0 || !unit_lead(&g, v) || (!peripheral && (0..g.vars().len()).any(|i| !gauge.contains(&i) && g.involves(i))) {
                continue;
            }
            polys = polys
                .into_iter()
                .enumerate()
                .filter_map(|(j, f)| if j != k && f.degree(v) >= g.degree(v) { reduce(&prem(&f, &g, v)) } else { Some(f) })
                .collect();
            k = polys.iter().position(|p| *p == g).expect("reducer kept");
        }
        k += 1;
    }
    polys.dedup();
    polys
}

fn eliminate_var(
    polys: Vec<Polynomial>,
    v: usize,
    gauge: &[usize],
    peripheral_reducers: bool,
    name: &str,
    tree: &mut Vec<String>,
) -> Result<Vec<Polynomial>, EigenError> {
    let polys = unit_reduce(substitute_zeros(polys, tree), gauge, peripheral_reducers);
    let (mut with, rest): (Vec<_>, Vec<_>) = polys.into_iter().partition(|p| p.degree(v) > 0);
    if with.is_empty() {
        return Ok(rest);
    }
    with.sort_by_key(|p| (p.degree(v), p.len()));
    let pivot = with.remove(0);
    tree.push(format!("eliminate {name}: pivot degrees {:?}, {} terms", pivot.degrees(), pivot.len()));
    let results: Vec<Option<Polynomial>> = with
        .par_iter()
        .map(|q| {
            let q = if q.degree(v) >= pivot.degree(v) { clean(&prem(q, &pivot, v))? } else { q.clone() };
            if q.degree(v) == 0 {
                return reduce(&q);
            }
            reduce(&resultant_index(&pivot, &q, v))
        })
        .collect();
    let mut out = rest;
    let mut produced = 0;
    for r in results.into_iter().flatten() {
        tree.push(format!("  resultant -> degrees {:?}, {} terms", r.degrees(), r.len()));
        out.push(r);
        produced += 1;
    }
    if produced == 0 && !with.is_empty() {
        return Err(EigenError::ZeroResultant(name.to_string()));
    }
    Ok(compress(out, tree))
}

fn tree_eliminate(
    ext: &ExtendedSystem,
    relators: &[Polynomial],
    peripheral_reducers: bool,
    tree: &mut Vec<String>,
) -> Result<Vec<Polynomial>, EigenError> {
    let names = ext.vars().names();
    let gauge: Vec<usize> = (0..ext.peripheral_offset).collect();
    // Gauge variables other than the first, highest index first, on the
    // relators alone.
    let mut phase1 = relators.to_vec();
    let mut gauge_relations = Vec::new();
    for &v in gauge.iter().skip(1).rev() {
        if phase1.iter().filter(|p| p.degree(v) > 0).count() < 2 {
            continue;
        }
        tree.push("relators only:".into());
        phase1 = eliminate_var(phase1, v, &gauge, peripheral_reducers, &names[v], tree)?;
        gauge_relations.extend(phase1.iter().filter(|p| !p.involves(v)).cloned());
    }
    let mut polys: Vec<Polynomial> = relators.to_vec();
    polys.extend(gauge_relations);
    for i in 0..ext.cusp_count {
        polys.extend(reduce(&ext.meridian[i]));
        polys.extend(reduce(&ext.pairing[i]));
    }
    polys = compress(polys, tree);
    let mut remaining: Vec<usize> = gauge.iter().skip(1).cloned().collect();
    while !remaining.is_empty() {
        let (pos, &v) = remaining
            .iter()
            .enumerate()
            .min_by_key(|&(_, &v)| {
                polys
                    .iter()
                    .filter(|p| p.degree(v) > 0)
                    .map(|p| p.degree(v))
                    .min()
                    .unwrap_or(0)
            })
            .expect("nonempty");
        remaining.remove(pos);
        polys = eliminate_var(polys, v, &gauge, peripheral_reducers, &names[v], tree)?;
    }
    polys = eliminate_var(polys, gauge[0], &gauge, peripheral_reducers, &names[gauge[0]], tree)?;
    let finals: Vec<Polynomial> = polys.into_iter().filter(|p| gauge.iter().all(|&v| !p.involves(v))).collect();
    if finals.is_empty() {
        return Err(EigenError::Empty);
    }
    Ok(finals)
}

/// Resultant-tree eliminant of the eigenvalue variety.
///
/// Gauge variables are eliminated from the relators first; the compressed
/// relations join the full system, which is then eliminated in ascending
/// degree order with `s` last.  Eliminants are reduced to their primitive
/// square-free part, stripped of content in the longitudes, and intersected
/// with their image under `Gamma`.
pub fn eliminate(ext: &ExtendedSystem) -> Result<EliminantSet, EigenError> {
    let vars = ext.vars().clone();
    let names = vars.names().to_vec();
    let nv = vars.len();
    let peripheral_names: Vec<String> = names[ext.peripheral_offset..].to_vec();
    let gauge: Vec<usize> = (0..ext.peripheral_offset).collect();
    let mut tree = Vec::new();
    let mut flags = Vec::new();
    let relators: Vec<Polynomial> = ext.system.polynomials[..ext.relator_count].iter().filter_map(reduce).collect();
    if relators.is_empty() && gauge.iter().all(|&v| ext.system.polynomials.iter().all(|p| !p.involves(v))) {
        let exact: Vec<Polynomial> = ext.system.polynomials.to_vec();
        return Ok(EliminantSet {
            polynomials: exact.iter().map(|p| p.to_json()).collect(),
            variables: peripheral_names,
            tree: vec!["no gauge variables: returned unchanged".into()],
            flags,
            exact,
        });
    }
    if nv > ELIMINATION_BUDGET {
        return Err(EigenError::Budget {
            vars: nv,
            budget: ELIMINATION_BUDGET,
        });
    }
    let mut finals = match tree_eliminate(ext, &relators, false, &mut tree) {
        Err(EigenError::ZeroResultant(v)) => {
            tree.push(format!("resultant in {v} vanished; retrying with peripheral reducers"));
            tree_eliminate(ext, &relators, true, &mut tree)?
        }
        other => other?,
    };
    finals.sort_by_key(size);
    let mut out = Vec::new();
    for f in finals {
        let mut f = f;
        for i in 0..ext.cusp_count {
            let li = ext.l_index(i);
            if f.degree(li) > 0 {
                let cont = content_in(&f, li);
                if !cont.is_constant() {
                    flags.push(format!("removed content {} in {}", cont, names[li]));
                    f = f.exact_div(&cont).expect("content divides");
                }
            }
        }
        let Some(f) = reduce(&f) else { continue };
        let mut g = Some(f.clone());
        for i in 0..ext.cusp_count {
            let Some(cur) = g else { break };
            let image = cur.invert_var(ext.m_index(i)).invert_var(ext.l_index(i));
            g = clean(&gcd(&cur, &image));
        }
        let f = match g {
            Some(g) if g.len() < f.len() => {
                flags.push(format!("dropped factors not invariant under Gamma ({} -> {} terms)", f.len(), g.len()));
                g
            }
            Some(_) => f,
            None => {
                flags.push("eliminant has no Gamma-invariant factor; kept unreduced".into());
                f
            }
        };
        if !out.iter().any(|o: &Polynomial| o == &f) {
            out.push(f);
        }
    }
    // Re-express over the peripheral variables only.
    let pvars = VarSet::new(
        peripheral_names
            .iter()
            .map(|n| (n.clone(), true))
            .collect::<Vec<_>>(),
    );
    let exact: Vec<Polynomial> = out
        .iter()
        .map(|p| restrict(p, ext.peripheral_offset, &pvars))
        .collect();
    Ok(EliminantSet {
        polynomials: exact.iter().map(|p| p.to_json()).collect(),
        variables: peripheral_names,
        tree,
        flags,
        exact,
    })
}

fn restrict(p: &Polynomial, offset: usize, target: &Arc<VarSet>) -> Polynomial {
    Polynomial::from_terms(target, p.terms().map(|(e, c)| (e[offset..].to_vec(), c.clone()))).expect("peripheral exponents")
}

/// Eigenvalue-variety points over random meridian eigenvalues, solved by
/// continuation in `u_1` from `start` (all other cusps follow `u_i`
/// segments to their own random targets).
pub fn sample_by_fiber_solving(
    gs: &GaugedSystem,
    start: &CharacterPoint,
    count: usize,
    seed: u64,
    opts: &TrackOptions,
) -> Vec<Result<EigenvaluePoint, String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let targets: Vec<Vec<C64>> = (0..count)
        .map(|_| {
            start
                .peripheral
                .iter()
                .map(|p| {
                    let r = rng.random_range(0.05..0.6);
                    let th = rng.random_range(0.0..2.0 * std::f64::consts::PI);
                    p.u + c(r * th.cos(), r * th.sin())
                })
                .collect()
        })
        .collect();
    targets
        .par_iter()
        .map(|target| {
            let modes = start
                .peripheral
                .iter()
                .zip(target)
                .map(|(p, &end)| CuspMode::Active(Control::LogSegment { start: p.u, end }))
                .collect();
            let def = Deformation::new(gs, modes);
            let st = def.state_from(&start.coords, &start.logs()).map_err(|e| e.to_string())?;
            let (_, end) = continuation::track(&def, &st, 0.0, 1.0, opts, start.orientation).map_err(|e| e.to_string())?;
            let pt = def.to_point(&end, start.orientation);
            sample_point(gs, &pt).map_err(|e| e.to_string())
        })
        .collect()
}
