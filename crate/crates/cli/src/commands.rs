use std::str::FromStr;

use cuspvar::continuation::{
    exactness_loops, fiber_over, ClosedLoop, ContinuationError, Ellipse, log_segment_round_trip, random_log_ellipses, sample_dense_set, solve_filling, FiberOptions,
    FiberReport, FiberStatus, FillingCoefficients, FillingResult, RoundTrip, TrackOptions,
};
use cuspvar::eigenvar::{self, EigenvaluePoint, EliminantSet};
use cuspvar::manifold::{h1_z2, ManifoldSpec, Z2CohomologyData};
use cuspvar::repvar::{find_complete, CharacterPoint, restriction_traces, CompleteOptions, CompleteStructure, GaugedSystem};
use cuspvar::volume::{
    anchored_volume, eta_at, fiber_volume_equality, loop_integral, running_volume, FiberVolumeCheck, VolumeLabel,
};
use cuspvar::C64;
use serde::Serialize;

use crate::report::{overall, Check, Output, Report, RunConfig, Status, Timer};
use crate::RunArgs;

/// `eta` must vanish to this order at the complete structure.
const ETA_CRITICAL_TOL: f64 = 1e-9;
/// Filling equations at the endpoint of a filling path.
const FILLING_EQ_TOL: f64 = 1e-9;
/// Change of a volume label under step halving.
const HALVING_TOL: f64 = 1e-7;
/// Path reversal error.
const REVERSAL_TOL: f64 = 1e-9;
const MAX_LOOP_INTERVALS: usize = 2048;

pub struct Ctx {
    pub spec: ManifoldSpec,
    pub gs: GaugedSystem,
    pub args: RunArgs,
    pub out: Output,
    pub timer: Timer,
    pub config: RunConfig,
}

impl Ctx {
    fn hand(&self) -> f64 {
        self.spec.orientation_sign()
    }

    fn track_opts(&self) -> TrackOptions {
        TrackOptions {
            tol: self.args.tol_residual,
            ..TrackOptions::default()
        }
    }

    fn complete(&mut self) -> Result<CompleteStructure, String> {
        let opts = CompleteOptions {
            seed: self.args.seed,
            ..CompleteOptions::default()
        };
        let gs = &self.gs;
        self.timer
            .time("complete", || find_complete(gs, &opts))
            .map_err(|e| format!("complete structure: {e}"))
    }

    fn kappa(&self, text: Option<&str>) -> Result<FillingCoefficients, String> {
        let h = self.spec.cusp_count();
        let k = match text {
            Some(t) => FillingCoefficients::from_str(t)?,
            None => FillingCoefficients(vec![Some((1, 5)); h]),
        };
        k.validate(h).map_err(|e| e.to_string())?;
        Ok(k)
    }

    fn fill(&mut self, cs: &CompleteStructure, kappa: &FillingCoefficients) -> Result<FillingResult, String> {
        let opts = self.track_opts();
        let (gs, seed) = (&self.gs, self.args.seed);
        self.timer
            .time(&format!("fill {}", kappa.label()), || solve_filling(gs, cs, kappa, &opts, seed))
            .map_err(|e| format!("filling {}: {e}", kappa.label()))
    }

    fn finish<T: Serialize>(self, name: &str, checks: Vec<Check>, result: T) -> Result<Status, String> {
        let status = overall(&checks);
        let report = Report {
            config: self.config,
            status,
            checks,
            result,
            timings: self.out.timings.then(|| self.timer.into_map()),
        };
        self.out.emit(name, &report).map_err(|e| e.to_string())?;
        Ok(status)
    }
}

fn eta_check(ctx: &Ctx, cs: &CompleteStructure) -> (Option<EigenvaluePoint>, Check) {
    match eigenvar::sample_point(&ctx.gs, &cs.point) {
        Ok(x) => {
            let eta = eta_at(&x, ctx.hand()).map(|e| e.max_abs()).unwrap_or(f64::INFINITY);
            let c = Check::below(
                "eta vanishes at the complete structure",
                eta,
                ETA_CRITICAL_TOL,
                format!("max |eta coefficient| = {eta:.3e}"),
            );
            (Some(x), c)
        }
        Err(e) => (None, Check::new("eta vanishes at the complete structure", Status::Fail, e.to_string())),
    }
}

#[derive(Serialize)]
struct CompleteResult {
    complete: CompleteStructure,
    eigenvalues: Option<EigenvaluePoint>,
}

pub fn complete(mut ctx: Ctx) -> Result<Status, String> {
    let cs = ctx.complete()?;
    let mut checks = vec![Check::below(
        "relator residual",
        cs.point.residual,
        ctx.args.tol_residual,
        format!("orientation {:?}", cs.point.orientation),
    )];
    let (eigenvalues, c) = eta_check(&ctx, &cs);
    checks.push(c);
    ctx.finish("complete", checks, CompleteResult { complete: cs, eigenvalues })
}

#[derive(Serialize)]
struct ApolyResult {
    eliminants: Option<EliminantSet>,
    error: Option<String>,
    samples: Vec<EigenvaluePoint>,
    sample_failures: usize,
    sample_residuals: Vec<f64>,
}

pub fn apoly(mut ctx: Ctx, sample: Option<usize>) -> Result<Status, String> {
    let ext = eigenvar::build_extended_from(&ctx.gs).map_err(|e| e.to_string())?;
    let elim = ctx.timer.time("eliminate", || eigenvar::eliminate(&ext));
    let mut checks = Vec::new();
    let (eliminants, error) = match elim {
        Ok(e) => {
            ctx.out.text("apoly.txt", &e.to_text()).map_err(|e| e.to_string())?;
            checks.push(Check::new(
                "resultant elimination",
                Status::Pass,
                format!("{} eliminant(s) in {}", e.exact.len(), e.variables.join(", ")),
            ));
            (Some(e), None)
        }
        Err(eigenvar::EigenError::Budget { vars, budget }) if sample.is_some() => {
            let msg = format!("{vars} variables exceed the budget of {budget}; sampled numerically");
            checks.push(Check::new("resultant elimination", Status::Skipped, msg.clone()));
            (None, Some(msg))
        }
        Err(e) => {
            checks.push(Check::new("resultant elimination", Status::Fail, e.to_string()));
            (None, Some(e.to_string()))
        }
    };
    let mut samples = Vec::new();
    let mut sample_failures = 0;
    let mut sample_residuals = Vec::new();
    if let Some(n) = sample {
        let cs = ctx.complete()?;
        let kappa = ctx.kappa(None)?;
        let start = ctx.fill(&cs, &kappa)?;
        let opts = ctx.track_opts();
        let (gs, seed) = (&ctx.gs, ctx.args.seed);
        let got = ctx
            .timer
            .time("sample", || eigenvar::sample_by_fiber_solving(gs, &start.point, n, seed, &opts));
        for r in got {
            match r {
                Ok(x) => samples.push(x),
                Err(_) => sample_failures += 1,
            }
        }
        if let Some(e) = &eliminants {
            sample_residuals = samples
                .iter()
                .map(|x| e.scaled_residuals(x).into_iter().fold(f64::INFINITY, f64::min))
                .collect();
            let worst = sample_residuals.iter().cloned().fold(0.0, f64::max);
            checks.push(Check::below(
                "eliminant vanishes on samples",
                worst,
                1e-8,
                format!("{} samples, {} failed", samples.len(), sample_failures),
            ));
        }
        if sample_failures > 0 {
            checks.push(Check::new(
                "numerical sampling",
                Status::Inconclusive,
                format!("{sample_failures} of {n} samples failed to converge"),
            ));
        }
    }
    ctx.finish(
        "apoly",
        checks,
        ApolyResult {
            eliminants,
            error,
            samples,
            sample_failures,
            sample_residuals,
        },
    )
}

#[derive(Serialize)]
struct FillResult {
    filling: FillingResult,
    volume: Option<VolumeLabel>,
}

pub fn fill(mut ctx: Ctx, kappa: Option<&str>) -> Result<Status, String> {
    let kappa = ctx.kappa(kappa)?;
    let cs = ctx.complete()?;
    let r = ctx.fill(&cs, &kappa)?;
    let mut checks = vec![Check::below(
        "filling equations",
        r.equation_residual,
        FILLING_EQ_TOL,
        format!("kappa {}", kappa.label()),
    )];
    let volume = anchored_volume(&ctx.spec, cs.point.orientation, &r.path, &kappa.label());
    let volume = match volume {
        Ok(v) => {
            checks.push(Check::below(
                "volume stable under step halving",
                (v.value - v.halved).abs(),
                HALVING_TOL,
                format!("volume {:.12}", v.value),
            ));
            Some(v)
        }
        Err(e) => {
            checks.push(Check::new("anchored volume", Status::Fail, e.to_string()));
            None
        }
    };
    let rv = running_volume(&ctx.spec, cs.point.orientation, &r.path);
    ctx.out.path_csv("fill_path", &r.path, &rv).map_err(|e| e.to_string())?;
    ctx.finish("fill", checks, FillResult { filling: r, volume })
}

#[derive(Serialize)]
struct TrackResult {
    start: FillingCoefficients,
    target_u: Vec<C64>,
    round_trip: RoundTrip,
}

pub fn track(mut ctx: Ctx, kappa: Option<&str>, delta: (f64, f64)) -> Result<Status, String> {
    let kappa = ctx.kappa(kappa)?;
    let cs = ctx.complete()?;
    let start = ctx.fill(&cs, &kappa)?;
    let target: Vec<C64> = start.point.peripheral.iter().map(|p| p.u + C64::new(delta.0, delta.1)).collect();
    let opts = ctx.track_opts();
    let gs = &ctx.gs;
    let rt = ctx
        .timer
        .time("track", || log_segment_round_trip(gs, &start.point, &target, &opts))
        .map_err(|e| format!("track: {e}"))?;
    let checks = vec![Check::below(
        "path reversal",
        rt.reversal_error,
        REVERSAL_TOL,
        format!("{} + {} steps", rt.forward.steps, rt.backward.steps),
    )];
    let mut joined = start.path.clone().join(rt.forward.clone());
    for s in joined.samples.iter_mut().skip(start.path.samples.len()) {
        s.t += 1.0;
    }
    let rv = running_volume(&ctx.spec, cs.point.orientation, &joined);
    ctx.out.path_csv("track_path", &joined, &rv).map_err(|e| e.to_string())?;
    ctx.finish(
        "track",
        checks,
        TrackResult {
            start: kappa,
            target_u: target,
            round_trip: rt,
        },
    )
}

#[derive(Serialize)]
struct VolumeEntry {
    kappa: FillingCoefficients,
    volume: Option<VolumeLabel>,
    error: Option<String>,
}

#[derive(Serialize)]
struct VolumeResult {
    reference: f64,
    entries: Vec<VolumeEntry>,
}

/// Anchored volumes of the dense-set fillings with the ordering checks.
fn volume_checks(ctx: &Ctx, entries: &[VolumeEntry], ordered: bool) -> Vec<Check> {
    let reference = ctx.spec.reference_volume.value;
    let mut checks = Vec::new();
    let vols: Vec<Option<f64>> = entries.iter().map(|e| e.volume.as_ref().map(|v| v.value)).collect();
    for (e, v) in entries.iter().zip(&vols) {
        let label = e.kappa.label();
        match (v, &e.volume) {
            (Some(v), Some(lab)) => {
                checks.push(Check::below(
                    format!("volume {label} below reference"),
                    *v,
                    reference,
                    format!("{v:.12} < {reference:.12}"),
                ));
                checks.push(Check::below(
                    format!("volume {label} stable under step halving"),
                    (lab.value - lab.halved).abs(),
                    HALVING_TOL,
                    String::new(),
                ));
            }
            _ => checks.push(Check::new(
                format!("volume {label}"),
                Status::Fail,
                e.error.clone().unwrap_or_default(),
            )),
        }
    }
    if ordered && vols.len() > 1 {
        let vs: Vec<f64> = vols.iter().flatten().cloned().collect();
        let inc = vs.len() == vols.len() && vs.windows(2).all(|w| w[0] < w[1]);
        checks.push(Check::new(
            "volumes increase with q",
            Status::from_bool(inc),
            format!("{vs:?}"),
        ));
    }
    checks
}

fn dense_kappas(h: usize, primes: &[i64]) -> Vec<FillingCoefficients> {
    let mut combos: Vec<Vec<i64>> = vec![Vec::new()];
    for _ in 0..h {
        combos = combos
            .into_iter()
            .flat_map(|c| primes.iter().map(move |&q| [c.clone(), vec![q]].concat()))
            .collect();
    }
    combos
        .into_iter()
        .map(|qs| FillingCoefficients(qs.into_iter().map(|q| Some((1, q))).collect()))
        .collect()
}

pub fn volume(mut ctx: Ctx, kappas: &[String], primes: &[i64]) -> Result<Status, String> {
    let cs = ctx.complete()?;
    let list: Vec<FillingCoefficients> = if kappas.is_empty() {
        dense_kappas(ctx.spec.cusp_count(), primes)
    } else {
        kappas.iter().map(|k| ctx.kappa(Some(k))).collect::<Result<_, _>>()?
    };
    let mut entries = Vec::new();
    for kappa in list {
        let entry = match ctx.fill(&cs, &kappa) {
            Ok(r) => match anchored_volume(&ctx.spec, cs.point.orientation, &r.path, &kappa.label()) {
                Ok(v) => VolumeEntry {
                    kappa,
                    volume: Some(v),
                    error: None,
                },
                Err(e) => VolumeEntry {
                    kappa,
                    volume: None,
                    error: Some(e.to_string()),
                },
            },
            Err(e) => VolumeEntry {
                kappa,
                volume: None,
                error: Some(e),
            },
        };
        entries.push(entry);
    }
    let checks = volume_checks(&ctx, &entries, kappas.is_empty() && ctx.spec.cusp_count() == 1);
    let reference = ctx.spec.reference_volume.value;
    ctx.finish("volume", checks, VolumeResult { reference, entries })
}

#[derive(Serialize)]
struct LoopEntry {
    traversals: usize,
    intervals: usize,
    closure_gap: f64,
    integral: Option<f64>,
    quadrature_error: f64,
    error: Option<String>,
}

#[derive(Serialize)]
struct LoopsResult {
    base: FillingCoefficients,
    loops: Vec<LoopEntry>,
}

/// Loops whose half-grid estimate disagrees are retracked on finer grids.
fn refine_loop(
    gs: &GaugedSystem,
    start: &CharacterPoint,
    ellipse: &Ellipse,
    first: Result<ClosedLoop, ContinuationError>,
    opts: &TrackOptions,
    hand: f64,
    tol_loop: f64,
) -> LoopEntry {
    let mut result = first;
    let mut intervals = opts.intervals;
    loop {
        let entry = match &result {
            Ok(l) => match loop_integral(&l.path, hand) {
                Ok(i) => {
                    let quad = (i.value - i.halved).abs();
                    if quad > 1e-2 * tol_loop && intervals < MAX_LOOP_INTERVALS {
                        None
                    } else {
                        Some(LoopEntry {
                            traversals: l.traversals,
                            intervals,
                            closure_gap: l.closure_gap,
                            integral: Some(i.value),
                            quadrature_error: quad,
                            error: (quad > 1e-2 * tol_loop).then(|| format!("quadrature unresolved ({quad:.3e})")),
                        })
                    }
                }
                Err(e) => Some(LoopEntry {
                    traversals: l.traversals,
                    intervals,
                    closure_gap: l.closure_gap,
                    integral: None,
                    quadrature_error: f64::NAN,
                    error: Some(e.to_string()),
                }),
            },
            Err(e) => Some(LoopEntry {
                traversals: 0,
                intervals,
                closure_gap: f64::NAN,
                integral: None,
                quadrature_error: f64::NAN,
                error: Some(e.to_string()),
            }),
        };
        if let Some(entry) = entry {
            return entry;
        }
        intervals *= 2;
        let finer = TrackOptions { intervals, ..opts.clone() };
        result = exactness_loops(gs, start, std::slice::from_ref(ellipse), &finer, 8)
            .pop()
            .expect("one ellipse");
    }
}

fn run_loops(ctx: &mut Ctx, cs: &CompleteStructure, kappa: &FillingCoefficients, count: usize) -> Result<(Vec<LoopEntry>, Vec<Check>), String> {
    if count == 0 {
        return Ok((Vec::new(), vec![Check::new("loop exactness", Status::Skipped, "loop count 0")]));
    }
    let start = ctx.fill(cs, kappa)?;
    // A few spare ellipses cover loops that fail to close.
    let ellipses = random_log_ellipses(&start.point, count + count / 2 + 2, ctx.args.seed, 1e-3);
    let opts = TrackOptions {
        tol: ctx.args.tol_residual,
        intervals: 128,
        ..TrackOptions::default()
    };
    let hand = ctx.hand();
    let tol_loop = ctx.args.tol_loop;
    let gs = &ctx.gs;
    let entries = ctx.timer.time("loops", || {
        let results = exactness_loops(gs, &start.point, &ellipses, &opts, 8);
        ellipses
            .iter()
            .zip(results)
            .map(|(e, r)| refine_loop(gs, &start.point, e, r, &opts, hand, tol_loop))
            .collect::<Vec<_>>()
    });
    let closed: Vec<f64> = entries
        .iter()
        .filter(|e| e.error.is_none())
        .filter_map(|e| e.integral)
        .take(count)
        .collect();
    let worst = closed.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let mut checks = Vec::new();
    if closed.len() < count {
        checks.push(Check::new(
            "loop exactness",
            Status::Inconclusive,
            format!("only {} of {count} loops closed with a resolved integral", closed.len()),
        ));
    } else {
        checks.push(Check::below(
            "loop exactness",
            worst,
            ctx.args.tol_loop,
            format!("{count} loops, max |loop integral| = {worst:.3e}"),
        ));
    }
    Ok((entries, checks))
}

pub fn loops(mut ctx: Ctx, kappa: Option<&str>, count: usize) -> Result<Status, String> {
    let kappa = ctx.kappa(kappa)?;
    let cs = ctx.complete()?;
    let (entries, checks) = run_loops(&mut ctx, &cs, &kappa, count)?;
    ctx.finish("loops", checks, LoopsResult { base: kappa, loops: entries })
}

#[derive(Serialize)]
struct FiberEntry {
    kappa: FillingCoefficients,
    report: Option<FiberReport>,
    volume_equality: Option<FiberVolumeCheck>,
    error: Option<String>,
}

fn fiber_checks(entry: &FiberEntry, cohom: &Z2CohomologyData, tol_vol_eq: f64) -> Vec<Check> {
    let label = entry.kappa.label();
    let Some(r) = &entry.report else {
        return vec![Check::new(
            format!("fiber {label}"),
            Status::Fail,
            entry.error.clone().unwrap_or_default(),
        )];
    };
    let degree = match r.status {
        FiberStatus::Stable => Status::from_bool(r.psl2_count == 1),
        FiberStatus::Inconclusive => Status::Inconclusive,
        FiberStatus::Excluded => Status::Skipped,
    };
    let mut checks = vec![
        Check::new(
            format!("fiber {label} psl2 degree one"),
            degree,
            format!(
                "psl2 {} sl2 {} confirm {} status {:?}",
                r.psl2_count, r.sl2_count, r.confirm_count, r.status
            ),
        ),
        Check::new(
            format!("fiber {label} sl2 bound"),
            Status::from_bool(r.sl2_count as u64 <= r.psl2_count as u64 * cohom.degree_bound),
            format!("{} <= {} * {}", r.sl2_count, r.psl2_count, cohom.degree_bound),
        ),
    ];
    if let Some(v) = &entry.volume_equality {
        let status = if v.compared < 2 {
            Status::Skipped
        } else {
            Status::from_bool(v.max_difference < tol_vol_eq)
        };
        checks.push(Check {
            name: format!("fiber {label} volume equality"),
            status,
            value: Some(v.max_difference),
            tolerance: Some(tol_vol_eq),
            detail: format!("{} points compared", v.compared),
        });
    }
    checks
}

fn run_fiber(ctx: &mut Ctx, cs: &CompleteStructure, kappa: &FillingCoefficients) -> FiberEntry {
    let filled = match ctx.fill(cs, kappa) {
        Ok(r) => r,
        Err(e) => {
            return FiberEntry {
                kappa: kappa.clone(),
                report: None,
                volume_equality: None,
                error: Some(e),
            }
        }
    };
    let vol = anchored_volume(&ctx.spec, cs.point.orientation, &filled.path, &kappa.label()).ok();
    let z = restriction_traces(&filled.point);
    let opts = FiberOptions {
        budget: ctx.args.budget,
        seed: ctx.args.seed,
        dedup_tol: ctx.args.tol_dedup,
        track: TrackOptions {
            intervals: 64,
            tol: ctx.args.tol_residual,
            ..TrackOptions::default()
        },
        ..FiberOptions::default()
    };
    let gs = &ctx.gs;
    let seeds = [(filled.point.clone(), vol)];
    let r = ctx
        .timer
        .time(&format!("fiber {}", kappa.label()), || fiber_over(gs, &z, &seeds, &opts));
    match r {
        Ok(report) => {
            let eq = fiber_volume_equality(&report, ctx.args.tol_vol_eq);
            FiberEntry {
                kappa: kappa.clone(),
                report: Some(report),
                volume_equality: Some(eq),
                error: None,
            }
        }
        Err(e) => FiberEntry {
            kappa: kappa.clone(),
            report: None,
            volume_equality: None,
            error: Some(e.to_string()),
        },
    }
}

pub fn fiber(mut ctx: Ctx, kappa: Option<&str>) -> Result<Status, String> {
    let kappa = ctx.kappa(kappa)?;
    let cohom = h1_z2(&ctx.spec).map_err(|e| e.to_string())?;
    let cs = ctx.complete()?;
    let entry = run_fiber(&mut ctx, &cs, &kappa);
    let checks = fiber_checks(&entry, &cohom, ctx.args.tol_vol_eq);
    ctx.finish("fiber", checks, entry)
}

pub fn h1z2(ctx: Ctx) -> Result<Status, String> {
    let cohom = h1_z2(&ctx.spec).map_err(|e| e.to_string())?;
    let checks = vec![Check::new(
        "degree bound",
        Status::Pass,
        format!("dim H1 = {}, k = {}, bound {}", cohom.h1_dim, cohom.k, cohom.degree_bound),
    )];
    ctx.finish("h1z2", checks, cohom)
}

#[derive(Serialize)]
struct CertifyResult {
    cohomology: Z2CohomologyData,
    complete: Option<CompleteStructure>,
    volumes: Vec<VolumeEntry>,
    loops: Vec<LoopEntry>,
    fibers: Vec<FiberEntry>,
}

pub fn certify(mut ctx: Ctx, primes: &[i64], loop_count: usize) -> Result<Status, String> {
    let cohom = h1_z2(&ctx.spec).map_err(|e| e.to_string())?;
    let cs = match ctx.complete() {
        Ok(cs) => cs,
        Err(e) => {
            let checks = vec![Check::new("complete structure", Status::Fail, e)];
            let result = CertifyResult {
                cohomology: cohom,
                complete: None,
                volumes: Vec::new(),
                loops: Vec::new(),
                fibers: Vec::new(),
            };
            return ctx.finish("certify", checks, result);
        }
    };
    let mut checks = vec![Check::below(
        "complete structure",
        cs.point.residual,
        ctx.args.tol_residual,
        format!("orientation {:?}", cs.point.orientation),
    )];
    checks.push(eta_check(&ctx, &cs).1);

    let kappas = dense_kappas(ctx.spec.cusp_count(), primes);
    let opts = ctx.track_opts();
    let (gs, seed) = (&ctx.gs, ctx.args.seed);
    let dense = ctx.timer.time("dense set", || sample_dense_set(gs, &cs, primes, &opts, seed));
    let mut volumes = Vec::new();
    for d in &dense {
        match &d.result {
            Ok(r) => {
                checks.push(Check::below(
                    format!("filling {} equations", d.coefficients.label()),
                    r.equation_residual,
                    FILLING_EQ_TOL,
                    String::new(),
                ));
                let v = anchored_volume(&ctx.spec, cs.point.orientation, &r.path, &d.coefficients.label());
                volumes.push(VolumeEntry {
                    kappa: d.coefficients.clone(),
                    error: v.as_ref().err().map(|e| e.to_string()),
                    volume: v.ok(),
                });
            }
            Err(e) => volumes.push(VolumeEntry {
                kappa: d.coefficients.clone(),
                volume: None,
                error: Some(e.clone()),
            }),
        }
    }
    checks.extend(volume_checks(&ctx, &volumes, ctx.spec.cusp_count() == 1));

    let first = kappas.first().cloned().ok_or("empty prime list")?;
    let (loops, loop_checks) = run_loops(&mut ctx, &cs, &first, loop_count)?;
    checks.extend(loop_checks);

    let mut fibers = Vec::new();
    for kappa in &kappas {
        let entry = run_fiber(&mut ctx, &cs, kappa);
        checks.extend(fiber_checks(&entry, &cohom, ctx.args.tol_vol_eq));
        fibers.push(entry);
    }
    checks.push(Check::new(
        "cohomology degree bound",
        Status::Pass,
        format!("k = {}, bound {}", cohom.k, cohom.degree_bound),
    ));
    ctx.finish(
        "certify",
        checks,
        CertifyResult {
            cohomology: cohom,
            complete: Some(cs),
            volumes,
            loops,
            fibers,
        },
    )
}
