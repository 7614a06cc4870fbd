use std::f64::consts::PI;

use cuspvar::continuation::{
    exactness_loops, fiber_over, random_log_ellipses, solve_filling, FiberOptions, FiberStatus, FillingCoefficients,
    TrackOptions,
};
use cuspvar::eigenvar::sample_point;
use cuspvar::manifold::{parse_spec, ManifoldSpec};
use cuspvar::repvar::{build_gauged_system, find_complete, restriction_traces, CompleteOptions};
use cuspvar::volume::{
    anchored_volume, eta_at, fiber_volume_equality, integrate_eta, lobachevsky, loop_integral, romberg, running_volume,
};
use proptest::prelude::*;

fn load(name: &str) -> ManifoldSpec {
    let p = format!("{}/fixtures/{name}.spec", env!("CARGO_MANIFEST_DIR"));
    parse_spec(&std::fs::read_to_string(p).unwrap()).unwrap()
}

/// `-int_0^theta log(2 sin t) dt` for `0 < theta <= pi/2`, by composite
/// Simpson on the smooth part `log(sin t / t)` plus the closed form of
/// `int_0^theta log(2t) dt`.
fn lobachevsky_quadrature(theta: f64) -> f64 {
    let n = 20_000;
    let h = theta / n as f64;
    let g = |t: f64| if t == 0.0 { 0.0 } else { (t.sin() / t).ln() };
    let mut s = g(0.0) + g(theta);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * g(k as f64 * h);
    }
    let smooth = s * h / 3.0;
    -(smooth + theta * (2.0 * theta).ln() - theta)
}

#[test]
fn regular_ideal_tetrahedra() {
    let v = 6.0 * lobachevsky(PI / 3.0);
    assert!((v - 2.0298832128).abs() < 1e-9, "{v}");
    assert!((v - load("fig8").reference_volume.value).abs() < 1e-12);
    // the regular ideal tetrahedron: 3 Lambda(pi/3)
    assert!((3.0 * lobachevsky(PI / 3.0) - 1.0149416064).abs() < 1e-9);
}

#[test]
fn lobachevsky_matches_quadrature() {
    for k in 1..=12 {
        let theta = k as f64 * PI / 24.0;
        let a = lobachevsky(theta);
        let b = lobachevsky_quadrature(theta);
        assert!((a - b).abs() < 1e-11, "theta = {theta}: {a} vs {b}");
    }
}

#[test]
fn lobachevsky_special_values() {
    assert!(lobachevsky(0.0f64).abs() < 1e-15);
    assert!(lobachevsky(PI / 2.0).abs() < 1e-14);
    // maximum at pi/6
    let at = lobachevsky(PI / 6.0);
    assert!(at > lobachevsky(PI / 6.0 + 0.01) && at > lobachevsky(PI / 6.0 - 0.01));
}

#[test]
fn lobachevsky_is_generic_over_the_scalar() {
    let single = lobachevsky(std::f32::consts::PI / 3.0);
    let double = lobachevsky(PI / 3.0);
    assert!((single as f64 - double).abs() < 1e-6);
}

#[test]
fn romberg_integrates_polynomials_exactly() {
    let n = 16;
    let g: Vec<f64> = (0..=n).map(|k| (k as f64 / n as f64).powi(5)).collect();
    let (v, _) = romberg(0.0, 1.0, &g).unwrap();
    assert!((v - 1.0 / 6.0).abs() < 1e-14);
    assert!(romberg(0.0, 1.0, &g[..10]).is_none());
}

#[test]
fn eta_vanishes_at_the_complete_structure() {
    for name in ["fig8", "wlink"] {
        let spec = load(name);
        let gs = build_gauged_system(&spec).unwrap();
        let cs = find_complete(&gs, &CompleteOptions::default()).unwrap();
        let x = sample_point(&gs, &cs.point).unwrap();
        let eta = eta_at(&x, spec.orientation_sign()).unwrap().max_abs();
        assert!(eta < 1e-9, "{name}: {eta}");
    }
}

/// Volumes of closed hyperbolic fillings from an independent census.
const FIG8_FILLINGS: [(i64, f64); 4] = [
    (5, 1.9186023775528374),
    (7, 1.97246019733057),
    (11, 2.006457881222626),
    (13, 2.013086888699403),
];

#[test]
fn fig8_filled_volumes() {
    let spec = load("fig8");
    let gs = build_gauged_system(&spec).unwrap();
    let cs = find_complete(&gs, &CompleteOptions::default()).unwrap();
    let mut last = 0.0;
    for (q, expect) in FIG8_FILLINGS {
        let r = solve_filling(&gs, &cs, &FillingCoefficients(vec![Some((1, q))]), &TrackOptions::default(), 1).unwrap();
        let v = anchored_volume(&spec, cs.point.orientation, &r.path, "fill").unwrap();
        assert!((v.value - expect).abs() < 1e-8, "q = {q}: {} vs {expect}", v.value);
        assert!((v.value - v.halved).abs() < 1e-7);
        assert!(v.value > last && v.value < spec.reference_volume.value);
        last = v.value;
        let running = running_volume(&spec, cs.point.orientation, &r.path);
        assert!((running[0] - spec.reference_volume.value).abs() < 1e-12);
        assert!((running.last().unwrap() - v.value).abs() < 1e-5);
    }
}

#[test]
fn wlink_filled_volumes() {
    let spec = load("wlink");
    let gs = build_gauged_system(&spec).unwrap();
    let cs = find_complete(&gs, &CompleteOptions::default()).unwrap();
    let cases = [
        (vec![Some((1, 5)), None], 3.471287882779975),
        (vec![Some((1, 5)), Some((1, 5))], 3.2734487356661504),
        (vec![Some((1, 5)), Some((1, 7))], 3.3694425146046925),
        (vec![Some((1, 7)), Some((1, 7))], 3.463928065804777),
    ];
    for (k, expect) in cases {
        let k = FillingCoefficients(k);
        let r = solve_filling(&gs, &cs, &k, &TrackOptions::default(), 1).unwrap();
        let v = anchored_volume(&spec, cs.point.orientation, &r.path, "fill").unwrap();
        assert!((v.value - expect).abs() < 1e-8, "{}: {} vs {expect}", k.label(), v.value);
    }
}

#[test]
fn reversed_path_negates_the_integral() {
    let spec = load("fig8");
    let gs = build_gauged_system(&spec).unwrap();
    let cs = find_complete(&gs, &CompleteOptions::default()).unwrap();
    let r = solve_filling(&gs, &cs, &FillingCoefficients(vec![Some((1, 7))]), &TrackOptions::default(), 1).unwrap();
    let hand = spec.orientation_sign();
    let fwd = integrate_eta(&r.path, hand).unwrap().value;
    let back = integrate_eta(&r.path.reversed(), hand).unwrap().value;
    assert!((fwd + back).abs() < 1e-10);
}

#[test]
fn eta_is_exact_on_loops() {
    let spec = load("fig8");
    let gs = build_gauged_system(&spec).unwrap();
    let cs = find_complete(&gs, &CompleteOptions::default()).unwrap();
    let start = solve_filling(&gs, &cs, &FillingCoefficients(vec![Some((1, 5))]), &TrackOptions::default(), 1).unwrap();
    let opts = TrackOptions {
        intervals: 1024,
        ..TrackOptions::default()
    };
    let es = random_log_ellipses(&start.point, 6, 7, 1e-3);
    for l in exactness_loops(&gs, &start.point, &es, &opts, 8) {
        let i = loop_integral(&l.unwrap().path, spec.orientation_sign()).unwrap();
        assert!(i.value.abs() < 1e-6, "{}", i.value);
    }
}

#[test]
fn fiber_over_a_filling_is_a_single_character() {
    let spec = load("fig8");
    let gs = build_gauged_system(&spec).unwrap();
    let cs = find_complete(&gs, &CompleteOptions::default()).unwrap();
    let r = solve_filling(&gs, &cs, &FillingCoefficients(vec![Some((1, 5))]), &TrackOptions::default(), 1).unwrap();
    let vol = anchored_volume(&spec, cs.point.orientation, &r.path, "fill").ok();
    let z = restriction_traces(&r.point);
    let rep = fiber_over(&gs, &z, &[(r.point.clone(), vol)], &FiberOptions::default()).unwrap();
    assert_eq!(rep.status, FiberStatus::Stable);
    assert_eq!(rep.psl2_count, 1);
    let eq = fiber_volume_equality(&rep, 1e-6);
    assert!(eq.pass);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn lobachevsky_is_odd_and_pi_periodic(theta in -4.0..4.0f64) {
        prop_assert!((lobachevsky(-theta) + lobachevsky(theta)).abs() < 1e-13);
        prop_assert!((lobachevsky(theta + PI) - lobachevsky(theta)).abs() < 1e-12);
    }

    #[test]
    fn lobachevsky_duplication(theta in 0.01..1.5f64) {
        // Lambda(2x) = 2 Lambda(x) + 2 Lambda(x + pi/2)
        let lhs = lobachevsky(2.0 * theta);
        let rhs = 2.0 * lobachevsky(theta) + 2.0 * lobachevsky(theta + PI / 2.0);
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn ideal_triangle_angles_bound_volume(a in 0.05..1.5f64, b in 0.05..1.5f64) {
        // an ideal tetrahedron with dihedral angles a, b, pi - a - b has volume at most 3 Lambda(pi/3)
        let c = PI - a - b;
        prop_assume!(c > 0.01);
        let v = lobachevsky(a) + lobachevsky(b) + lobachevsky(c);
        prop_assert!(v > 0.0 && v <= 3.0 * lobachevsky(PI / 3.0) + 1e-12);
    }
}
