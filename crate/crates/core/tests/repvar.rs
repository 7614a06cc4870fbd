use cuspvar::manifold::{h1_z2, parse_spec, ManifoldSpec, Word};
use cuspvar::repvar::{
    apply_twist, build_gauged_system, enumerate_twists, find_complete, restriction_traces, CompleteOptions,
    CompleteStructure, GaugedSystem, Orientation, RepError,
};
use cuspvar::{Mat2, C64};
use proptest::prelude::*;

fn load(name: &str) -> ManifoldSpec {
    let p = format!("{}/fixtures/{name}.spec", env!("CARGO_MANIFEST_DIR"));
    parse_spec(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn complete(name: &str) -> (GaugedSystem, CompleteStructure) {
    let gs = build_gauged_system(&load(name)).unwrap();
    let cs = find_complete(&gs, &CompleteOptions::default()).unwrap();
    (gs, cs)
}

fn word_matrix(w: &Word, mats: &[Mat2]) -> Mat2 {
    w.letters().iter().fold(Mat2::identity(), |acc, &g| {
        let m = mats[g.unsigned_abs() as usize - 1];
        acc * if g > 0 { m } else { m.try_inverse().unwrap() }
    })
}

#[test]
fn fixtures_parse() {
    for name in ["fig8", "wlink", "abelian", "torus_knot"] {
        let spec = load(name);
        assert!(spec.generators >= 2, "{name}");
        assert!(spec.cusp_count() >= 1, "{name}");
    }
    assert_eq!(load("wlink").cusp_count(), 2);
}

#[test]
fn cohomology_of_fixtures() {
    let fig8 = h1_z2(&load("fig8")).unwrap();
    assert_eq!((fig8.h1_dim, fig8.k, fig8.degree_bound), (1, 0, 1));
    let wlink = h1_z2(&load("wlink")).unwrap();
    assert_eq!((wlink.h1_dim, wlink.k, wlink.degree_bound), (2, 0, 1));
    let abelian = h1_z2(&load("abelian")).unwrap();
    assert_eq!((abelian.h1_dim, abelian.k, abelian.degree_bound), (2, 1, 2));
}

#[test]
fn fig8_complete_structure() {
    let (gs, cs) = complete("fig8");
    assert!(gs.residual(&cs.point.coords) < 1e-12);
    assert_eq!(cs.point.orientation, Orientation::Positive);
    // cusp shape of the figure-eight knot has modulus 2 sqrt 3 and is imaginary
    let shape = cs.cusp_shapes[0];
    assert!(shape.re.abs() < 1e-8, "{shape}");
    assert!((shape.norm() - 2.0 * 3f64.sqrt()).abs() < 1e-8, "{shape}");
    for t in restriction_traces(&cs.point) {
        assert!((t * t - C64::new(4.0, 0.0)).norm() < 1e-9);
    }
    assert_eq!(cs.slice_dimension, 2);
}

#[test]
fn wlink_complete_structure() {
    let (gs, cs) = complete("wlink");
    assert!(gs.scaled_residual(&cs.point.coords) < 1e-10);
    assert_eq!(cs.cusp_shapes.len(), 2);
    for s in &cs.cusp_shapes {
        assert!(s.im.abs() > 1.0, "degenerate cusp shape {s}");
    }
    assert_eq!(cs.trace_rank, 2);
}

#[test]
fn gauged_matrices_satisfy_relators() {
    let (gs, cs) = complete("fig8");
    let mats = gs.matrices(&cs.point.coords);
    for m in &mats {
        assert!((m.determinant() - C64::new(1.0, 0.0)).norm() < 1e-10);
    }
    for r in &gs.spec.relators {
        let p = word_matrix(r, &mats);
        assert!((p - Mat2::identity()).norm() < 1e-9);
    }
}

#[test]
fn peripheral_pairs_commute() {
    let (gs, cs) = complete("wlink");
    for (m, l) in gs.peripheral_matrices(&cs.point.coords) {
        assert!((m * l - l * m).norm() < 1e-9);
    }
}

#[test]
fn sign_twists_preserve_relators() {
    let (gs, cs) = complete("fig8");
    let twists = enumerate_twists(&gs.spec);
    assert_eq!(twists.len(), 2);
    for tw in &twists {
        let pt = apply_twist(&gs, &cs.point, tw).unwrap();
        assert!(gs.residual(&pt.coords) < 1e-9);
    }
}

#[test]
fn non_hyperbolic_fixtures_have_no_complete_structure() {
    let gs = build_gauged_system(&load("torus_knot")).unwrap();
    assert!(matches!(
        find_complete(&gs, &CompleteOptions::default()),
        Err(RepError::PeripheralTrivial(_))
    ));
    let gs = build_gauged_system(&load("abelian")).unwrap();
    assert!(find_complete(&gs, &CompleteOptions::default()).is_err());
}

#[test]
fn complete_structure_is_seed_independent() {
    let gs = build_gauged_system(&load("fig8")).unwrap();
    let a = find_complete(&gs, &CompleteOptions::default()).unwrap();
    let b = find_complete(&gs, &CompleteOptions { seed: 17, ..CompleteOptions::default() }).unwrap();
    assert!((a.cusp_shapes[0] - b.cusp_shapes[0]).norm() < 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn character_is_conjugation_invariant(re in -1.0..1.0f64, im in -1.0..1.0f64) {
        // traces of words only depend on the conjugacy class of the representation
        let (gs, cs) = complete("fig8");
        let mats = gs.matrices(&cs.point.coords);
        let g = Mat2::new(C64::new(1.0, 0.0), C64::new(re, im), C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        let gi = g.try_inverse().unwrap();
        let conj: Vec<Mat2> = mats.iter().map(|m| g * m * gi).collect();
        for w in gs.spec.cusps.iter().flat_map(|c| [&c.meridian, &c.longitude]) {
            let a = word_matrix(w, &mats).trace();
            let b = word_matrix(w, &conj).trace();
            prop_assert!((a - b).norm() < 1e-9);
        }
    }
}
