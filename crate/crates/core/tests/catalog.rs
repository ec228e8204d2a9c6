mod common;

use std::f64::consts::FRAC_1_SQRT_2;

use common::{off_locus_point, rng};
use covkit_core::autodiff::jacobian_ad;
use covkit_core::catalog::{self, oracle_constant, verify_norm_identity, CatalogError};
use covkit_core::linalg::min_singular_value;
use covkit_core::mapping::{Mapping, NormIdentity, OracleKind, OracleValue};
use rand::Rng;

#[test]
fn registry_holds_every_worked_mapping() {
    let names: Vec<_> = catalog::all().iter().map(|s| s.name).collect();
    for want in [
        "ex4_3", "ex4_4", "f5_1", "g5_11", "h5_18", "ex6_1", "ex6_2", "ex6_3", "ex6_4", "ex6_5",
        "ex6_6", "ex6_7", "ex6_8", "ex6_9", "ex6_10", "ex6_11",
    ] {
        assert!(names.contains(&want), "{want} missing");
    }
}

#[test]
fn lookup_examples() {
    let f = catalog::get("f5_1").unwrap();
    assert_eq!(
        (f.n, f.m, f.norm_identity),
        (2, 2, NormIdentity::Preserving)
    );

    let sq = catalog::get("ex6_7").unwrap();
    assert_eq!(
        oracle_constant(sq, &[3.0, 4.0]).unwrap(),
        OracleValue::exact(10.0)
    );

    let e = catalog::get("ex4_4").unwrap();
    assert_eq!((e.n, e.m), (2, 3));
    assert_eq!(
        oracle_constant(e, &[0.4, -1.0]).unwrap(),
        OracleValue::exact(0.0)
    );
}

#[test]
fn unknown_names_list_the_registry() {
    let err = catalog::get("nope").unwrap_err();
    assert_eq!(
        err,
        CatalogError::NotFound {
            name: "nope".into()
        }
    );
    let msg = err.to_string();
    assert!(msg.contains("f5_1") && msg.contains("ex6_11"));
}

#[test]
fn declared_norm_identities_hold() {
    for spec in catalog::all() {
        if spec.norm_identity != NormIdentity::None {
            assert!(verify_norm_identity(spec, 1000), "{}", spec.name);
        }
    }
    assert!(verify_norm_identity(catalog::get("ex6_6").unwrap(), 1000));
    assert!(!verify_norm_identity(catalog::get("ex6_2").unwrap(), 10));
}

#[test]
fn oracle_examples() {
    let get = |n| catalog::get(n).unwrap();
    assert_eq!(
        oracle_constant(get("ex6_2"), &[2.0, 5.0, 7.0]).unwrap(),
        OracleValue::exact(2.0)
    );
    let v = oracle_constant(get("ex6_4"), &[1.0, 1.0, 2.0]).unwrap();
    assert_eq!(v.kind, OracleKind::Exact);
    assert!((v.value - 0.2).abs() < 1e-15);
    assert_eq!(
        oracle_constant(get("h5_18"), &[1.0, 1.0, 1.0, 1.0]).unwrap(),
        OracleValue::upper_bound(FRAC_1_SQRT_2)
    );
    assert_eq!(
        oracle_constant(get("h5_18"), &[0.0, 0.0, 1.0, 2.0]).unwrap(),
        OracleValue::exact(0.0)
    );
    assert_eq!(
        oracle_constant(get("ex6_11"), &[0.0, 3.0]).unwrap(),
        OracleValue::exact(0.0)
    );
    assert_eq!(
        oracle_constant(get("ex6_11"), &[1.0, 1.0]).unwrap(),
        OracleValue::upper_bound(FRAC_1_SQRT_2)
    );
    let v = oracle_constant(get("ex6_11"), &[1.0, 3.0]).unwrap();
    assert!((v.value - 6.0 / 82f64.sqrt()).abs() < 1e-15);
    assert_eq!(
        oracle_constant(get("ex6_3"), &[2.0, 2.0, -1.5]).unwrap(),
        OracleValue::upper_bound(6.0)
    );
}

#[test]
fn oracle_side_conditions_are_named() {
    let get = |n| catalog::get(n).unwrap();
    let cond = |name, z: &[f64]| match oracle_constant(get(name), z) {
        Err(CatalogError::Precondition { condition }) => condition,
        other => panic!("{name}: expected precondition error, got {other:?}"),
    };
    assert_eq!(cond("ex6_1", &[0.0, 0.0, 5.0]), "z̄1² + z̄2² > 0 required");
    assert!(cond("ex6_3", &[1.0, 2.0, 3.0]).contains("z̄1 = z̄2"));
    assert!(cond("g5_11", &[0.0; 4]).contains("θ"));
    assert!(cond("ex6_10", &[0.0, 0.0]).contains("θ"));
    assert!(cond("h5_18", &[1.0, 2.0, 3.0, 4.0]).contains("required"));
    assert!(matches!(
        oracle_constant(get("ex6_2"), &[1.0]),
        Err(CatalogError::Dimension {
            expected: 3,
            found: 1
        })
    ));
}

#[test]
fn extension_branches_at_the_origin() {
    for name in ["f5_1", "h5_18", "ex6_10", "ex6_11", "g5_11"] {
        let s = catalog::get(name).unwrap();
        assert_eq!(s.eval(&vec![0.0; s.n]).unwrap(), vec![0.0; s.m], "{name}");
    }
    let g = catalog::get("g5_11").unwrap();
    let v = g.eval(&[0.0, 0.0, 3.0, 4.0]).unwrap();
    assert_eq!(&v[..2], &[0.0, 0.0]);
    assert!((v[2] + 7.0 / 5.0).abs() < 1e-15 && (v[3] - 24.0 / 5.0).abs() < 1e-15);
}

#[test]
fn analytic_jacobians_match_ad() {
    let mut r = rng(21);
    for spec in catalog::all() {
        for _ in 0..100 {
            let z = off_locus_point(spec, &mut r);
            let a = spec.analytic_jacobian(&z).unwrap();
            let d = jacobian_ad(spec, &z).unwrap();
            let diff = common::max_abs_diff(a.as_slice(), d.as_slice());
            assert!(diff <= 1e-8, "{} at {z:?}: {diff}", spec.name);
        }
        if spec.name == "f5_1" {
            assert!(spec.analytic_jacobian(&[0.0, 0.0]).is_none());
        }
    }
}

#[test]
fn folding_map_has_unit_min_singular_value() {
    let f = catalog::get("f5_1").unwrap();
    let mut r = rng(22);
    for _ in 0..100 {
        let z = off_locus_point(f, &mut r);
        let s = min_singular_value(&jacobian_ad(f, &z).unwrap().transpose());
        assert!((s - 1.0).abs() < 1e-12, "{z:?}: {s}");
    }
}

#[test]
fn paired_map_restricts_to_folding_map() {
    let f = catalog::get("f5_1").unwrap();
    let g = catalog::get("g5_11").unwrap();
    let mut r = rng(23);
    for _ in 0..100 {
        let z: Vec<f64> = (0..4).map(|_| r.gen_range(-3.0..3.0)).collect();
        let gz = g.eval(&z).unwrap();
        assert_eq!(&gz[..2], f.eval(&z[..2]).unwrap().as_slice());
        assert_eq!(&gz[2..], f.eval(&z[2..]).unwrap().as_slice());
    }
}

#[test]
fn normalising_map_has_singular_jacobian() {
    let f = catalog::get("ex6_10").unwrap();
    let mut r = rng(24);
    for _ in 0..100 {
        let z = off_locus_point(f, &mut r);
        let j = jacobian_ad(f, &z).unwrap();
        let det = j.get(0, 0) * j.get(1, 1) - j.get(0, 1) * j.get(1, 0);
        assert!(det.abs() < 1e-12, "{z:?}: {det}");
    }
}

#[test]
fn four_dimensional_fold_respects_its_bounds_at_the_centre() {
    let h = catalog::get("h5_18").unwrap();
    let mut r = rng(25);
    for _ in 0..100 {
        let a: f64 = r.gen_range(0.1..3.0);
        let z: Vec<f64> = (0..4)
            .map(|_| if r.gen_bool(0.5) { a } else { -a })
            .collect();
        let s = min_singular_value(&jacobian_ad(h, &z).unwrap().transpose());
        assert!(s <= FRAC_1_SQRT_2 + 1e-12, "{z:?}: {s}");

        let (p, q): (f64, f64) = (r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0));
        for z in [[0.0, 0.0, p, q], [p, q, 0.0, 0.0]] {
            let s = min_singular_value(&jacobian_ad(h, &z).unwrap().transpose());
            assert_eq!(s, 0.0, "{z:?}");
        }
    }
}

#[test]
fn twice_differentiability_is_recorded() {
    assert!(catalog::all()
        .iter()
        .all(|s| s.twice_differentiable_off_locus));
}
