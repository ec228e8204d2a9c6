mod common;

use common::{max_abs_diff, off_locus_point, rng};
use covkit_core::autodiff::{jacobian_ad, jacobian_fd, probe_differentiability, AdError};
use covkit_core::catalog;
use covkit_core::dual::Dual;
use covkit_core::linalg::Matrix;
use covkit_core::mapping::{EvalError, Mapping};
use proptest::prelude::*;
use rand::Rng;

struct Closure<F> {
    n: usize,
    m: usize,
    f: F,
}

impl<F: Fn(&[Dual]) -> Result<Vec<Dual>, EvalError>> Mapping for Closure<F> {
    fn name(&self) -> &str {
        "closure"
    }
    fn input_dim(&self) -> usize {
        self.n
    }
    fn output_dim(&self) -> usize {
        self.m
    }
    fn eval_dual(&self, x: &[Dual]) -> Result<Vec<Dual>, EvalError> {
        (self.f)(x)
    }
    fn singular_reason(&self, _: &[f64]) -> Option<String> {
        None
    }
}

fn assert_matrix(m: &Matrix, rows: &[&[f64]], tol: f64) {
    let want = Matrix::from_rows(rows).unwrap();
    assert_eq!((m.rows(), m.cols()), (want.rows(), want.cols()));
    assert!(
        max_abs_diff(m.as_slice(), want.as_slice()) <= tol,
        "{m:?} vs {want:?}"
    );
}

#[test]
fn ad_examples() {
    let ex62 = catalog::get("ex6_2").unwrap();
    assert_matrix(
        &jacobian_ad(ex62, &[1.0, 2.0, 3.0]).unwrap(),
        &[&[2.0, 3.0], &[1.0, 0.0], &[0.0, 1.0]],
        0.0,
    );

    let id3 = Closure {
        n: 3,
        m: 3,
        f: |x: &[Dual]| Ok(x.to_vec()),
    };
    let j = jacobian_ad(&id3, &[0.3, -7.0, 2.0]).unwrap();
    assert_eq!(j, Matrix::identity(3));

    let f51 = catalog::get("f5_1").unwrap();
    assert_matrix(
        &jacobian_ad(f51, &[1.0, 0.0]).unwrap(),
        &[&[1.0, 0.0], &[0.0, 2.0]],
        1e-15,
    );
}

#[test]
fn ad_refuses_singular_points() {
    let f51 = catalog::get("f5_1").unwrap();
    match jacobian_ad(f51, &[0.0, 0.0]) {
        Err(AdError::NonDifferentiable { reason, .. }) => assert!(reason.contains("|x|")),
        other => panic!("expected non-differentiable error, got {other:?}"),
    }
    let g = catalog::get("g5_11").unwrap();
    assert!(matches!(
        jacobian_ad(g, &[1.0, 2.0, 0.0, 0.0]),
        Err(AdError::NonDifferentiable { .. })
    ));
}

#[test]
fn fd_examples() {
    let sq = Closure {
        n: 1,
        m: 1,
        f: |x: &[Dual]| Ok(vec![x[0] * x[0]]),
    };
    let j = jacobian_fd(&sq, &[3.0], Some(1e-5)).unwrap();
    assert!((j.get(0, 0) - 6.0).abs() < 1e-8);

    let ex68 = catalog::get("ex6_8").unwrap();
    assert_matrix(
        &jacobian_fd(ex68, &[0.0, 0.0], None).unwrap(),
        &[&[1.0, -1.0], &[1.0, -1.0]],
        1e-9,
    );

    assert!(matches!(
        jacobian_fd(&sq, &[1.0], Some(0.0)),
        Err(AdError::InvalidStep(_))
    ));
}

#[test]
fn fd_reports_domain_errors() {
    let ln = Closure {
        n: 1,
        m: 1,
        f: |x: &[Dual]| Ok(vec![x[0].ln()?]),
    };
    assert!(matches!(
        jacobian_fd(&ln, &[1e-9], Some(1e-6)),
        Err(AdError::Eval(_))
    ));
}

#[test]
fn ad_matches_fd_and_closed_forms_on_catalog() {
    let mut r = rng(3);
    for spec in catalog::all() {
        for _ in 0..100 {
            let z = off_locus_point(spec, &mut r);
            let ad = jacobian_ad(spec, &z).unwrap();
            let fd = jacobian_fd(spec, &z, None).unwrap();
            let an = spec.analytic_jacobian(&z).unwrap();
            assert!(
                max_abs_diff(ad.as_slice(), fd.as_slice()) <= 1e-6,
                "{} at {z:?}",
                spec.name
            );
            assert!(
                max_abs_diff(ad.as_slice(), an.as_slice()) <= 1e-8,
                "{} at {z:?}",
                spec.name
            );
        }
    }
}

#[test]
fn linear_maps_are_exact() {
    let a = [[1.5, -2.0], [0.25, 3.0], [4.0, 0.5]];
    let lin = Closure {
        n: 3,
        m: 2,
        f: move |x: &[Dual]| {
            Ok((0..2)
                .map(|i| (0..3).fold(Dual::constant(0.0), |acc, j| acc + a[j][i] * x[j]))
                .collect())
        },
    };
    let mut r = rng(4);
    for _ in 0..50 {
        let z: Vec<f64> = (0..3).map(|_| r.gen_range(-10.0..10.0)).collect();
        assert_matrix(&jacobian_ad(&lin, &z).unwrap(), &[&a[0], &a[1], &a[2]], 0.0);
    }
}

#[test]
fn trigonometric_map_has_equal_rows() {
    let ex66 = catalog::get("ex6_6").unwrap();
    let mut r = rng(5);
    for _ in 0..100 {
        let z = off_locus_point(ex66, &mut r);
        let j = jacobian_ad(ex66, &z).unwrap();
        assert_eq!(j.row(0), j.row(1));
    }
}

#[test]
fn probe_detects_folding_singularities() {
    let f51 = catalog::get("f5_1").unwrap();
    let rep = probe_differentiability(f51, &[0.0, 0.0], 1e-5);
    assert!(!rep.differentiable);
    assert!(rep.probes >= 48);

    let g = catalog::get("g5_11").unwrap();
    assert!(!probe_differentiability(g, &[0.0, 0.0, 1.0, 1.0], 1e-5).differentiable);

    let ex67 = catalog::get("ex6_7").unwrap();
    let rep = probe_differentiability(ex67, &[0.0, 0.0], 1e-5);
    assert!(rep.differentiable, "{rep:?}");
    assert!(rep.directional_spread <= 1e-4);
}

#[test]
fn probe_accepts_smooth_catalog_points() {
    let mut r = rng(6);
    for spec in catalog::all() {
        let z = off_locus_point(spec, &mut r);
        let rep = probe_differentiability(spec, &z, 1e-5);
        assert!(rep.differentiable, "{} at {z:?}: {rep:?}", spec.name);
    }
}

fn composite(x: Dual) -> Result<Dual, EvalError> {
    Ok((x.sin() * x.exp() + (x * x + 1.0).sqrt()?).ln()? / (2.0 + x.cos()))
}

proptest! {
    #[test]
    fn dual_composites_match_central_differences(x in -2.0f64..2.0) {
        let d = composite(Dual::variable(x)).unwrap().deriv;
        let h = 1e-6;
        let fd = (composite(Dual::constant(x + h)).unwrap().value
            - composite(Dual::constant(x - h)).unwrap().value) / (2.0 * h);
        prop_assert!((d - fd).abs() < 1e-6);
    }
}
