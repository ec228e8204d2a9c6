mod common;

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use common::{off_locus_point, rng};
use covkit_core::catalog::{self, oracle_constant};
use covkit_core::covering::{
    default_schedule, estimate, frobenius_bound, geometric_schedule, inf_over_ball, CoveringError,
    CoveringMethod, SamplingConfig,
};
use covkit_core::mapping::{Mapping, OracleKind};
use rand::Rng;

fn cfg() -> SamplingConfig {
    SamplingConfig::default()
}

fn run(name: &str, z: &[f64]) -> covkit_core::covering::CoveringEstimate {
    let f = catalog::get(name).unwrap();
    estimate(f, z, &default_schedule(z), &cfg()).unwrap()
}

fn close(value: f64, want: f64) -> bool {
    (value - want).abs() <= 1e-3_f64.max(1e-3 * want.abs())
}

#[test]
fn inf_over_ball_examples() {
    let p = catalog::get("ex6_5").unwrap();
    let z = [0.3, -1.0, 2.0];
    let v = inf_over_ball(p, &z, &p.eval(&z).unwrap(), 0.1, &cfg()).unwrap();
    assert!((v - 1.0).abs() < 1e-12);

    let sq = catalog::get("ex6_7").unwrap();
    let v = inf_over_ball(sq, &[3.0, 4.0], &[-7.0, 24.0], 1e-3, &cfg()).unwrap();
    assert!((9.995..=10.0).contains(&v), "{v}");

    let t = catalog::get("ex6_6").unwrap();
    for eta in [1.0, 0.1, 1e-3] {
        let z = [0.4, 1.3];
        assert_eq!(
            inf_over_ball(t, &z, &t.eval(&z).unwrap(), eta, &cfg()).unwrap(),
            0.0
        );
    }
}

#[test]
fn inf_over_ball_preconditions() {
    let sq = catalog::get("ex6_7").unwrap();
    match inf_over_ball(sq, &[3.0, 4.0], &[0.0, 0.0], 0.1, &cfg()) {
        Err(CoveringError::Precondition(s)) => assert!(s.contains("w̄ = f(z̄)")),
        other => panic!("{other:?}"),
    }
    let few = SamplingConfig {
        samples: 10,
        ..cfg()
    };
    assert!(matches!(
        inf_over_ball(sq, &[3.0, 4.0], &[-7.0, 24.0], 0.1, &few),
        Err(CoveringError::Precondition(_))
    ));
    assert!(matches!(
        inf_over_ball(sq, &[3.0, 4.0], &[-7.0, 24.0], 0.0, &cfg()),
        Err(CoveringError::Precondition(_))
    ));
}

#[test]
fn estimate_examples() {
    let e = run("ex4_3", &[1.0, 1.0]);
    assert_eq!((e.value, e.method), (0.0, CoveringMethod::DimensionZero));
    assert!(e.schedule.is_empty());

    let e = run("f5_1", &[0.6, 0.8]);
    assert_eq!(e.method, CoveringMethod::SvdLimit);
    assert!((e.value - 1.0).abs() <= 1e-3, "{e:?}");

    let e = run("ex6_2", &[2.0, 5.0, 7.0]);
    assert!((e.value - 2.0).abs() <= 5e-3, "{e:?}");

    let e = run("g5_11", &[1.0, 2.0, 3.0, 4.0]);
    assert!((e.value - 1.0).abs() <= 1e-3, "{e:?}");
}

#[test]
fn folding_maps_at_their_origin_use_the_punctured_ball() {
    let e = run("f5_1", &[0.0, 0.0]);
    assert!((e.value - 1.0).abs() <= 1e-3, "{e:?}");
    assert!(e.frobenius_cap.is_finite() && e.frobenius_cap >= e.value);
}

#[test]
fn estimate_schedule_errors() {
    let f = catalog::get("f5_1").unwrap();
    for bad in [vec![], vec![0.5, 0.5], vec![0.1, 0.2], vec![1e-7]] {
        assert!(matches!(
            estimate(f, &[1.0, 0.0], &bad, &cfg()),
            Err(CoveringError::InvalidSchedule(_))
        ));
    }
    assert!(geometric_schedule(1.0, 1.0, 3).is_err());
    assert_eq!(
        geometric_schedule(1.0, 4.0, 3).unwrap(),
        vec![1.0, 0.25, 0.0625]
    );
    let d = default_schedule(&[30.0, 40.0]);
    assert_eq!((d.len(), d[0]), (8, 5.0));
}

#[test]
fn exact_oracles_are_reproduced() {
    let mut r = rng(41);
    for spec in catalog::all() {
        let mut checked = 0;
        let mut tries = 0;
        while checked < 10 && tries < 200 {
            tries += 1;
            let z = off_locus_point(spec, &mut r);
            let Ok(o) = oracle_constant(spec, &z) else {
                continue;
            };
            if o.kind != OracleKind::Exact {
                continue;
            }
            let e = estimate(spec, &z, &default_schedule(&z), &cfg()).unwrap();
            assert!(
                close(e.value, o.value),
                "{} at {z:?}: {} vs {}",
                spec.name,
                e.value,
                o.value
            );
            checked += 1;
        }
        if spec.oracle_tag() == "exact" {
            assert_eq!(checked, 10, "{}", spec.name);
        }
    }
}

#[test]
fn upper_bounds_are_respected() {
    let mut r = rng(42);
    let h = catalog::get("h5_18").unwrap();
    let c = catalog::get("ex6_3").unwrap();
    let q = catalog::get("ex6_11").unwrap();
    for _ in 0..5 {
        let a: f64 = r.gen_range(0.3..2.0);
        let z: Vec<f64> = (0..4)
            .map(|_| if r.gen_bool(0.5) { a } else { -a })
            .collect();
        let e = estimate(h, &z, &default_schedule(&z), &cfg()).unwrap();
        assert!(e.value <= FRAC_1_SQRT_2 + 1e-3, "{z:?}: {e:?}");

        let (p, s) = (r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0));
        let z = [0.0, 0.0, p, s];
        assert!(
            estimate(h, &z, &default_schedule(&z), &cfg())
                .unwrap()
                .value
                <= 1e-3
        );

        let (u, w) = (r.gen_range(0.3..2.0), r.gen_range(0.3..2.0));
        let z = [u, u, w];
        let e = estimate(c, &z, &default_schedule(&z), &cfg()).unwrap();
        assert!(e.value <= 2.0 * u * w + 1e-3, "{z:?}: {e:?}");

        let z = [u, w];
        let bound = FRAC_1_SQRT_2.min(2.0 * u * w / (u.powi(4) + w.powi(4)).sqrt());
        let e = estimate(q, &z, &default_schedule(&z), &cfg()).unwrap();
        assert!(e.value <= bound + 1e-3, "{z:?}: {e:?}");
        let z = [0.0, w];
        assert!(
            estimate(q, &z, &default_schedule(&z), &cfg())
                .unwrap()
                .value
                <= 1e-3
        );
    }
}

#[test]
fn frobenius_examples() {
    let p = catalog::get("ex6_5").unwrap();
    assert!((frobenius_bound(p, &[1.0, -2.0, 0.5]).unwrap() - SQRT_2).abs() < 1e-15);
    let sq = catalog::get("ex6_7").unwrap();
    assert!((frobenius_bound(sq, &[1.0, 0.0]).unwrap() - 2.0 * SQRT_2).abs() < 1e-15);
    match frobenius_bound(catalog::get("ex4_4").unwrap(), &[1.0, 1.0]) {
        Err(CoveringError::Hypothesis(s)) => assert!(s.contains("n >= m")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn estimates_stay_below_frobenius_and_are_monotone() {
    let mut r = rng(43);
    for spec in catalog::all().iter().filter(|s| s.n >= s.m) {
        for _ in 0..10 {
            let z = off_locus_point(spec, &mut r);
            let e = estimate(spec, &z, &default_schedule(&z), &cfg()).unwrap();
            let fb = frobenius_bound(spec, &z).unwrap();
            assert!(e.value <= fb + 1e-9, "{} at {z:?}", spec.name);
            assert!(e.value <= e.frobenius_cap + 1e-9);
            assert!(e
                .schedule
                .windows(2)
                .all(|w| w[1].eta < w[0].eta && w[1].inf >= w[0].inf - 1e-6));
        }
    }
}

#[test]
fn dimension_shortcut_agrees_with_sampling() {
    let mut r = rng(44);
    for name in ["ex4_3", "ex4_4"] {
        let f = catalog::get(name).unwrap();
        for _ in 0..5 {
            let z = off_locus_point(f, &mut r);
            let w = f.eval(&z).unwrap();
            for eta in [0.5, 1e-2] {
                assert!(inf_over_ball(f, &z, &w, eta, &cfg()).unwrap() <= 1e-6);
            }
            let e = estimate(f, &z, &default_schedule(&z), &cfg()).unwrap();
            assert_eq!(e.value, 0.0);
            assert_eq!(e.method, CoveringMethod::DimensionZero);
        }
    }
}

#[test]
fn estimates_are_deterministic_per_seed() {
    let f = catalog::get("ex6_4").unwrap();
    let z = [1.0, 1.0, 2.0];
    let c = SamplingConfig { seed: 9, ..cfg() };
    let a = estimate(f, &z, &default_schedule(&z), &c).unwrap();
    let b = estimate(f, &z, &default_schedule(&z), &c).unwrap();
    assert_eq!(a, b);
    assert!(close(a.value, 0.2));
    assert!(a.converged);
}

proptest::proptest! {
    #![proptest_config(proptest::prelude::ProptestConfig::with_cases(12))]
    #[test]
    fn traces_are_nondecreasing(
        idx in 0usize..16,
        raw in proptest::collection::vec(-3.0f64..3.0, 4),
        seed in 0u64..1000,
    ) {
        let spec = &catalog::all()[idx];
        let z = &raw[..spec.n];
        let c = SamplingConfig { seed, samples: 64, ..cfg() };
        let sched = geometric_schedule(1.0, 4.0, 5).unwrap();
        if let Ok(e) = estimate(spec, z, &sched, &c) {
            for w in e.schedule.windows(2) {
                proptest::prop_assert!(w[1].inf >= w[0].inf - 1e-6);
            }
            if e.method == CoveringMethod::DimensionZero {
                proptest::prop_assert_eq!(e.value, 0.0);
            }
        }
    }
}
