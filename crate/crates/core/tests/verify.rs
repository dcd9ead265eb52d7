use mixstable::verify::{
    check_bhp, check_dirichlet_bound, check_green_bounds, check_levy_system, check_scaling_identity, check_uniformity,
    Bandwidth, BoundReport, CheckOptions, KernelPoint, PointPair, RecordStatus,
};
use mixstable::{BallSpec, Domain, McSettings, MixedStableParams, SeedSpec};

fn params(a: f64) -> MixedStableParams {
    MixedStableParams::new(1, 1.5, 0.5, a).unwrap()
}

fn unit() -> Domain {
    Domain::interval(0.0, 1.0).unwrap()
}

fn grid() -> Vec<KernelPoint> {
    let mut g = Vec::new();
    for x in [0.0, 0.9] {
        for t in [0.1, 0.5] {
            for y in [-0.5, 0.3] {
                g.push(KernelPoint {
                    t,
                    x: vec![x],
                    y: vec![y],
                });
            }
        }
    }
    g
}

fn assert_report_invariants(r: &BoundReport) {
    let env = r.envelope.expect("envelope");
    for (i, rec) in r.records.iter().enumerate() {
        match rec.status {
            RecordStatus::Ok => assert!(env.min <= rec.ratio && rec.ratio <= env.max),
            RecordStatus::Violation => assert!(r.violations.contains(&i)),
            _ => {}
        }
    }
    assert_eq!(r.passed(), r.violations.is_empty() && r.checks.iter().all(|c| c.passed));
}

fn dirichlet(a: f64, n: usize, seed: u64) -> BoundReport {
    let mc = McSettings::new(n, 2e-3, SeedSpec::new(seed, 1));
    check_dirichlet_bound(
        "d",
        &unit(),
        &params(a),
        &grid(),
        Bandwidth::Fixed { h: 0.1 },
        &mc,
        &CheckOptions::default(),
    )
    .unwrap()
}

#[test]
fn more_paths_keep_a_pass() {
    let small = dirichlet(0.25, 4_000, 11);
    let large = dirichlet(0.25, 16_000, 11);
    assert_report_invariants(&small);
    assert_report_invariants(&large);
    assert!(small.passed());
    assert!(large.passed());
    for (s, l) in small.records.iter().zip(&large.records) {
        assert!(l.ratio_hi - l.ratio_lo < s.ratio_hi - s.ratio_lo);
    }
}

#[test]
fn pure_and_mixed_envelopes_are_comparable() {
    let pure = dirichlet(0.0, 8_000, 12);
    let mixed = dirichlet(1.0, 8_000, 12);
    let u = check_uniformity("u", &[&pure, &mixed], 4.0).unwrap();
    assert!(u.passed(), "{:?}", u.checks);
}

#[test]
fn pure_stable_scaling_holds_at_lambda_two() {
    let mc = McSettings::new(40_000, 1e-3, SeedSpec::new(13, 1));
    let pt = KernelPoint {
        t: 0.25,
        x: vec![0.2],
        y: vec![-0.3],
    };
    let r = check_scaling_identity(
        "s",
        &unit(),
        &params(0.0),
        2.0,
        &pt,
        0.05,
        &mc,
        &CheckOptions::default(),
    )
    .unwrap();
    assert!(r.passed(), "{:?}", r.checks);
}

#[test]
fn green_ratios_are_symmetric_under_reflection() {
    let mc = McSettings::new(20_000, 1e-3, SeedSpec::new(14, 1));
    let pairs = [
        PointPair {
            x: vec![0.0],
            y: vec![0.5],
        },
        PointPair {
            x: vec![0.0],
            y: vec![-0.5],
        },
    ];
    let r = check_green_bounds(
        "g",
        &unit(),
        &params(1.0),
        &pairs,
        0.05,
        true,
        &mc,
        &CheckOptions::default(),
    )
    .unwrap();
    assert!(r.passed());
    let ratios: Vec<_> = r.records.iter().filter(|rec| rec.status == RecordStatus::Ok).collect();
    assert_eq!(ratios.len(), 2);
    let diff = (ratios[0].ratio - ratios[1].ratio).abs();
    let se = ratios[0].estimate.combined_stderr(&ratios[1].estimate) / ratios[0].formula;
    assert!(diff <= 3.0 * se, "{diff} vs {se}");
}

#[test]
fn levy_system_decreases_with_separation() {
    let mc = McSettings::new(20_000, 1e-3, SeedSpec::new(15, 1));
    let run = |c: f64| {
        let target = BallSpec {
            center: vec![c],
            radius: 0.5,
        };
        check_levy_system(
            "l",
            &unit(),
            &params(1.0),
            &target,
            &[0.0],
            0.05,
            &mc,
            &CheckOptions::default(),
        )
        .unwrap()
    };
    let (near, far) = (run(3.5), run(6.5));
    assert!(near.passed() && far.passed());
    assert!(far.records[0].estimate.value < near.records[0].estimate.value);
    assert!(far.records[1].estimate.value < near.records[1].estimate.value);
}

#[test]
fn bhp_exponent_is_half_alpha() {
    let mc = McSettings::new(20_000, 1e-4, SeedSpec::new(16, 1));
    let pts = vec![vec![0.98], vec![0.96], vec![0.92], vec![0.84]];
    let r = check_bhp(
        "b",
        &unit(),
        &params(1.0),
        &[1.0],
        0.5,
        &pts,
        Some(0.15),
        &mc,
        &CheckOptions::default(),
    )
    .unwrap();
    assert_report_invariants(&r);
    assert!(r.passed(), "{:?}", r.checks);
}
