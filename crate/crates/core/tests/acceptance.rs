//! Acceptance suite. Runs as a plain binary (`harness = false`) so that every
//! criterion prints one PASS/FAIL line; exits nonzero if any fails.
//!
//! Run alone with `cargo test --release --test acceptance`.

use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use num_traits::Zero;

use equidyn::dynamics::{
    basin_survey, expansion_probe, find_fixed_points_dim1, max_class_deviation, probe_orbit_dd, refine_fixed_point,
    restrict_map, restricted_critical_set, verify_critical_factorization, verify_superattracting, CriticalFactorization,
    CriticalSet, ProbeParams, SurveyParams,
};
use equidyn::map::build_equivariant_map;
use equidyn::point::RationalPoint;
use equidyn::poly::{Monomial, Polynomial};
use equidyn::symmetry::{
    check_equivariance, enumerate_superattractors, flat_from_hyperplanes, generate_group, hyperplane_arrangement,
    permutation_classes, Hyperplane,
};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn within(elapsed: Duration, limit_secs: u64) -> bool {
    elapsed <= Duration::from_secs(limit_secs)
}

/// `[x1^3 (-x1 + 2 x2), x2^3 (2 x1 - x2)]`, written out monomial by monomial.
fn criterion_1() -> Outcome {
    let t = Instant::now();
    let g = build_equivariant_map(1).unwrap();
    let elapsed = t.elapsed();
    let term = |c: i64, a: u32, b: u32| Polynomial::monomial(2, Monomial::new(vec![a, b]), equidyn::poly::rat(c));
    let g1 = &term(-1, 4, 0) + &term(2, 3, 1);
    let g2 = &term(2, 1, 3) + &term(-1, 0, 4);
    let ok = g.components() == [g1, g2];
    outcome(ok, format!("g = [{}, {}] built in {elapsed:?}", g.components()[0], g.components()[1]))
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let mut parts = Vec::new();
    let mut ok = true;
    for (k, order) in [(1, 6), (2, 24), (3, 120)] {
        let g = build_equivariant_map(k).unwrap();
        let group = generate_group(k).unwrap();
        let passed = group.iter().filter(|r| check_equivariance(&g, r).unwrap().holds()).count();
        ok &= group.len() == order && passed == order;
        parts.push(format!("k={k}: {passed}/{order}"));
    }
    let elapsed = t.elapsed();
    ok &= within(elapsed, 30);
    outcome(ok, format!("{} in {elapsed:?}", parts.join(", ")))
}

fn criterion_3() -> Outcome {
    let t = Instant::now();
    let mut parts = Vec::new();
    let mut ok = true;
    for k in 1..=3 {
        let g = build_equivariant_map(k).unwrap();
        let covs: Vec<Vec<i64>> = hyperplane_arrangement(k).iter().map(|h| h.covector(k)).collect();
        match verify_critical_factorization(&g, &covs).unwrap() {
            CriticalFactorization::Exact { constant } => parts.push(format!("k={k}: det = {constant}·∏ℓ²")),
            other => {
                ok = false;
                parts.push(format!("k={k}: {other:?}"));
            }
        }
    }
    let elapsed = t.elapsed();
    ok &= within(elapsed, 60);
    outcome(ok, format!("{} in {elapsed:?}", parts.join(", ")))
}

fn criterion_4() -> Outcome {
    let mut ok = true;
    let mut counts = Vec::new();
    for (k, expected) in [(1, 3), (2, 7), (3, 15)] {
        let g = build_equivariant_map(k).unwrap();
        let pts = enumerate_superattractors(k);
        let exact = pts.iter().all(|p| verify_superattracting(&g, p).unwrap().holds());
        ok &= pts.len() == expected && exact;
        counts.push(pts.len());
    }
    // the seven points listed for P^2
    let listed: Vec<RationalPoint> = [[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1], [1, 1, 0], [1, 0, 1], [0, 1, 1]]
        .iter()
        .map(|c| RationalPoint::from_ints(c).unwrap())
        .collect();
    let mut got = enumerate_superattractors(2);
    let mut want = listed;
    got.sort_by_key(|p| p.to_ints());
    want.sort_by_key(|p| p.to_ints());
    ok &= got == want;
    outcome(ok, format!("counts {counts:?}, P^2 set matches the listed seven: {}", got == want))
}

fn criterion_5() -> Outcome {
    let g = build_equivariant_map(2).unwrap();
    let flat = flat_from_hyperplanes(2, &[Hyperplane::Coord(1)]).unwrap();
    let r = restrict_map(&g, &flat).unwrap();
    let crit = restricted_critical_set(&r).unwrap();
    let mut pts: Vec<Vec<i64>> = crit.points().iter().map(|p| p.to_ints().unwrap()).collect();
    pts.sort();
    let degree = r.map.degree();
    let witness = degree != flat.m as u32 + 3;
    let ok = degree == 5 && pts == [vec![0, 0, 1], vec![0, 1, 0], vec![0, 1, 1]] && crit.contained_in_arrangement() && witness;
    outcome(ok, format!("degree {degree}, critical points {pts:?}, degree ≠ m+3 = 4: {witness}"))
}

fn criterion_6() -> Outcome {
    let t = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for (k, samples, min_resolved) in [(1, 100_000, 0.999), (2, 10_000, 0.99)] {
        let g = build_equivariant_map(k).unwrap();
        let params = SurveyParams { sample_count: samples, seed: 42, max_iter: 5000, capture_tol: 1e-8 };
        let report = basin_survey(&g, params).unwrap();
        let classes = permutation_classes(&report.attractors, &generate_group(k).unwrap());
        let dev = max_class_deviation(&report, &classes);
        let resolved = report.resolved_fraction();
        ok &= resolved >= min_resolved && dev <= 3.0;
        parts.push(format!(
            "k={k}: resolved {:.5} of {samples}, counts {:?}, max class deviation {dev:.2}σ",
            resolved, report.per_attractor_counts
        ));
    }
    let elapsed = t.elapsed();
    ok &= within(elapsed, 300);
    outcome(ok, format!("{} in {elapsed:?}", parts.join("; ")))
}

fn criterion_7() -> Outcome {
    let g = build_equivariant_map(1).unwrap();
    let fps = find_fixed_points_dim1(&g).unwrap();
    // x2 g1 - x1 g2 = -x1 x2 (x1 - x2)(x1^2 - x1 x2 + x2^2): finite roots of
    // z (z - 1)(z^2 - z + 1) and the point at infinity
    let s = 3f64.sqrt() / 2.0;
    let superattracting = [Some(Complex64::zero()), Some(Complex64::new(1.0, 0.0)), None];
    let repelling = [Complex64::new(0.5, s), Complex64::new(0.5, -s)];
    let affine = |c: &[Complex64]| if c[1].norm() < 1e-12 { None } else { Some(c[0] / c[1]) };
    let near = |a: Option<Complex64>, b: Option<Complex64>| match (a, b) {
        (Some(a), Some(b)) => (a - b).norm() < 1e-9,
        (None, None) => true,
        _ => false,
    };
    let mut ok = fps.len() == 5 && fps.iter().all(|f| f.multiplicity == 1);
    for want in superattracting {
        ok &= fps.iter().any(|f| near(affine(f.point.coords()), want) && f.multiplier.norm() < 1e-9);
    }
    let mut worst: f64 = 0.0;
    for want in repelling {
        match fps.iter().find(|f| near(affine(f.point.coords()), Some(want))) {
            Some(f) => worst = worst.max((f.multiplier - Complex64::new(2.0, 0.0)).norm()),
            None => ok = false,
        }
    }
    ok &= worst < 1e-9;
    outcome(ok, format!("{} fixed points, repelling multipliers within {worst:.1e} of 2", fps.len()))
}

fn criterion_8() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for k in [1, 2] {
        let g = build_equivariant_map(k).unwrap().to_float();
        let crit = CriticalSet::from_hyperplanes(k, &hyperplane_arrangement(k));
        let params = ProbeParams { sample_count: 10_000, seed: 42, n_steps: 40, delta: 0.05 };
        let r = expansion_probe(&g, &crit, params).unwrap();
        let all_positive = r.growth_exponents.iter().all(|&e| e > 0.0);
        ok &= all_positive;
        parts.push(format!("k={k}: {} of 10000 orbits survive, all positive: {all_positive}", r.surviving_orbits));
    }
    let g = build_equivariant_map(1).unwrap();
    let f = g.to_float();
    let crit = CriticalSet::from_hyperplanes(1, &hyperplane_arrangement(1));
    let mut worst: f64 = 0.0;
    let repelling: Vec<_> = find_fixed_points_dim1(&g).unwrap().into_iter().filter(|p| p.multiplier.norm() > 1.0).collect();
    ok &= repelling.len() == 2;
    for fp in &repelling {
        let start = refine_fixed_point(&g, fp).unwrap();
        match probe_orbit_dd(&f, &crit, &start, 40, 0.05).unwrap() {
            Some(e) => worst = worst.max((e - 2f64.ln()).abs()),
            None => ok = false,
        }
    }
    ok &= worst <= 1e-6;
    parts.push(format!("repelling fixed point exponent within {worst:.1e} of log 2"));
    outcome(ok, parts.join("; "))
}

fn run_cli(args: &[&str]) -> (bool, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_equidyn")).args(args).output().expect("binary runs");
    (out.status.success(), out.stdout)
}

fn strip_wall_ms(json: &[u8]) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_slice(json).expect("valid JSON");
    v.as_object_mut().expect("object").remove("wall_ms");
    v
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for k in ["1", "2"] {
        let basins: Vec<_> = ["1", "8"]
            .iter()
            .map(|t| run_cli(&["basins", "--k", k, "--samples", "5000", "--seed", "7", "--threads", t]))
            .collect();
        let same = basins.iter().all(|b| b.0) && strip_wall_ms(&basins[0].1) == strip_wall_ms(&basins[1].1);
        ok &= same;
        parts.push(format!("basins k={k}: {same}"));

        let images: Vec<Vec<u8>> = ["1", "8"]
            .iter()
            .map(|t| {
                let path = dir.path().join(format!("k{k}_t{t}.ppm"));
                let (success, _) = run_cli(&[
                    "render", "--k", k, "--res", "120x90", "--threads", t, "--out", path.to_str().unwrap(),
                ]);
                assert!(success, "render failed");
                std::fs::read(&path).unwrap()
            })
            .collect();
        let same = images[0] == images[1];
        ok &= same;
        parts.push(format!("render k={k}: {same}"));
    }
    outcome(ok, format!("byte-identical across 1 and 8 threads: {}", parts.join(", ")))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("formula fidelity", criterion_1),
        ("equivariance", criterion_2),
        ("critical structure", criterion_3),
        ("superattractors", criterion_4),
        ("restriction fixture", criterion_5),
        ("full-measure basins", criterion_6),
        ("repelling fixed points", criterion_7),
        ("expansion probe", criterion_8),
        ("determinism", criterion_9),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        println!("criterion {} {:<24} {}  {}", i + 1, name, if o.passed { "PASS" } else { "FAIL" }, o.detail);
        if !o.passed {
            failures += 1;
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
