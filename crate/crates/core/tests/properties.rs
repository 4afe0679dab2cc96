use num_complex::Complex64;
use proptest::prelude::*;

use equidyn::map::{build_equivariant_map, elementary_symmetric_all};
use equidyn::point::{chordal_distance, ProjectivePoint, RationalPoint};
use equidyn::poly::{rat, Rational};
use equidyn::symmetry::generate_group;

fn small_ints(n: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-6i64..=6, n).prop_filter("nonzero", |v| v.iter().any(|&c| c != 0))
}

fn complex_vec(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), n)
        .prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
        .prop_filter("away from zero", |v: &Vec<Complex64>| v.iter().map(|z| z.norm()).sum::<f64>() > 1e-3)
}

/// Sum over all `j`-subsets, by brute force over bitmasks.
fn brute_force_symmetric(values: &[i64]) -> Vec<i64> {
    let n = values.len();
    let mut e = vec![0i64; n + 1];
    for mask in 0u32..(1 << n) {
        let prod: i64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| values[i]).product();
        e[mask.count_ones() as usize] += prod;
    }
    e
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn elementary_symmetric_matches_subsets(values in prop::collection::vec(-9i64..=9, 0..7)) {
        prop_assert_eq!(elementary_symmetric_all(&values), brute_force_symmetric(&values));
    }

    /// Vieta: the A_j are the coefficients of ∏ (t + x_i), so that product
    /// vanishes at every t = -x_i.
    #[test]
    fn vieta_roots(values in prop::collection::vec(-9i64..=9, 1..7)) {
        let e = elementary_symmetric_all(&values);
        let n = values.len();
        for &x in &values {
            let t = -x;
            let p: i64 = (0..=n).map(|j| e[j] * t.pow((n - j) as u32)).sum();
            prop_assert_eq!(p, 0);
        }
    }

    #[test]
    fn homogeneity(k in 1usize..=3, x in small_ints(4), lambda in -5i64..=5) {
        prop_assume!(lambda != 0);
        let g = build_equivariant_map(k).unwrap();
        let x: Vec<Rational> = x[..=k].iter().map(|&c| rat(c)).collect();
        let lx: Vec<Rational> = x.iter().map(|c| c * rat(lambda)).collect();
        let scale = rat(lambda).pow(g.degree() as i32);
        let gx = g.eval_vector(&x);
        let glx = g.eval_vector(&lx);
        for (a, b) in gx.iter().zip(&glx) {
            prop_assert_eq!(a * &scale, b.clone());
        }
    }

    /// g(M x) and M g(x) agree projectively for every group element M at
    /// random rational points where g is defined.
    #[test]
    fn equivariance_at_points(k in 1usize..=2, x in small_ints(3), pick in 0usize..1000) {
        let g = build_equivariant_map(k).unwrap();
        let group = generate_group(k).unwrap();
        let m = &group[pick % group.len()];
        let p = RationalPoint::new(x[..=k].iter().map(|&c| rat(c)).collect());
        prop_assume!(p.is_ok());
        let p = p.unwrap();
        let gp = g.evaluate_exact(&p);
        prop_assume!(gp.is_ok());
        let lhs = g.evaluate_exact(&m.act(&p)).unwrap();
        prop_assert_eq!(lhs, m.act(&gp.unwrap()));
    }

    #[test]
    fn canonical_form_ignores_scale(v in complex_vec(3), re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let s = Complex64::new(re, im);
        prop_assume!(s.norm() > 1e-2);
        let p = ProjectivePoint::new(v.clone()).unwrap();
        let q = ProjectivePoint::new(v.iter().map(|z| z * s).collect()).unwrap();
        prop_assert!(chordal_distance(&p, &q) < 1e-12);
        let max = p.coords().iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!((max - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chordal_distance_bounded_and_symmetric(a in complex_vec(3), b in complex_vec(3)) {
        let p = ProjectivePoint::new(a).unwrap();
        let q = ProjectivePoint::new(b).unwrap();
        let d = chordal_distance(&p, &q);
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert!((d - chordal_distance(&q, &p)).abs() < 1e-15);
        prop_assert!(chordal_distance(&p, &p) < 1e-15);
    }

    /// The float evaluator agrees with exact evaluation.
    #[test]
    fn float_matches_exact(k in 1usize..=3, x in small_ints(4)) {
        let g = build_equivariant_map(k).unwrap();
        let p = RationalPoint::new(x[..=k].iter().map(|&c| rat(c)).collect());
        prop_assume!(p.is_ok());
        let p = p.unwrap();
        let exact = g.evaluate_exact(&p);
        prop_assume!(exact.is_ok());
        let float = g.to_float().evaluate(&p.to_float()).unwrap();
        prop_assert!(chordal_distance(&float, &exact.unwrap().to_float()) < 1e-12);
    }
}
