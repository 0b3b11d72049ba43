//! Fast path against brute force, invariances, and null-distribution checks.

use proptest::prelude::*;
use sphereuni::experiments::{ks_distance, run_rejection_experiment, simulate, ExperimentPlan};
use sphereuni::nulldist::{upper_p_value, NullLaw};
use sphereuni::oracles::{brute_statistics, random_rotation};
use sphereuni::sampling::{sample_uniform_sphere, AlternativeModel, SeedSpec, SphericalSample};
use sphereuni::statistics::{
    bingham_statistic, fisher_combination, fisher_threshold, packing_statistic, pairwise_summary, rayleigh_statistic,
    run_all_tests, TestKind,
};

const SEED: u64 = 0x5EED_0002;

fn fast(sample: &SphericalSample) -> (f64, f64, f64) {
    let s = pairwise_summary(sample).unwrap();
    (
        rayleigh_statistic(&s),
        bingham_statistic(&s),
        packing_statistic(&s).unwrap(),
    )
}

/// Relative error with a unit floor, so values near zero are compared absolutely.
fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn fast_path_matches_brute_force(n in 2usize..=30, p in 1usize..=30, idx in any::<u64>()) {
        let sample = sample_uniform_sphere(n, p, SeedSpec::new(SEED, idx)).unwrap();
        let (r, b, pk) = fast(&sample);
        let (br, bb, bp) = brute_statistics(&sample).unwrap();
        prop_assert!(close(r, br, 1e-9), "R {} vs {}", r, br);
        prop_assert!(close(b, bb, 1e-9), "B {} vs {}", b, bb);
        prop_assert!(close(pk, bp, 1e-9), "P {} vs {}", pk, bp);
    }

    #[test]
    fn row_permutation_leaves_statistics_unchanged(n in 2usize..=30, p in 1usize..=30, idx in any::<u64>()) {
        let sample = sample_uniform_sphere(n, p, SeedSpec::new(SEED ^ 1, idx)).unwrap();
        // A deterministic shuffle derived from idx.
        let mut order: Vec<usize> = (0..n).collect();
        let mut state = idx | 1;
        for i in (1..n).rev() {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            order.swap(i, (state % (i as u64 + 1)) as usize);
        }
        let shuffled = sample.permuted(&order).unwrap();
        prop_assert_eq!(fast(&sample), fast(&shuffled));
    }

    // Below about -5 the normal upper tail rounds to 1.0 and strictness is not
    // representable in f64; the full range is covered by the non-strict check.
    #[test]
    fn p_values_strictly_decrease(a in -5.0f64..30.0, gap in 1e-3f64..10.0) {
        for law in [NullLaw::StandardNormal, NullLaw::PackingGumbel] {
            let pa = upper_p_value(law, a).unwrap();
            let pb = upper_p_value(law, a + gap).unwrap();
            prop_assert!(pa > pb, "{:?}: p({}) = {} vs p({}) = {}", law, a, pa, a + gap, pb);
        }
    }

    #[test]
    fn p_values_never_increase(a in -100.0f64..100.0, gap in 0.0f64..10.0) {
        for law in [NullLaw::StandardNormal, NullLaw::PackingGumbel] {
            prop_assert!(upper_p_value(law, a).unwrap() >= upper_p_value(law, a + gap).unwrap());
        }
    }

    #[test]
    fn combination_follows_threshold(ps in proptest::array::uniform3(0.0f64..=1.0), level in 0.001f64..0.5) {
        let t = fisher_threshold(level).unwrap();
        let out = fisher_combination(ps[0], ps[1], ps[2], level).unwrap();
        if ps.iter().any(|&x| x <= t) {
            prop_assert!(out.reject);
        }
        if ps.iter().all(|&x| x > t) {
            prop_assert!(!out.reject);
        }
        prop_assert_eq!(out.reject, out.p_value <= level + 1e-15);
    }
}

#[test]
fn summary_matches_brute_force_at_50_by_20() {
    let sample = sample_uniform_sphere(50, 20, SeedSpec::new(SEED, 50)).unwrap();
    let s = pairwise_summary(&sample).unwrap();
    let (n, p, x) = (50, 20, sample.as_slice());
    let (mut lin, mut quad, mut max): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for i in 0..n {
        for j in (i + 1)..n {
            let g: f64 = (0..p).map(|k| x[i * p + k] * x[j * p + k]).sum();
            lin += g;
            quad += g * g;
            max = max.max(g.abs());
        }
    }
    assert!(close(s.sum_inner, lin, 1e-9));
    assert!(close(s.sum_inner_sq, quad, 1e-9));
    assert!(close(s.max_abs_inner, max, 1e-9));
    assert!(s.sum_inner_sq >= s.max_abs_inner * s.max_abs_inner);
}

#[test]
fn rotation_changes_statistics_only_by_rounding() {
    for (k, (n, p)) in [(20usize, 5usize), (60, 40), (100, 100)].into_iter().enumerate() {
        let sample = sample_uniform_sphere(n, p, SeedSpec::new(SEED, 100 + k as u64)).unwrap();
        let q = random_rotation(p, SeedSpec::new(SEED, 200 + k as u64)).unwrap();
        let (a, b) = (fast(&sample), fast(&q.rotate(&sample).unwrap()));
        assert!((a.0 - b.0).abs() <= 1e-8, "R {a:?} {b:?}");
        assert!((a.1 - b.1).abs() <= 1e-8, "B {a:?} {b:?}");
        assert!((a.2 - b.2).abs() <= 1e-8, "P {a:?} {b:?}");
    }
}

#[test]
fn outcomes_reject_exactly_when_p_value_is_below_level() {
    let sample = sample_uniform_sphere(40, 30, SeedSpec::new(SEED, 3)).unwrap();
    let out = run_all_tests(&sample, 0.05).unwrap();
    assert_eq!(out.len(), 4);
    for o in &out[..3] {
        assert_eq!(o.reject, o.p_value <= o.level, "{o:?}");
        assert!((0.0..=1.0).contains(&o.p_value));
    }
    assert_eq!(out[3].test, TestKind::FisherCombination);
}

fn assert_identical_rows_reject(n: usize, p: usize) {
    let row: Vec<f64> = (0..p).map(|k| (k as f64 + 1.0).sin()).collect();
    let sample = SphericalSample::from_rows_normalized(&vec![row; n]).unwrap();
    let out = run_all_tests(&sample, 0.05).unwrap();
    for o in &out[..3] {
        assert!(o.p_value <= 1e-6, "{o:?}");
    }
    assert!(out.iter().all(|o| o.reject));
}

#[test]
fn identical_rows_reject_everything_at_10_by_10() {
    assert_identical_rows_reject(10, 10);
}

#[test]
fn identical_rows_reject_everything_at_25_by_60() {
    assert_identical_rows_reject(25, 60);
}

fn null_records(n: usize, p: usize) -> Vec<sphereuni::experiments::ReplicationRecord> {
    simulate(2000, SEED, 0.05, |rng| {
        AlternativeModel::Uniform.sample_with_rng(n, p, rng)
    })
    .unwrap()
}

// One-sample KS critical value at 0.01 for 2000 points.
fn ks_critical() -> f64 {
    1.628 / 2000f64.sqrt()
}

#[test]
fn rayleigh_null_is_standard_normal() {
    let r: Vec<f64> = null_records(100, 100).iter().map(|x| x.rayleigh).collect();
    let d = ks_distance(&r, |x| NullLaw::StandardNormal.cdf(x).unwrap());
    assert!(d < ks_critical(), "KS distance {d}");
}

#[test]
fn bingham_null_is_standard_normal() {
    let b: Vec<f64> = null_records(100, 100).iter().map(|x| x.bingham).collect();
    let d = ks_distance(&b, |x| NullLaw::StandardNormal.cdf(x).unwrap());
    assert!(d < ks_critical(), "KS distance {d}");
}

#[test]
fn packing_null_size_at_100_by_200() {
    let plan = ExperimentPlan::new(100, 200, AlternativeModel::Uniform, 0.05, SEED);
    let rate = run_rejection_experiment(&plan)
        .unwrap()
        .rate(TestKind::Packing)
        .unwrap();
    assert!((0.08..=0.15).contains(&rate), "packing size {rate}");
}

#[test]
fn table_one_sizes_at_100_by_100() {
    let plan = ExperimentPlan::new(100, 100, AlternativeModel::Uniform, 0.05, SEED);
    let res = run_rejection_experiment(&plan).unwrap();
    let cells = [
        (TestKind::FisherCombination, 0.045),
        (TestKind::Rayleigh, 0.0495),
        (TestKind::Packing, 0.111),
        (TestKind::Bingham, 0.0485),
    ];
    let misses: Vec<String> = cells
        .iter()
        .map(|&(t, cell)| (t, cell, res.rate(t).unwrap()))
        .filter(|&(_, cell, rate)| (rate - cell).abs() > 0.02)
        .map(|(t, cell, rate)| format!("{t}: {rate} vs {cell}"))
        .collect();
    assert!(misses.is_empty(), "{misses:?}");
}
