use std::collections::BTreeSet;

use proptest::prelude::*;

use crowdelo::dataset::{ComparisonDataset, Provenance};
use crowdelo::elo::{
    apply_match_sequence, expected_score, rankings, replay_epochs, update_pair, EloConfig,
    LogisticBase, MatchRecord,
};
use crowdelo::scaling::{
    collapse_score, estimate_budget, restrict_to_items, ScalingLaw, ScalingTrajectory,
    TrajectoryPoint,
};
use crowdelo::spam::{leave_one_out_ratings, outcome_correlation};
use crowdelo::stats;

fn config() -> impl Strategy<Value = EloConfig> {
    (
        1.0..100.0f64,
        prop_oneof![Just(LogisticBase::Natural), Just(LogisticBase::Ten)],
        50.0..800.0f64,
        -2000.0..2000.0f64,
    )
        .prop_map(|(k, base, denom, default)| EloConfig {
            k_factor: k,
            logistic_base: base,
            scale_denominator: denom,
            default_rating: default,
            ..EloConfig::simulation()
        })
}

fn score() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), Just(0.5), Just(1.0)]
}

fn records(n_items: usize, max_len: usize) -> impl Strategy<Value = Vec<MatchRecord>> {
    prop::collection::vec((0..n_items, 1..n_items, score(), 0..4usize), 0..max_len).prop_map(
        move |rows| {
            rows.into_iter()
                .map(|(a, off, s, r)| {
                    let b = (a + off) % n_items;
                    MatchRecord::new(format!("i{a}"), format!("i{b}"), s)
                        .with_rater(format!("r{r}"))
                })
                .collect()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn expected_scores_are_complementary(a in -3000.0..3000.0f64, b in -3000.0..3000.0f64, cfg in config()) {
        let sum = expected_score(a, b, &cfg) + expected_score(b, a, &cfg);
        prop_assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expected_score_ignores_common_shifts(a in -1000.0..1000.0f64, b in -1000.0..1000.0f64, c in -1000.0..1000.0f64, cfg in config()) {
        let d = expected_score(a, b, &cfg) - expected_score(a + c, b + c, &cfg);
        prop_assert!(d.abs() < 1e-12);
    }

    #[test]
    fn expected_score_is_monotone(a in -1000.0..1000.0f64, b in -1000.0..1000.0f64, up in 0.0..500.0f64, cfg in config()) {
        prop_assert!(expected_score(a + up, b, &cfg) >= expected_score(a, b, &cfg));
    }

    #[test]
    fn expected_score_in_unit_interval(a in -1e5..1e5f64, b in -1e5..1e5f64, cfg in config()) {
        let e = expected_score(a, b, &cfg);
        prop_assert!((0.0..=1.0).contains(&e));
    }

    #[test]
    fn draw_between_equals_is_a_fixed_point(a in -1e4..1e4f64, cfg in config()) {
        prop_assert_eq!(expected_score(a, a, &cfg), 0.5);
        prop_assert_eq!(update_pair(a, a, 0.5, &cfg).unwrap(), (a, a));
    }

    #[test]
    fn update_conserves_sum(a in -1000.0..1000.0f64, b in -1000.0..1000.0f64, s in score(), cfg in config()) {
        let (na, nb) = update_pair(a, b, s, &cfg).unwrap();
        prop_assert!(((na + nb) - (a + b)).abs() < 1e-9);
        // The winner never loses rating.
        if s == 1.0 { prop_assert!(na >= a); }
        if s == 0.0 { prop_assert!(na <= a); }
    }

    #[test]
    fn replay_is_zero_sum(recs in records(12, 200), cfg in config(), seed in any::<u64>()) {
        let table = replay_epochs(&recs, &cfg, seed).unwrap();
        prop_assert!(table.zero_sum_residual().abs() < 1e-6);
    }

    #[test]
    fn replay_is_deterministic(recs in records(8, 60), seed in any::<u64>()) {
        let cfg = EloConfig::simulation();
        prop_assert_eq!(replay_epochs(&recs, &cfg, seed).unwrap(), replay_epochs(&recs, &cfg, seed).unwrap());
    }

    #[test]
    fn rankings_are_a_permutation(recs in records(10, 80)) {
        let table = apply_match_sequence(&recs, &EloConfig::chess()).unwrap();
        let ranks: BTreeSet<usize> = rankings(&table).into_values().collect();
        prop_assert_eq!(ranks, (0..table.len()).collect::<BTreeSet<_>>());
    }

    #[test]
    fn restrict_is_idempotent_and_monotone(recs in records(8, 60), mask in any::<u8>(), sub in any::<u8>()) {
        let d = ComparisonDataset::new(recs, Provenance::Ingested).unwrap();
        let items: Vec<&String> = d.items().iter().collect();
        let pick = |m: u8| -> Vec<String> {
            items.iter().enumerate().filter(|(i, _)| m >> (i % 8) & 1 == 1).map(|(_, s)| (*s).clone()).collect()
        };
        let big = pick(mask);
        let small = pick(mask & sub);
        let once = restrict_to_items(&d, &big).unwrap();
        let twice = restrict_to_items(&once, &big).unwrap();
        prop_assert_eq!(&once, &twice);
        let smaller = restrict_to_items(&d, &small).unwrap();
        for r in smaller.records() {
            prop_assert!(once.records().contains(r));
        }
        prop_assert!(smaller.len() <= once.len());
    }

    #[test]
    fn correlation_is_bounded(recs in records(6, 80)) {
        let d = ComparisonDataset::new(recs, Provenance::Ingested).unwrap();
        let cfg = EloConfig::simulation();
        for rater in d.raters() {
            if let Ok(Some(c)) = outcome_correlation(&d, rater, &cfg) {
                prop_assert!((-1.0..=1.0).contains(&c));
            }
        }
    }

    #[test]
    fn leave_one_out_drops_exactly_that_rater(recs in records(6, 40)) {
        let d = ComparisonDataset::new(recs, Provenance::Ingested).unwrap();
        let cfg = EloConfig::chess();
        for rater in d.raters() {
            let rest: Vec<MatchRecord> = d.records().iter()
                .filter(|r| r.rater_id.as_deref() != Some(rater)).cloned().collect();
            let mut expected = apply_match_sequence(&rest, &cfg).unwrap();
            for item in d.items() {
                expected.ensure(item);
            }
            let got = leave_one_out_ratings(&d, rater, &cfg);
            prop_assert_eq!(got.ratings(), expected.ratings());
        }
    }

    #[test]
    fn budget_is_monotone(steps in prop::collection::vec(0.0..0.2f64, 2..12), pilot_n in 5usize..200, f1a in 0.0..1.0f64, f1b in 0.0..1.0f64) {
        let mut f1 = 0.0;
        let points: Vec<TrajectoryPoint> = steps.iter().enumerate().map(|(i, s)| {
            f1 = (f1 + s).min(1.0);
            TrajectoryPoint { n_comparisons: 10 * (i + 1), mean_f1: f1, sem: 0.0, n_replicates: 1 }
        }).collect();
        let pilot = ScalingTrajectory { system_size: pilot_n, points };
        let (lo, hi) = if f1a <= f1b { (f1a, f1b) } else { (f1b, f1a) };
        if let Ok(b_hi) = estimate_budget(&pilot, pilot_n, hi, 500) {
            let b_lo = estimate_budget(&pilot, pilot_n, lo, 500).unwrap();
            prop_assert!(b_lo <= b_hi);
        }
        if let Ok(first) = estimate_budget(&pilot, pilot_n, lo, 50) {
            let mut last = first;
            for target in [100, 500, 1000, 5000] {
                let b = estimate_budget(&pilot, pilot_n, lo, target).unwrap();
                prop_assert!(b >= last);
                last = b;
            }
        }
    }

    #[test]
    fn collapse_gap_is_nonnegative(ys in prop::collection::vec(0.0..1.0f64, 3), zs in prop::collection::vec(0.0..1.0f64, 3)) {
        let t = |n: usize, v: &[f64]| ScalingTrajectory {
            system_size: n,
            points: v.iter().enumerate().map(|(i, &y)| TrajectoryPoint {
                n_comparisons: (i + 1) * n, mean_f1: y, sem: 0.0, n_replicates: 1,
            }).collect(),
        };
        let report = collapse_score(&[t(10, &ys), t(20, &zs)], ScalingLaw::Linear).unwrap();
        prop_assert!(report.gap >= 0.0);
    }
}

#[test]
fn zero_sum_over_ten_thousand_updates() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let cfg = EloConfig::chess();
    let n = 50;
    let mut ratings = vec![cfg.default_rating; n];
    for _ in 0..10_000 {
        let a = rng.random_range(0..n);
        let b = (a + rng.random_range(1..n)) % n;
        let s = [0.0, 0.5, 1.0][rng.random_range(0..3)];
        let (na, nb) = update_pair(ratings[a], ratings[b], s, &cfg).unwrap();
        ratings[a] = na;
        ratings[b] = nb;
    }
    let total: f64 = ratings.iter().sum();
    assert!((total - n as f64 * cfg.default_rating).abs() < 1e-6);
    assert!(stats::sample_std(&ratings).unwrap() > 0.0);
}
