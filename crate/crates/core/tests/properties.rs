mod common;

use chrono::{TimeZone, Utc};
use irrcast::arima::{difference, integrate};
use irrcast::data::{self, SeriesKind, TimeSeries};
use irrcast::evaluation::{boxplot_stats, rmse_per_step, ForecastMatrix};
use irrcast::nnr::{find_neighbors, nnr_predict_one, Neighborhood, NnrSpec, ReferenceSample, WeightMode};
use irrcast::solar::GeoLocation;
use proptest::prelude::*;

fn sample_strategy() -> impl Strategy<Value = (ReferenceSample, Vec<f64>, usize)> {
    (1usize..=11, 1usize..=500).prop_flat_map(|(dim, n)| {
        (
            prop::collection::vec(prop::collection::vec(-1.0f64..1.0, dim), n),
            prop::collection::vec(-1.0f64..1.0, n),
            prop::collection::vec(-1.0f64..1.0, dim),
            1usize..=20,
        )
            .prop_map(move |(patterns, targets, query, k)| {
                (
                    ReferenceSample::from_patterns(dim, patterns, targets).unwrap(),
                    query,
                    k,
                )
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn knn_matches_brute_force((sample, query, k) in sample_strategy()) {
        for weight in [WeightMode::Uniform, WeightMode::InverseDistance] {
            let spec = NnrSpec::new(1, weight, Neighborhood::FixedK(k));
            let found = find_neighbors(&sample, &query, &spec).unwrap();
            let oracle = common::brute_knn(&sample, &query, k);
            let mut a: Vec<usize> = found.iter().map(|n| n.index).collect();
            let mut b: Vec<usize> = oracle.iter().map(|n| n.0).collect();
            a.sort_unstable();
            b.sort_unstable();
            prop_assert_eq!(a, b);
            let expected = match weight {
                WeightMode::Uniform => common::brute_uniform_prediction(&sample, &oracle),
                _ => common::brute_inverse_prediction(&sample, &oracle),
            };
            let predicted = nnr_predict_one(&sample, &query, &spec).unwrap();
            prop_assert!((predicted - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn boxplot_matches_order_statistics(values in prop::collection::vec(-1e3f64..1e3, 1..2000)) {
        let b = boxplot_stats(&values).unwrap();
        let o = common::oracle_box(&values);
        for (x, y) in [(b.min, o.min), (b.q1, o.q1), (b.median, o.median), (b.q3, o.q3),
                       (b.lower_whisker, o.lower_whisker), (b.upper_whisker, o.upper_whisker)] {
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + y.abs()));
        }
        prop_assert_eq!(b.outlier_count, o.outliers.len());
        prop_assert!(b.lower_whisker <= b.q1 && b.q1 <= b.median && b.median <= b.q3 && b.q3 <= b.upper_whisker);
        prop_assert!(b.min == b.lower_whisker || b.outliers.first() == Some(&b.min));
    }

    #[test]
    fn rmse_ignores_order_and_masked_pairs(
        rows in prop::collection::vec((prop::collection::vec(-5.0f64..5.0, 4), prop::collection::vec(-5.0f64..5.0, 4)), 1..40),
        junk in prop::collection::vec((-1e6f64..1e6, -1e6f64..1e6), 1..10),
        rotate in 0usize..40,
    ) {
        let build = |rows: &[(Vec<f64>, Vec<f64>)]| {
            let mut m = ForecastMatrix::new(4);
            for (i, (f, a)) in rows.iter().enumerate() {
                m.push(i, f, a, &[false; 4]).unwrap();
            }
            m
        };
        let base = rmse_per_step(&build(&rows));
        let mut shuffled = rows.clone();
        let len = shuffled.len();
        shuffled.rotate_left(rotate % len);
        shuffled.reverse();
        let permuted = rmse_per_step(&build(&shuffled));
        for (a, b) in base.iter().zip(&permuted) {
            prop_assert!((a.unwrap() - b.unwrap()).abs() <= 1e-12 * (1.0 + a.unwrap()));
        }
        let mut with_junk = build(&rows);
        for (i, (f, a)) in junk.iter().enumerate() {
            with_junk.push(1000 + i, &[*f; 4], &[*a; 4], &[true; 4]).unwrap();
        }
        prop_assert_eq!(rmse_per_step(&with_junk), base.clone());
        prop_assert!(base.iter().all(|v| v.unwrap() >= 0.0));
    }

    #[test]
    fn resampling_preserves_block_means(values in prop::collection::vec(0.0f64..1200.0, 15..600)) {
        let loc = GeoLocation::new(10.0, 20.0, 0.0, 0).unwrap();
        let start = Utc.with_ymd_and_hms(2022, 5, 3, 0, 0, 0).unwrap();
        let series = TimeSeries::new(start, 60, values.clone(), loc, SeriesKind::Irradiance).unwrap();
        let out = data::resample_15min(&series).unwrap().series;
        prop_assert_eq!(out.len(), values.len() / 15);
        for (b, v) in out.values.iter().enumerate() {
            let block: f64 = values[b * 15..(b + 1) * 15].iter().sum();
            prop_assert!((v * 15.0 - block).abs() < 1e-9);
        }
    }
}

#[test]
fn integrate_inverts_difference() {
    let mut worst = 0.0_f64;
    for seed in 0..100u64 {
        let x = common::unit_series(seed);
        for d in 0..=2 {
            for sd in 0..=1 {
                let w = difference(&x, d, sd, 96).unwrap();
                let loss = d + sd * 96;
                let back = integrate(&w, &x[..loss], d, sd, 96).unwrap();
                for (a, b) in back.iter().zip(&x[loss..]) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
    }
    assert!(worst < 1e-12, "max round-trip error {worst}");
}
