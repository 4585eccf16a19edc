//! Acceptance suite: one pass/fail line per criterion.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use irrcast::arima::{self, difference, integrate, ArimaCoefficients, ArimaModel, ArimaSpec, FitOptions};
use irrcast::data::{self, CsvSchema};
use irrcast::evaluation::{boxplot_stats, rmse_per_step, ForecastMatrix};
use irrcast::forecast::{assemble_lag_vector, persistence_predict, recursive_forecast, Forecaster};
use irrcast::nnr::{find_neighbors, nnr_predict_one, Neighborhood, NnrSpec, ReferenceSample, WeightMode};
use irrcast::search::{
    enumerate_full_grid, enumerate_reduced_grid, model_structures, reference_point, run_search, summarize,
    write_results, write_summary, Dataset, EvaluationRecord, GroupBy, Method, SearchConfig, Status,
};
use irrcast::solar::{self, GeoLocation, SOLAR_CONSTANT};
use irrcast::synth::{self, CloudModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit_secs: u64) -> bool {
    elapsed < Duration::from_secs(limit_secs)
}

fn grid_counts() -> Outcome {
    let t = Instant::now();
    let counts: Vec<usize> = [Method::Arima, Method::Nnr, Method::Sarima, Method::Snnr]
        .iter()
        .map(|m| model_structures(*m).len())
        .collect();
    let full = enumerate_full_grid().len();
    let reduced = enumerate_reduced_grid().len();
    let elapsed = t.elapsed();
    let pass = counts == [363, 1000, 576, 3850] && reduced == 847 && within(elapsed, 1);
    outcome(
        pass,
        format!(
            "arima {} nnr {} sarima {} snnr {}, full grid {full}, reduced grid {reduced}, {elapsed:.2?}",
            counts[0], counts[1], counts[2], counts[3]
        ),
    )
}

fn knn_oracle() -> Outcome {
    let t = Instant::now();
    let mut mismatches = 0;
    let mut worst = 0.0_f64;
    for instance in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + instance);
        let n = rng.random_range(1..=500);
        let dim = rng.random_range(1..=11);
        let k = rng.random_range(1..=20);
        let mut uniform = || rng.random_range(-1.0..1.0);
        let patterns: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| uniform()).collect()).collect();
        let targets: Vec<f64> = (0..n).map(|_| uniform()).collect();
        let query: Vec<f64> = (0..dim).map(|_| uniform()).collect();
        let sample = ReferenceSample::from_patterns(dim, patterns, targets).expect("sample");
        let oracle = common::brute_knn(&sample, &query, k);
        for weight in [WeightMode::Uniform, WeightMode::InverseDistance] {
            let spec = NnrSpec::new(1, weight, Neighborhood::FixedK(k));
            let mut found: Vec<usize> = find_neighbors(&sample, &query, &spec)
                .expect("neighbors")
                .iter()
                .map(|n| n.index)
                .collect();
            let mut expected: Vec<usize> = oracle.iter().map(|n| n.0).collect();
            found.sort_unstable();
            expected.sort_unstable();
            if found != expected {
                mismatches += 1;
            }
            let reference = match weight {
                WeightMode::Uniform => common::brute_uniform_prediction(&sample, &oracle),
                _ => common::brute_inverse_prediction(&sample, &oracle),
            };
            let predicted = nnr_predict_one(&sample, &query, &spec).expect("prediction");
            worst = worst.max((predicted - reference).abs());
        }
    }
    let elapsed = t.elapsed();
    outcome(
        mismatches == 0 && worst < 1e-9 && within(elapsed, 30),
        format!("200 instances, {mismatches} set mismatches, max prediction error {worst:.1e}, {elapsed:.2?}"),
    )
}

fn arima_recovery() -> Outcome {
    let t = Instant::now();
    let options = FitOptions::default();
    let ar = common::simulate_ar1(0.7, 10_000, 1);
    let phi = arima::fit_arima(&ar, None, &ArimaSpec::arima(1, 0, 0), &options)
        .map(|m| m.coefficients.phi[0])
        .unwrap_or(f64::NAN);
    let ma = common::simulate_ma1(0.5, 10_000, 2);
    let theta = arima::fit_arima(&ma, None, &ArimaSpec::arima(0, 0, 1), &options)
        .map(|m| m.coefficients.theta[0])
        .unwrap_or(f64::NAN);
    let walk: Vec<f64> = common::gaussian_noise(3, 500)
        .iter()
        .scan(0.0, |s, e| {
            *s += e;
            Some(*s)
        })
        .collect();
    let persistence_equal = arima::fit_arima(&walk, None, &ArimaSpec::arima(0, 1, 0).without_constant(), &options)
        .and_then(|m| recursive_forecast(&m, &walk, &m.innovations(&walk), 12))
        .map(|path| {
            let last = persistence_predict(&walk).expect("history");
            path.values.len() == 12 && path.values.iter().all(|v| *v == last)
        })
        .unwrap_or(false);
    let elapsed = t.elapsed();
    let pass = (phi - 0.7).abs() < 0.05 && (theta - 0.5).abs() < 0.05 && persistence_equal && within(elapsed, 60);
    outcome(
        pass,
        format!("phi {phi:.4}, theta {theta:.4}, random walk equals persistence: {persistence_equal}, {elapsed:.2?}"),
    )
}

fn differencing_round_trip() -> Outcome {
    let mut worst = 0.0_f64;
    let mut failed = false;
    for seed in 0..100u64 {
        let x = common::unit_series(seed);
        for d in 0..=2 {
            for seasonal_d in 0..=1 {
                let loss = d + seasonal_d * 96;
                let back = difference(&x, d, seasonal_d, 96).and_then(|w| integrate(&w, &x[..loss], d, seasonal_d, 96));
                match back {
                    Ok(back) if back.len() == x.len() - loss => {
                        for (a, b) in back.iter().zip(&x[loss..]) {
                            worst = worst.max((a - b).abs());
                        }
                    }
                    _ => failed = true,
                }
            }
        }
    }
    outcome(
        !failed && worst < 1e-12,
        format!("100 series x 6 orders, max error {worst:.1e}"),
    )
}

fn rmse_and_boxes() -> Outcome {
    let mut matrix = ForecastMatrix::new(2);
    matrix.push(0, &[3.0, 1.0], &[0.0, 0.0], &[false, false]).expect("row");
    matrix.push(1, &[0.0, 2.0], &[4.0, 0.0], &[false, true]).expect("row");
    let rmse = rmse_per_step(&matrix);
    let crafted = (rmse[0].unwrap_or(f64::NAN) - 12.5_f64.sqrt()).abs() < 1e-12
        && (rmse[1].unwrap_or(f64::NAN) - 1.0).abs() < 1e-12;

    let mut third = ForecastMatrix::new(3);
    let rows = [
        ([1.0, 2.0, 3.0], [2.0, 2.0, 1.0]),
        ([0.5, -1.0, 4.0], [0.0, 1.0, 1.0]),
        ([2.0, 2.0, 2.0], [2.0, 0.0, -2.0]),
    ];
    for (i, (f, a)) in rows.iter().enumerate() {
        third.push(i, f, a, &[false; 3]).expect("row");
    }
    let hand = [
        (1.0 + 0.25 + 0.0) / 3.0,
        (0.0 + 4.0 + 4.0) / 3.0,
        (4.0 + 9.0 + 16.0) / 3.0,
    ]
    .map(f64::sqrt);
    let by_hand = rmse_per_step(&third)
        .iter()
        .zip(hand)
        .all(|(r, h)| r.is_some_and(|r| (r - h).abs() < 1e-12));

    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let lognormal = LogNormal::new(3.5, 0.6).expect("distribution");
    let values: Vec<f64> = (0..10_000).map(|_| lognormal.sample(&mut rng)).collect();
    let boxes = boxplot_stats(&values).expect("box");
    let oracle = common::oracle_box(&values);
    let box_error = [
        (boxes.min, oracle.min),
        (boxes.q1, oracle.q1),
        (boxes.median, oracle.median),
        (boxes.q3, oracle.q3),
        (boxes.lower_whisker, oracle.lower_whisker),
        (boxes.upper_whisker, oracle.upper_whisker),
    ]
    .iter()
    .map(|(a, b)| (a - b).abs())
    .fold(0.0, f64::max);
    let box_match = box_error < 1e-12 && boxes.outlier_count == oracle.outliers.len();

    let mut minimum_kept = true;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(10..3000);
        let values: Vec<f64> = (0..n).map(|_| 100.0 - lognormal.sample(&mut rng)).collect();
        let b = boxplot_stats(&values).expect("box");
        minimum_kept &= b.lower_whisker == b.min || b.outliers.first() == Some(&b.min);
    }

    outcome(
        crafted && by_hand && box_match && minimum_kept,
        format!(
            "crafted {crafted}, hand matrix {by_hand}, box error {box_error:.1e} with {} outliers, minimum kept {minimum_kept}",
            boxes.outlier_count
        ),
    )
}

fn solar_geometry() -> Outcome {
    let cases = common::zenith_fixture();
    let worst = cases
        .iter()
        .map(|c| solar::solar_zenith(&c.location, c.timestamp).map_or(f64::INFINITY, |z| (z - c.zenith).abs()))
        .fold(0.0, f64::max);
    let anchor = solar::extraterrestrial_from_zenith(0.0, 1.0);
    let dark = (0..=9000).all(|i| {
        let z = 90.0 + i as f64 * 0.01;
        [0.967, 1.0, 1.035]
            .iter()
            .all(|e| solar::extraterrestrial_from_zenith(z, *e) == 0.0)
    });
    outcome(
        cases.len() >= 1000 && worst <= 0.2 && anchor == SOLAR_CONSTANT && dark,
        format!(
            "{} reference positions, max zenith deviation {worst:.4} deg, I_e at zenith {anchor}, dark beyond horizon {dark}",
            cases.len()
        ),
    )
}

fn recursive_engine() -> Outcome {
    let history = [10.0, 20.0, 30.0];
    let forecasts: Vec<f64> = (1..=11).map(|j| 100.0 + j as f64).collect();
    let lags = assemble_lag_vector(&[0, 1, 2], &history, &forecasts, 12).unwrap_or_default();
    let literal = lags == [forecasts[10], forecasts[9], forecasts[8]];

    let phi = [0.5, -0.3, 0.2];
    let mut x = vec![1.0, -0.5, 0.25];
    for t in 3..200 {
        let v = phi[0] * x[t - 1] + phi[1] * x[t - 2] + phi[2] * x[t - 3];
        x.push(v);
    }
    let coefs = ArimaCoefficients {
        constant: 0.0,
        phi: phi.to_vec(),
        theta: vec![],
        seasonal_phi: vec![],
        seasonal_theta: vec![],
    };
    let mut worst = f64::INFINITY;
    if let Ok(model) = ArimaModel::from_coefficients(ArimaSpec::arima(3, 0, 0), coefs) {
        worst = 0.0;
        for origin in 2..180 {
            match recursive_forecast(&model, &x[..=origin], &[], 12) {
                Ok(path) => {
                    for (j, v) in path.values.iter().enumerate() {
                        worst = worst.max((v - x[origin + 1 + j]).abs());
                    }
                }
                Err(_) => worst = f64::INFINITY,
            }
        }
    }
    outcome(
        literal && worst < 1e-9,
        format!("step-12 lag vector {lags:?}, AR(3) max 12-step error {worst:.1e}"),
    )
}

struct Sweep {
    results: Vec<u8>,
    summary: Vec<u8>,
    records: Vec<EvaluationRecord>,
    elapsed: Duration,
}

fn acceptance_dataset() -> Result<Dataset, String> {
    let golden = GeoLocation::new(39.74, -105.18, 1829.0, -7 * 60).map_err(|e| e.to_string())?;
    let first_day = NaiveDate::from_ymd_opt(2021, 10, 1).ok_or("date")?;
    let generated = synth::generate(golden, first_day, 67, 1, &CloudModel::default()).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("synthetic.csv");
    let file = std::fs::File::create(&path).map_err(|e| e.to_string())?;
    data::write_csv(&generated.series, file).map_err(|e| e.to_string())?;
    let ingested = data::ingest_csv(&path, &CsvSchema::default(), golden).map_err(|e| e.to_string())?;
    let resampled = data::resample_15min(&ingested).map_err(|e| e.to_string())?;
    Ok(Dataset {
        id: "synthetic".into(),
        series: resampled.series,
    })
}

fn sweep(dataset: &Dataset, workers: usize) -> Result<Sweep, String> {
    let mut grid = enumerate_reduced_grid();
    grid.push(reference_point());
    let config = SearchConfig {
        workers,
        ..SearchConfig::default()
    };
    let t = Instant::now();
    let records = run_search(std::slice::from_ref(dataset), &grid, &config, &|_, _| {}).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    let mut results = Vec::new();
    write_results(&records, &mut results).map_err(|e| e.to_string())?;
    let summary = summarize(&records, &[GroupBy::Method, GroupBy::Lags]).map_err(|e| e.to_string())?;
    let mut summary_bytes = Vec::new();
    write_summary(&summary.rows, &mut summary_bytes).map_err(|e| e.to_string())?;
    Ok(Sweep {
        results,
        summary: summary_bytes,
        records,
        elapsed,
    })
}

fn synthetic_reproduction(sweep: &Sweep) -> Outcome {
    let reference = sweep.records.iter().find(|r| r.point.method == Method::Persistence);
    let models: Vec<&EvaluationRecord> = sweep
        .records
        .iter()
        .filter(|r| r.point.method == Method::Snnr && r.status == Status::Ok)
        .collect();
    let step = |r: &EvaluationRecord, j: usize| r.rmse[j - 1].unwrap_or(f64::INFINITY);
    let best = |j: usize| models.iter().map(|r| step(r, j)).fold(f64::INFINITY, f64::min);
    let Some(reference) = reference else {
        return outcome(false, "reference record missing");
    };
    let (ref1, ref12) = (step(reference, 1), step(reference, 12));
    let (best1, best12) = (best(1), best(12));
    let pass =
        models.len() == 847 && best12 < ref12 && (ref1 - best1).abs() <= 0.05 * best1 && within(sweep.elapsed, 600);
    outcome(
        pass,
        format!(
            "{} ok points, RMSE_1 reference {ref1:.2} best {best1:.2} ({:+.1}%), RMSE_12 reference {ref12:.2} best {best12:.2}, sweep {:.1?}",
            models.len(),
            100.0 * (ref1 - best1) / best1,
            sweep.elapsed
        ),
    )
}

fn main() -> ExitCode {
    let mut outcomes: Vec<(usize, Outcome)> = vec![
        (1, grid_counts()),
        (2, knn_oracle()),
        (3, arima_recovery()),
        (4, differencing_round_trip()),
        (5, rmse_and_boxes()),
        (6, solar_geometry()),
        (7, recursive_engine()),
    ];
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).clamp(1, 4);
    let other = if workers == 1 { 3 } else { 1 };
    match acceptance_dataset().and_then(|ds| Ok((sweep(&ds, workers)?, sweep(&ds, other)?))) {
        Ok((first, second)) => {
            outcomes.push((8, synthetic_reproduction(&first)));
            let identical = first.results == second.results && first.summary == second.summary;
            outcomes.push((
                9,
                outcome(
                    identical,
                    format!(
                        "workers {workers} and {other}: results {} bytes, summary {} bytes, identical {identical}",
                        first.results.len(),
                        first.summary.len()
                    ),
                ),
            ));
        }
        Err(e) => {
            outcomes.push((8, outcome(false, format!("sweep failed: {e}"))));
            outcomes.push((9, outcome(false, "not run")));
        }
    }
    let mut all = true;
    for (n, o) in &outcomes {
        all &= o.pass;
        println!("criterion {n}: {} {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
