//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use chrono::{DateTime, Utc};
use irrcast::nnr::ReferenceSample;
use irrcast::solar::GeoLocation;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub struct ZenithCase {
    pub location: GeoLocation,
    pub timestamp: DateTime<Utc>,
    pub zenith: f64,
}

/// Reference zenith angles computed with an external implementation of
/// the NREL solar position algorithm.
pub fn zenith_fixture() -> Vec<ZenithCase> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/spa_zenith_reference.csv");
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .expect("fixture present");
    reader
        .records()
        .map(|r| {
            let r = r.expect("fixture row");
            let num = |i: usize| r[i].parse::<f64>().expect("number");
            ZenithCase {
                location: GeoLocation::new(num(0), num(1), num(2), 0).expect("location"),
                timestamp: r[3].parse().expect("timestamp"),
                zenith: num(4),
            }
        })
        .collect()
}

/// Brute-force k nearest neighbors: every distance, full sort by
/// (distance, row).
pub fn brute_knn(sample: &ReferenceSample, query: &[f64], k: usize) -> Vec<(usize, f64)> {
    let mut all: Vec<(usize, f64)> = (0..sample.len())
        .map(|r| {
            let d = sample
                .pattern(r)
                .iter()
                .zip(query)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            (r, d)
        })
        .collect();
    all.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
    all.truncate(k);
    all
}

pub fn brute_uniform_prediction(sample: &ReferenceSample, neighbors: &[(usize, f64)]) -> f64 {
    neighbors.iter().map(|(r, _)| sample.targets[*r]).sum::<f64>() / neighbors.len() as f64
}

pub fn brute_inverse_prediction(sample: &ReferenceSample, neighbors: &[(usize, f64)]) -> f64 {
    if let Some((r, _)) = neighbors.iter().find(|(_, d)| *d == 0.0) {
        return sample.targets[*r];
    }
    let num: f64 = neighbors.iter().map(|(r, d)| sample.targets[*r] / d).sum();
    let den: f64 = neighbors.iter().map(|(_, d)| 1.0 / d).sum();
    num / den
}

/// Order-statistics box plot: 1-based ranks `h = (n-1)p + 1`.
pub struct OracleBox {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub lower_whisker: f64,
    pub upper_whisker: f64,
    pub outliers: Vec<f64>,
}

pub fn oracle_box(values: &[f64]) -> OracleBox {
    let mut x = values.to_vec();
    x.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = x.len();
    let order = |i: usize| x[i - 1];
    let q = |p: f64| {
        let h = (n as f64 - 1.0) * p + 1.0;
        let lo = h.floor() as usize;
        if lo >= n {
            order(n)
        } else {
            order(lo) + (h - lo as f64) * (order(lo + 1) - order(lo))
        }
    };
    let (q1, median, q3) = (q(0.25), q(0.5), q(0.75));
    let iqr = q3 - q1;
    let inside: Vec<f64> = x
        .iter()
        .copied()
        .filter(|v| *v >= q1 - 1.5 * iqr && *v <= q3 + 1.5 * iqr)
        .collect();
    let lower_whisker = inside.first().map_or(q1, |v| v.min(q1));
    let upper_whisker = inside.last().map_or(q3, |v| v.max(q3));
    let outliers = x
        .iter()
        .copied()
        .filter(|v| *v < lower_whisker || *v > upper_whisker)
        .collect();
    OracleBox {
        min: x[0],
        q1,
        median,
        q3,
        lower_whisker,
        upper_whisker,
        outliers,
    }
}

pub fn gaussian_noise(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// `x_t = phi x_{t-1} + e_t` after a burn-in.
pub fn simulate_ar1(phi: f64, n: usize, seed: u64) -> Vec<f64> {
    let e = gaussian_noise(seed, n + 500);
    let mut x = Vec::with_capacity(e.len());
    let mut prev = 0.0;
    for v in e {
        prev = phi * prev + v;
        x.push(prev);
    }
    x.split_off(500)
}

/// `x_t = e_t - theta e_{t-1}`.
pub fn simulate_ma1(theta: f64, n: usize, seed: u64) -> Vec<f64> {
    let e = gaussian_noise(seed, n + 1);
    e.windows(2).map(|w| w[1] - theta * w[0]).collect()
}

/// Four days of 15-min values drawn uniformly from `[0, 1)`.
pub fn unit_series(seed: u64) -> Vec<f64> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..4 * 96).map(|_| rng.random::<f64>()).collect()
}
