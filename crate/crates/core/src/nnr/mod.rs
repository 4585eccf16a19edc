//! Nearest neighbor regression over lag patterns, with optional seasonal
//! lag blocks.
//!
//! A pattern with `p` autoregressive lags, `P` seasonal lags and season `s`
//! holds, newest first, the values at offsets `0..p` and, for every
//! seasonal lag `l = 1..=P`, the block `l·s - 1 ..= l·s + p - 1` (one value
//! more than the non-seasonal block: the value one season before the
//! target). Dimension: `p + P·(p + 1)`.

mod kdtree;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecast::Forecaster;

pub use kdtree::KdTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    Uniform,
    /// Weights `1/d` normalized to sum to one.
    InverseDistance,
    /// Weights `1/d` with the sum divided by `k` instead of the weight sum.
    /// Not a weighted mean; kept only for comparison.
    InverseDistanceLiteral,
}

impl WeightMode {
    pub fn as_str(self) -> &'static str {
        match self {
            WeightMode::Uniform => "uniform",
            WeightMode::InverseDistance => "inverse_distance",
            WeightMode::InverseDistanceLiteral => "inverse_distance_literal",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "uniform" => Some(WeightMode::Uniform),
            "inverse_distance" => Some(WeightMode::InverseDistance),
            "inverse_distance_literal" => Some(WeightMode::InverseDistanceLiteral),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Neighborhood {
    FixedK(usize),
    /// All patterns within this Euclidean distance.
    MaxDistance(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    #[default]
    Exact,
    /// kd-tree search returning neighbors within a factor `1 + APPROX_EPS`
    /// of the true distances.
    Approximate,
}

/// Distance slack of [`SearchMode::Approximate`].
pub const APPROX_EPS: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NnrSpec {
    pub p: usize,
    pub seasonal_p: usize,
    pub season: usize,
    pub weight: WeightMode,
    pub neighborhood: Neighborhood,
    pub search: SearchMode,
}

impl NnrSpec {
    pub fn new(p: usize, weight: WeightMode, neighborhood: Neighborhood) -> Self {
        Self {
            p,
            seasonal_p: 0,
            season: 0,
            weight,
            neighborhood,
            search: SearchMode::Exact,
        }
    }

    pub fn seasonal(mut self, seasonal_p: usize, season: usize) -> Self {
        self.seasonal_p = seasonal_p;
        self.season = season;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::Config("NNR needs at least one autoregressive lag".into()));
        }
        if self.seasonal_p > 0 && self.season < 2 {
            return Err(Error::Config(
                "seasonal lags need a season of at least two steps".into(),
            ));
        }
        match self.neighborhood {
            Neighborhood::FixedK(0) => Err(Error::Config("k must be at least 1".into())),
            Neighborhood::MaxDistance(eps) if !(eps > 0.0) => {
                Err(Error::Config(format!("distance threshold {eps} must be positive")))
            }
            _ => Ok(()),
        }
    }

    pub fn dimension(&self) -> usize {
        self.p + self.seasonal_p * (self.p + 1)
    }

    /// Offsets (steps back from the newest value) of the pattern entries.
    pub fn offsets(&self) -> Vec<usize> {
        let mut offsets: Vec<usize> = (0..self.p).collect();
        for l in 1..=self.seasonal_p {
            let base = l * self.season;
            offsets.extend(base - 1..=base + self.p - 1);
        }
        offsets
    }
}

/// Reference sample: `(pattern, next value)` pairs in flat row-major
/// storage.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSample {
    pub dimension: usize,
    patterns: Vec<f64>,
    pub targets: Vec<f64>,
    /// Index in the training series of each pattern's newest value.
    pub provenance: Vec<usize>,
}

impl ReferenceSample {
    pub fn from_patterns(dimension: usize, patterns: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self> {
        if patterns.is_empty() || patterns.len() != targets.len() {
            return Err(Error::Dimension {
                expected: patterns.len().max(1),
                found: targets.len(),
            });
        }
        let mut flat = Vec::with_capacity(patterns.len() * dimension);
        for p in &patterns {
            if p.len() != dimension {
                return Err(Error::Dimension {
                    expected: dimension,
                    found: p.len(),
                });
            }
            flat.extend_from_slice(p);
        }
        Ok(Self {
            dimension,
            patterns: flat,
            provenance: (0..targets.len()).collect(),
            targets,
        })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn pattern(&self, index: usize) -> &[f64] {
        &self.patterns[index * self.dimension..(index + 1) * self.dimension]
    }
}

/// Builds the reference sample of `training`. A pair is kept only if its
/// pattern and target positions are all unmasked.
pub fn build_reference_sample(training: &[f64], mask: Option<&[bool]>, spec: &NnrSpec) -> Result<ReferenceSample> {
    spec.validate()?;
    if let Some(m) = mask {
        if m.len() != training.len() {
            return Err(Error::Dimension {
                expected: training.len(),
                found: m.len(),
            });
        }
    }
    let offsets = spec.offsets();
    let reach = offsets.iter().copied().max().unwrap_or(0);
    if training.len() <= spec.p + spec.seasonal_p * spec.season + 2 {
        return Err(Error::Range(format!(
            "NNR with p={} P={} s={} needs more than {} training values, got {}",
            spec.p,
            spec.seasonal_p,
            spec.season,
            spec.p + spec.seasonal_p * spec.season + 2,
            training.len()
        )));
    }
    let dimension = offsets.len();
    let mut patterns = Vec::new();
    let mut targets = Vec::new();
    let mut provenance = Vec::new();
    let keep = |i: usize| mask.map_or(true, |m| m[i]);
    for i in reach..training.len() - 1 {
        if !keep(i + 1) || !offsets.iter().all(|&o| keep(i - o)) {
            continue;
        }
        patterns.extend(offsets.iter().map(|&o| training[i - o]));
        targets.push(training[i + 1]);
        provenance.push(i);
    }
    if targets.is_empty() {
        return Err(Error::Range("no unmasked pattern in the training data".into()));
    }
    Ok(ReferenceSample {
        dimension,
        patterns,
        targets,
        provenance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    /// Row in the reference sample.
    pub index: usize,
    pub distance: f64,
}

fn squared_distance_bounded(a: &[f64], b: &[f64], bound: f64) -> f64 {
    // accumulated from the oldest lag to the newest; see
    // `recursive_forecast_fixed_k`
    let mut sum = 0.0;
    for (ca, cb) in a.rchunks(8).zip(b.rchunks(8)) {
        for (x, y) in ca.iter().zip(cb).rev() {
            let d = x - y;
            sum += d * d;
        }
        if sum > bound {
            return sum;
        }
    }
    sum
}

/// Exact k nearest neighbors by linear scan, sorted by distance with ties
/// going to the lower row.
fn exact_knn(sample: &ReferenceSample, query: &[f64], k: usize) -> Vec<Neighbor> {
    let k = k.min(sample.len());
    // (squared distance, row), sorted ascending
    let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
    for row in 0..sample.len() {
        let bound = if best.len() == k { best[k - 1].0 } else { f64::INFINITY };
        let d2 = squared_distance_bounded(sample.pattern(row), query, bound);
        offer(&mut best, k, (d2, row));
    }
    into_neighbors(best)
}

/// Keeps the `k` lexicographically smallest `(squared distance, row)` keys.
fn offer(best: &mut Vec<(f64, usize)>, k: usize, key: (f64, usize)) {
    if best.len() == k && !lex_less(key, best[k - 1]) {
        return;
    }
    let at = best.partition_point(|&e| lex_less(e, key));
    best.insert(at, key);
    best.truncate(k);
}

fn into_neighbors(best: Vec<(f64, usize)>) -> Vec<Neighbor> {
    best.into_iter()
        .map(|(d2, index)| Neighbor {
            index,
            distance: d2.sqrt(),
        })
        .collect()
}

fn lex_less(a: (f64, usize), b: (f64, usize)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

fn exact_within(sample: &ReferenceSample, query: &[f64], eps: f64) -> Vec<Neighbor> {
    // slack on the squared bound; the final test is on the distance itself
    let bound = eps * eps * (1.0 + 1e-9);
    let mut out: Vec<Neighbor> = (0..sample.len())
        .filter_map(|row| {
            let d2 = squared_distance_bounded(sample.pattern(row), query, bound);
            let distance = d2.sqrt();
            (d2 <= bound && distance <= eps).then_some(Neighbor { index: row, distance })
        })
        .collect();
    out.sort_by(|a, b| a.distance.total_cmp(&b.distance).then(a.index.cmp(&b.index)));
    out
}

/// Neighbor set of `query`, sorted by distance then row.
pub fn find_neighbors(sample: &ReferenceSample, query: &[f64], spec: &NnrSpec) -> Result<Vec<Neighbor>> {
    find_neighbors_with(sample, None, query, spec)
}

fn find_neighbors_with(
    sample: &ReferenceSample,
    tree: Option<&KdTree>,
    query: &[f64],
    spec: &NnrSpec,
) -> Result<Vec<Neighbor>> {
    if sample.is_empty() {
        return Err(Error::Range("empty reference sample".into()));
    }
    if query.len() != sample.dimension {
        return Err(Error::Dimension {
            expected: sample.dimension,
            found: query.len(),
        });
    }
    let neighbors = match (spec.neighborhood, tree) {
        (Neighborhood::FixedK(k), None) => exact_knn(sample, query, k),
        (Neighborhood::FixedK(k), Some(tree)) => tree.knn(sample, query, k, APPROX_EPS),
        (Neighborhood::MaxDistance(eps), None) => exact_within(sample, query, eps),
        (Neighborhood::MaxDistance(eps), Some(tree)) => tree.within(sample, query, eps),
    };
    if neighbors.is_empty() {
        if let Neighborhood::MaxDistance(eps) = spec.neighborhood {
            return Err(Error::EmptyNeighborhood(eps));
        }
    }
    Ok(neighbors)
}

/// Combines neighbor targets into a prediction. `neighbors` must be sorted
/// as returned by [`find_neighbors`].
pub fn weighted_prediction(sample: &ReferenceSample, neighbors: &[Neighbor], weight: WeightMode) -> Result<f64> {
    if neighbors.is_empty() {
        return Err(Error::Range("no neighbors to average".into()));
    }
    let target = |n: &Neighbor| sample.targets[n.index];
    match weight {
        WeightMode::Uniform => Ok(neighbors.iter().map(target).sum::<f64>() / neighbors.len() as f64),
        WeightMode::InverseDistance | WeightMode::InverseDistanceLiteral => {
            if let Some(exact) = neighbors.iter().find(|n| n.distance == 0.0) {
                return Ok(target(exact));
            }
            let weighted: f64 = neighbors.iter().map(|n| target(n) / n.distance).sum();
            let denominator = if weight == WeightMode::InverseDistance {
                neighbors.iter().map(|n| 1.0 / n.distance).sum()
            } else {
                neighbors.len() as f64
            };
            Ok(weighted / denominator)
        }
    }
}

pub fn nnr_predict_one(sample: &ReferenceSample, query: &[f64], spec: &NnrSpec) -> Result<f64> {
    let neighbors = find_neighbors(sample, query, spec)?;
    weighted_prediction(sample, &neighbors, spec.weight)
}

/// A reference sample bound to its spec; the "trained" NNR model.
#[derive(Debug, Clone)]
pub struct NnrModel {
    pub spec: NnrSpec,
    pub sample: ReferenceSample,
    offsets: Vec<usize>,
    tree: Option<KdTree>,
}

impl NnrModel {
    pub fn fit(training: &[f64], mask: Option<&[bool]>, spec: &NnrSpec) -> Result<Self> {
        let sample = build_reference_sample(training, mask, spec)?;
        let tree = (spec.search == SearchMode::Approximate).then(|| KdTree::build(&sample));
        Ok(Self {
            spec: *spec,
            offsets: spec.offsets(),
            sample,
            tree,
        })
    }

    pub fn neighbors(&self, query: &[f64]) -> Result<Vec<Neighbor>> {
        find_neighbors_with(&self.sample, self.tree.as_ref(), query, &self.spec)
    }
}

impl Forecaster for NnrModel {
    fn required_lags(&self) -> &[usize] {
        &self.offsets
    }

    fn predict_one(&self, lags: &[f64], _innovations: &[f64]) -> Result<f64> {
        let neighbors = self.neighbors(lags)?;
        weighted_prediction(&self.sample, &neighbors, self.spec.weight)
    }
}

/// Recursive forecasts of `model` for several neighbor counts at once,
/// one path per entry of `ks`. Equal to running
/// [`recursive_forecast`](crate::forecast::recursive_forecast) once per
/// `k`: distances are accumulated from the oldest lag to the newest, so
/// the part contributed by observed lags is a common prefix of every
/// variant's sum and is computed only once per step.
pub fn recursive_forecast_fixed_k(
    model: &NnrModel,
    ks: &[usize],
    history: &[f64],
    horizon: usize,
) -> Result<Vec<Vec<f64>>> {
    if model.tree.is_some() {
        return Err(Error::Config("shared-distance forecasts need exact search".into()));
    }
    if ks.contains(&0) {
        return Err(Error::Config("k must be at least 1".into()));
    }
    let offsets = &model.offsets;
    let reach = offsets.iter().copied().max().unwrap_or(0);
    if history.len() <= reach {
        return Err(Error::Range(format!(
            "model needs {} past values, history has {}",
            reach + 1,
            history.len()
        )));
    }
    let sample = &model.sample;
    let dim = offsets.len();
    let mut paths: Vec<Vec<f64>> = vec![Vec::with_capacity(horizon); ks.len()];
    let mut shared = vec![0.0; sample.len()];
    let mut query = vec![0.0; dim];
    let mut best: Vec<(f64, usize)> = Vec::new();
    for step in 1..=horizon {
        // entries that come from this path's own earlier forecasts
        let from_forecast = |o: usize| step > o + 1;
        let f = offsets.iter().take_while(|&&o| from_forecast(o)).count();
        let prefix = offsets[f..].iter().all(|&o| !from_forecast(o));
        let first_private = if prefix { f } else { dim };
        for i in first_private..dim {
            query[i] = history[history.len() - 1 - (offsets[i] + 1 - step)];
        }
        for (row, acc) in shared.iter_mut().enumerate() {
            let pattern = sample.pattern(row);
            let mut sum = 0.0;
            for i in (first_private..dim).rev() {
                let d = pattern[i] - query[i];
                sum += d * d;
            }
            *acc = sum;
        }
        for (path, &k) in paths.iter_mut().zip(ks) {
            for i in 0..first_private {
                let o = offsets[i];
                query[i] = if from_forecast(o) {
                    path[step - o - 2]
                } else {
                    history[history.len() - 1 - (o + 1 - step)]
                };
            }
            let k = k.min(sample.len());
            best.clear();
            for row in 0..sample.len() {
                let mut d2 = shared[row];
                if best.len() == k && d2 > best[k - 1].0 {
                    continue;
                }
                let pattern = sample.pattern(row);
                for i in (0..first_private).rev() {
                    let d = pattern[i] - query[i];
                    d2 += d * d;
                }
                offer(&mut best, k, (d2, row));
            }
            let neighbors = into_neighbors(std::mem::take(&mut best));
            path.push(weighted_prediction(sample, &neighbors, model.spec.weight)?);
        }
    }
    Ok(paths)
}
