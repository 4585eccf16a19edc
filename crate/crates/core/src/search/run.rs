use std::collections::hash_map::{Entry, HashMap};
use std::ops::Range;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use chrono::{DateTime, Utc};

use crate::arima::{self, FitOptions};
use crate::data::{self, NightPolicy, SeriesKind, SolarTrack, SplitSpec, TimeSeries};
use crate::error::{Error, Result};
use crate::evaluation::{self, ForecastMatrix};
use crate::forecast::{self, Forecaster, Persistence, DEFAULT_HORIZON};
use crate::nnr::{self, Neighborhood, NnrModel, NnrSpec, SearchMode, WeightMode};
use crate::solar;

use super::grid::{DataSpec, HyperparameterPoint, Method, ModelSpec, Preprocessing};

pub const DEFAULT_TEST_DAYS: usize = 7;

/// A 15-minute irradiance series to sweep over.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub id: String,
    pub series: TimeSeries,
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub horizon: usize,
    pub test_days: usize,
    /// Per-fit time budget for (S)ARIMA.
    pub timeout: Option<Duration>,
    pub workers: usize,
    /// Fill `fit_seconds`. Off by default because timings make result
    /// files differ between runs.
    pub record_timing: bool,
    pub night_window: Option<(u32, u32)>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            horizon: DEFAULT_HORIZON,
            test_days: DEFAULT_TEST_DAYS,
            timeout: Some(Duration::from_secs(60)),
            workers: 1,
            record_timing: false,
            night_window: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Ok,
    UnstableModel,
    TrainingTimeout,
    EmptyNeighborhood,
    InsufficientData,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::UnstableModel => "unstable_model",
            Status::TrainingTimeout => "training_timeout",
            Status::EmptyNeighborhood => "empty_neighborhood",
            Status::InsufficientData => "insufficient_data",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        [
            Status::Ok,
            Status::UnstableModel,
            Status::TrainingTimeout,
            Status::EmptyNeighborhood,
            Status::InsufficientData,
        ]
        .into_iter()
        .find(|s| s.as_str() == text)
    }

    /// Status for a per-point failure, or `None` when the error is not a
    /// property of the model and should abort the sweep.
    fn from_error(error: &Error) -> Option<Self> {
        match error {
            Error::UnstableModel(_) => Some(Status::UnstableModel),
            Error::TrainingTimeout(_) => Some(Status::TrainingTimeout),
            Error::EmptyNeighborhood(_) => Some(Status::EmptyNeighborhood),
            Error::Range(_) => Some(Status::InsufficientData),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationRecord {
    pub dataset_id: String,
    pub point: HyperparameterPoint,
    pub status: Status,
    pub fit_seconds: Option<f64>,
    /// Forecast origins that contributed at least one scored pair.
    pub m: usize,
    /// `RMSE_1 .. RMSE_J` in W/m²; `None` marks an undefined step.
    pub rmse: Vec<Option<f64>>,
}

impl EvaluationRecord {
    fn failed(dataset_id: &str, point: &HyperparameterPoint, status: Status, horizon: usize) -> Self {
        Self {
            dataset_id: dataset_id.to_string(),
            point: *point,
            status,
            fit_seconds: None,
            m: 0,
            rmse: vec![None; horizon],
        }
    }
}

/// Per-dataset values shared by every point.
pub struct PreparedDataset {
    pub id: String,
    pub irradiance: TimeSeries,
    pub transmissivity: TimeSeries,
    pub track: SolarTrack,
}

impl PreparedDataset {
    pub fn new(dataset: &Dataset) -> Result<Self> {
        if dataset.series.kind != SeriesKind::Irradiance {
            return Err(Error::Config(format!(
                "dataset {} is not an irradiance series",
                dataset.id
            )));
        }
        if dataset.series.step_secs != data::FIFTEEN_MINUTES_SECS {
            return Err(Error::Config(format!(
                "dataset {} is not at 15-minute resolution",
                dataset.id
            )));
        }
        let track = dataset.series.solar_track()?;
        let transmissivity = data::to_transmissivity(&dataset.series, &track.extraterrestrial)?;
        Ok(Self {
            id: dataset.id.clone(),
            irradiance: dataset.series.clone(),
            transmissivity,
            track,
        })
    }
}

enum Fitted {
    Persistence(Persistence),
    Arima(arima::ArimaModel),
    Nnr(NnrModel),
}

impl Fitted {
    fn as_forecaster(&self) -> &dyn Forecaster {
        match self {
            Fitted::Persistence(m) => m,
            Fitted::Arima(m) => m,
            Fitted::Nnr(m) => m,
        }
    }
}

/// Trains `point` on its training window and scores rolling-origin
/// forecasts over the test window. Model failures come back as a record
/// with a failure status; other errors are returned.
pub fn evaluate_point(
    dataset: &PreparedDataset,
    point: &HyperparameterPoint,
    config: &SearchConfig,
) -> Result<EvaluationRecord> {
    Ok(evaluate_family(dataset, std::slice::from_ref(point), config)?.remove(0))
}

/// Points that differ only in a fixed neighbor count share one reference
/// sample and most distance computations.
fn family_key(point: &HyperparameterPoint) -> Option<(Method, usize, usize, usize, WeightMode, DataSpec)> {
    match point.model {
        ModelSpec::Nnr(spec) if spec.search == SearchMode::Exact => match spec.neighborhood {
            Neighborhood::FixedK(_) => Some((
                point.method,
                spec.p,
                spec.seasonal_p,
                spec.season,
                spec.weight,
                point.data,
            )),
            Neighborhood::MaxDistance(_) => None,
        },
        _ => None,
    }
}

/// Evaluates points that are either a single point or share a
/// [`family_key`].
fn evaluate_family(
    dataset: &PreparedDataset,
    points: &[HyperparameterPoint],
    config: &SearchConfig,
) -> Result<Vec<EvaluationRecord>> {
    for point in points {
        point.validate()?;
    }
    match evaluate_inner(dataset, points, config) {
        Ok(records) => Ok(records),
        Err(e) => match Status::from_error(&e) {
            Some(status) => Ok(points
                .iter()
                .map(|p| EvaluationRecord::failed(&dataset.id, p, status, config.horizon))
                .collect()),
            None => Err(e),
        },
    }
}

fn night_policy(point: &HyperparameterPoint, config: &SearchConfig) -> Result<NightPolicy> {
    match config.night_window {
        Some((start, end)) => NightPolicy::with_window(point.data.night_policy, start, end),
        None => Ok(NightPolicy::new(point.data.night_policy)),
    }
}

fn working_series<'a>(dataset: &'a PreparedDataset, point: &HyperparameterPoint) -> &'a TimeSeries {
    match point.data.preprocessing {
        Preprocessing::Irradiance => &dataset.irradiance,
        Preprocessing::Transmissivity => &dataset.transmissivity,
    }
}

fn fit(
    dataset: &PreparedDataset,
    point: &HyperparameterPoint,
    train: Range<usize>,
    config: &SearchConfig,
) -> Result<Fitted> {
    let train_series = working_series(dataset, point).slice(train.clone());
    let mask = data::training_mask(
        &train_series,
        &dataset.track.slice(train),
        &night_policy(point, config)?,
    );
    Ok(match &point.model {
        ModelSpec::Persistence => Fitted::Persistence(Persistence),
        ModelSpec::Arima(spec) => {
            let options = FitOptions {
                timeout: config.timeout,
                ..FitOptions::default()
            };
            Fitted::Arima(arima::fit_arima(&train_series.values, Some(&mask), spec, &options)?)
        }
        ModelSpec::Nnr(_) => {
            let spec = point.effective_nnr().expect("NNR point");
            Fitted::Nnr(NnrModel::fit(&train_series.values, Some(&mask), &spec)?)
        }
    })
}

fn evaluate_inner(
    dataset: &PreparedDataset,
    points: &[HyperparameterPoint],
    config: &SearchConfig,
) -> Result<Vec<EvaluationRecord>> {
    let point = &points[0];
    let horizon = config.horizon;
    let irradiance = &dataset.irradiance;
    let working = working_series(dataset, point);
    let split = SplitSpec::new(point.data.training_days, config.test_days)?;
    let (train, test) = data::split_ranges(irradiance.len(), irradiance.points_per_day(), &split)?;

    let started = Instant::now();
    let fitted = fit(dataset, point, train.clone(), config)?;
    let fit_seconds = started.elapsed().as_secs_f64();
    let model = fitted.as_forecaster();
    let ks: Vec<usize> = points
        .iter()
        .map(|p| match p.model {
            ModelSpec::Nnr(NnrSpec {
                neighborhood: Neighborhood::FixedK(k),
                ..
            }) => k,
            _ => 0,
        })
        .collect();

    // history available to forecasts: training window followed by the
    // test values observed so far
    let window = &working.values[train.start..test.end];
    let innovations = if model.innovation_lags().is_empty() {
        Vec::new()
    } else {
        model.innovations(window)
    };
    let scored = |i: usize| i < test.end && dataset.track.is_daytime(i) && irradiance.valid[i];
    let mut matrices = vec![ForecastMatrix::new(horizon); points.len()];
    let mut forecasts = vec![0.0; horizon];
    let mut actuals = vec![0.0; horizon];
    let mut excluded = vec![true; horizon];
    for origin in test.clone() {
        let Some(last) = (1..=horizon).rev().find(|&j| scored(origin + j)) else {
            continue;
        };
        let local = origin + 1 - train.start;
        let history = &window[..local];
        let paths = match &fitted {
            Fitted::Nnr(nnr) if points.len() > 1 => nnr::recursive_forecast_fixed_k(nnr, &ks, history, last)?,
            _ => {
                let innov = if innovations.is_empty() {
                    &[][..]
                } else {
                    &innovations[..local]
                };
                vec![forecast::recursive_forecast(model, history, innov, last)?.values]
            }
        };
        for (path, matrix) in paths.iter().zip(&mut matrices) {
            for j in 1..=horizon {
                let target = origin + j;
                excluded[j - 1] = !scored(target);
                if excluded[j - 1] {
                    forecasts[j - 1] = 0.0;
                    actuals[j - 1] = 0.0;
                    continue;
                }
                let value = path[j - 1];
                forecasts[j - 1] = match point.data.preprocessing {
                    Preprocessing::Irradiance => value,
                    Preprocessing::Transmissivity => {
                        data::from_transmissivity(&[value], &[dataset.track.extraterrestrial[target]])?[0]
                    }
                };
                actuals[j - 1] = irradiance.values[target];
            }
            if forecasts.iter().any(|v| !v.is_finite()) {
                return Err(Error::UnstableModel(format!(
                    "non-finite forecast from origin {origin}"
                )));
            }
            matrix.push(origin, &forecasts, &actuals, &excluded)?;
        }
    }
    Ok(points
        .iter()
        .zip(&matrices)
        .map(|(point, matrix)| {
            let rmse = evaluation::rmse_per_step(matrix);
            let status = if rmse.iter().all(Option::is_some) {
                Status::Ok
            } else {
                Status::InsufficientData
            };
            EvaluationRecord {
                dataset_id: dataset.id.clone(),
                point: *point,
                status,
                fit_seconds: config.record_timing.then_some(fit_seconds),
                m: matrix.len(),
                rmse,
            }
        })
        .collect())
}

/// A forecast issued at a single origin.
#[derive(Debug, Clone, PartialEq)]
pub struct PointForecast {
    pub origin: DateTime<Utc>,
    /// Start of each target interval.
    pub targets: Vec<DateTime<Utc>>,
    /// W/m².
    pub irradiance: Vec<f64>,
    pub extraterrestrial: Vec<f64>,
}

/// Trains `point` on the `training_days` days ending with the interval at
/// `origin` and forecasts the following `config.horizon` intervals.
pub fn forecast_at(
    dataset: &PreparedDataset,
    point: &HyperparameterPoint,
    origin: usize,
    config: &SearchConfig,
) -> Result<PointForecast> {
    point.validate()?;
    if config.horizon == 0 {
        return Err(Error::Config("horizon must be at least one step".into()));
    }
    let series = &dataset.irradiance;
    if origin >= series.len() {
        return Err(Error::Config(format!(
            "origin {} is after the last interval {}",
            data::format_timestamp(series.timestamp(origin)),
            data::format_timestamp(series.timestamp(series.len() - 1))
        )));
    }
    let needed = point.data.training_days * series.points_per_day();
    if origin + 1 < needed {
        return Err(Error::Range(format!(
            "origin {} has less than {} days of history; the earliest feasible origin is {}",
            data::format_timestamp(series.timestamp(origin)),
            point.data.training_days,
            data::format_timestamp(series.timestamp(needed - 1))
        )));
    }
    let train = origin + 1 - needed..origin + 1;
    let fitted = fit(dataset, point, train.clone(), config)?;
    let model = fitted.as_forecaster();
    let history = &working_series(dataset, point).values[train];
    let innovations = model.innovations(history);
    let path = forecast::recursive_forecast(model, history, &innovations, config.horizon)?.values;
    let targets: Vec<DateTime<Utc>> = (1..=config.horizon).map(|j| series.timestamp(origin + j)).collect();
    let half_step = chrono::Duration::seconds(series.step_secs / 2);
    let extraterrestrial = targets
        .iter()
        .map(|t| solar::SolarState::at(&series.location, *t + half_step).map(|s| s.extraterrestrial_irradiance))
        .collect::<Result<Vec<_>>>()?;
    let irradiance = match point.data.preprocessing {
        Preprocessing::Irradiance => path,
        Preprocessing::Transmissivity => data::from_transmissivity(&path, &extraterrestrial)?,
    };
    if irradiance.iter().any(|v| !v.is_finite()) {
        return Err(Error::UnstableModel("non-finite forecast".into()));
    }
    Ok(PointForecast {
        origin: series.timestamp(origin),
        targets,
        irradiance,
        extraterrestrial,
    })
}

/// Evaluates every point on every dataset. The output is sorted by
/// dataset id, method and grid position and does not depend on the number
/// of workers.
pub fn run_search(
    datasets: &[Dataset],
    grid: &[HyperparameterPoint],
    config: &SearchConfig,
    progress: &(dyn Fn(usize, usize) + Sync),
) -> Result<Vec<EvaluationRecord>> {
    if config.horizon == 0 {
        return Err(Error::Config("horizon must be at least one step".into()));
    }
    for point in grid {
        point.validate()?;
    }
    let prepared = datasets.iter().map(PreparedDataset::new).collect::<Result<Vec<_>>>()?;
    let families = group_families(grid);
    let tasks: Vec<(usize, usize)> = (0..prepared.len())
        .flat_map(|d| (0..families.len()).map(move |f| (d, f)))
        .collect();
    let total = prepared.len() * grid.len();
    let done = AtomicUsize::new(0);
    let run = |&(d, f): &(usize, usize)| {
        let members = &families[f];
        let points: Vec<HyperparameterPoint> = members.iter().map(|&g| grid[g]).collect();
        let records = evaluate_family(&prepared[d], &points, config)?;
        progress(done.fetch_add(members.len(), Ordering::Relaxed) + members.len(), total);
        Ok(members.iter().zip(records).map(|(&g, r)| (d, g, r)).collect::<Vec<_>>())
    };
    let mut results: Vec<(usize, usize, EvaluationRecord)> =
        execute(&tasks, config.workers, run)?.into_iter().flatten().collect();
    results.sort_by(|a, b| {
        prepared[a.0]
            .id
            .cmp(&prepared[b.0].id)
            .then(grid[a.1].method.cmp(&grid[b.1].method))
            .then(a.1.cmp(&b.1))
            .then(a.0.cmp(&b.0))
    });
    Ok(results.into_iter().map(|(_, _, r)| r).collect())
}

/// Grid indices grouped into families, in order of first appearance.
fn group_families(grid: &[HyperparameterPoint]) -> Vec<Vec<usize>> {
    let mut families: Vec<Vec<usize>> = Vec::new();
    let mut index: HashMap<_, usize> = HashMap::new();
    for (g, point) in grid.iter().enumerate() {
        match family_key(point) {
            Some(key) => match index.entry(key) {
                Entry::Occupied(e) => families[*e.get()].push(g),
                Entry::Vacant(e) => {
                    e.insert(families.len());
                    families.push(vec![g]);
                }
            },
            None => families.push(vec![g]),
        }
    }
    families
}

#[cfg(feature = "parallel")]
fn execute<T, F>(tasks: &[(usize, usize)], workers: usize, run: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&(usize, usize)) -> Result<T> + Sync + Send,
{
    use rayon::prelude::*;
    if workers <= 1 {
        return tasks.iter().map(run).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| tasks.par_iter().map(&run).collect())
}

#[cfg(not(feature = "parallel"))]
fn execute<T, F>(tasks: &[(usize, usize)], _workers: usize, run: F) -> Result<Vec<T>>
where
    F: Fn(&(usize, usize)) -> Result<T>,
{
    tasks.iter().map(run).collect()
}
