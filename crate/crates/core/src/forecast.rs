//! The one-step forecaster contract, persistence baselines and the
//! recursive multi-step engine.

use crate::data::{self, SeriesKind, TimeSeries};
use crate::error::{Error, Result};
use crate::solar;

/// Forecast horizon in 15-minute steps (3 h).
pub const DEFAULT_HORIZON: usize = 12;

/// A fitted one-step-ahead forecaster.
///
/// Lags are expressed as steps back from the newest value: offset 0 is
/// `y_t`, offset 1 is `y_{t-1}` when predicting `y_{t+1}`.
pub trait Forecaster: Send + Sync {
    /// Offsets of the values [`predict_one`](Self::predict_one) receives,
    /// in the order it receives them.
    fn required_lags(&self) -> &[usize];

    /// Offsets of past one-step innovations the prediction uses. Empty for
    /// models without a moving-average part.
    fn innovation_lags(&self) -> &[usize] {
        &[]
    }

    fn predict_one(&self, lags: &[f64], innovations: &[f64]) -> Result<f64>;

    /// One-step innovations `y_i - ŷ_{i|i-1}` along `series`, aligned with
    /// it. Only needed when [`innovation_lags`](Self::innovation_lags) is
    /// non-empty.
    fn innovations(&self, _series: &[f64]) -> Vec<f64> {
        Vec::new()
    }

    /// Number of past values needed before the first prediction.
    fn history_len(&self) -> usize {
        self.required_lags().iter().max().map_or(1, |m| m + 1)
    }
}

/// `ŷ_{t+1|t} .. ŷ_{t+J|t}` issued at origin `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastVector {
    pub origin: usize,
    pub values: Vec<f64>,
}

/// Value at `offset` steps before the point being predicted at step `step`
/// (1-based), taken from observed history while it reaches back to `t` or
/// earlier and from earlier forecasts otherwise.
fn lagged(history: &[f64], forecasts: &[f64], step: usize, offset: usize) -> Option<f64> {
    // position relative to t: step - 1 - offset (can be negative)
    let ahead = step as isize - 1 - offset as isize;
    if ahead >= 1 {
        forecasts.get(ahead as usize - 1).copied()
    } else {
        let back = (-ahead) as usize;
        history.len().checked_sub(1 + back).map(|i| history[i])
    }
}

/// Lag vector for prediction step `step` given the observed `history`
/// (ending at `y_t`) and the forecasts `ŷ_{t+1|t} .. ŷ_{t+step-1|t}`.
pub fn assemble_lag_vector(lags: &[usize], history: &[f64], forecasts: &[f64], step: usize) -> Result<Vec<f64>> {
    lags.iter()
        .map(|&o| {
            lagged(history, forecasts, step, o).ok_or_else(|| {
                Error::Range(format!(
                    "lag {o} at step {step} reaches before the {} available values",
                    history.len()
                ))
            })
        })
        .collect()
}

/// Iterates a one-step model `horizon` times from the end of `history`,
/// feeding its own forecasts back as pseudo-observations. Innovations past
/// the origin are taken as zero.
pub fn recursive_forecast(
    model: &dyn Forecaster,
    history: &[f64],
    innovations: &[f64],
    horizon: usize,
) -> Result<ForecastVector> {
    if horizon == 0 {
        return Err(Error::Config("forecast horizon must be at least one step".into()));
    }
    if history.len() < model.history_len() {
        return Err(Error::Range(format!(
            "model needs {} past values, history has {}",
            model.history_len(),
            history.len()
        )));
    }
    let innovation_lags = model.innovation_lags();
    let mut forecasts = Vec::with_capacity(horizon);
    let mut lag_buf = Vec::with_capacity(model.required_lags().len());
    let mut innov_buf = Vec::with_capacity(innovation_lags.len());
    for step in 1..=horizon {
        lag_buf.clear();
        for &o in model.required_lags() {
            lag_buf.push(
                lagged(history, &forecasts, step, o)
                    .ok_or_else(|| Error::Range(format!("lag {o} reaches before the available history")))?,
            );
        }
        innov_buf.clear();
        for &o in innovation_lags {
            let ahead = step as isize - 1 - o as isize;
            let value = if ahead >= 1 {
                0.0
            } else {
                let back = (-ahead) as usize;
                innovations.len().checked_sub(1 + back).map_or(0.0, |i| innovations[i])
            };
            innov_buf.push(value);
        }
        forecasts.push(model.predict_one(&lag_buf, &innov_buf)?);
    }
    Ok(ForecastVector {
        origin: history.len() - 1,
        values: forecasts,
    })
}

/// `ŷ_{t+1|t} = y_t`.
#[derive(Debug, Clone, Default)]
pub struct Persistence;

impl Forecaster for Persistence {
    fn required_lags(&self) -> &[usize] {
        &[0]
    }

    fn predict_one(&self, lags: &[f64], _innovations: &[f64]) -> Result<f64> {
        Ok(lags[0])
    }
}

pub fn persistence_predict(history: &[f64]) -> Result<f64> {
    history
        .last()
        .copied()
        .ok_or_else(|| Error::Range("persistence needs one observation".into()))
}

/// `ŷ_{t+j|t} = y_{t+j-s}`, written as a one-step model with lag `s - 1`.
#[derive(Debug, Clone)]
pub struct SeasonalPersistence {
    lags: [usize; 1],
}

impl SeasonalPersistence {
    pub fn new(season: usize) -> Result<Self> {
        if season == 0 {
            return Err(Error::Config("season length must be positive".into()));
        }
        Ok(Self { lags: [season - 1] })
    }
}

impl Forecaster for SeasonalPersistence {
    fn required_lags(&self) -> &[usize] {
        &self.lags
    }

    fn predict_one(&self, lags: &[f64], _innovations: &[f64]) -> Result<f64> {
        Ok(lags[0])
    }
}

/// `y_{t+j-s}` read directly from the history ending at `y_t`.
pub fn seasonal_persistence_predict(history: &[f64], step: usize, season: usize) -> Result<f64> {
    if step == 0 || step > season {
        return Err(Error::Range(format!(
            "step {step} is not within one season of {season}"
        )));
    }
    let back = season - step;
    history.len().checked_sub(1 + back).map(|i| history[i]).ok_or_else(|| {
        Error::Range(format!(
            "seasonal persistence needs {} past values, history has {}",
            back + 1,
            history.len()
        ))
    })
}

/// Persistence of transmissivity rescaled by the extraterrestrial
/// irradiance at each target step.
pub fn persistence_on_transmissivity(tau_t: f64, future_extraterrestrial: &[f64]) -> Vec<f64> {
    let tau = vec![tau_t; future_extraterrestrial.len()];
    data::from_transmissivity(&tau, future_extraterrestrial).expect("equal lengths")
}

/// Reference forecast: transmissivity at `origin` held constant and scaled
/// by the extraterrestrial irradiance of the `horizon` following steps.
pub fn reference_persistence_forecast(series: &TimeSeries, origin: usize, horizon: usize) -> Result<ForecastVector> {
    if series.kind != SeriesKind::Irradiance {
        return Err(Error::Config("reference forecast needs an irradiance series".into()));
    }
    if origin >= series.len() {
        return Err(Error::Range(format!("origin {origin} beyond series end")));
    }
    let ie_t = solar::extraterrestrial_irradiance(&series.location, series.midpoint(origin))?;
    let tau_t = data::transmissivity(series.values[origin], ie_t);
    let future = (1..=horizon)
        .map(|j| {
            let t = series.midpoint(origin) + chrono::Duration::seconds(series.step_secs * j as i64);
            solar::extraterrestrial_irradiance(&series.location, t)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ForecastVector {
        origin,
        values: persistence_on_transmissivity(tau_t, &future),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Mutex;

    struct Ar1(f64);

    impl Forecaster for Ar1 {
        fn required_lags(&self) -> &[usize] {
            &[0]
        }
        fn predict_one(&self, lags: &[f64], _: &[f64]) -> Result<f64> {
            Ok(self.0 * lags[0])
        }
    }

    /// Records every lag vector it is given and predicts 10 * step.
    struct Recorder {
        lags: Vec<usize>,
        seen: Mutex<Vec<Vec<f64>>>,
    }

    impl Forecaster for Recorder {
        fn required_lags(&self) -> &[usize] {
            &self.lags
        }
        fn predict_one(&self, lags: &[f64], _: &[f64]) -> Result<f64> {
            let mut seen = self.seen.lock().unwrap();
            seen.push(lags.to_vec());
            Ok(1000.0 + seen.len() as f64)
        }
    }

    #[test]
    fn persistence_propagates_last_value() {
        let f = recursive_forecast(&Persistence, &[0.1, 0.2, 0.37], &[], 12).unwrap();
        assert_eq!(f.values, vec![0.37; 12]);
        assert_eq!(f.origin, 2);
        assert_eq!(persistence_predict(&[0.0]).unwrap(), 0.0);
        assert!(persistence_predict(&[]).is_err());
    }

    #[test]
    fn geometric_recursion() {
        let f = recursive_forecast(&Ar1(0.5), &[1.0], &[], 3).unwrap();
        assert_eq!(f.values, vec![0.5, 0.25, 0.125]);
    }

    #[test]
    fn lag_substitution_matches_worked_pattern() {
        let model = Recorder {
            lags: vec![0, 1, 2],
            seen: Mutex::new(Vec::new()),
        };
        let history = [-3.0, -2.0, -1.0, 0.0]; // y_{t-3} .. y_t
        let f = recursive_forecast(&model, &history, &[], 12).unwrap();
        let seen = model.seen.lock().unwrap();
        assert_eq!(seen[0], vec![0.0, -1.0, -2.0]);
        assert_eq!(seen[1], vec![f.values[0], 0.0, -1.0]);
        assert_eq!(seen[11], vec![f.values[10], f.values[9], f.values[8]]);
    }

    #[test]
    fn insufficient_history() {
        let model = Recorder {
            lags: vec![0, 5],
            seen: Mutex::new(Vec::new()),
        };
        assert!(matches!(
            recursive_forecast(&model, &[1.0; 5], &[], 3),
            Err(Error::Range(_))
        ));
        assert!(recursive_forecast(&model, &[1.0; 6], &[], 3).is_ok());
        assert!(recursive_forecast(&Persistence, &[1.0], &[], 0).is_err());
    }

    #[test]
    fn seasonal_persistence() {
        let history: Vec<f64> = (0..200).map(f64::from).collect();
        let t = 199.0;
        assert_eq!(seasonal_persistence_predict(&history, 1, 96).unwrap(), t - 95.0);
        assert_eq!(seasonal_persistence_predict(&history, 96, 96).unwrap(), t);
        assert!(matches!(
            seasonal_persistence_predict(&history[..50], 1, 96),
            Err(Error::Range(_))
        ));
        let model = SeasonalPersistence::new(96).unwrap();
        let f = recursive_forecast(&model, &history, &[], 12).unwrap();
        for (j, v) in f.values.iter().enumerate() {
            assert_eq!(*v, seasonal_persistence_predict(&history, j + 1, 96).unwrap());
        }
    }

    #[test]
    fn seasonal_lags_shorter_than_horizon_use_forecasts() {
        let model = SeasonalPersistence::new(4).unwrap();
        let history = [1.0, 2.0, 3.0, 4.0];
        let f = recursive_forecast(&model, &history, &[], 9).unwrap();
        assert_eq!(f.values, vec![1.0, 2.0, 3.0, 4.0, 1.0, 2.0, 3.0, 4.0, 1.0]);
    }

    #[test]
    fn transmissivity_persistence_examples() {
        assert_eq!(
            persistence_on_transmissivity(0.8, &[1000.0, 900.0, 800.0]),
            vec![800.0, 720.0, 640.0]
        );
        assert_eq!(persistence_on_transmissivity(0.0, &[1000.0, 500.0]), vec![0.0, 0.0]);
        assert_eq!(persistence_on_transmissivity(0.6, &[100.0, 0.0]), vec![60.0, 0.0]);
    }
}
