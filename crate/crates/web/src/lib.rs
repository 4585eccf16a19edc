//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each exported function returns a JSON string. The plain Rust functions
//! behind them are public so they can be tested natively.

use chrono::{Duration, NaiveDate};
use irrcast::data;
use irrcast::evaluation::{self, BoxStats};
use irrcast::nnr::{Neighborhood, NnrSpec, WeightMode};
use irrcast::search::{self, DataSpec, Dataset, HyperparameterPoint, Method, ModelSpec, PreparedDataset, SearchConfig};
use irrcast::solar::{GeoLocation, SolarState};
use irrcast::synth::{self, CloudModel};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Days of synthetic history in front of the forecast day.
pub const TRAINING_DAYS: usize = 14;
const STEPS_PER_DAY: usize = data::STEPS_PER_DAY;
const STEP_MINUTES: usize = 15;

#[derive(Debug, Clone, Serialize)]
pub struct DayProfile {
    /// Local standard time at the middle of each 15-min interval.
    pub minutes: Vec<f64>,
    pub zenith: Vec<f64>,
    pub extraterrestrial: Vec<f64>,
    /// Extraterrestrial irradiance attenuated by the clear-sky model of the
    /// synthetic generator.
    pub clear_sky: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ForecastDemo {
    /// Local standard time of each 15-min interval start of the day.
    pub minutes: Vec<f64>,
    /// Synthetic irradiance of the forecast day.
    pub actual: Vec<f64>,
    /// Interval index of the origin within the day.
    pub origin: usize,
    pub snnr: Vec<f64>,
    pub reference: Vec<f64>,
}

fn location(latitude: f64, longitude: f64, utc_offset_minutes: i32) -> Result<GeoLocation, String> {
    GeoLocation::new(latitude, longitude, 0.0, utc_offset_minutes).map_err(|e| e.to_string())
}

fn parse_day(text: &str) -> Result<NaiveDate, String> {
    NaiveDate::parse_from_str(text, "%Y-%m-%d").map_err(|_| format!("{text:?} is not a YYYY-MM-DD date"))
}

/// Solar geometry over one local day.
pub fn day_profile(latitude: f64, longitude: f64, utc_offset_minutes: i32, day: &str) -> Result<DayProfile, String> {
    let loc = location(latitude, longitude, utc_offset_minutes)?;
    let midnight = parse_day(day)?.and_hms_opt(0, 0, 0).expect("midnight").and_utc()
        - Duration::minutes(i64::from(utc_offset_minutes));
    let mut profile = DayProfile {
        minutes: Vec::with_capacity(STEPS_PER_DAY),
        zenith: Vec::with_capacity(STEPS_PER_DAY),
        extraterrestrial: Vec::with_capacity(STEPS_PER_DAY),
        clear_sky: Vec::with_capacity(STEPS_PER_DAY),
    };
    let base = CloudModel::default().clear_sky_base;
    for i in 0..STEPS_PER_DAY {
        let minute = (i * STEP_MINUTES) as f64 + 7.5;
        let t = midnight + Duration::seconds((minute * 60.0) as i64);
        let state = SolarState::at(&loc, t).map_err(|e| e.to_string())?;
        profile.minutes.push(minute);
        profile.zenith.push(state.zenith);
        profile.extraterrestrial.push(state.extraterrestrial_irradiance);
        profile
            .clear_sky
            .push(state.extraterrestrial_irradiance * synth::clear_sky_transmittance(state.zenith, base));
    }
    Ok(profile)
}

/// Generates [`TRAINING_DAYS`] days of synthetic data plus the forecast
/// day, trains seasonal NNR on the history and forecasts the intervals
/// after `origin_minute` (local time) next to the reference persistence.
#[allow(clippy::too_many_arguments)]
pub fn forecast_demo(
    latitude: f64,
    longitude: f64,
    utc_offset_minutes: i32,
    day: &str,
    seed: u64,
    origin_minute: u32,
    lags: usize,
    seasonal_lags: usize,
    neighbors: usize,
) -> Result<ForecastDemo, String> {
    let loc = location(latitude, longitude, utc_offset_minutes)?;
    let first = parse_day(day)? - Duration::days(TRAINING_DAYS as i64);
    let origin = origin_minute as usize / STEP_MINUTES;
    if origin >= STEPS_PER_DAY {
        return Err(format!("origin minute {origin_minute} is not within a day"));
    }
    let generated =
        synth::generate(loc, first, TRAINING_DAYS + 1, seed, &CloudModel::default()).map_err(|e| e.to_string())?;
    let series = data::resample_15min(&generated.series)
        .map_err(|e| e.to_string())?
        .series;
    let prepared = PreparedDataset::new(&Dataset {
        id: "demo".into(),
        series,
    })
    .map_err(|e| e.to_string())?;
    let nnr = HyperparameterPoint {
        method: Method::Snnr,
        model: ModelSpec::Nnr(
            NnrSpec::new(lags, WeightMode::Uniform, Neighborhood::FixedK(neighbors))
                .seasonal(seasonal_lags, search::SEASON),
        ),
        data: DataSpec {
            preprocessing: search::Preprocessing::Transmissivity,
            night_policy: data::NightMode::AllDayAndNight,
            training_days: TRAINING_DAYS,
        },
    };
    let config = SearchConfig::default();
    let at = TRAINING_DAYS * STEPS_PER_DAY + origin;
    let snnr = search::forecast_at(&prepared, &nnr, at, &config).map_err(|e| e.to_string())?;
    let reference =
        search::forecast_at(&prepared, &search::reference_point(), at, &config).map_err(|e| e.to_string())?;
    let day_values = &prepared.irradiance.values[TRAINING_DAYS * STEPS_PER_DAY..];
    Ok(ForecastDemo {
        minutes: (0..STEPS_PER_DAY).map(|i| (i * STEP_MINUTES) as f64).collect(),
        actual: day_values.to_vec(),
        origin,
        snnr: snnr.irradiance,
        reference: reference.irradiance,
    })
}

pub fn box_summary(values: &[f64]) -> Result<BoxStats, String> {
    evaluation::boxplot_stats(values).map_err(|e| e.to_string())
}

fn to_json<T: Serialize>(result: Result<T, String>) -> Result<String, JsError> {
    result
        .and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string()))
        .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = solarDay)]
pub fn solar_day(latitude: f64, longitude: f64, utc_offset_minutes: i32, day: &str) -> Result<String, JsError> {
    to_json(day_profile(latitude, longitude, utc_offset_minutes, day))
}

#[allow(clippy::too_many_arguments)]
#[wasm_bindgen(js_name = forecastDay)]
pub fn forecast_day(
    latitude: f64,
    longitude: f64,
    utc_offset_minutes: i32,
    day: &str,
    seed: u32,
    origin_minute: u32,
    lags: u32,
    seasonal_lags: u32,
    neighbors: u32,
) -> Result<String, JsError> {
    to_json(forecast_demo(
        latitude,
        longitude,
        utc_offset_minutes,
        day,
        u64::from(seed),
        origin_minute,
        lags as usize,
        seasonal_lags as usize,
        neighbors as usize,
    ))
}

#[wasm_bindgen(js_name = boxStats)]
pub fn box_stats(values: &[f64]) -> Result<String, JsError> {
    to_json(box_summary(values))
}
