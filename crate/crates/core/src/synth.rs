//! Seeded synthetic irradiance: extraterrestrial irradiance attenuated by a
//! stochastic cloud factor.
//!
//! The cloud factor is the product of a clear-sky attenuation that grows
//! with air mass and a clearness index. The clearness index is a daily
//! level following an AR(1) process from day to day, plus an
//! Ornstein-Uhlenbeck fluctuation within the day and a little 1-min noise.
//! The product is clamped to `[0, MAX_CLOUD_FACTOR]`.

use std::io::Write;

use chrono::{Duration, NaiveDate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::{self, SeriesKind, TimeSeries, ONE_MINUTE_SECS};
use crate::error::{Error, Result};
use crate::solar::{self, GeoLocation};

pub const MAX_CLOUD_FACTOR: f64 = 1.1;

/// Shape of the cloud process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloudModel {
    /// Clear-sky transmittance at air mass 1; 1 disables the attenuation.
    pub clear_sky_base: f64,
    pub daily_mean: f64,
    /// Day-to-day autocorrelation of the daily level.
    pub daily_persistence: f64,
    pub daily_sd: f64,
    /// Time constant of the within-day fluctuation, minutes.
    pub intraday_minutes: f64,
    pub intraday_sd: f64,
    pub minute_noise_sd: f64,
}

impl Default for CloudModel {
    fn default() -> Self {
        Self {
            clear_sky_base: 0.7,
            daily_mean: 0.9,
            daily_persistence: 0.5,
            daily_sd: 0.2,
            intraday_minutes: 20.0,
            intraday_sd: 0.25,
            minute_noise_sd: 0.02,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Synthetic {
    /// 1-min irradiance starting at local midnight of the first day.
    pub series: TimeSeries,
    pub cloud_factor: Vec<f64>,
}

pub fn generate(
    location: GeoLocation,
    first_day: NaiveDate,
    days: usize,
    seed: u64,
    model: &CloudModel,
) -> Result<Synthetic> {
    location.validate()?;
    if days == 0 {
        return Err(Error::Config("synthetic data needs at least one day".into()));
    }
    let start = first_day.and_hms_opt(0, 0, 0).expect("midnight").and_utc()
        - Duration::minutes(i64::from(location.utc_offset_minutes));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };

    let decay = (-1.0 / model.intraday_minutes).exp();
    let innovation_sd = model.intraday_sd * (1.0 - decay * decay).sqrt();
    let daily_innovation_sd = model.daily_sd * (1.0 - model.daily_persistence.powi(2)).sqrt();

    let minutes = days * 24 * 60;
    let mut values = Vec::with_capacity(minutes);
    let mut cloud_factor = Vec::with_capacity(minutes);
    let mut level = model.daily_mean + model.daily_sd * normal();
    let mut fluctuation = model.intraday_sd * normal();
    for day in 0..days {
        if day > 0 {
            level = model.daily_mean
                + model.daily_persistence * (level - model.daily_mean)
                + daily_innovation_sd * normal();
        }
        let day_level = level.clamp(0.1, 1.2);
        for minute in 0..24 * 60 {
            fluctuation = decay * fluctuation + innovation_sd * normal();
            let clearness = (day_level + fluctuation + model.minute_noise_sd * normal()).max(0.0);
            let t = start + Duration::seconds((day * 1440 + minute) as i64 * ONE_MINUTE_SECS + 30);
            let state = solar::SolarState::at(&location, t)?;
            let c =
                (clearness * clear_sky_transmittance(state.zenith, model.clear_sky_base)).clamp(0.0, MAX_CLOUD_FACTOR);
            let ie = state.extraterrestrial_irradiance;
            cloud_factor.push(c);
            values.push(ie * c);
        }
    }
    let series = TimeSeries::new(start, ONE_MINUTE_SECS, values, location, SeriesKind::Irradiance)?;
    Ok(Synthetic { series, cloud_factor })
}

/// Writes `timestamp, ghi_wm2, cloud_factor` rows in the ingest schema.
pub fn write_csv<W: Write>(synthetic: &Synthetic, writer: W) -> Result<()> {
    let series = &synthetic.series;
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["timestamp", "ghi_wm2", "cloud_factor"])?;
    for (i, (value, c)) in series.values.iter().zip(&synthetic.cloud_factor).enumerate() {
        out.write_record([
            data::format_timestamp(series.timestamp(i)),
            format!("{value:.4}"),
            format!("{c:.4}"),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Relative optical air mass (Kasten and Young).
pub fn air_mass(zenith_deg: f64) -> f64 {
    let z = zenith_deg.min(90.0);
    1.0 / (z.to_radians().cos() + 0.50572 * (96.07995 - z).powf(-1.6364))
}

/// Direct-beam style clear-sky transmittance `base^(AM^0.678)`.
pub fn clear_sky_transmittance(zenith_deg: f64, base: f64) -> f64 {
    base.powf(air_mass(zenith_deg).powf(0.678))
}
