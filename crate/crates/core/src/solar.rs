//! Solar geometry: zenith angle, eccentricity correction and the
//! extraterrestrial irradiance on a horizontal plane.
//!
//! The zenith angle uses the low-precision solar coordinates of the NOAA
//! solar calculator (Meeus, *Astronomical Algorithms*, ch. 25), which stay
//! within a few hundredths of a degree of the full NREL SPA between 1950
//! and 2100. No refraction correction is applied; the refraction-corrected
//! horizon is handled by the [`HORIZON_ZENITH_DEG`] threshold instead.

use chrono::{DateTime, Datelike, TimeZone, Timelike, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Solar constant in W/m².
pub const SOLAR_CONSTANT: f64 = 1360.8;

/// Zenith angle of the apparent sunrise/sunset, in degrees.
pub const HORIZON_ZENITH_DEG: f64 = 90.83;

const MIN_YEAR: i32 = 1950;
const MAX_YEAR: i32 = 2100;

/// A point on the earth's surface with a fixed offset from UTC to local
/// standard time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoLocation {
    /// Degrees north, in [-90, 90].
    pub latitude: f64,
    /// Degrees east, in [-180, 180].
    pub longitude: f64,
    /// Meters above sea level.
    pub elevation: f64,
    /// Local standard time minus UTC, in minutes.
    pub utc_offset_minutes: i32,
}

impl GeoLocation {
    pub fn new(latitude: f64, longitude: f64, elevation: f64, utc_offset_minutes: i32) -> Result<Self> {
        let loc = Self {
            latitude,
            longitude,
            elevation,
            utc_offset_minutes,
        };
        loc.validate()?;
        Ok(loc)
    }

    pub fn validate(&self) -> Result<()> {
        if !(-90.0..=90.0).contains(&self.latitude) {
            return Err(Error::InvalidLocation(format!(
                "latitude {} not in [-90, 90]",
                self.latitude
            )));
        }
        if !(-180.0..=180.0).contains(&self.longitude) {
            return Err(Error::InvalidLocation(format!(
                "longitude {} not in [-180, 180]",
                self.longitude
            )));
        }
        if !(self.elevation >= -500.0) {
            return Err(Error::InvalidLocation(format!(
                "elevation {} below -500 m",
                self.elevation
            )));
        }
        if self.utc_offset_minutes.abs() > 14 * 60 {
            return Err(Error::InvalidLocation(format!(
                "UTC offset {} min outside +-14 h",
                self.utc_offset_minutes
            )));
        }
        Ok(())
    }
}

/// Sun position and top-of-atmosphere irradiance at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolarState {
    pub zenith: f64,
    pub eccentricity: f64,
    pub extraterrestrial_irradiance: f64,
    pub is_daytime: bool,
}

impl SolarState {
    pub fn at(location: &GeoLocation, timestamp: DateTime<Utc>) -> Result<Self> {
        let zenith = solar_zenith(location, timestamp)?;
        let eccentricity = eccentricity_correction(timestamp);
        Ok(Self {
            zenith,
            eccentricity,
            extraterrestrial_irradiance: extraterrestrial_from_zenith(zenith, eccentricity),
            is_daytime: is_daytime(zenith),
        })
    }
}

fn check_range(timestamp: DateTime<Utc>) -> Result<()> {
    let year = timestamp.year();
    if (MIN_YEAR..=MAX_YEAR).contains(&year) {
        Ok(())
    } else {
        Err(Error::TimestampOutOfRange(timestamp))
    }
}

fn julian_day(timestamp: DateTime<Utc>) -> f64 {
    let secs = timestamp.timestamp() as f64 + f64::from(timestamp.timestamp_subsec_nanos()) * 1e-9;
    secs / 86_400.0 + 2_440_587.5
}

/// Geometric solar zenith angle in degrees, in [0, 180].
pub fn solar_zenith(location: &GeoLocation, timestamp: DateTime<Utc>) -> Result<f64> {
    check_range(timestamp)?;
    let jc = (julian_day(timestamp) - 2_451_545.0) / 36_525.0;

    let mean_long = (280.46646 + jc * (36_000.76983 + jc * 0.0003032)).rem_euclid(360.0);
    let mean_anom = 357.52911 + jc * (35_999.05029 - 0.0001537 * jc);
    let ecc = 0.016708634 - jc * (0.000042037 + 0.0000001267 * jc);
    let m = mean_anom.to_radians();
    let center = m.sin() * (1.914602 - jc * (0.004817 + 0.000014 * jc))
        + (2.0 * m).sin() * (0.019993 - 0.000101 * jc)
        + (3.0 * m).sin() * 0.000289;
    let true_long = mean_long + center;
    let omega = (125.04 - 1934.136 * jc).to_radians();
    let app_long = true_long - 0.00569 - 0.00478 * omega.sin();

    let seconds = 21.448 - jc * (46.815 + jc * (0.00059 - jc * 0.001813));
    let mean_obliq = 23.0 + (26.0 + seconds / 60.0) / 60.0;
    let obliq = (mean_obliq + 0.00256 * omega.cos()).to_radians();

    let declination = (obliq.sin() * app_long.to_radians().sin()).asin();

    let y = (obliq / 2.0).tan().powi(2);
    let l0 = mean_long.to_radians();
    let eq_of_time = 4.0
        * (y * (2.0 * l0).sin() - 2.0 * ecc * m.sin() + 4.0 * ecc * y * m.sin() * (2.0 * l0).cos()
            - 0.5 * y * y * (4.0 * l0).sin()
            - 1.25 * ecc * ecc * (2.0 * m).sin())
        .to_degrees();

    let utc_minutes = f64::from(timestamp.num_seconds_from_midnight()) / 60.0
        + f64::from(timestamp.timestamp_subsec_nanos()) * 1e-9 / 60.0;
    let true_solar_time = (utc_minutes + eq_of_time + 4.0 * location.longitude).rem_euclid(1440.0);
    let hour_angle = (true_solar_time / 4.0 - 180.0).to_radians();

    let lat = location.latitude.to_radians();
    let cos_zenith = lat.sin() * declination.sin() + lat.cos() * declination.cos() * hour_angle.cos();
    Ok(cos_zenith.clamp(-1.0, 1.0).acos().to_degrees())
}

/// Daytime means the sun is above the refraction-corrected horizon. The
/// boundary itself counts as night.
pub fn is_daytime(zenith_deg: f64) -> bool {
    zenith_deg < HORIZON_ZENITH_DEG
}

/// Spencer's Fourier series for the squared ratio of mean to actual
/// sun-earth distance.
pub fn eccentricity_correction(timestamp: DateTime<Utc>) -> f64 {
    let year = timestamp.year();
    let days_in_year = if Utc.with_ymd_and_hms(year, 12, 31, 0, 0, 0).unwrap().ordinal() == 366 {
        366.0
    } else {
        365.0
    };
    let day_fraction = f64::from(timestamp.num_seconds_from_midnight()) / 86_400.0;
    let gamma = 2.0 * std::f64::consts::PI * (f64::from(timestamp.ordinal0()) + day_fraction) / days_in_year;
    1.000110
        + 0.034221 * gamma.cos()
        + 0.001280 * gamma.sin()
        + 0.000719 * (2.0 * gamma).cos()
        + 0.000077 * (2.0 * gamma).sin()
}

/// `eccentricity * SOLAR_CONSTANT * cos(zenith)`, clamped at zero once the
/// sun is at or below the geometric horizon.
pub fn extraterrestrial_from_zenith(zenith_deg: f64, eccentricity: f64) -> f64 {
    if zenith_deg >= 90.0 {
        return 0.0;
    }
    let cos_z = zenith_deg.to_radians().cos();
    if cos_z > 0.0 {
        eccentricity * SOLAR_CONSTANT * cos_z
    } else {
        0.0
    }
}

/// Extraterrestrial irradiance on a horizontal plane in W/m².
pub fn extraterrestrial_irradiance(location: &GeoLocation, timestamp: DateTime<Utc>) -> Result<f64> {
    let zenith = solar_zenith(location, timestamp)?;
    Ok(extraterrestrial_from_zenith(zenith, eccentricity_correction(timestamp)))
}
