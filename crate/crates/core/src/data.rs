//! Time series ingestion and preprocessing: CSV input/output, 15-minute
//! resampling, night handling, the transmissivity transform and the
//! training/test split.

use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, Duration, NaiveDateTime, Timelike, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solar::{self, GeoLocation};

pub const ONE_MINUTE_SECS: i64 = 60;
pub const FIFTEEN_MINUTES_SECS: i64 = 900;
/// 15-minute points per day, the season length used by seasonal models.
pub const STEPS_PER_DAY: usize = 96;

pub const MAX_IRRADIANCE: f64 = 1500.0;
pub const MAX_TRANSMISSIVITY: f64 = 1.5;
/// Below this extraterrestrial irradiance (W/m²) transmissivity is set to 0.
pub const TRANSMISSIVITY_FLOOR: f64 = 1.0;
/// Largest number of missing 1-min samples a 15-min block may contain and
/// still be averaged (after linear interpolation).
pub const MAX_INTERPOLATED_GAP: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    Irradiance,
    Transmissivity,
}

/// A uniformly sampled series. Each value describes the interval
/// `[timestamp(i), timestamp(i) + step)`; solar quantities for a point are
/// evaluated at the interval midpoint.
///
/// Points with `valid[i] == false` are gaps. Their value is NaN straight
/// after ingestion and a linear interpolation after [`fill_invalid`].
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub start: DateTime<Utc>,
    pub step_secs: i64,
    pub values: Vec<f64>,
    pub valid: Vec<bool>,
    /// Zenith angles supplied with the data, if any.
    pub zenith: Option<Vec<f64>>,
    pub location: GeoLocation,
    pub kind: SeriesKind,
}

impl TimeSeries {
    pub fn new(
        start: DateTime<Utc>,
        step_secs: i64,
        values: Vec<f64>,
        location: GeoLocation,
        kind: SeriesKind,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Range("a time series needs at least one value".into()));
        }
        if step_secs <= 0 {
            return Err(Error::Config(format!("step of {step_secs} s")));
        }
        let valid = values.iter().map(|v| v.is_finite()).collect();
        Ok(Self {
            start,
            step_secs,
            values,
            valid,
            zenith: None,
            location,
            kind,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn timestamp(&self, index: usize) -> DateTime<Utc> {
        self.start + Duration::seconds(self.step_secs * index as i64)
    }

    pub fn midpoint(&self, index: usize) -> DateTime<Utc> {
        self.timestamp(index) + Duration::milliseconds(self.step_secs * 500)
    }

    pub fn end(&self) -> DateTime<Utc> {
        self.timestamp(self.len())
    }

    pub fn points_per_day(&self) -> usize {
        (86_400 / self.step_secs) as usize
    }

    /// Index of the point whose interval starts at `timestamp`.
    pub fn index_of(&self, timestamp: DateTime<Utc>) -> Option<usize> {
        let offset = (timestamp - self.start).num_seconds();
        if offset < 0 || offset % self.step_secs != 0 {
            return None;
        }
        let i = (offset / self.step_secs) as usize;
        (i < self.len()).then_some(i)
    }

    pub fn gap_count(&self) -> usize {
        self.valid.iter().filter(|v| !**v).count()
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> TimeSeries {
        TimeSeries {
            start: self.timestamp(range.start),
            step_secs: self.step_secs,
            values: self.values[range.clone()].to_vec(),
            valid: self.valid[range.clone()].to_vec(),
            zenith: self.zenith.as_ref().map(|z| z[range].to_vec()),
            location: self.location,
            kind: self.kind,
        }
    }

    /// Solar geometry at every point's midpoint. Zenith angles supplied with
    /// the data take precedence for the day/night decision.
    pub fn solar_track(&self) -> Result<SolarTrack> {
        let mut zenith = Vec::with_capacity(self.len());
        let mut extraterrestrial = Vec::with_capacity(self.len());
        for i in 0..self.len() {
            let state = solar::SolarState::at(&self.location, self.midpoint(i))?;
            zenith.push(state.zenith);
            extraterrestrial.push(state.extraterrestrial_irradiance);
        }
        if let Some(data_zenith) = &self.zenith {
            for (z, d) in zenith.iter_mut().zip(data_zenith) {
                if d.is_finite() {
                    *z = *d;
                }
            }
        }
        Ok(SolarTrack {
            zenith,
            extraterrestrial,
        })
    }
}

/// Per-point zenith angle and extraterrestrial irradiance of a series.
#[derive(Debug, Clone, PartialEq)]
pub struct SolarTrack {
    pub zenith: Vec<f64>,
    pub extraterrestrial: Vec<f64>,
}

impl SolarTrack {
    pub fn is_daytime(&self, index: usize) -> bool {
        solar::is_daytime(self.zenith[index])
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> SolarTrack {
        SolarTrack {
            zenith: self.zenith[range.clone()].to_vec(),
            extraterrestrial: self.extraterrestrial[range].to_vec(),
        }
    }
}

/// Column names of an irradiance CSV file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub timestamp: String,
    pub value: String,
    pub zenith: Option<String>,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            timestamp: "timestamp".into(),
            value: "ghi_wm2".into(),
            zenith: Some("zenith_deg".into()),
        }
    }
}

fn parse_timestamp(text: &str) -> Option<DateTime<Utc>> {
    let text = text.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(text) {
        return Some(t.with_timezone(&Utc));
    }
    [
        "%Y-%m-%dT%H:%M:%S",
        "%Y-%m-%d %H:%M:%S",
        "%Y-%m-%dT%H:%M",
        "%Y-%m-%d %H:%M",
    ]
    .iter()
    .find_map(|fmt| NaiveDateTime::parse_from_str(text, fmt).ok())
    .map(|naive| naive.and_utc())
}

pub fn format_timestamp(t: DateTime<Utc>) -> String {
    t.format("%Y-%m-%dT%H:%M:%SZ").to_string()
}

/// Reads an irradiance CSV file. See [`read_csv`].
pub fn ingest_csv(path: impl AsRef<Path>, schema: &CsvSchema, location: GeoLocation) -> Result<TimeSeries> {
    let file = std::fs::File::open(path)?;
    read_csv(file, schema, location)
}

/// Parses irradiance rows with ISO-8601 UTC timestamps at a uniform 1-min or
/// 15-min cadence. Empty irradiance cells become gaps; small negative
/// readings (sensor offsets at night) are clamped to zero.
///
/// Line numbers in errors are 1-based and count the header.
pub fn read_csv<R: Read>(reader: R, schema: &CsvSchema, location: GeoLocation) -> Result<TimeSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let ts_col = column(&schema.timestamp).ok_or_else(|| Error::Parse {
        line: 1,
        message: format!("missing column '{}'", schema.timestamp),
    })?;
    let value_col = column(&schema.value).ok_or_else(|| Error::Parse {
        line: 1,
        message: format!("missing column '{}'", schema.value),
    })?;
    let zenith_col = schema.zenith.as_deref().and_then(column);

    let mut stamps: Vec<DateTime<Utc>> = Vec::new();
    let mut values = Vec::new();
    let mut zenith = Vec::new();
    let mut expected_step: Option<i64> = None;
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let ts_text = record.get(ts_col).unwrap_or("");
        let ts = parse_timestamp(ts_text).ok_or_else(|| Error::Parse {
            line,
            message: format!("unparseable timestamp '{ts_text}'"),
        })?;
        if let Some(prev) = stamps.last() {
            let delta = (ts - *prev).num_seconds();
            if delta <= 0 {
                return Err(Error::Ordering { line });
            }
            match expected_step {
                None => {
                    if delta != ONE_MINUTE_SECS && delta != FIFTEEN_MINUTES_SECS {
                        return Err(Error::Cadence {
                            line,
                            expected_secs: ONE_MINUTE_SECS,
                            found_secs: delta,
                        });
                    }
                    expected_step = Some(delta);
                }
                Some(step) if step != delta => {
                    return Err(Error::Cadence {
                        line,
                        expected_secs: step,
                        found_secs: delta,
                    })
                }
                Some(_) => {}
            }
        }
        let cell = record.get(value_col).unwrap_or("");
        let value = if cell.is_empty() || cell.eq_ignore_ascii_case("nan") {
            f64::NAN
        } else {
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                line,
                message: format!("unparseable irradiance '{cell}'"),
            })?;
            if !v.is_finite() || v > MAX_IRRADIANCE {
                return Err(Error::Parse {
                    line,
                    message: format!("irradiance {v} outside [0, {MAX_IRRADIANCE}]"),
                });
            }
            v.max(0.0)
        };
        if let Some(zc) = zenith_col {
            let cell = record.get(zc).unwrap_or("");
            let z = if cell.is_empty() {
                f64::NAN
            } else {
                cell.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("unparseable zenith '{cell}'"),
                })?
            };
            zenith.push(z);
        }
        stamps.push(ts);
        values.push(value);
    }
    let start = *stamps
        .first()
        .ok_or_else(|| Error::Range("file has no data rows".into()))?;
    let mut series = TimeSeries::new(
        start,
        expected_step.unwrap_or(ONE_MINUTE_SECS),
        values,
        location,
        SeriesKind::Irradiance,
    )?;
    if zenith_col.is_some() {
        series.zenith = Some(zenith);
    }
    Ok(series)
}

/// Writes a series in the ingestion schema. Gaps are written as empty cells.
pub fn write_csv<W: Write>(series: &TimeSeries, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let value_name = match series.kind {
        SeriesKind::Irradiance => "ghi_wm2",
        SeriesKind::Transmissivity => "transmissivity",
    };
    let mut header = vec!["timestamp", value_name];
    if series.zenith.is_some() {
        header.push("zenith_deg");
    }
    wtr.write_record(&header)?;
    for i in 0..series.len() {
        let value = if series.valid[i] {
            format!("{:.4}", series.values[i])
        } else {
            String::new()
        };
        let mut row = vec![format_timestamp(series.timestamp(i)), value];
        if let Some(z) = &series.zenith {
            row.push(if z[i].is_finite() {
                format!("{:.4}", z[i])
            } else {
                String::new()
            });
        }
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

/// One 15-minute block that contained missing source samples.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockGap {
    pub block_start: DateTime<Utc>,
    pub missing: usize,
    /// Whether the block was discarded (otherwise it was interpolated).
    pub invalid: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resampled {
    pub series: TimeSeries,
    pub gaps: Vec<BlockGap>,
}

/// Averages a 1-minute series into 15-minute blocks aligned to quarter
/// hours. Leading samples before the first quarter hour are dropped, as is
/// an incomplete trailing block.
///
/// A block with at most [`MAX_INTERPOLATED_GAP`] missing samples is
/// averaged after linear interpolation; blocks with more are marked invalid
/// and filled by [`fill_invalid`].
pub fn resample_15min(series: &TimeSeries) -> Result<Resampled> {
    if series.step_secs != ONE_MINUTE_SECS {
        return Err(Error::Cadence {
            line: 0,
            expected_secs: ONE_MINUTE_SECS,
            found_secs: series.step_secs,
        });
    }
    let first_minute = series.start.minute() as usize;
    let lead = (15 - first_minute % 15) % 15;
    // sub-minute offsets would put samples astride block boundaries
    if series.start.second() != 0 || series.start.nanosecond() != 0 {
        return Err(Error::Range("1-min series must start on a whole minute".into()));
    }
    if series.len() < lead + 15 {
        return Err(Error::Range(format!(
            "{} samples after alignment is less than one 15-min block",
            series.len().saturating_sub(lead)
        )));
    }
    let blocks = (series.len() - lead) / 15;
    let interpolated = interpolate_gaps(&series.values, &series.valid);
    let mut values = Vec::with_capacity(blocks);
    let mut valid = Vec::with_capacity(blocks);
    let mut gaps = Vec::new();
    let mut zenith = series.zenith.as_ref().map(|_| Vec::with_capacity(blocks));
    for b in 0..blocks {
        let range = lead + 15 * b..lead + 15 * (b + 1);
        let missing = series.valid[range.clone()].iter().filter(|v| !**v).count();
        let ok = missing <= MAX_INTERPOLATED_GAP && interpolated[range.clone()].iter().all(|v| v.is_finite());
        if missing > 0 {
            gaps.push(BlockGap {
                block_start: series.timestamp(range.start),
                missing,
                invalid: !ok,
            });
        }
        if ok {
            values.push(interpolated[range.clone()].iter().sum::<f64>() / 15.0);
        } else {
            values.push(f64::NAN);
        }
        valid.push(ok);
        if let (Some(out), Some(src)) = (zenith.as_mut(), series.zenith.as_ref()) {
            let finite: Vec<f64> = src[range].iter().copied().filter(|z| z.is_finite()).collect();
            out.push(if finite.is_empty() {
                f64::NAN
            } else {
                finite.iter().sum::<f64>() / finite.len() as f64
            });
        }
    }
    let mut out = TimeSeries {
        start: series.timestamp(lead),
        step_secs: FIFTEEN_MINUTES_SECS,
        values,
        valid,
        zenith,
        location: series.location,
        kind: series.kind,
    };
    fill_invalid(&mut out);
    Ok(Resampled { series: out, gaps })
}

/// Brings a 1-min or 15-min series to 15-min resolution. 1-min data is
/// resampled; 15-min data must start on a quarter hour and only has its
/// gaps filled, each missing value reported as an invalid block.
pub fn to_15min(series: &TimeSeries) -> Result<Resampled> {
    match series.step_secs {
        ONE_MINUTE_SECS => resample_15min(series),
        FIFTEEN_MINUTES_SECS => {
            if series.start.minute() % 15 != 0 || series.start.second() != 0 || series.start.nanosecond() != 0 {
                return Err(Error::Range("15-min series must start on a quarter hour".into()));
            }
            let gaps = (0..series.len())
                .filter(|&i| !series.valid[i])
                .map(|i| BlockGap {
                    block_start: series.timestamp(i),
                    missing: 1,
                    invalid: true,
                })
                .collect();
            let mut out = series.clone();
            fill_invalid(&mut out);
            Ok(Resampled { series: out, gaps })
        }
        other => Err(Error::Cadence {
            line: 0,
            expected_secs: FIFTEEN_MINUTES_SECS,
            found_secs: other,
        }),
    }
}

/// Linear interpolation of non-finite/invalid entries between the nearest
/// valid neighbours; constant extrapolation at the ends.
fn interpolate_gaps(values: &[f64], valid: &[bool]) -> Vec<f64> {
    let mut out = values.to_vec();
    let known: Vec<usize> = (0..values.len())
        .filter(|&i| valid[i] && values[i].is_finite())
        .collect();
    if known.is_empty() {
        return out;
    }
    let mut next = 0;
    for i in 0..values.len() {
        if valid[i] && values[i].is_finite() {
            continue;
        }
        while next < known.len() && known[next] < i {
            next += 1;
        }
        let before = next.checked_sub(1).map(|k| known[k]);
        let after = known.get(next).copied();
        out[i] = match (before, after) {
            (Some(a), Some(b)) => {
                let w = (i - a) as f64 / (b - a) as f64;
                values[a] + w * (values[b] - values[a])
            }
            (Some(a), None) => values[a],
            (None, Some(b)) => values[b],
            (None, None) => f64::NAN,
        };
    }
    out
}

/// Replaces the values of invalid points by linear interpolation so that
/// models can use them as inputs. The points stay flagged invalid and never
/// enter training targets or error statistics.
pub fn fill_invalid(series: &mut TimeSeries) {
    if series.valid.iter().all(|v| *v) {
        return;
    }
    let filled = interpolate_gaps(&series.values, &series.valid);
    series.values = filled
        .into_iter()
        .map(|v| if v.is_finite() { v } else { 0.0 })
        .collect();
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NightMode {
    AllDayAndNight,
    ClockWindow,
    SunAboveHorizon,
}

impl NightMode {
    pub fn as_str(self) -> &'static str {
        match self {
            NightMode::AllDayAndNight => "all_day_and_night",
            NightMode::ClockWindow => "clock_window",
            NightMode::SunAboveHorizon => "sun_above_horizon",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "all_day_and_night" => Some(NightMode::AllDayAndNight),
            "clock_window" => Some(NightMode::ClockWindow),
            "sun_above_horizon" => Some(NightMode::SunAboveHorizon),
            _ => None,
        }
    }
}

/// Which points of a training series enter the reference data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NightPolicy {
    pub mode: NightMode,
    /// Local standard time window, minutes after midnight, `[start, end)`.
    pub window_start_min: u32,
    pub window_end_min: u32,
}

impl NightPolicy {
    pub const fn new(mode: NightMode) -> Self {
        Self {
            mode,
            window_start_min: 5 * 60,
            window_end_min: 20 * 60,
        }
    }

    pub fn with_window(mode: NightMode, start_min: u32, end_min: u32) -> Result<Self> {
        if start_min >= end_min || end_min > 24 * 60 {
            return Err(Error::Config(format!(
                "clock window {start_min}..{end_min} min is empty or exceeds a day"
            )));
        }
        Ok(Self {
            mode,
            window_start_min: start_min,
            window_end_min: end_min,
        })
    }
}

/// Inclusion mask for `series` under `policy` (true = included). Values are
/// never touched.
pub fn apply_night_policy(series: &TimeSeries, track: &SolarTrack, policy: &NightPolicy) -> Vec<bool> {
    match policy.mode {
        NightMode::AllDayAndNight => vec![true; series.len()],
        NightMode::ClockWindow => (0..series.len())
            .map(|i| {
                let local = series.timestamp(i) + Duration::minutes(i64::from(series.location.utc_offset_minutes));
                let minute = local.hour() * 60 + local.minute();
                (policy.window_start_min..policy.window_end_min).contains(&minute)
            })
            .collect(),
        NightMode::SunAboveHorizon => (0..series.len()).map(|i| track.is_daytime(i)).collect(),
    }
}

/// Night policy combined with gap validity.
pub fn training_mask(series: &TimeSeries, track: &SolarTrack, policy: &NightPolicy) -> Vec<bool> {
    apply_night_policy(series, track, policy)
        .into_iter()
        .zip(&series.valid)
        .map(|(a, b)| a && *b)
        .collect()
}

/// Irradiance to transmissivity, `I / I_e`. Points with `I_e` below
/// [`TRANSMISSIVITY_FLOOR`] map to 0; the result is capped to
/// `[0, MAX_TRANSMISSIVITY]`.
pub fn to_transmissivity(series: &TimeSeries, extraterrestrial: &[f64]) -> Result<TimeSeries> {
    if series.kind != SeriesKind::Irradiance {
        return Err(Error::Config("series is already transmissivity".into()));
    }
    if extraterrestrial.len() != series.len() {
        return Err(Error::Dimension {
            expected: series.len(),
            found: extraterrestrial.len(),
        });
    }
    let values = series
        .values
        .iter()
        .zip(extraterrestrial)
        .map(|(&i, &ie)| transmissivity(i, ie))
        .collect();
    Ok(TimeSeries {
        values,
        kind: SeriesKind::Transmissivity,
        ..series.clone()
    })
}

pub fn transmissivity(irradiance: f64, extraterrestrial: f64) -> f64 {
    if extraterrestrial < TRANSMISSIVITY_FLOOR {
        0.0
    } else {
        (irradiance / extraterrestrial).clamp(0.0, MAX_TRANSMISSIVITY)
    }
}

/// Irradiance forecast from a transmissivity forecast and the
/// extraterrestrial irradiance at the forecast times.
pub fn from_transmissivity(tau: &[f64], extraterrestrial: &[f64]) -> Result<Vec<f64>> {
    if tau.len() != extraterrestrial.len() {
        return Err(Error::Dimension {
            expected: tau.len(),
            found: extraterrestrial.len(),
        });
    }
    Ok(tau
        .iter()
        .zip(extraterrestrial)
        .map(|(&t, &ie)| t.clamp(0.0, MAX_TRANSMISSIVITY) * ie)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub training_days: usize,
    pub test_days: usize,
}

impl SplitSpec {
    pub fn new(training_days: usize, test_days: usize) -> Result<Self> {
        if training_days == 0 || test_days == 0 {
            return Err(Error::Config("training and test windows need at least one day".into()));
        }
        Ok(Self {
            training_days,
            test_days,
        })
    }
}

/// Index ranges of a split: the test window is the last `test_days` of the
/// series and the training window the `training_days` right before it.
pub fn split_ranges(
    len: usize,
    points_per_day: usize,
    spec: &SplitSpec,
) -> Result<(std::ops::Range<usize>, std::ops::Range<usize>)> {
    let train = spec.training_days * points_per_day;
    let test = spec.test_days * points_per_day;
    if train + test > len {
        return Err(Error::Range(format!(
            "{} + {} days need {} points, series has {len}",
            spec.training_days,
            spec.test_days,
            train + test
        )));
    }
    let test_start = len - test;
    Ok((test_start - train..test_start, test_start..len))
}

pub fn split_train_test(series: &TimeSeries, spec: &SplitSpec) -> Result<(TimeSeries, TimeSeries)> {
    let (train, test) = split_ranges(series.len(), series.points_per_day(), spec)?;
    Ok((series.slice(train), series.slice(test)))
}
