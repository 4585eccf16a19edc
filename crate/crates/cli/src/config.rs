//! Run configuration files.
//!
//! ```toml
//! grid = "reduced"
//! workers = 4
//! seed = 1
//!
//! [location]
//! latitude = 39.74
//! longitude = -105.18
//! elevation_m = 1829.0
//! utc_offset_minutes = -420
//!
//! [[datasets]]
//! id = "golden"
//! path = "golden.csv"
//! ```
//!
//! `grid` is `"full"`, `"reduced"` or an array of point tables using the
//! result-file column names. Relative dataset paths are resolved against
//! the directory of the configuration file.

use std::path::{Path, PathBuf};
use std::time::Duration;

use chrono::NaiveDate;
use irrcast::data::{CsvSchema, NightMode};
use irrcast::search::{self, GroupBy, HyperparameterPoint, PointFields, SearchConfig};
use irrcast::solar::GeoLocation;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub datasets: Vec<DatasetConfig>,
    pub location: Option<LocationConfig>,
    pub grid: Option<toml::Value>,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default = "default_test_days")]
    pub test_days: usize,
    /// Per-fit budget for (S)ARIMA; 0 disables it.
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub record_timing: bool,
    /// Local clock window `[start, end)` in minutes after midnight used by
    /// the `clock_window` night policy.
    pub night_window: Option<[u32; 2]>,
    #[serde(default = "default_group_by")]
    pub group_by: Vec<String>,
    pub synth: Option<SynthConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub id: String,
    pub path: PathBuf,
    pub location: Option<LocationConfig>,
    pub timestamp_column: Option<String>,
    pub value_column: Option<String>,
    pub zenith_column: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct LocationConfig {
    pub latitude: f64,
    pub longitude: f64,
    #[serde(default)]
    pub elevation_m: f64,
    #[serde(default)]
    pub utc_offset_minutes: i32,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub start: Option<String>,
    pub days: Option<usize>,
}

fn default_horizon() -> usize {
    irrcast::forecast::DEFAULT_HORIZON
}

fn default_test_days() -> usize {
    search::DEFAULT_TEST_DAYS
}

fn default_timeout() -> u64 {
    60
}

fn default_workers() -> usize {
    1
}

fn default_group_by() -> Vec<String> {
    vec!["method".into()]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum GridName {
    Full,
    Reduced,
}

impl GridName {
    pub fn as_str(self) -> &'static str {
        match self {
            GridName::Full => "full",
            GridName::Reduced => "reduced",
        }
    }
}

/// Grid named in a configuration or on the command line.
#[derive(Debug, Clone)]
pub enum Grid {
    Named(GridName),
    Explicit(Vec<HyperparameterPoint>),
}

impl Grid {
    pub fn label(&self) -> &'static str {
        match self {
            Grid::Named(n) => n.as_str(),
            Grid::Explicit(_) => "explicit",
        }
    }

    pub fn points(&self) -> Vec<HyperparameterPoint> {
        match self {
            Grid::Named(GridName::Full) => search::enumerate_full_grid(),
            Grid::Named(GridName::Reduced) => search::enumerate_reduced_grid(),
            Grid::Explicit(points) => points.clone(),
        }
    }
}

impl LocationConfig {
    pub fn to_location(self) -> Result<GeoLocation> {
        Ok(GeoLocation::new(
            self.latitude,
            self.longitude,
            self.elevation_m,
            self.utc_offset_minutes,
        )?)
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut config: RunConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for d in &mut config.datasets {
            if d.path.is_relative() {
                d.path = base.join(&d.path);
            }
        }
        Ok(config)
    }

    pub fn grid(&self) -> Result<Grid> {
        let bad = |msg: String| CliError::Config(format!("grid: {msg}"));
        match &self.grid {
            None => Ok(Grid::Named(GridName::Reduced)),
            Some(toml::Value::String(name)) => match name.as_str() {
                "full" => Ok(Grid::Named(GridName::Full)),
                "reduced" => Ok(Grid::Named(GridName::Reduced)),
                other => Err(bad(format!(
                    "expected \"full\", \"reduced\" or a list of points, found {other:?}"
                ))),
            },
            Some(toml::Value::Array(items)) => {
                if items.is_empty() {
                    return Err(bad("the point list is empty".into()));
                }
                items
                    .iter()
                    .enumerate()
                    .map(|(i, item)| {
                        let fields: PointFields =
                            item.clone().try_into().map_err(|e| bad(format!("point {i}: {e}")))?;
                        HyperparameterPoint::from_fields(&fields).map_err(|e| bad(format!("point {i}: {e}")))
                    })
                    .collect::<Result<Vec<_>>>()
                    .map(Grid::Explicit)
            }
            Some(_) => Err(bad("expected a string or an array of tables".into())),
        }
    }

    pub fn group_by(&self) -> Result<Vec<GroupBy>> {
        parse_group_by(&self.group_by)
    }

    pub fn search_config(&self) -> Result<SearchConfig> {
        if self.horizon == 0 {
            return Err(CliError::Config("horizon must be at least 1".into()));
        }
        if self.test_days == 0 {
            return Err(CliError::Config("test_days must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(CliError::Config("workers must be at least 1".into()));
        }
        let night_window = match self.night_window {
            Some([start, end]) => {
                irrcast::data::NightPolicy::with_window(NightMode::ClockWindow, start, end)?;
                Some((start, end))
            }
            None => None,
        };
        Ok(SearchConfig {
            horizon: self.horizon,
            test_days: self.test_days,
            timeout: (self.timeout_secs > 0).then(|| Duration::from_secs(self.timeout_secs)),
            workers: self.workers,
            record_timing: self.record_timing,
            night_window,
        })
    }

    pub fn synth_start(&self) -> Result<Option<NaiveDate>> {
        self.synth
            .as_ref()
            .and_then(|s| s.start.as_deref())
            .map(parse_date)
            .transpose()
    }
}

impl DatasetConfig {
    pub fn schema(&self) -> CsvSchema {
        let default = CsvSchema::default();
        CsvSchema {
            timestamp: self.timestamp_column.clone().unwrap_or(default.timestamp),
            value: self.value_column.clone().unwrap_or(default.value),
            zenith: self.zenith_column.clone().or(default.zenith),
        }
    }
}

pub fn parse_date(text: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(text, "%Y-%m-%d")
        .map_err(|e| CliError::Config(format!("date {text:?} is not YYYY-MM-DD: {e}")))
}

pub fn parse_group_by(names: &[String]) -> Result<Vec<GroupBy>> {
    names
        .iter()
        .filter(|n| !n.is_empty())
        .map(|n| GroupBy::parse(n).ok_or_else(|| CliError::Config(format!("unknown group_by dimension {n:?}"))))
        .collect()
}
