use std::collections::HashSet;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use chrono::{DateTime, NaiveDateTime, Utc};
use irrcast::data::{self, CsvSchema, Resampled};
use irrcast::search::{
    self, Dataset, EvaluationRecord, GroupBy, HyperparameterPoint, PointFields, PreparedDataset, SummaryRow,
};
use irrcast::solar::GeoLocation;
use irrcast::synth::{self, CloudModel};
use serde::Serialize;

use crate::config::{parse_date, parse_group_by, Grid, LocationConfig, RunConfig};
use crate::error::{in_file, CliError, Result};
use crate::{GlobalArgs, LocationArgs};

const DEFAULT_SYNTH_DAYS: usize = 67;
/// Seven test days plus at least one training day.
const MIN_SYNTH_DAYS: usize = 8;

fn load_config(g: &GlobalArgs) -> Result<Option<RunConfig>> {
    g.config.as_deref().map(RunConfig::load).transpose()
}

fn require_config(g: &GlobalArgs) -> Result<RunConfig> {
    let mut config = load_config(g)?.ok_or_else(|| CliError::Config("this command needs --config".into()))?;
    if let Some(workers) = g.workers {
        config.workers = workers;
    }
    if let Some(seed) = g.seed {
        config.seed = seed;
    }
    if let Some(timeout) = g.timeout_secs {
        config.timeout_secs = timeout;
    }
    Ok(config)
}

/// Flags override the configured location field by field.
fn resolve_location(args: &LocationArgs, configured: Option<LocationConfig>) -> Result<GeoLocation> {
    let missing = |name: &str| CliError::Config(format!("location needs --{name} or a [location] table"));
    let latitude = args
        .latitude
        .or(configured.map(|c| c.latitude))
        .ok_or_else(|| missing("latitude"))?;
    let longitude = args
        .longitude
        .or(configured.map(|c| c.longitude))
        .ok_or_else(|| missing("longitude"))?;
    LocationConfig {
        latitude,
        longitude,
        elevation_m: args.elevation_m.or(configured.map(|c| c.elevation_m)).unwrap_or(0.0),
        utc_offset_minutes: args
            .utc_offset_minutes
            .or(configured.map(|c| c.utc_offset_minutes))
            .unwrap_or(0),
    }
    .to_location()
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn create_out_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| CliError::Config(format!("{}: {e}", out.display())))
}

pub fn prepare(g: &GlobalArgs, input: &Path, location: &LocationArgs, columns: [Option<String>; 3]) -> Result<()> {
    let config = load_config(g)?;
    let location = resolve_location(location, config.as_ref().and_then(|c| c.location))?;
    let default = CsvSchema::default();
    let [timestamp, value, zenith] = columns;
    let schema = CsvSchema {
        timestamp: timestamp.unwrap_or(default.timestamp),
        value: value.unwrap_or(default.value),
        zenith: zenith.or(default.zenith),
    };
    let raw = data::ingest_csv(input, &schema, location).map_err(in_file(input))?;
    let Resampled { series, gaps } = data::to_15min(&raw).map_err(in_file(input))?;

    let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("prepared");
    let series_path = g.out.join(format!("{stem}_15min.csv"));
    let gaps_path = g.out.join(format!("{stem}_gaps.csv"));
    create_out_dir(&g.out)?;
    data::write_csv(&series, create(&series_path)?)?;
    let mut report = csv::Writer::from_writer(create(&gaps_path)?);
    report
        .write_record(["block_start", "missing_samples", "action"])
        .map_err(irrcast::Error::from)?;
    for gap in &gaps {
        report
            .write_record([
                data::format_timestamp(gap.block_start),
                gap.missing.to_string(),
                if gap.invalid { "invalid" } else { "interpolated" }.to_string(),
            ])
            .map_err(irrcast::Error::from)?;
    }
    report.flush()?;
    let invalid = gaps.iter().filter(|g| g.invalid).count();
    eprintln!(
        "prepare: {} rows -> {} intervals, {} blocks with gaps ({} invalid)",
        raw.len(),
        series.len(),
        gaps.len(),
        invalid
    );
    eprintln!("wrote {} and {}", series_path.display(), gaps_path.display());
    Ok(())
}

pub fn synth(g: &GlobalArgs, location: &LocationArgs, start: Option<&str>, days: Option<usize>) -> Result<()> {
    let config = load_config(g)?;
    let location = resolve_location(location, config.as_ref().and_then(|c| c.location))?;
    let start = match start {
        Some(text) => parse_date(text)?,
        None => config
            .as_ref()
            .map(RunConfig::synth_start)
            .transpose()?
            .flatten()
            .ok_or_else(|| CliError::Config("synth needs --start or synth.start".into()))?,
    };
    let days = days
        .or(config.as_ref().and_then(|c| c.synth.as_ref()).and_then(|s| s.days))
        .unwrap_or(DEFAULT_SYNTH_DAYS);
    if days < MIN_SYNTH_DAYS {
        return Err(CliError::Config(format!(
            "synth needs at least {MIN_SYNTH_DAYS} days (7 test days plus training), got {days}"
        )));
    }
    let seed = g.seed.or(config.as_ref().map(|c| c.seed)).unwrap_or(0);
    let generated = synth::generate(location, start, days, seed, &CloudModel::default())?;
    let path = g.out.join("synthetic.csv");
    create_out_dir(&g.out)?;
    synth::write_csv(&generated, create(&path)?)?;
    eprintln!("synth: {days} days from {start}, seed {seed}, wrote {}", path.display());
    Ok(())
}

fn load_dataset(config: &RunConfig, index: usize) -> Result<Dataset> {
    let d = &config.datasets[index];
    let location = d
        .location
        .or(config.location)
        .ok_or_else(|| CliError::Config(format!("dataset {}: no location given", d.id)))?
        .to_location()?;
    let raw = data::ingest_csv(&d.path, &d.schema(), location).map_err(in_file(&d.path))?;
    let Resampled { series, gaps } = data::to_15min(&raw).map_err(in_file(&d.path))?;
    let invalid = gaps.iter().filter(|g| g.invalid).count();
    if invalid > 0 {
        eprintln!("dataset {}: {invalid} invalid 15-min intervals", d.id);
    }
    Ok(Dataset {
        id: d.id.clone(),
        series,
    })
}

fn load_datasets(config: &RunConfig) -> Result<Vec<Dataset>> {
    if config.datasets.is_empty() {
        return Err(CliError::Config("the configuration lists no datasets".into()));
    }
    let mut seen = HashSet::new();
    for d in &config.datasets {
        if !seen.insert(d.id.as_str()) {
            return Err(CliError::Config(format!("dataset id {:?} appears twice", d.id)));
        }
    }
    (0..config.datasets.len()).map(|i| load_dataset(config, i)).collect()
}

fn parse_origin(text: &str) -> Result<DateTime<Utc>> {
    if let Ok(t) = DateTime::parse_from_rfc3339(text) {
        return Ok(t.with_timezone(&Utc));
    }
    [
        "%Y-%m-%dT%H:%M:%S",
        "%Y-%m-%d %H:%M:%S",
        "%Y-%m-%dT%H:%M",
        "%Y-%m-%d %H:%M",
    ]
    .iter()
    .find_map(|f| NaiveDateTime::parse_from_str(text, f).ok())
    .map(|t| t.and_utc())
    .ok_or_else(|| CliError::Config(format!("origin {text:?} is not a timestamp")))
}

fn load_point(path: &Path) -> Result<HyperparameterPoint> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let fields: PointFields =
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    HyperparameterPoint::from_fields(&fields).map_err(in_file(path))
}

pub fn forecast(g: &GlobalArgs, origin: &str, point: Option<&Path>, dataset: Option<&str>) -> Result<()> {
    let config = require_config(g)?;
    let search_config = config.search_config()?;
    let origin = parse_origin(origin)?;
    let point = match point {
        Some(path) => load_point(path)?,
        None => search::reference_point(),
    };
    let index = match dataset {
        Some(id) => config
            .datasets
            .iter()
            .position(|d| d.id == id)
            .ok_or_else(|| CliError::Config(format!("no dataset with id {id:?}")))?,
        None if config.datasets.is_empty() => {
            return Err(CliError::Config("the configuration lists no datasets".into()))
        }
        None => 0,
    };
    let prepared = PreparedDataset::new(&load_dataset(&config, index)?)?;
    let series = &prepared.irradiance;
    let origin_index = series.index_of(origin).ok_or_else(|| {
        CliError::Config(format!(
            "origin {} is not the start of a 15-min interval between {} and {}",
            data::format_timestamp(origin),
            data::format_timestamp(series.start),
            data::format_timestamp(series.timestamp(series.len() - 1))
        ))
    })?;
    let result = search::forecast_at(&prepared, &point, origin_index, &search_config)?;

    let path = g.out.join("forecast.csv");
    create_out_dir(&g.out)?;
    let mut out = csv::Writer::from_writer(create(&path)?);
    out.write_record(["step", "target", "forecast_wm2", "extraterrestrial_wm2"])
        .map_err(irrcast::Error::from)?;
    println!("origin {}", data::format_timestamp(result.origin));
    for (j, ((t, v), ie)) in result
        .targets
        .iter()
        .zip(&result.irradiance)
        .zip(&result.extraterrestrial)
        .enumerate()
    {
        let row = [
            (j + 1).to_string(),
            data::format_timestamp(*t),
            v.to_string(),
            ie.to_string(),
        ];
        out.write_record(&row).map_err(irrcast::Error::from)?;
        println!("{:>3}  {}  {:>9.2}", j + 1, row[1], v);
    }
    out.flush()?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

#[derive(Serialize)]
struct Manifest<'a> {
    version: &'static str,
    grid: &'static str,
    points: usize,
    seed: u64,
    horizon: usize,
    test_days: usize,
    timeout_secs: u64,
    workers: usize,
    record_timing: bool,
    group_by: Vec<&'static str>,
    datasets: Vec<ManifestDataset<'a>>,
}

#[derive(Serialize)]
struct ManifestDataset<'a> {
    id: &'a str,
    path: String,
    intervals: usize,
    first_interval: String,
}

pub fn search(g: &GlobalArgs) -> Result<()> {
    let config = require_config(g)?;
    let grid = match g.grid {
        Some(name) => Grid::Named(name),
        None => config.grid()?,
    };
    let group_by = config.group_by()?;
    let search_config = config.search_config()?;
    let points = grid.points();
    let datasets = load_datasets(&config)?;
    for d in &datasets {
        PreparedDataset::new(d)?;
    }
    create_out_dir(&g.out)?;

    let total = points.len() * datasets.len();
    eprintln!(
        "search: {} grid, {} points x {} datasets, {} workers",
        grid.label(),
        points.len(),
        datasets.len(),
        search_config.workers
    );
    let reported = AtomicUsize::new(0);
    let progress = |done: usize, total: usize| {
        let tenth = done * 10 / total.max(1);
        if reported.fetch_max(tenth, Ordering::Relaxed) < tenth {
            eprintln!("search: {done}/{total} points");
        }
    };
    let records = search::run_search(&datasets, &points, &search_config, &progress)?;
    if records.len() != total {
        return Err(CliError::Invariant(format!(
            "{} records for {total} grid points",
            records.len()
        )));
    }
    let reference = search::run_search(&datasets, &[search::reference_point()], &search_config, &|_, _| {})?;
    let summary = search::summarize(&records, &group_by)?;
    for key in &summary.omitted {
        eprintln!("summary: group {key} has no successful records and is omitted");
    }

    search::persist_results(&records, g.out.join("results.csv"))?;
    search::persist_results(&reference, g.out.join("reference.csv"))?;
    search::persist_summary(&summary.rows, g.out.join("summary.csv"))?;
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        grid: grid.label(),
        points: points.len(),
        seed: config.seed,
        horizon: search_config.horizon,
        test_days: search_config.test_days,
        timeout_secs: config.timeout_secs,
        workers: search_config.workers,
        record_timing: search_config.record_timing,
        group_by: group_by.iter().map(|g| g.as_str()).collect(),
        datasets: config
            .datasets
            .iter()
            .zip(&datasets)
            .map(|(c, d)| ManifestDataset {
                id: &c.id,
                path: c.path.display().to_string(),
                intervals: d.series.len(),
                first_interval: data::format_timestamp(d.series.start),
            })
            .collect(),
    };
    let text = toml::to_string(&manifest).map_err(|e| CliError::Invariant(e.to_string()))?;
    std::fs::write(g.out.join("run_manifest.toml"), text)?;

    let failed = records.iter().filter(|r| r.status != search::Status::Ok).count();
    eprintln!("search: {} records, {failed} failed", records.len());
    print_table(&search::summarize(&records, &[GroupBy::Method])?.rows);
    print_reference(&reference);
    eprintln!(
        "wrote results.csv, reference.csv, summary.csv, run_manifest.toml to {}",
        g.out.display()
    );
    Ok(())
}

pub fn summarize(g: &GlobalArgs, results: &Path, group_by: Option<&[String]>) -> Result<()> {
    let group_by = match group_by {
        Some(names) => parse_group_by(names)?,
        None => match load_config(g)? {
            Some(config) => config.group_by()?,
            None => vec![GroupBy::Method],
        },
    };
    let records = search::load_results(results).map_err(in_file(results))?;
    let summary = search::summarize(&records, &group_by).map_err(in_file(results))?;
    for key in &summary.omitted {
        eprintln!("summary: group {key} has no successful records and is omitted");
    }
    let path: PathBuf = g.out.join("summary.csv");
    create_out_dir(&g.out)?;
    search::persist_summary(&summary.rows, &path)?;
    print_table(&summary.rows);
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn print_table(rows: &[SummaryRow]) {
    let width = rows.iter().map(|r| r.group_key.len()).max().unwrap_or(5).max(5);
    let mut out = std::io::stdout().lock();
    let _ = writeln!(
        out,
        "{:<width$}  step  count      min       q1   median       q3",
        "group"
    );
    for r in rows {
        let s = &r.stats;
        let _ = writeln!(
            out,
            "{:<width$}  {:>4}  {:>5}  {:>7.2}  {:>7.2}  {:>7.2}  {:>7.2}",
            r.group_key, r.step, s.count, s.min, s.q1, s.median, s.q3
        );
    }
}

fn print_reference(reference: &[EvaluationRecord]) {
    for r in reference {
        let steps: Vec<String> = search::SUMMARY_STEPS
            .iter()
            .map(|&j| match r.rmse.get(j - 1).copied().flatten() {
                Some(v) => format!("RMSE_{j} {v:.2}"),
                None => format!("RMSE_{j} -"),
            })
            .collect();
        println!("reference {}: {}", r.dataset_id, steps.join(", "));
    }
}
