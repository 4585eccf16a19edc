use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::arima::ArimaSpec;
use crate::data::NightMode;
use crate::error::{Error, Result};
use crate::nnr::{Neighborhood, NnrSpec, WeightMode};

use super::grid::{DataSpec, HyperparameterPoint, Method, ModelSpec, Preprocessing};
use super::run::{EvaluationRecord, Status};
use super::summary::SummaryRow;

/// A hyperparameter point as flat, optional columns. Shared by the result
/// files and explicit grid lists in run configurations.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointFields {
    pub method: String,
    pub p: Option<usize>,
    pub d: Option<usize>,
    pub q: Option<usize>,
    #[serde(rename = "P_seas")]
    pub seasonal_p: Option<usize>,
    #[serde(rename = "D_seas")]
    pub seasonal_d: Option<usize>,
    #[serde(rename = "Q_seas")]
    pub seasonal_q: Option<usize>,
    pub season: Option<usize>,
    pub weight_mode: Option<String>,
    pub neighborhood_mode: Option<String>,
    pub k: Option<usize>,
    pub epsilon: Option<f64>,
    pub preprocessing: String,
    pub night_policy: String,
    pub training_days: usize,
}

impl HyperparameterPoint {
    pub fn to_fields(&self) -> PointFields {
        let mut f = PointFields {
            method: self.method.as_str().to_string(),
            preprocessing: self.data.preprocessing.as_str().to_string(),
            night_policy: self.data.night_policy.as_str().to_string(),
            training_days: self.data.training_days,
            ..PointFields::default()
        };
        match self.model {
            ModelSpec::Persistence => {}
            ModelSpec::Arima(spec) => {
                f.p = Some(spec.p);
                f.d = Some(spec.d);
                f.q = Some(spec.q);
                if spec.season > 0 {
                    f.seasonal_p = Some(spec.seasonal_p);
                    f.seasonal_d = Some(spec.seasonal_d);
                    f.seasonal_q = Some(spec.seasonal_q);
                    f.season = Some(spec.season);
                }
            }
            ModelSpec::Nnr(spec) => {
                f.p = Some(spec.p);
                if spec.seasonal_p > 0 {
                    f.seasonal_p = Some(spec.seasonal_p);
                    f.season = Some(spec.season);
                }
                f.weight_mode = Some(spec.weight.as_str().to_string());
                match spec.neighborhood {
                    Neighborhood::FixedK(k) => {
                        f.neighborhood_mode = Some("k".into());
                        f.k = Some(k);
                    }
                    Neighborhood::MaxDistance(eps) => {
                        f.neighborhood_mode = Some("epsilon".into());
                        f.epsilon = Some(eps);
                    }
                }
            }
        }
        f
    }

    pub fn from_fields(f: &PointFields) -> Result<Self> {
        let bad = |what: &str| Error::Config(format!("{} point: {what}", f.method));
        let method = Method::parse(&f.method).ok_or_else(|| bad("unknown method"))?;
        let need = |v: Option<usize>, name: &str| v.ok_or_else(|| bad(&format!("missing {name}")));
        let model = match method {
            Method::Persistence => ModelSpec::Persistence,
            Method::Arima => ModelSpec::Arima(ArimaSpec::arima(need(f.p, "p")?, need(f.d, "d")?, need(f.q, "q")?)),
            Method::Sarima => ModelSpec::Arima(ArimaSpec::sarima(
                (need(f.p, "p")?, need(f.d, "d")?, need(f.q, "q")?),
                (
                    need(f.seasonal_p, "P_seas")?,
                    need(f.seasonal_d, "D_seas")?,
                    need(f.seasonal_q, "Q_seas")?,
                ),
                need(f.season, "season")?,
            )),
            Method::Nnr | Method::Snnr => {
                let weight = f
                    .weight_mode
                    .as_deref()
                    .and_then(WeightMode::parse)
                    .ok_or_else(|| bad("missing or unknown weight_mode"))?;
                let neighborhood = match f.neighborhood_mode.as_deref() {
                    Some("k") => Neighborhood::FixedK(need(f.k, "k")?),
                    Some("epsilon") => Neighborhood::MaxDistance(f.epsilon.ok_or_else(|| bad("missing epsilon"))?),
                    _ => return Err(bad("neighborhood_mode must be k or epsilon")),
                };
                let spec = NnrSpec::new(need(f.p, "p")?, weight, neighborhood);
                ModelSpec::Nnr(if method == Method::Snnr {
                    spec.seasonal(need(f.seasonal_p, "P_seas")?, need(f.season, "season")?)
                } else {
                    spec
                })
            }
        };
        let point = HyperparameterPoint {
            method,
            model,
            data: DataSpec {
                preprocessing: Preprocessing::parse(&f.preprocessing)
                    .ok_or_else(|| bad(&format!("unknown preprocessing {:?}", f.preprocessing)))?,
                night_policy: NightMode::parse(&f.night_policy)
                    .ok_or_else(|| bad(&format!("unknown night_policy {:?}", f.night_policy)))?,
                training_days: f.training_days,
            },
        };
        point.validate()?;
        Ok(point)
    }
}

const POINT_COLUMNS: [&str; 15] = [
    "method",
    "p",
    "d",
    "q",
    "P_seas",
    "D_seas",
    "Q_seas",
    "season",
    "weight_mode",
    "neighborhood_mode",
    "k",
    "epsilon",
    "preprocessing",
    "night_policy",
    "training_days",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

pub fn result_header(horizon: usize) -> Vec<String> {
    let mut h = vec!["dataset_id".to_string()];
    h.extend(POINT_COLUMNS.iter().map(|c| c.to_string()));
    h.extend(["status", "fit_seconds", "m"].map(String::from));
    h.extend((1..=horizon).map(|j| format!("rmse_{j:02}")));
    h
}

pub fn write_results<W: Write>(records: &[EvaluationRecord], writer: W) -> Result<()> {
    let horizon = records
        .first()
        .map_or(crate::forecast::DEFAULT_HORIZON, |r| r.rmse.len());
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(result_header(horizon))?;
    for r in records {
        if r.rmse.len() != horizon {
            return Err(Error::Dimension {
                expected: horizon,
                found: r.rmse.len(),
            });
        }
        let f = r.point.to_fields();
        let mut row = vec![
            r.dataset_id.clone(),
            f.method,
            opt(f.p),
            opt(f.d),
            opt(f.q),
            opt(f.seasonal_p),
            opt(f.seasonal_d),
            opt(f.seasonal_q),
            opt(f.season),
            f.weight_mode.unwrap_or_default(),
            f.neighborhood_mode.unwrap_or_default(),
            opt(f.k),
            opt(f.epsilon),
            f.preprocessing,
            f.night_policy,
            f.training_days.to_string(),
            r.status.as_str().to_string(),
            opt(r.fit_seconds),
            r.m.to_string(),
        ];
        row.extend(r.rmse.iter().map(|v| opt(*v)));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn persist_results(records: &[EvaluationRecord], path: impl AsRef<Path>) -> Result<()> {
    write_results(records, std::fs::File::create(path)?)
}

pub fn read_results<R: Read>(reader: R) -> Result<Vec<EvaluationRecord>> {
    let mut input = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let header: Vec<String> = input.headers()?.iter().map(String::from).collect();
    let fixed = 1 + POINT_COLUMNS.len() + 3;
    let horizon = header.len().saturating_sub(fixed);
    if horizon == 0 || header != result_header(horizon) {
        return Err(Error::Parse {
            line: 1,
            message: "unexpected result header".into(),
        });
    }
    let mut records = Vec::new();
    for (i, row) in input.records().enumerate() {
        let line = i + 2;
        let row = row?;
        let fail = |message: String| Error::Parse { line, message };
        if row.len() != header.len() {
            return Err(fail(format!("expected {} fields, found {}", header.len(), row.len())));
        }
        let cell = |c: usize| row.get(c).unwrap_or("");
        let num = |c: usize| -> Result<Option<usize>> {
            let s = cell(c);
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse()
                    .map(Some)
                    .map_err(|_| fail(format!("{}: not an integer: {s:?}", header[c])))
            }
        };
        let real = |c: usize| -> Result<Option<f64>> {
            let s = cell(c);
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse()
                    .map(Some)
                    .map_err(|_| fail(format!("{}: not a number: {s:?}", header[c])))
            }
        };
        let text = |c: usize| -> Option<String> { (!cell(c).is_empty()).then(|| cell(c).to_string()) };
        let fields = PointFields {
            method: cell(1).to_string(),
            p: num(2)?,
            d: num(3)?,
            q: num(4)?,
            seasonal_p: num(5)?,
            seasonal_d: num(6)?,
            seasonal_q: num(7)?,
            season: num(8)?,
            weight_mode: text(9),
            neighborhood_mode: text(10),
            k: num(11)?,
            epsilon: real(12)?,
            preprocessing: cell(13).to_string(),
            night_policy: cell(14).to_string(),
            training_days: num(15)?.ok_or_else(|| fail("missing training_days".into()))?,
        };
        let point = HyperparameterPoint::from_fields(&fields).map_err(|e| fail(e.to_string()))?;
        let status = Status::parse(cell(16)).ok_or_else(|| fail(format!("unknown status {:?}", cell(16))))?;
        let rmse = (fixed..header.len()).map(real).collect::<Result<Vec<_>>>()?;
        if (status == Status::Ok) != rmse.iter().all(Option::is_some) {
            return Err(fail("status disagrees with the defined RMSE steps".into()));
        }
        records.push(EvaluationRecord {
            dataset_id: cell(0).to_string(),
            point,
            status,
            fit_seconds: real(17)?,
            m: num(18)?.ok_or_else(|| fail("missing m".into()))?,
            rmse,
        });
    }
    Ok(records)
}

pub fn load_results(path: impl AsRef<Path>) -> Result<Vec<EvaluationRecord>> {
    read_results(std::fs::File::open(path)?)
}

pub const SUMMARY_HEADER: [&str; 10] = [
    "group_key",
    "step_j",
    "count",
    "min",
    "q1",
    "median",
    "q3",
    "lower_whisker",
    "upper_whisker",
    "outlier_count",
];

pub fn write_summary<W: Write>(rows: &[SummaryRow], writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(SUMMARY_HEADER)?;
    for r in rows {
        let s = &r.stats;
        out.write_record([
            r.group_key.clone(),
            r.step.to_string(),
            s.count.to_string(),
            s.min.to_string(),
            s.q1.to_string(),
            s.median.to_string(),
            s.q3.to_string(),
            s.lower_whisker.to_string(),
            s.upper_whisker.to_string(),
            s.outlier_count.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn persist_summary(rows: &[SummaryRow], path: impl AsRef<Path>) -> Result<()> {
    write_summary(rows, std::fs::File::create(path)?)
}
