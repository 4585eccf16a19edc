use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::evaluation::{self, BoxStats};
use crate::nnr::Neighborhood;

use super::grid::ModelSpec;
use super::run::{EvaluationRecord, Status};

/// Prediction steps the summary reports.
pub const SUMMARY_STEPS: [usize; 3] = [1, 4, 12];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupBy {
    Method,
    Preprocessing,
    NightPolicy,
    TrainingDays,
    Lags,
    SeasonalLags,
    Weight,
    NeighborhoodType,
    K,
}

impl GroupBy {
    pub fn as_str(self) -> &'static str {
        match self {
            GroupBy::Method => "method",
            GroupBy::Preprocessing => "preprocessing",
            GroupBy::NightPolicy => "night_policy",
            GroupBy::TrainingDays => "training_days",
            GroupBy::Lags => "p",
            GroupBy::SeasonalLags => "P_seas",
            GroupBy::Weight => "weight_mode",
            GroupBy::NeighborhoodType => "neighborhood_mode",
            GroupBy::K => "k",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        [
            GroupBy::Method,
            GroupBy::Preprocessing,
            GroupBy::NightPolicy,
            GroupBy::TrainingDays,
            GroupBy::Lags,
            GroupBy::SeasonalLags,
            GroupBy::Weight,
            GroupBy::NeighborhoodType,
            GroupBy::K,
        ]
        .into_iter()
        .find(|g| g.as_str() == text)
    }

    fn value(self, r: &EvaluationRecord) -> String {
        let point = &r.point;
        let nnr = match point.model {
            ModelSpec::Nnr(spec) => Some(spec),
            _ => None,
        };
        let text = match self {
            GroupBy::Method => Some(point.method.as_str().to_string()),
            GroupBy::Preprocessing => Some(point.data.preprocessing.as_str().to_string()),
            GroupBy::NightPolicy => Some(point.data.night_policy.as_str().to_string()),
            GroupBy::TrainingDays => Some(point.data.training_days.to_string()),
            GroupBy::Lags => match point.model {
                ModelSpec::Arima(s) => Some(s.p.to_string()),
                ModelSpec::Nnr(s) => Some(s.p.to_string()),
                ModelSpec::Persistence => None,
            },
            GroupBy::SeasonalLags => match point.model {
                ModelSpec::Arima(s) if s.season > 0 => Some(s.seasonal_p.to_string()),
                ModelSpec::Nnr(s) if s.seasonal_p > 0 => Some(s.seasonal_p.to_string()),
                _ => None,
            },
            GroupBy::Weight => nnr.map(|s| s.weight.as_str().to_string()),
            GroupBy::NeighborhoodType => nnr.map(|s| match s.neighborhood {
                Neighborhood::FixedK(_) => "k".to_string(),
                Neighborhood::MaxDistance(_) => "epsilon".to_string(),
            }),
            GroupBy::K => nnr.and_then(|s| match s.neighborhood {
                Neighborhood::FixedK(k) => Some(k.to_string()),
                Neighborhood::MaxDistance(_) => None,
            }),
        };
        text.unwrap_or_else(|| "-".to_string())
    }
}

/// Group label such as `method=snnr;p=3`, or `all` without grouping.
pub fn group_key(record: &EvaluationRecord, group_by: &[GroupBy]) -> String {
    if group_by.is_empty() {
        return "all".to_string();
    }
    group_by
        .iter()
        .map(|g| format!("{}={}", g.as_str(), g.value(record)))
        .collect::<Vec<_>>()
        .join(";")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub group_key: String,
    pub step: usize,
    pub stats: BoxStats,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
    /// Groups without a single successful record.
    pub omitted: Vec<String>,
}

/// Box-plot statistics of `RMSE_j`, `j` in [`SUMMARY_STEPS`], over the
/// successful records of each group. Groups are ordered by key.
pub fn summarize(records: &[EvaluationRecord], group_by: &[GroupBy]) -> Result<Summary> {
    if records.is_empty() {
        return Err(Error::Range("no records to summarize".into()));
    }
    let mut groups: BTreeMap<String, Vec<&EvaluationRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(group_key(r, group_by)).or_default().push(r);
    }
    let mut summary = Summary::default();
    for (key, members) in groups {
        let ok: Vec<_> = members.into_iter().filter(|r| r.status == Status::Ok).collect();
        if ok.is_empty() {
            summary.omitted.push(key);
            continue;
        }
        for step in SUMMARY_STEPS {
            let values: Vec<f64> = ok
                .iter()
                .filter_map(|r| r.rmse.get(step - 1).copied().flatten())
                .collect();
            if values.is_empty() {
                continue;
            }
            summary.rows.push(SummaryRow {
                group_key: key.clone(),
                step,
                stats: evaluation::boxplot_stats(&values)?,
            });
        }
    }
    Ok(summary)
}
