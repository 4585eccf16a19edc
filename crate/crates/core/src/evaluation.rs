//! Per-step RMSE with excluded (night) pairs, box-plot statistics and
//! comparison against a reference model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Forecasts and matching observations for `m` origins over a horizon of
/// `J` steps, row-major by origin.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastMatrix {
    pub horizon: usize,
    pub origins: Vec<usize>,
    pub forecasts: Vec<f64>,
    pub actuals: Vec<f64>,
    /// True where the pair does not enter the error statistics.
    pub excluded: Vec<bool>,
}

impl ForecastMatrix {
    pub fn new(horizon: usize) -> Self {
        Self {
            horizon,
            origins: Vec::new(),
            forecasts: Vec::new(),
            actuals: Vec::new(),
            excluded: Vec::new(),
        }
    }

    pub fn push(&mut self, origin: usize, forecasts: &[f64], actuals: &[f64], excluded: &[bool]) -> Result<()> {
        for len in [forecasts.len(), actuals.len(), excluded.len()] {
            if len != self.horizon {
                return Err(Error::Dimension {
                    expected: self.horizon,
                    found: len,
                });
            }
        }
        self.origins.push(origin);
        self.forecasts.extend_from_slice(forecasts);
        self.actuals.extend_from_slice(actuals);
        self.excluded.extend_from_slice(excluded);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.origins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.origins.is_empty()
    }
}

/// `RMSE_j` for every step; `None` marks a step without included pairs.
pub fn rmse_per_step(matrix: &ForecastMatrix) -> Vec<Option<f64>> {
    let j_max = matrix.horizon;
    let mut sums = vec![0.0; j_max];
    let mut counts = vec![0usize; j_max];
    for row in 0..matrix.len() {
        for j in 0..j_max {
            let at = row * j_max + j;
            if matrix.excluded[at] {
                continue;
            }
            let e = matrix.forecasts[at] - matrix.actuals[at];
            sums[j] += e * e;
            counts[j] += 1;
        }
    }
    sums.iter()
        .zip(&counts)
        .map(|(s, &n)| (n > 0).then(|| (s / n as f64).sqrt()))
        .collect()
}

/// Every `OUTLIER_STRIDE`-th outlier (in ascending order) is kept.
pub const OUTLIER_STRIDE: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub lower_whisker: f64,
    pub upper_whisker: f64,
    /// Number of values beyond the whiskers.
    pub outlier_count: usize,
    /// Thinned outliers, ascending; always starts with the lowest outlier.
    pub outliers: Vec<f64>,
}

/// Linear interpolation between closest ranks on sorted data.
fn quantile_sorted(sorted: &[f64], prob: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * prob;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Box-plot summary. Whiskers are the extreme values within 1.5 IQR of the
/// quartiles, pulled back to the quartile when no value lies between the
/// fence and the box.
pub fn boxplot_stats(values: &[f64]) -> Result<BoxStats> {
    if values.is_empty() {
        return Err(Error::Range("box plot of an empty set".into()));
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Range(format!("box plot of non-finite value {bad}")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&sorted, 0.25);
    let median = quantile_sorted(&sorted, 0.5);
    let q3 = quantile_sorted(&sorted, 0.75);
    let iqr = q3 - q1;
    let low_fence = q1 - 1.5 * iqr;
    let high_fence = q3 + 1.5 * iqr;
    let lower_whisker = sorted
        .iter()
        .copied()
        .find(|v| *v >= low_fence)
        .map_or(q1, |v| v.min(q1));
    let upper_whisker = sorted
        .iter()
        .rev()
        .copied()
        .find(|v| *v <= high_fence)
        .map_or(q3, |v| v.max(q3));
    let all_outliers: Vec<f64> = sorted
        .iter()
        .copied()
        .filter(|v| *v < lower_whisker || *v > upper_whisker)
        .collect();
    Ok(BoxStats {
        count: sorted.len(),
        min: sorted[0],
        q1,
        median,
        q3,
        lower_whisker,
        upper_whisker,
        outlier_count: all_outliers.len(),
        outliers: all_outliers.iter().copied().step_by(OUTLIER_STRIDE).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepComparison {
    /// `RMSE_j(candidate) / RMSE_j(reference)`; `None` if incomparable.
    pub ratio: Option<f64>,
    pub win: bool,
}

impl StepComparison {
    pub fn incomparable(&self) -> bool {
        self.ratio.is_none()
    }
}

pub fn compare_to_reference(candidate: &[Option<f64>], reference: &[Option<f64>]) -> Result<Vec<StepComparison>> {
    if candidate.len() != reference.len() {
        return Err(Error::Dimension {
            expected: reference.len(),
            found: candidate.len(),
        });
    }
    Ok(candidate
        .iter()
        .zip(reference)
        .map(|(c, r)| match (c, r) {
            (Some(c), Some(r)) if *r > 0.0 => {
                let ratio = c / r;
                StepComparison {
                    ratio: Some(ratio),
                    win: ratio < 1.0,
                }
            }
            _ => StepComparison {
                ratio: None,
                win: false,
            },
        })
        .collect())
}
