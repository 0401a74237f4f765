//! Forecast accuracy, confusion counts, ROC curves for stockout detection
//! and classification hit rates.

use std::iter::Sum;
use std::ops::Add;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::DemandCategory;
use crate::error::{AidError, Result};
use crate::inventory::empirical_quantile;
use crate::simgen::LabeledSeries;
use crate::smoothing::SmoothConfig;
use crate::stockout::IntervalFit;

/// Root mean squared error of the holdout, scaled by the mean squared
/// first difference of the in-sample data.
pub fn rmsse(in_sample: &[f64], actual: &[f64], forecast: &[f64]) -> Result<f64> {
    if in_sample.len() < 2 {
        return Err(AidError::InsufficientData(
            "scaling needs at least two in-sample values".into(),
        ));
    }
    if actual.len() != forecast.len() || actual.is_empty() {
        return Err(AidError::InvalidInput(format!(
            "{} actuals against {} forecasts",
            actual.len(),
            forecast.len()
        )));
    }
    let scale =
        in_sample.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum::<f64>() / (in_sample.len() - 1) as f64;
    if scale == 0.0 {
        return Err(AidError::FlatHistory);
    }
    let mse = actual
        .iter()
        .zip(forecast)
        .map(|(a, f)| (a - f).powi(2))
        .sum::<f64>()
        / actual.len() as f64;
    Ok((mse / scale).sqrt())
}

/// Holdout positions that are not flagged as stockouts; `None` when every
/// holdout cell is flagged and the series cannot be evaluated.
pub fn evaluable_positions(holdout_flags: &[bool]) -> Option<Vec<usize>> {
    let keep: Vec<usize> = (0..holdout_flags.len()).filter(|&i| !holdout_flags[i]).collect();
    (!keep.is_empty()).then_some(keep)
}

/// RMSSE over the holdout cells without stockouts.
pub fn rmsse_excluding(
    in_sample: &[f64],
    actual: &[f64],
    forecast: &[f64],
    holdout_flags: &[bool],
) -> Result<Option<f64>> {
    if holdout_flags.len() != actual.len() {
        return Err(AidError::InvalidInput("holdout flags misaligned".into()));
    }
    let Some(keep) = evaluable_positions(holdout_flags) else {
        return Ok(None);
    };
    let a: Vec<f64> = keep.iter().map(|&i| actual[i]).collect();
    let f: Vec<f64> = keep.iter().map(|&i| forecast[i]).collect();
    rmsse(in_sample, &a, &f).map(Some)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn tpr(&self) -> Option<f64> {
        let p = self.tp + self.fn_;
        (p > 0).then(|| self.tp as f64 / p as f64)
    }

    pub fn fpr(&self) -> Option<f64> {
        let n = self.fp + self.tn;
        (n > 0).then(|| self.fp as f64 / n as f64)
    }
}

impl Add for ConfusionMatrix {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            tn: self.tn + o.tn,
            fn_: self.fn_ + o.fn_,
        }
    }
}

impl Sum for ConfusionMatrix {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), Add::add)
    }
}

pub fn confusion(truth: &[bool], predicted: &[bool]) -> Result<ConfusionMatrix> {
    if truth.len() != predicted.len() {
        return Err(AidError::InvalidInput(format!(
            "{} truth labels against {} predictions",
            truth.len(),
            predicted.len()
        )));
    }
    let mut m = ConfusionMatrix::default();
    for (&t, &p) in truth.iter().zip(predicted) {
        match (t, p) {
            (true, true) => m.tp += 1,
            (false, true) => m.fp += 1,
            (false, false) => m.tn += 1,
            (true, false) => m.fn_ += 1,
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    /// `None` for the two anchors.
    pub level: Option<f64>,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// 50 levels with `1 - level` log-spaced from 0.5 down to 1e-5.
pub fn default_level_grid() -> Vec<f64> {
    let (hi, lo) = (0.5f64.ln(), 1e-5f64.ln());
    (0..50)
        .map(|i| 1.0 - (hi + (lo - hi) * i as f64 / 49.0).exp())
        .collect()
}

/// Builds the curve from one aggregated matrix per level.
pub fn roc_from_matrices(levels: &[f64], matrices: &[ConfusionMatrix]) -> Result<RocCurve> {
    if levels.len() != matrices.len() {
        return Err(AidError::InvalidInput("one matrix per level required".into()));
    }
    let mut points = Vec::with_capacity(levels.len() + 2);
    for (&level, m) in levels.iter().zip(matrices) {
        let tpr = m.tpr().ok_or(AidError::UndefinedTpr)?;
        let fpr = m.fpr().unwrap_or(0.0);
        points.push(RocPoint {
            level: Some(level),
            fpr,
            tpr,
        });
    }
    points.push(RocPoint {
        level: None,
        fpr: 0.0,
        tpr: 0.0,
    });
    points.push(RocPoint {
        level: None,
        fpr: 1.0,
        tpr: 1.0,
    });
    points.sort_by(|a, b| a.fpr.total_cmp(&b.fpr).then(a.tpr.total_cmp(&b.tpr)));
    let auc = points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0)
        .sum();
    Ok(RocCurve { points, auc })
}

/// Sweeps the detection level over `grid`, aggregating the confusion
/// counts of every series at each level (micro-averaging).
pub fn roc_auc(labeled: &[LabeledSeries], grid: &[f64], smoothing: &SmoothConfig) -> Result<RocCurve> {
    let matrices = level_matrices(labeled, grid, smoothing)?;
    roc_from_matrices(grid, &matrices)
}

/// Aggregated confusion matrix per level.
pub fn level_matrices(
    labeled: &[LabeledSeries],
    grid: &[f64],
    smoothing: &SmoothConfig,
) -> Result<Vec<ConfusionMatrix>> {
    if grid.len() < 3 {
        return Err(AidError::InvalidInput(
            "level grid needs at least 3 levels".into(),
        ));
    }
    if let Some(l) = grid.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
        return Err(AidError::InvalidInput(format!("grid level {l} outside (0, 1)")));
    }
    let per_series: Vec<Vec<ConfusionMatrix>> = labeled
        .par_iter()
        .map(|ls| {
            let fit = IntervalFit::new(&ls.series, smoothing)?;
            grid.iter()
                .map(|&level| confusion(&ls.truth_flags, &fit.report(level)?.flags))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok((0..grid.len())
        .map(|j| per_series.iter().map(|m| m[j]).sum())
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassAccuracy {
    /// Hit rate per true category in `DemandCategory::ALL` order; `None`
    /// when the category never occurs in the truth.
    pub rates: Vec<(DemandCategory, Option<f64>)>,
    /// Rows are truth, columns predictions, both in `DemandCategory::ALL` order.
    pub table: [[u64; 6]; 6],
}

fn category_index(c: DemandCategory) -> usize {
    DemandCategory::ALL.iter().position(|k| *k == c).expect("listed")
}

pub fn class_accuracy(truth: &[DemandCategory], predicted: &[DemandCategory]) -> Result<ClassAccuracy> {
    if truth.len() != predicted.len() {
        return Err(AidError::InvalidInput("truth and predictions misaligned".into()));
    }
    let mut table = [[0u64; 6]; 6];
    for (&t, &p) in truth.iter().zip(predicted) {
        table[category_index(t)][category_index(p)] += 1;
    }
    let rates = DemandCategory::ALL
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let row: u64 = table[i].iter().sum();
            (c, (row > 0).then(|| table[i][i] as f64 / row as f64))
        })
        .collect();
    Ok(ClassAccuracy { rates, table })
}

impl ClassAccuracy {
    pub fn rate(&self, category: DemandCategory) -> Option<f64> {
        self.rates[category_index(category)].1
    }
}

/// Five-number summary plus the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub mean: f64,
    pub q3: f64,
    pub max: f64,
    pub count: usize,
}

impl SummaryStats {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(AidError::InsufficientData("no values to summarise".into()));
        }
        let q = |p: f64| {
            if values.len() == 1 {
                Ok(values[0])
            } else {
                empirical_quantile(values, p)
            }
        };
        Ok(Self {
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            q1: q(0.25)?,
            median: q(0.5)?,
            mean: values.iter().sum::<f64>() / values.len() as f64,
            q3: q(0.75)?,
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            count: values.len(),
        })
    }
}
