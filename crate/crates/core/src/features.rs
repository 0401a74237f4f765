//! Engineered features and the five forecasting approaches.
//!
//! Features are computed from the in-sample part of a series only; the
//! holdout rows repeat the last in-sample smoothed value. Two engines turn
//! features into forecasts: a pooled linear regression across all series,
//! and the smoothed features themselves.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::classify::TopClass;
use crate::error::{AidError, Result};
use crate::pooled::{fit_pooled, Design, PooledFit};
use crate::series::DemandSeries;
use crate::smoothing::{smooth, SmoothConfig};
use crate::stockout::StockoutReport;

/// Fewest non-zero observations before the smoothers are trusted.
pub const MIN_NONZERO: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub horizon: usize,
    pub fourier_order: usize,
    pub smoothing: SmoothConfig,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            horizon: 1,
            fourier_order: 2,
            smoothing: SmoothConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PartialCategory {
    Regular,
    Intermittent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FullCategory {
    Regular,
    Smooth,
    Lumpy,
}

impl From<TopClass> for PartialCategory {
    fn from(t: TopClass) -> Self {
        match t {
            TopClass::Regular => Self::Regular,
            _ => Self::Intermittent,
        }
    }
}

impl From<TopClass> for FullCategory {
    fn from(t: TopClass) -> Self {
        match t {
            TopClass::Regular => Self::Regular,
            TopClass::SmoothIntermittent => Self::Smooth,
            TopClass::LumpyIntermittent => Self::Lumpy,
        }
    }
}

/// Feature rows for one series: `n` in-sample rows then `horizon` holdout
/// rows. Every column has `n + horizon` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub series_id: String,
    pub n_in_sample: usize,
    pub horizon: usize,
    /// In-sample observations.
    pub target: Vec<f64>,
    pub smooth_sales: Vec<f64>,
    pub smooth_demand: Vec<f64>,
    pub smooth_sizes: Vec<f64>,
    pub probability: Vec<f64>,
    pub stockout_dummy: Vec<f64>,
    pub fourier: Vec<(String, Vec<f64>)>,
    pub category_partial: Option<PartialCategory>,
    pub category_full: Option<FullCategory>,
    pub exog: Vec<(String, Vec<f64>)>,
}

impl FeatureMatrix {
    pub fn rows(&self) -> usize {
        self.n_in_sample + self.horizon
    }

    pub fn occurrence(&self) -> Vec<f64> {
        self.target
            .iter()
            .map(|v| if *v > 0.0 { 1.0 } else { 0.0 })
            .collect()
    }

    pub fn is_stockout(&self, row: usize) -> bool {
        self.stockout_dummy[row] == 1.0
    }
}

/// Linear interpolation of `(xk, yk)` onto periods `1..=n`, flat beyond
/// the outermost knots.
fn interpolate(xk: &[f64], yk: &[f64], n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut j = 0;
    for t in 1..=n {
        let t = t as f64;
        if t <= xk[0] {
            out.push(yk[0]);
            continue;
        }
        if t >= xk[xk.len() - 1] {
            out.push(yk[yk.len() - 1]);
            continue;
        }
        while xk[j + 1] < t {
            j += 1;
        }
        let w = (t - xk[j]) / (xk[j + 1] - xk[j]);
        out.push(yk[j] + w * (yk[j + 1] - yk[j]));
    }
    out
}

/// Smooths the kept points and maps them back onto the full index. Falls
/// back to the mean of the kept values when too few informative points.
fn smooth_onto(x: &[f64], y: &[f64], n: usize, informative: usize, cfg: &SmoothConfig) -> Result<Vec<f64>> {
    if y.is_empty() {
        return Ok(vec![0.0; n]);
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    if informative < MIN_NONZERO || y.len() < cfg.min_points.max(2) {
        return Ok(vec![mean; n]);
    }
    let fitted = smooth(x, y, cfg)?;
    Ok(interpolate(x, &fitted, n))
}

fn extend_last(mut v: Vec<f64>, h: usize) -> Vec<f64> {
    let last = *v.last().expect("non-empty");
    v.extend(std::iter::repeat_n(last, h));
    v
}

pub fn fourier_terms(n: usize, frequency: usize, order: usize) -> Vec<(String, Vec<f64>)> {
    let f = frequency as f64;
    let mut out = Vec::with_capacity(2 * order);
    for j in 1..=order {
        let w = 2.0 * PI * j as f64 / f;
        out.push((format!("sin{j}"), (1..=n).map(|t| (w * t as f64).sin()).collect()));
        out.push((format!("cos{j}"), (1..=n).map(|t| (w * t as f64).cos()).collect()));
    }
    out
}

/// Builds features from the in-sample series. `exog` columns must cover
/// the in-sample and holdout rows.
pub fn build_features(
    series: &DemandSeries,
    report: &StockoutReport,
    top: Option<TopClass>,
    exog: &[(String, Vec<f64>)],
    cfg: &FeatureConfig,
) -> Result<FeatureMatrix> {
    let n = series.len();
    let h = cfg.horizon;
    let y = series.values();
    if report.flags.len() != n {
        return Err(AidError::InvalidInput(
            "stockout flags do not match the series".into(),
        ));
    }
    if y.iter().all(|v| *v == 0.0) {
        return Err(AidError::EmptyDemand);
    }
    if let Some((name, _)) = exog.iter().find(|(_, c)| c.len() != n + h) {
        return Err(AidError::InvalidInput(format!(
            "exogenous column {name} needs {} values",
            n + h
        )));
    }
    let sm = &cfg.smoothing;
    let periods: Vec<f64> = (1..=n).map(|t| t as f64).collect();
    let nonzero = y.iter().filter(|v| **v > 0.0).count();

    let floor = |v: Vec<f64>| v.into_iter().map(|x| x.max(0.0)).collect::<Vec<_>>();

    let sales = floor(smooth_onto(&periods, y, n, nonzero, sm)?);

    let kept: Vec<usize> = (0..n).filter(|&i| !report.flags[i]).collect();
    let kx: Vec<f64> = kept.iter().map(|&i| periods[i]).collect();
    let ky: Vec<f64> = kept.iter().map(|&i| y[i]).collect();
    let demand = floor(smooth_onto(&kx, &ky, n, nonzero, sm)?);

    let nz: Vec<usize> = (0..n).filter(|&i| y[i] > 0.0).collect();
    let zx: Vec<f64> = nz.iter().map(|&i| periods[i]).collect();
    let zy: Vec<f64> = nz.iter().map(|&i| y[i]).collect();
    let sizes = floor(smooth_onto(&zx, &zy, n, nz.len(), sm)?);

    let ko: Vec<f64> = ky.iter().map(|v| if *v > 0.0 { 1.0 } else { 0.0 }).collect();
    let prob = smooth_onto(&kx, &ko, n, kept.len(), sm)?
        .into_iter()
        .map(|p| p.clamp(0.0, 1.0))
        .collect();

    let mut dummy: Vec<f64> = report.flags.iter().map(|f| if *f { 1.0 } else { 0.0 }).collect();
    dummy.extend(std::iter::repeat_n(0.0, h));

    Ok(FeatureMatrix {
        series_id: series.id().to_string(),
        n_in_sample: n,
        horizon: h,
        target: y.to_vec(),
        smooth_sales: extend_last(sales, h),
        smooth_demand: extend_last(demand, h),
        smooth_sizes: extend_last(sizes, h),
        probability: extend_last(prob, h),
        stockout_dummy: dummy,
        fourier: fourier_terms(n + h, series.frequency(), cfg.fourier_order),
        category_partial: top.map(PartialCategory::from),
        category_full: top.map(FullCategory::from),
        exog: exog.to_vec(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Approach {
    Conventional,
    Full,
    Mixture,
    CategoryPartial,
    CategoryFull,
}

impl Approach {
    pub const ALL: [Approach; 5] = [
        Approach::Conventional,
        Approach::Full,
        Approach::Mixture,
        Approach::CategoryPartial,
        Approach::CategoryFull,
    ];

    pub fn is_mixture(self) -> bool {
        !matches!(self, Approach::Conventional | Approach::Full)
    }

    pub fn label(self) -> &'static str {
        match self {
            Approach::Conventional => "conventional",
            Approach::Full => "full",
            Approach::Mixture => "mixture",
            Approach::CategoryPartial => "category_partial",
            Approach::CategoryFull => "category_full",
        }
    }
}

impl std::str::FromStr for Approach {
    type Err = AidError;

    fn from_str(s: &str) -> Result<Self> {
        Approach::ALL
            .into_iter()
            .find(|a| a.label() == s.to_ascii_lowercase().replace('-', "_"))
            .ok_or_else(|| AidError::InvalidInput(format!("unknown approach {s}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    PooledRegression,
    SmoothedSeries,
}

impl std::str::FromStr for Engine {
    type Err = AidError;

    fn from_str(s: &str) -> Result<Self> {
        Engine::ALL
            .into_iter()
            .find(|e| e.label() == s.to_ascii_lowercase().replace('-', "_"))
            .ok_or_else(|| AidError::InvalidInput(format!("unknown engine {s}")))
    }
}

impl Engine {
    pub const ALL: [Engine; 2] = [Engine::PooledRegression, Engine::SmoothedSeries];

    pub fn label(self) -> &'static str {
        match self {
            Engine::PooledRegression => "pooled_regression",
            Engine::SmoothedSeries => "smoothed_series",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApproachSpec {
    pub approach: Approach,
    pub engine: Engine,
}

/// Point forecasts for the holdout plus in-sample fitted values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesForecast {
    pub series_id: String,
    pub point: Vec<f64>,
    pub fitted: Vec<f64>,
    /// Occurrence and sizes parts of a mixture approach, over all rows.
    pub probability: Option<Vec<f64>>,
    pub sizes: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Column {
    SmoothSales,
    SmoothDemand,
    SmoothSizes,
    Probability,
    Stockout,
    Fourier,
    Exog,
    Partial,
    Full,
}

fn columns_for(f: &FeatureMatrix, cols: &[Column]) -> Result<Vec<(String, Vec<f64>)>> {
    let rows = f.rows();
    let mut out = Vec::new();
    for c in cols {
        match c {
            Column::SmoothSales => out.push(("smooth_sales".into(), f.smooth_sales.clone())),
            Column::SmoothDemand => out.push(("smooth_demand".into(), f.smooth_demand.clone())),
            Column::SmoothSizes => out.push(("smooth_sizes".into(), f.smooth_sizes.clone())),
            Column::Probability => out.push(("probability".into(), f.probability.clone())),
            Column::Stockout => out.push(("stockout".into(), f.stockout_dummy.clone())),
            Column::Fourier => out.extend(f.fourier.iter().cloned()),
            Column::Exog => out.extend(f.exog.iter().cloned()),
            Column::Partial => {
                let c = f.category_partial.ok_or_else(|| {
                    AidError::MissingFeature(format!("category for series {}", f.series_id))
                })?;
                let v = if c == PartialCategory::Intermittent {
                    1.0
                } else {
                    0.0
                };
                out.push(("intermittent".into(), vec![v; rows]));
            }
            Column::Full => {
                let c = f.category_full.ok_or_else(|| {
                    AidError::MissingFeature(format!("category for series {}", f.series_id))
                })?;
                let (s, l) = match c {
                    FullCategory::Regular => (0.0, 0.0),
                    FullCategory::Smooth => (1.0, 0.0),
                    FullCategory::Lumpy => (0.0, 1.0),
                };
                out.push(("smooth".into(), vec![s; rows]));
                out.push(("lumpy".into(), vec![l; rows]));
            }
        }
    }
    Ok(out)
}

type RowFilter = fn(&FeatureMatrix, usize) -> bool;
type Target = fn(&FeatureMatrix, usize) -> f64;

/// One pooled regression over the given columns; returns predictions for
/// every row of every series.
fn pooled_part(
    features: &[FeatureMatrix],
    cols: &[Column],
    target: Target,
    keep: RowFilter,
) -> Result<(PooledFit, Vec<Vec<f64>>)> {
    let per_series: Vec<Vec<(String, Vec<f64>)>> = features
        .iter()
        .map(|f| columns_for(f, cols))
        .collect::<Result<_>>()?;
    let names: Vec<String> = per_series
        .first()
        .map(|c| c.iter().map(|(n, _)| n.clone()).collect())
        .unwrap_or_default();
    if per_series
        .iter()
        .any(|c| c.len() != names.len() || c.iter().zip(&names).any(|((a, _), b)| a != b))
    {
        return Err(AidError::InvalidInput(
            "series carry different feature columns".into(),
        ));
    }

    let mut design = Design::new();
    for name in &names {
        design.push(name.clone(), Vec::new());
    }
    let mut y = Vec::new();
    for (f, cols) in features.iter().zip(&per_series) {
        for row in 0..f.n_in_sample {
            if !keep(f, row) {
                continue;
            }
            y.push(target(f, row));
            for (slot, (_, values)) in design.columns.iter_mut().zip(cols) {
                slot.push(values[row]);
            }
        }
    }
    let fit = fit_pooled(&design, &y)?;
    let predictions = features
        .iter()
        .zip(&per_series)
        .map(|(f, cols)| {
            (0..f.rows())
                .map(|row| {
                    let x: Vec<f64> = cols.iter().map(|(_, v)| v[row]).collect();
                    fit.predict(&x)
                })
                .collect()
        })
        .collect();
    Ok((fit, predictions))
}

fn split(f: &FeatureMatrix, all: Vec<f64>) -> (Vec<f64>, Vec<f64>) {
    let point = all[f.n_in_sample..].to_vec();
    let mut fitted = all;
    fitted.truncate(f.n_in_sample);
    (point, fitted)
}

fn mixture_forecast(f: &FeatureMatrix, prob: Vec<f64>, sizes: Vec<f64>) -> SeriesForecast {
    let prob: Vec<f64> = prob.into_iter().map(|p| p.clamp(0.0, 1.0)).collect();
    let sizes: Vec<f64> = sizes.into_iter().map(|z| z.max(0.0)).collect();
    let all: Vec<f64> = prob.iter().zip(&sizes).map(|(p, z)| p * z).collect();
    let (point, fitted) = split(f, all);
    SeriesForecast {
        series_id: f.series_id.clone(),
        point,
        fitted,
        probability: Some(prob),
        sizes: Some(sizes),
    }
}

fn plain_forecast(f: &FeatureMatrix, all: Vec<f64>) -> SeriesForecast {
    let (point, fitted) = split(f, all);
    SeriesForecast {
        series_id: f.series_id.clone(),
        point,
        fitted,
        probability: None,
        sizes: None,
    }
}

/// Forecasts for every series, in input order. The pooled engine fits one
/// model (or one per mixture part) across all series.
pub fn run_approach(spec: ApproachSpec, features: &[FeatureMatrix]) -> Result<Vec<SeriesForecast>> {
    use Column::*;
    if features.is_empty() {
        return Ok(Vec::new());
    }
    let a = spec.approach;
    if matches!(a, Approach::CategoryPartial | Approach::CategoryFull) {
        if let Some(f) = features.iter().find(|f| f.category_full.is_none()) {
            return Err(AidError::MissingFeature(format!(
                "category for series {}",
                f.series_id
            )));
        }
    }
    match spec.engine {
        Engine::SmoothedSeries => Ok(features
            .iter()
            .map(|f| match a {
                Approach::Conventional => plain_forecast(f, f.smooth_sales.clone()),
                Approach::Full => plain_forecast(f, f.smooth_demand.clone()),
                _ => mixture_forecast(f, f.probability.clone(), f.smooth_sizes.clone()),
            })
            .collect()),
        Engine::PooledRegression => {
            let all_rows: RowFilter = |_, _| true;
            let sales: Target = |f, r| f.target[r];
            match a {
                Approach::Conventional | Approach::Full => {
                    let cols: &[Column] = if a == Approach::Conventional {
                        &[SmoothSales, Fourier, Exog]
                    } else {
                        &[SmoothDemand, Stockout, Fourier, Exog]
                    };
                    let (_, pred) = pooled_part(features, cols, sales, all_rows)?;
                    Ok(features
                        .iter()
                        .zip(pred)
                        .map(|(f, p)| plain_forecast(f, p.into_iter().map(|v| v.max(0.0)).collect()))
                        .collect())
                }
                _ => {
                    let extra: &[Column] = match a {
                        Approach::CategoryPartial => &[Partial],
                        Approach::CategoryFull => &[Full],
                        _ => &[],
                    };
                    let occ_cols: Vec<Column> = [&[Probability, Stockout, Fourier, Exog][..], extra].concat();
                    let size_cols: Vec<Column> = [&[SmoothSizes, Fourier, Exog][..], extra].concat();
                    let occurrence: Target = |f, r| if f.target[r] > 0.0 { 1.0 } else { 0.0 };
                    let demand_rows: RowFilter = |f, r| f.target[r] > 0.0 && !f.is_stockout(r);
                    let (_, p) = pooled_part(features, &occ_cols, occurrence, all_rows)?;
                    let (_, z) = pooled_part(features, &size_cols, sales, demand_rows)?;
                    Ok(features
                        .iter()
                        .zip(p.into_iter().zip(z))
                        .map(|(f, (p, z))| mixture_forecast(f, p, z))
                        .collect())
                }
            }
        }
    }
}
