//! The four subcommands. Each `cmd_*` computes a report; the matching
//! `write_*` turns it into CSV/JSON files. Reports are ordered by series
//! id (or by setting) regardless of how the work was scheduled.

use std::path::Path;

use aid_core::classify::{
    classify, sbc_classify, DemandCategory, DemandClass, SbcClass, TopClass, Valueness,
};
use aid_core::features::{
    build_features, run_approach, Approach, ApproachSpec, Engine, FeatureConfig, FeatureMatrix,
    SeriesForecast,
};
use aid_core::inventory::{
    adjust_service_level, order_up_to, simulate, Cell, ErrorPool, InventoryConfig, InventoryMetrics,
};
use aid_core::metrics::{
    class_accuracy, default_level_grid, rmsse_excluding, roc_auc, RocCurve, SummaryStats,
};
use aid_core::simgen::{
    derive_seed, dgp_category, gen_dgp, gen_stockout_series, inject_promotions, inject_stockout_runs,
    LabeledSeries, ScenarioConfig, StockoutLength,
};
use aid_core::{detect_stockouts, AidError, DemandSeries, StockoutReport};
use anyhow::bail;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::dataset::Dataset;
use crate::output::{fmt_num, fmt_opt, write_json, write_table};

// ---------------------------------------------------------------- classify

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesClassification {
    pub series_id: String,
    pub class: Option<DemandClass>,
    pub category: Option<DemandCategory>,
    pub error: Option<String>,
    pub sbc: Option<SbcClass>,
    pub sbc_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifyReport {
    pub series: Vec<SeriesClassification>,
    /// Rows fractional then count; columns regular, smooth, lumpy.
    pub summary: [[usize; 3]; 2],
    pub failures: usize,
}

fn top_index(t: TopClass) -> usize {
    match t {
        TopClass::Regular => 0,
        TopClass::SmoothIntermittent => 1,
        TopClass::LumpyIntermittent => 2,
    }
}

pub fn cmd_classify(dataset: &Dataset, cfg: &RunConfig) -> ClassifyReport {
    let smoothing = cfg.smoothing();
    let series: Vec<SeriesClassification> = dataset
        .series
        .par_iter()
        .map(|s| {
            let (class, error) = match classify(s, cfg.nu, &smoothing) {
                Ok(c) => (Some(c), None),
                Err(e) => (None, Some(e.to_string())),
            };
            let (sbc, sbc_error) = match sbc_classify(s) {
                Ok(c) => (Some(c), None),
                Err(e) => (None, Some(e.to_string())),
            };
            SeriesClassification {
                series_id: s.id().to_string(),
                category: class.as_ref().map(DemandClass::category),
                class,
                error,
                sbc,
                sbc_error,
            }
        })
        .collect();
    let mut summary = [[0usize; 3]; 2];
    let mut failures = 0;
    for s in &series {
        match &s.class {
            Some(c) => {
                let row = usize::from(c.valueness == Valueness::Count);
                summary[row][top_index(c.top)] += 1;
            }
            None => failures += 1,
        }
    }
    ClassifyReport {
        series,
        summary,
        failures,
    }
}

pub fn write_classify(report: &ClassifyReport, out: &Path) -> anyhow::Result<()> {
    write_json(&out.join("classification.json"), &report.series)?;
    let rows: Vec<Vec<String>> = report
        .series
        .iter()
        .map(|s| {
            let c = s.class.as_ref();
            vec![
                s.series_id.clone(),
                s.category.map_or("NA".into(), |c| c.label().to_string()),
                c.map_or("NA".into(), |c| c.binary_special.to_string()),
                c.map_or("NA".into(), |c| c.stockouts.flagged_count().to_string()),
                s.sbc
                    .map_or("NA".into(), |b| format!("{:?}", b.quadrant).to_lowercase()),
                fmt_opt(s.sbc.map(|b| b.adi)),
                fmt_opt(s.sbc.map(|b| b.cv2)),
                s.error.clone().unwrap_or_default(),
            ]
        })
        .collect();
    write_table(
        &out.join("classification.csv"),
        &[
            "series_id",
            "category",
            "binary_special",
            "stockouts",
            "sbc",
            "adi",
            "cv2",
            "error",
        ],
        &rows,
    )?;
    let labels = ["fractional", "count"];
    let rows: Vec<Vec<String>> = (0..2)
        .map(|r| {
            let mut row = vec![labels[r].to_string()];
            row.extend(report.summary[r].iter().map(|c| c.to_string()));
            row
        })
        .collect();
    write_table(
        &out.join("classification_summary.csv"),
        &[
            "valueness",
            "regular",
            "smooth_intermittent",
            "lumpy_intermittent",
        ],
        &rows,
    )
}

// ---------------------------------------------------------------- simulate

/// One ROC setting of a stockout scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioSetting {
    pub scenario: u8,
    pub parameter: &'static str,
    pub value: f64,
    pub curve: RocCurve,
    /// Replications where fewer stockouts than requested fitted.
    pub reduced: usize,
}

/// Settings swept by each stockout scenario: (parameter, values, config
/// template). Everything not swept is n = 100, p = 0.8, 5 stockouts of
/// length 5, except scenario 1 which uses a single stockout.
pub fn scenario_settings(scenario: u8) -> anyhow::Result<(&'static str, Vec<(f64, ScenarioConfig)>)> {
    let base = |n, p, count, len| ScenarioConfig {
        n,
        p_occ: p,
        n_stockouts: count,
        stockout_len: StockoutLength::Fixed(len),
        seed: 0,
    };
    Ok(match scenario {
        1 => (
            "length",
            [3usize, 5, 7, 10]
                .iter()
                .map(|&l| (l as f64, base(100, 0.8, 1, l)))
                .collect(),
        ),
        2 => (
            "count",
            [1usize, 3, 5, 7, 10]
                .iter()
                .map(|&c| (c as f64, base(100, 0.8, c, 5)))
                .collect(),
        ),
        3 => (
            "p_occ",
            [0.1, 0.3, 0.5, 0.7, 0.9]
                .iter()
                .map(|&p| (p, base(100, p, 5, 5)))
                .collect(),
        ),
        4 => (
            "n",
            [30usize, 60, 100, 400, 1000]
                .iter()
                .map(|&n| (n as f64, base(n, 0.8, 5, 5)))
                .collect(),
        ),
        other => bail!("unknown scenario {other}; expected 1 to 4"),
    })
}

pub fn cmd_simulate_scenario(scenario: u8, cfg: &RunConfig) -> anyhow::Result<Vec<ScenarioSetting>> {
    let (parameter, settings) = scenario_settings(scenario)?;
    let smoothing = cfg.smoothing();
    let grid = default_level_grid();
    settings
        .into_iter()
        .enumerate()
        .map(|(k, (value, template))| {
            let stream = 1000 * scenario as u64 + k as u64;
            let data: Vec<LabeledSeries> = (0..cfg.replications as u64)
                .into_par_iter()
                .map(|r| {
                    gen_stockout_series(&ScenarioConfig {
                        seed: derive_seed(cfg.seed, stream, r),
                        ..template.clone()
                    })
                })
                .collect::<Result<_, _>>()?;
            let reduced = data.iter().filter(|d| d.warning).count();
            let curve = roc_auc(&data, &grid, &smoothing)?;
            Ok(ScenarioSetting {
                scenario,
                parameter,
                value,
                curve,
                reduced,
            })
        })
        .collect()
}

pub fn write_scenario(settings: &[ScenarioSetting], out: &Path) -> anyhow::Result<()> {
    let mut points = Vec::new();
    let mut aucs = Vec::new();
    for s in settings {
        for p in &s.curve.points {
            points.push(vec![
                s.scenario.to_string(),
                s.parameter.to_string(),
                fmt_num(s.value),
                fmt_opt(p.level),
                fmt_num(p.fpr),
                fmt_num(p.tpr),
            ]);
        }
        aucs.push(vec![
            s.scenario.to_string(),
            s.parameter.to_string(),
            fmt_num(s.value),
            fmt_num(s.curve.auc),
            s.reduced.to_string(),
        ]);
    }
    write_table(
        &out.join("roc_points.csv"),
        &["scenario", "parameter", "value", "level", "fpr", "tpr"],
        &points,
    )?;
    write_table(
        &out.join("auc.csv"),
        &["scenario", "parameter", "value", "auc", "reduced_replications"],
        &aucs,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracyRow {
    pub variant: &'static str,
    pub kind: u8,
    pub category: DemandCategory,
    pub n: usize,
    pub correct: usize,
    pub total: usize,
    /// Classification errors (abstentions) count as misses.
    pub failed: usize,
}

impl AccuracyRow {
    pub fn rate(&self) -> f64 {
        self.correct as f64 / self.total.max(1) as f64
    }
}

/// Classification accuracy per generator and sample size; with `promo`
/// set, a second table repeats the run on promotion-contaminated data.
pub fn cmd_simulate_dgp(cfg: &RunConfig) -> anyhow::Result<Vec<AccuracyRow>> {
    let mut variants = vec![("plain", false)];
    if cfg.promo {
        variants.push(("promo", true));
    }
    let smoothing = cfg.smoothing();
    let mut rows = Vec::new();
    for (variant, promo) in variants {
        for &kind in &cfg.kinds {
            let truth = dgp_category(kind)?;
            for &n in &cfg.sample_sizes {
                let stream = 10_000 * kind as u64 + n as u64;
                let predicted: Vec<Option<DemandCategory>> = (0..cfg.replications as u64)
                    .into_par_iter()
                    .map(|r| -> anyhow::Result<Option<DemandCategory>> {
                        let mut s = gen_dgp(kind, n, derive_seed(cfg.seed, stream, r))?;
                        if promo {
                            s = inject_promotions(
                                &s,
                                cfg.promo_rate,
                                cfg.promo_multiplier,
                                derive_seed(cfg.seed ^ 0x5052_4f4d, stream, r),
                            )?;
                        }
                        Ok(classify(&s, cfg.nu, &smoothing).ok().map(|c| c.category()))
                    })
                    .collect::<anyhow::Result<_>>()?;
                let ok: Vec<DemandCategory> = predicted.iter().flatten().copied().collect();
                let acc = class_accuracy(&vec![truth; ok.len()], &ok)?;
                let correct = acc
                    .rate(truth)
                    .map_or(0, |r| (r * ok.len() as f64).round() as usize);
                rows.push(AccuracyRow {
                    variant,
                    kind,
                    category: truth,
                    n,
                    correct,
                    total: predicted.len(),
                    failed: predicted.len() - ok.len(),
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_accuracy(rows: &[AccuracyRow], out: &Path) -> anyhow::Result<()> {
    for variant in ["plain", "promo"] {
        let table: Vec<Vec<String>> = rows
            .iter()
            .filter(|r| r.variant == variant)
            .map(|r| {
                vec![
                    r.kind.to_string(),
                    r.category.label().to_string(),
                    r.n.to_string(),
                    r.correct.to_string(),
                    r.total.to_string(),
                    r.failed.to_string(),
                    fmt_num(r.rate()),
                ]
            })
            .collect();
        if table.is_empty() {
            continue;
        }
        let name = if variant == "plain" {
            "accuracy.csv"
        } else {
            "accuracy_promo.csv"
        };
        write_table(
            &out.join(name),
            &["kind", "category", "n", "correct", "total", "failed", "rate"],
            &table,
        )?;
    }
    Ok(())
}

/// Panel of `per_kind` series from each generator, each with injected
/// stockout runs. Returns the dataset and the truth flags.
pub fn synthetic_panel(
    per_kind: usize,
    n: usize,
    stockouts: usize,
    len: StockoutLength,
    seed: u64,
    frequency: usize,
) -> anyhow::Result<(Dataset, Vec<Vec<bool>>)> {
    let mut labeled: Vec<LabeledSeries> = Vec::with_capacity(6 * per_kind);
    for kind in 1..=6u8 {
        for r in 0..per_kind as u64 {
            let base = gen_dgp(kind, n, derive_seed(seed, kind as u64, r))?;
            let id = format!("dgp{kind}_{r:04}");
            let base = DemandSeries::new(id, base.values().to_vec(), frequency)?;
            labeled.push(inject_stockout_runs(
                &base,
                stockouts,
                len,
                derive_seed(seed, 100 + kind as u64, r),
            )?);
        }
    }
    labeled.sort_by(|a, b| a.series.id().cmp(b.series.id()));
    let truth = labeled.iter().map(|l| l.truth_flags.clone()).collect();
    let series = labeled.into_iter().map(|l| l.series).collect();
    Ok((Dataset::from_series(series, frequency), truth))
}

// ---------------------------------------------------------------- forecast

/// A series split into in-sample and holdout with its features.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub series_id: String,
    pub in_sample: Vec<f64>,
    pub in_sample_flags: Vec<bool>,
    pub holdout: Vec<f64>,
    /// Stockout flags over the holdout, from detection on the full series.
    pub holdout_flags: Vec<bool>,
    pub features: FeatureMatrix,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkipNote {
    pub series_id: String,
    pub reason: String,
}

fn sample_sd(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

fn prepare_one(dataset: &Dataset, idx: usize, cfg: &RunConfig) -> Result<Prepared, String> {
    let s = &dataset.series[idx];
    let h = cfg.horizon;
    if s.len() < h + 10 {
        return Err(format!("{} observations, need at least {}", s.len(), h + 10));
    }
    let smoothing = cfg.smoothing();
    let n_in = s.len() - h;
    let in_sample = s.head(n_in).map_err(|e| e.to_string())?;
    let report: StockoutReport =
        detect_stockouts(&in_sample, cfg.nu, &smoothing).map_err(|e| e.to_string())?;
    let class = classify(&in_sample, cfg.nu, &smoothing).map_err(|e| format!("classification: {e}"))?;
    let full = detect_stockouts(s, cfg.nu, &smoothing).map_err(|e| e.to_string())?;
    let exog: Vec<(String, Vec<f64>)> = dataset
        .exog_names
        .iter()
        .cloned()
        .zip(dataset.exog[idx].iter().cloned())
        .collect();
    let fcfg = FeatureConfig {
        horizon: h,
        fourier_order: cfg.fourier_order,
        smoothing,
    };
    let features =
        build_features(&in_sample, &report, Some(class.top), &exog, &fcfg).map_err(|e| e.to_string())?;
    Ok(Prepared {
        series_id: s.id().to_string(),
        in_sample: in_sample.values().to_vec(),
        in_sample_flags: report.flags,
        holdout: s.values()[n_in..].to_vec(),
        holdout_flags: full.flags[n_in..].to_vec(),
        features,
        scale: sample_sd(in_sample.values()),
    })
}

pub fn prepare(dataset: &Dataset, cfg: &RunConfig) -> (Vec<Prepared>, Vec<SkipNote>) {
    let results: Vec<Result<Prepared, String>> = (0..dataset.len())
        .into_par_iter()
        .map(|i| prepare_one(dataset, i, cfg))
        .collect();
    let mut ok = Vec::new();
    let mut skipped = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(p) => ok.push(p),
            Err(reason) => skipped.push(SkipNote {
                series_id: dataset.series[i].id().to_string(),
                reason,
            }),
        }
    }
    (ok, skipped)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproachResult {
    pub engine: Engine,
    pub approach: Approach,
    pub forecasts: Vec<SeriesForecast>,
    /// Aligned with the prepared series; `None` when not evaluable.
    pub rmsse: Vec<Option<f64>>,
    pub summary: Option<SummaryStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForecastReport {
    pub series_ids: Vec<String>,
    pub results: Vec<ApproachResult>,
    pub skipped: Vec<SkipNote>,
}

pub fn run_approaches(prepared: &[Prepared], cfg: &RunConfig) -> anyhow::Result<Vec<ApproachResult>> {
    let features: Vec<FeatureMatrix> = prepared.iter().map(|p| p.features.clone()).collect();
    let mut results = Vec::new();
    for &engine in &cfg.engines {
        for &approach in &cfg.approaches {
            let forecasts = run_approach(ApproachSpec { approach, engine }, &features)?;
            let rmsse: Vec<Option<f64>> = prepared
                .iter()
                .zip(&forecasts)
                .map(
                    |(p, f)| match rmsse_excluding(&p.in_sample, &p.holdout, &f.point, &p.holdout_flags) {
                        Ok(v) => Ok(v),
                        Err(AidError::FlatHistory) => Ok(None),
                        Err(e) => Err(e),
                    },
                )
                .collect::<Result<_, _>>()?;
            let values: Vec<f64> = rmsse.iter().flatten().copied().collect();
            let summary = SummaryStats::from_values(&values).ok();
            results.push(ApproachResult {
                engine,
                approach,
                forecasts,
                rmsse,
                summary,
            });
        }
    }
    Ok(results)
}

pub fn cmd_forecast(dataset: &Dataset, cfg: &RunConfig) -> anyhow::Result<ForecastReport> {
    cfg.validate()?;
    let (prepared, skipped) = prepare(dataset, cfg);
    let results = run_approaches(&prepared, cfg)?;
    Ok(ForecastReport {
        series_ids: prepared.iter().map(|p| p.series_id.clone()).collect(),
        results,
        skipped,
    })
}

pub fn write_forecast(report: &ForecastReport, out: &Path) -> anyhow::Result<()> {
    let mut summary = Vec::new();
    let mut per_series = Vec::new();
    for r in &report.results {
        let s = r.summary;
        summary.push(vec![
            r.engine.label().to_string(),
            r.approach.label().to_string(),
            s.map_or("0".into(), |s| s.count.to_string()),
            fmt_opt(s.map(|s| s.min)),
            fmt_opt(s.map(|s| s.q1)),
            fmt_opt(s.map(|s| s.median)),
            fmt_opt(s.map(|s| s.mean)),
            fmt_opt(s.map(|s| s.q3)),
            fmt_opt(s.map(|s| s.max)),
        ]);
        for ((id, f), e) in report.series_ids.iter().zip(&r.forecasts).zip(&r.rmsse) {
            for (step, v) in f.point.iter().enumerate() {
                per_series.push(vec![
                    r.engine.label().to_string(),
                    r.approach.label().to_string(),
                    id.clone(),
                    (step + 1).to_string(),
                    fmt_num(*v),
                    fmt_opt(*e),
                ]);
            }
        }
    }
    write_table(
        &out.join("rmsse_summary.csv"),
        &[
            "engine", "approach", "series", "min", "q1", "median", "mean", "q3", "max",
        ],
        &summary,
    )?;
    write_table(
        &out.join("forecasts.csv"),
        &["engine", "approach", "series_id", "step", "forecast", "rmsse"],
        &per_series,
    )?;
    let notes: Vec<Vec<String>> = report
        .skipped
        .iter()
        .map(|s| vec![s.series_id.clone(), s.reason.clone()])
        .collect();
    write_table(&out.join("skipped.csv"), &["series_id", "reason"], &notes)
}

// ---------------------------------------------------------------- inventory

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InventoryRow {
    pub engine: Engine,
    pub approach: Approach,
    /// `None` for the average over origins.
    pub origin: Option<usize>,
    pub target_sl: f64,
    pub metrics: InventoryMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InventoryReport {
    pub rows: Vec<InventoryRow>,
    /// Order-up-to levels: (engine, approach, target, series index, origin).
    pub orders: Vec<(Engine, Approach, f64, usize, usize, f64)>,
    pub skipped: Vec<SkipNote>,
}

/// In-sample errors `y - fitted`. Approaches that know about stockouts
/// leave the flagged periods out.
fn in_sample_errors(p: &Prepared, f: &SeriesForecast, approach: Approach) -> Vec<f64> {
    p.in_sample
        .iter()
        .zip(&f.fitted)
        .zip(&p.in_sample_flags)
        .filter(|(_, flag)| approach == Approach::Conventional || !**flag)
        .map(|((y, fit), _)| y - fit)
        .collect()
}

pub fn cmd_inventory(dataset: &Dataset, cfg: &RunConfig) -> anyhow::Result<InventoryReport> {
    cfg.validate()?;
    let (prepared, skipped) = prepare(dataset, cfg);
    if prepared.is_empty() {
        bail!("no series long enough for the inventory simulation");
    }
    let results = run_approaches(&prepared, cfg)?;
    let mut rows = Vec::new();
    let mut orders = Vec::new();
    for r in &results {
        let errors: Vec<Vec<f64>> = prepared
            .iter()
            .zip(&r.forecasts)
            .map(|(p, f)| in_sample_errors(p, f, r.approach))
            .collect();
        let scales: Vec<f64> = prepared.iter().map(|p| p.scale).collect();
        let pool = ErrorPool::new(&errors, &scales)?;
        for &target in &cfg.service_levels {
            let icfg = InventoryConfig {
                target_sl: target,
                origins: cfg.origins,
                ..InventoryConfig::default()
            };
            let mut cells = Vec::with_capacity(cfg.origins);
            for origin in 0..cfg.origins {
                let mut row = Vec::with_capacity(prepared.len());
                for (s, (p, f)) in prepared.iter().zip(&r.forecasts).enumerate() {
                    let point = f.point[origin];
                    let level = if r.approach.is_mixture() {
                        let prob = f.probability.as_ref().expect("mixture")[p.in_sample.len() + origin];
                        if prob > 0.0 {
                            Some(adjust_service_level(target, prob)?)
                        } else {
                            None
                        }
                    } else {
                        Some(target)
                    };
                    let order = match level {
                        Some(l) => order_up_to(point, pool.addend(l, p.scale)),
                        None => 0.0,
                    };
                    orders.push((r.engine, r.approach, target, s, origin, order));
                    row.push(Cell {
                        order_up_to: order,
                        demand: p.holdout[origin],
                        scale: p.scale,
                        excluded: p.holdout_flags[origin],
                    });
                }
                cells.push(row);
            }
            let report = simulate(&icfg, &cells)?;
            for (o, m) in report.per_origin.iter().enumerate() {
                rows.push(InventoryRow {
                    engine: r.engine,
                    approach: r.approach,
                    origin: Some(o + 1),
                    target_sl: target,
                    metrics: *m,
                });
            }
            rows.push(InventoryRow {
                engine: r.engine,
                approach: r.approach,
                origin: None,
                target_sl: target,
                metrics: report.overall,
            });
        }
    }
    Ok(InventoryReport {
        rows,
        orders,
        skipped,
    })
}

pub fn write_inventory(report: &InventoryReport, out: &Path) -> anyhow::Result<()> {
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.engine.label().to_string(),
                r.approach.label().to_string(),
                r.origin.map_or("all".into(), |o| o.to_string()),
                fmt_num(r.target_sl),
                fmt_num(r.metrics.achieved_sl),
                fmt_num(r.metrics.scaled_lost_sales),
                fmt_num(r.metrics.scaled_on_hand),
                fmt_num(r.metrics.sl_deviation),
                r.metrics.cells.to_string(),
            ]
        })
        .collect();
    write_table(
        &out.join("inventory.csv"),
        &[
            "engine",
            "approach",
            "origin",
            "target_sl",
            "achieved_sl",
            "scaled_lost_sales",
            "scaled_on_hand",
            "sl_deviation",
            "cells",
        ],
        &rows,
    )
}
