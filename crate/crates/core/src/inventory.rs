//! Empirical-quantile safety stocks and an order-up-to simulation with
//! single-period shelf life.

use serde::{Deserialize, Serialize};

use crate::error::{AidError, Result};

/// Linear-interpolation sample quantile at position `1 + q(m - 1)`.
pub fn empirical_quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.len() < 2 {
        return Err(AidError::InsufficientData(
            "a quantile needs at least two values".into(),
        ));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(AidError::InvalidInput(format!(
            "quantile level {q} outside [0, 1]"
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(AidError::InvalidInput(
            "non-finite value in quantile input".into(),
        ));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted_quantile(&sorted, q))
}

fn sorted_quantile(sorted: &[f64], q: f64) -> f64 {
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 >= sorted.len() {
        return sorted[sorted.len() - 1];
    }
    sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
}

/// Sizes service level that yields `target` for a mixture whose demand
/// occurs with probability `p_hat`: `(target - (1 - p_hat)) / p_hat`,
/// clamped to `[0, 1)`.
pub fn adjust_service_level(target: f64, p_hat: f64) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(AidError::InvalidInput(format!("target {target} outside (0, 1)")));
    }
    if p_hat == 0.0 {
        return Err(AidError::Degenerate("no demand expected".into()));
    }
    if !(p_hat > 0.0 && p_hat <= 1.0) {
        return Err(AidError::InvalidInput(format!(
            "probability {p_hat} outside (0, 1]"
        )));
    }
    let raw = (target - (1.0 - p_hat)) / p_hat;
    Ok(raw.clamp(0.0, 1.0 - f64::EPSILON))
}

/// In-sample errors from many series, each divided by its own scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorPool {
    sorted: Vec<f64>,
}

impl ErrorPool {
    /// Series with a zero scale contribute their errors unscaled.
    pub fn new(errors: &[Vec<f64>], scales: &[f64]) -> Result<Self> {
        if errors.len() != scales.len() {
            return Err(AidError::InvalidInput("one scale per series required".into()));
        }
        let mut sorted: Vec<f64> = errors
            .iter()
            .zip(scales)
            .flat_map(|(e, &s)| {
                let d = if s > 0.0 { s } else { 1.0 };
                e.iter().map(move |v| v / d)
            })
            .collect();
        if sorted.len() < 2 {
            return Err(AidError::InsufficientData("error pool needs two values".into()));
        }
        if sorted.iter().any(|v| !v.is_finite()) {
            return Err(AidError::InvalidInput("non-finite forecast error".into()));
        }
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Scaled quantile; a level of zero means no safety addend.
    pub fn quantile(&self, level: f64) -> f64 {
        if level <= 0.0 {
            return 0.0;
        }
        sorted_quantile(&self.sorted, level.min(1.0))
    }

    /// Quantile brought back to a series' own scale.
    pub fn addend(&self, level: f64, scale: f64) -> f64 {
        let s = if scale > 0.0 { scale } else { 1.0 };
        self.quantile(level) * s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SafetyStock {
    pub addends: Vec<f64>,
    /// Series whose scale was zero and received the unscaled quantile.
    pub unscaled: Vec<bool>,
}

/// Pools scaled errors, takes one quantile and rescales it per series.
pub fn safety_stock_pipeline(errors: &[Vec<f64>], scales: &[f64], level: f64) -> Result<SafetyStock> {
    if let Some(i) = errors.iter().position(|e| e.len() < 2) {
        return Err(AidError::InsufficientData(format!(
            "series {i} has fewer than two in-sample errors"
        )));
    }
    let pool = ErrorPool::new(errors, scales)?;
    Ok(SafetyStock {
        addends: scales.iter().map(|&s| pool.addend(level, s)).collect(),
        unscaled: scales.iter().map(|&s| s <= 0.0).collect(),
    })
}

/// Point forecast plus addend, floored at zero and rounded up.
pub fn order_up_to(point: f64, addend: f64) -> f64 {
    let v = (point + addend).max(0.0);
    // Absorb rounding noise so an exact integer is not pushed up a unit.
    (v - 1e-9).ceil().max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InventoryConfig {
    pub target_sl: f64,
    pub lead_time: usize,
    pub shelf_life: usize,
    pub origins: usize,
}

impl Default for InventoryConfig {
    fn default() -> Self {
        Self {
            target_sl: 0.95,
            lead_time: 1,
            shelf_life: 1,
            origins: 2,
        }
    }
}

impl InventoryConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.target_sl > 0.0 && self.target_sl < 1.0) {
            return Err(AidError::InvalidInput(format!(
                "target service level {} outside (0, 1)",
                self.target_sl
            )));
        }
        if self.lead_time != 1 || self.shelf_life != 1 {
            return Err(AidError::InvalidInput(
                "only a lead time and shelf life of one period are supported".into(),
            ));
        }
        if self.origins == 0 {
            return Err(AidError::InvalidInput("at least one origin required".into()));
        }
        Ok(())
    }
}

/// One (series, origin) decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub order_up_to: f64,
    pub demand: f64,
    /// In-sample standard deviation of the series.
    pub scale: f64,
    /// Stockout cells carry no trustworthy demand and are skipped.
    pub excluded: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellOutcome {
    pub served: f64,
    pub lost: f64,
    pub leftover: f64,
}

/// With one-period shelf life, stock on hand is exactly the order-up-to
/// level: anything left from the previous period has expired.
pub fn simulate_cell(stock: f64, demand: f64) -> CellOutcome {
    let served = stock.min(demand);
    CellOutcome {
        served,
        lost: demand - served,
        leftover: stock - served,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InventoryMetrics {
    /// Fraction of cells with no lost sales.
    pub achieved_sl: f64,
    /// Mean over series of lost sales divided by the series scale.
    pub scaled_lost_sales: f64,
    pub scaled_on_hand: f64,
    pub sl_deviation: f64,
    pub cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InventoryReport {
    pub per_origin: Vec<InventoryMetrics>,
    /// Average of the per-origin metrics.
    pub overall: InventoryMetrics,
}

/// `cells[origin][series]`.
pub fn simulate(cfg: &InventoryConfig, cells: &[Vec<Cell>]) -> Result<InventoryReport> {
    cfg.validate()?;
    if cells.is_empty() {
        return Err(AidError::InvalidInput("no origins to simulate".into()));
    }
    let mut per_origin = Vec::with_capacity(cells.len());
    for row in cells {
        let mut served_cells = 0usize;
        let mut evaluated = 0usize;
        let (mut lost, mut on_hand) = (0.0, 0.0);
        for c in row.iter().filter(|c| !c.excluded) {
            if c.order_up_to < 0.0 || !c.order_up_to.is_finite() {
                return Err(AidError::InvalidInput(format!(
                    "order-up-to level {} must be non-negative",
                    c.order_up_to
                )));
            }
            let out = simulate_cell(c.order_up_to, c.demand);
            let s = if c.scale > 0.0 { c.scale } else { 1.0 };
            evaluated += 1;
            if out.lost == 0.0 {
                served_cells += 1;
            }
            lost += out.lost / s;
            on_hand += out.leftover / s;
        }
        let denom = evaluated.max(1) as f64;
        let achieved = served_cells as f64 / denom;
        per_origin.push(InventoryMetrics {
            achieved_sl: achieved,
            scaled_lost_sales: lost / denom,
            scaled_on_hand: on_hand / denom,
            sl_deviation: achieved - cfg.target_sl,
            cells: evaluated,
        });
    }
    let k = per_origin.len() as f64;
    let avg = |f: fn(&InventoryMetrics) -> f64| per_origin.iter().map(f).sum::<f64>() / k;
    let overall = InventoryMetrics {
        achieved_sl: avg(|m| m.achieved_sl),
        scaled_lost_sales: avg(|m| m.scaled_lost_sales),
        scaled_on_hand: avg(|m| m.scaled_on_hand),
        sl_deviation: avg(|m| m.sl_deviation),
        cells: per_origin.iter().map(|m| m.cells).sum(),
    };
    Ok(InventoryReport { per_origin, overall })
}
