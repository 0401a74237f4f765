//! Stockout detection, model-based demand classification and the
//! downstream forecasting and inventory machinery built on it.

pub mod classify;
mod dist;
pub mod error;
pub mod features;
pub mod inventory;
pub mod metrics;
pub mod models;
pub mod optim;
pub mod pooled;
pub mod series;
pub mod simgen;
pub mod smoothing;
pub mod stockout;

pub use classify::{classify, is_count, sbc_classify, DemandCategory, DemandClass, SbcClass, Valueness};
pub use error::{AidError, Result};
pub use series::{decompose, drop_flagged, reassemble, Decomposition, DemandSeries};
pub use smoothing::{SmoothConfig, SmoothMethod};
pub use stockout::{detect_stockouts, geometric_quantile, StockoutReport};
