//! Detection of artificial zeroes (stockouts) from the demand intervals.
//!
//! Under Bernoulli occurrence with probability `p`, the zeroes inside a
//! demand interval follow a Geometric distribution (failures before the
//! first success). The intervals are smoothed against the period that
//! closes them, the smoothed length gives a local occurrence probability,
//! and any interval whose zero count exceeds the Geometric quantile at the
//! chosen level is treated as a stockout.
//!
//! A leading zero-run (interval closing the first demand, longer than one)
//! and a trailing zero-run are kept out of the smoother input and tested
//! against the nearest smoothed probability.

use serde::{Deserialize, Serialize};

use crate::error::{AidError, Result};
use crate::series::{decompose, DemandSeries, Interval};
use crate::smoothing::{smooth, SmoothConfig};

/// Fewest smoother points needed before detection is attempted.
pub const MIN_INTERVALS: usize = 3;

const TIE_TOLERANCE: f64 = 1e-12;

/// Smallest `k` with `1 - (1 - p)^(k + 1) >= level`.
///
/// `p = 1` is accepted and yields 0 (no zero is ever expected).
pub fn geometric_quantile(p: f64, level: f64) -> Result<u64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(AidError::InvalidInput(format!(
            "occurrence probability {p} outside (0, 1]"
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(AidError::InvalidInput(format!("level {level} outside (0, 1)")));
    }
    if p == 1.0 {
        return Ok(0);
    }
    let tail = 1.0 - level;
    let log_q = (-p).ln_1p();
    // (1-p)^(k+1) <= tail  <=>  k + 1 >= ln(tail) / ln(1-p)
    let guess = (tail.ln() / log_q - 1.0).ceil().max(0.0);
    let mut k = if guess.is_finite() { guess as u64 } else { 0 };
    let survives = |k: u64| ((k + 1) as f64 * log_q).exp() > tail + TIE_TOLERANCE;
    while k > 0 && !survives(k - 1) {
        k -= 1;
    }
    while survives(k) {
        k += 1;
    }
    Ok(k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlaggedInterval {
    /// Period of the demand closing the interval (for a trailing run, the
    /// last period of the series).
    pub period: usize,
    /// Zeroes plus one; a trailing run is treated as closed by a virtual
    /// demand just after the series ends.
    pub length: usize,
    pub threshold: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StockoutReport {
    pub flags: Vec<bool>,
    pub level: f64,
    /// Smoothed occurrence probability for every interval, in order.
    pub p_hat: Vec<f64>,
    pub flagged_intervals: Vec<FlaggedInterval>,
    pub leading_flag: bool,
    pub trailing_flag: bool,
    /// Detection abstained because too few intervals were available.
    pub insufficient_data: bool,
}

impl StockoutReport {
    pub fn flagged_count(&self) -> usize {
        self.flags.iter().filter(|f| **f).count()
    }

    fn empty(len: usize, level: f64, p_hat: Vec<f64>, insufficient_data: bool) -> Self {
        Self {
            flags: vec![false; len],
            level,
            p_hat,
            flagged_intervals: Vec::new(),
            leading_flag: false,
            trailing_flag: false,
            insufficient_data,
        }
    }
}

/// The level-independent half of detection: intervals and their smoothed
/// occurrence probabilities. Sweeping levels reuses one fit.
#[derive(Debug, Clone)]
pub struct IntervalFit {
    len: usize,
    intervals: Vec<Interval>,
    p_hat: Vec<f64>,
    trailing_zeros: usize,
    trailing_p: f64,
    insufficient: bool,
}

impl IntervalFit {
    pub fn new(series: &DemandSeries, smoothing: &SmoothConfig) -> Result<Self> {
        let d = decompose(series);
        let leading = d.intervals.first().is_some_and(|i| i.length > 1);
        let body = if leading {
            &d.intervals[1..]
        } else {
            &d.intervals[..]
        };
        if body.len() < MIN_INTERVALS {
            return Ok(Self {
                len: d.len,
                intervals: d.intervals,
                p_hat: Vec::new(),
                trailing_zeros: d.trailing_zeros,
                trailing_p: 1.0,
                insufficient: true,
            });
        }

        let x: Vec<f64> = body.iter().map(|i| i.period as f64).collect();
        let q: Vec<f64> = body.iter().map(|i| i.length as f64).collect();
        let fitted = smooth(&x, &q, smoothing)?;
        let body_p: Vec<f64> = fitted.iter().map(|v| 1.0 / v.max(1.0)).collect();

        let mut p_hat = Vec::with_capacity(d.intervals.len());
        if leading {
            p_hat.push(body_p[0]);
        }
        p_hat.extend_from_slice(&body_p);
        let trailing_p = *body_p.last().expect("body has at least three points");
        Ok(Self {
            len: d.len,
            intervals: d.intervals,
            p_hat,
            trailing_zeros: d.trailing_zeros,
            trailing_p,
            insufficient: false,
        })
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn p_hat(&self) -> &[f64] {
        &self.p_hat
    }

    pub fn is_insufficient(&self) -> bool {
        self.insufficient
    }

    /// Applies the Geometric threshold at `level`. A level of one switches
    /// detection off.
    pub fn report(&self, level: f64) -> Result<StockoutReport> {
        if !(level > 0.0 && level <= 1.0) {
            return Err(AidError::InvalidInput(format!("level {level} outside (0, 1]")));
        }
        if self.insufficient {
            return Ok(StockoutReport::empty(self.len, level, Vec::new(), true));
        }
        let mut report = StockoutReport::empty(self.len, level, self.p_hat.clone(), false);
        if level == 1.0 {
            return Ok(report);
        }

        for (idx, (interval, &p)) in self.intervals.iter().zip(&self.p_hat).enumerate() {
            let threshold = geometric_quantile(p, level)?;
            if interval.zeros() as u64 > threshold {
                let start = interval.period - interval.length;
                for f in &mut report.flags[start..interval.period - 1] {
                    *f = true;
                }
                report.flagged_intervals.push(FlaggedInterval {
                    period: interval.period,
                    length: interval.length,
                    threshold,
                });
                if idx == 0 {
                    report.leading_flag = true;
                }
            }
        }

        if self.trailing_zeros > 0 {
            let threshold = geometric_quantile(self.trailing_p, level)?;
            if self.trailing_zeros as u64 > threshold {
                for f in &mut report.flags[self.len - self.trailing_zeros..] {
                    *f = true;
                }
                report.flagged_intervals.push(FlaggedInterval {
                    period: self.len,
                    length: self.trailing_zeros + 1,
                    threshold,
                });
                report.trailing_flag = true;
            }
        }
        Ok(report)
    }
}

pub fn detect_stockouts(
    series: &DemandSeries,
    level: f64,
    smoothing: &SmoothConfig,
) -> Result<StockoutReport> {
    if !(level > 0.0 && level <= 1.0) {
        return Err(AidError::InvalidInput(format!("level {level} outside (0, 1]")));
    }
    IntervalFit::new(series, smoothing)?.report(level)
}
