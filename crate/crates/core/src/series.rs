//! Demand series and the occurrence / size / interval decomposition.
//!
//! Observed demand is split into an occurrence indicator and the demand
//! sizes at the periods where demand happened. Demand intervals are the
//! gaps between consecutive non-zero periods; a virtual demand at period 0
//! gives the first non-zero observation an interval equal to its 1-based
//! position. Trailing zeroes close no interval and are reported separately.

use serde::{Deserialize, Serialize};

use crate::error::{AidError, Result};

/// A single SKU's equally spaced sales history.
///
/// Periods are implicit: the value at position `i` belongs to period `i + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandSeries {
    id: String,
    values: Vec<f64>,
    frequency: usize,
}

impl DemandSeries {
    pub fn new(id: impl Into<String>, values: Vec<f64>, frequency: usize) -> Result<Self> {
        if values.is_empty() {
            return Err(AidError::EmptySeries);
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(AidError::InvalidInput(format!(
                "value {v} at period {} must be finite and non-negative",
                i + 1
            )));
        }
        if frequency == 0 {
            return Err(AidError::InvalidInput("frequency must be positive".into()));
        }
        Ok(Self {
            id: id.into(),
            values,
            frequency,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn frequency(&self) -> usize {
        self.frequency
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// 1-based period labels.
    pub fn periods(&self) -> impl Iterator<Item = usize> + '_ {
        1..=self.values.len()
    }

    pub fn zero_count(&self) -> usize {
        self.values.iter().filter(|v| **v == 0.0).count()
    }

    /// Same identity and frequency, different values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.id.clone(), values, self.frequency)
    }

    /// The first `len` observations.
    pub fn head(&self, len: usize) -> Result<Self> {
        if len == 0 || len > self.len() {
            return Err(AidError::InvalidInput(format!(
                "cannot take {len} observations from a series of length {}",
                self.len()
            )));
        }
        self.with_values(self.values[..len].to_vec())
    }
}

/// A value tied to the 1-based period it was observed in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodValue {
    pub period: usize,
    pub value: f64,
}

/// A demand interval and the period of the non-zero observation closing it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub period: usize,
    pub length: usize,
}

impl Interval {
    /// Zeroes inside the interval, i.e. the failures before the closing demand.
    pub fn zeros(&self) -> usize {
        self.length - 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub len: usize,
    pub occurrence: Vec<bool>,
    pub sizes: Vec<PeriodValue>,
    pub intervals: Vec<Interval>,
    pub trailing_zeros: usize,
    /// Set when the series holds no demand at all.
    pub degenerate: bool,
}

pub fn decompose(series: &DemandSeries) -> Decomposition {
    decompose_values(series.values())
}

pub(crate) fn decompose_values(values: &[f64]) -> Decomposition {
    let occurrence: Vec<bool> = values.iter().map(|v| *v > 0.0).collect();
    let mut sizes = Vec::new();
    let mut intervals = Vec::new();
    let mut last = 0usize;
    for (i, (&v, &o)) in values.iter().zip(&occurrence).enumerate() {
        if o {
            let period = i + 1;
            sizes.push(PeriodValue { period, value: v });
            intervals.push(Interval {
                period,
                length: period - last,
            });
            last = period;
        }
    }
    Decomposition {
        len: values.len(),
        trailing_zeros: values.len() - last,
        degenerate: sizes.is_empty(),
        occurrence,
        sizes,
        intervals,
    }
}

/// Places the sizes back at their periods, zero elsewhere.
pub fn reassemble(decomposition: &Decomposition, len: usize) -> Result<Vec<f64>> {
    let mut out = vec![0.0; len];
    for s in &decomposition.sizes {
        if s.period == 0 || s.period > len {
            return Err(AidError::IndexOutOfRange { index: s.period, len });
        }
        out[s.period - 1] = s.value;
    }
    Ok(out)
}

/// Deletes flagged observations. Used for classification only; the shortened
/// series gets fresh contiguous periods.
pub fn drop_flagged(series: &DemandSeries, flags: &[bool]) -> Result<DemandSeries> {
    if flags.len() != series.len() {
        return Err(AidError::InvalidInput(format!(
            "flag length {} does not match series length {}",
            flags.len(),
            series.len()
        )));
    }
    let kept: Vec<f64> = series
        .values()
        .iter()
        .zip(flags)
        .filter(|(_, f)| !**f)
        .map(|(v, _)| *v)
        .collect();
    if kept.is_empty() {
        return Err(AidError::EmptyRemainder);
    }
    series.with_values(kept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(values: &[f64]) -> DemandSeries {
        DemandSeries::new("t", values.to_vec(), 52).unwrap()
    }

    #[test]
    fn decompose_mixed() {
        let d = decompose(&s(&[2.0, 0.0, 0.0, 3.0, 1.0]));
        assert_eq!(d.occurrence, vec![true, false, false, true, true]);
        let z: Vec<f64> = d.sizes.iter().map(|p| p.value).collect();
        assert_eq!(z, vec![2.0, 3.0, 1.0]);
        let q: Vec<usize> = d.intervals.iter().map(|i| i.length).collect();
        assert_eq!(q, vec![1, 3, 1]);
        assert_eq!(d.trailing_zeros, 0);
        assert!(!d.degenerate);
    }

    #[test]
    fn consecutive_demands_have_unit_intervals() {
        let d = decompose(&s(&[5.0, 5.0, 5.0]));
        assert!(d.intervals.iter().all(|i| i.length == 1));
        assert_eq!(d.sizes.len(), 3);
    }

    #[test]
    fn all_zero_is_degenerate() {
        let d = decompose(&s(&[0.0, 0.0, 0.0]));
        assert!(d.degenerate);
        assert!(d.sizes.is_empty());
        assert!(d.intervals.is_empty());
        assert_eq!(d.trailing_zeros, 3);
    }

    #[test]
    fn leading_zeros_make_long_first_interval() {
        let d = decompose(&s(&[0.0, 0.0, 4.0, 0.0]));
        assert_eq!(d.intervals, vec![Interval { period: 3, length: 3 }]);
        assert_eq!(d.trailing_zeros, 1);
    }

    #[test]
    fn reassemble_cases() {
        let d = decompose(&s(&[2.0, 0.0, 3.0]));
        assert_eq!(reassemble(&d, 3).unwrap(), vec![2.0, 0.0, 3.0]);
        let empty = decompose(&s(&[0.0]));
        assert_eq!(reassemble(&empty, 4).unwrap(), vec![0.0; 4]);
        let d = decompose(&s(&[1.0, 1.0]));
        assert_eq!(reassemble(&d, 2).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn reassemble_rejects_out_of_range() {
        let d = decompose(&s(&[0.0, 0.0, 3.0]));
        assert_eq!(
            reassemble(&d, 2),
            Err(AidError::IndexOutOfRange { index: 3, len: 2 })
        );
    }

    #[test]
    fn drop_flagged_cases() {
        let out = drop_flagged(&s(&[2.0, 0.0, 0.0, 3.0]), &[false, true, true, false]).unwrap();
        assert_eq!(out.values(), &[2.0, 3.0]);
        let base = s(&[1.0, 0.0, 2.0]);
        assert_eq!(drop_flagged(&base, &[false; 3]).unwrap(), base);
        let out = drop_flagged(&s(&[0.0, 5.0]), &[true, false]).unwrap();
        assert_eq!(out.values(), &[5.0]);
        assert_eq!(
            drop_flagged(&s(&[0.0, 5.0]), &[true, true]),
            Err(AidError::EmptyRemainder)
        );
        assert!(drop_flagged(&s(&[0.0, 5.0]), &[true]).is_err());
    }

    #[test]
    fn rejects_negative_and_nan() {
        assert!(DemandSeries::new("x", vec![1.0, -1.0], 1).is_err());
        assert!(DemandSeries::new("x", vec![f64::NAN], 1).is_err());
        assert!(DemandSeries::new("x", vec![], 1).is_err());
    }

    fn sparse_values() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(prop_oneof![Just(0.0), Just(0.0), 0.001f64..1e6], 1..200)
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(values in sparse_values()) {
            let series = s(&values);
            let back = reassemble(&decompose(&series), values.len()).unwrap();
            prop_assert_eq!(
                back.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                values.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
            );
        }

        #[test]
        fn intervals_account_for_every_period(values in sparse_values()) {
            let d = decompose(&s(&values));
            if !d.degenerate {
                let total: usize = d.intervals.iter().map(|i| i.length).sum();
                prop_assert_eq!(total + d.trailing_zeros, values.len());
                prop_assert!(d.intervals.iter().all(|i| i.length >= 1));
            }
        }

        #[test]
        fn drop_flagged_length(values in sparse_values(), seed in any::<u64>()) {
            let series = s(&values);
            let flags: Vec<bool> = (0..values.len())
                .map(|i| (seed.rotate_left(i as u32 % 64) & 1) == 1)
                .collect();
            let dropped = flags.iter().filter(|f| **f).count();
            match drop_flagged(&series, &flags) {
                Ok(out) => prop_assert_eq!(out.len(), values.len() - dropped),
                Err(e) => {
                    prop_assert_eq!(dropped, values.len());
                    prop_assert_eq!(e, AidError::EmptyRemainder);
                }
            }
            prop_assert_eq!(drop_flagged(&series, &vec![false; values.len()]).unwrap(), series);
        }
    }
}
