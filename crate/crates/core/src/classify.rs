//! Automated demand identification and the SBC reference classifier.
//!
//! Classification runs in two stages. Stockouts are detected and removed;
//! if no zeroes remain the demand is regular, otherwise intermittent. The
//! finer split compares the AIC of the candidate models for the branch:
//!
//! * regular, integer-valued: I vs II
//! * regular, fractional: no comparison
//! * intermittent, fractional: III vs IV
//! * intermittent, integer-valued: III, IV, V, VI
//!
//! Ties go to the candidate with fewer parameters.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{AidError, Result};
use crate::models::{fit_candidate, is_integer_valued, ModelKind, Regressors};
use crate::series::{decompose, drop_flagged, DemandSeries};
use crate::smoothing::SmoothConfig;
use crate::stockout::{detect_stockouts, StockoutReport};

/// Shortest series the classifier accepts.
pub const MIN_CLASSIFY_LEN: usize = 10;

/// Syntetos-Boylan-Croston cut-offs.
pub const SBC_ADI_CUTOFF: f64 = 1.32;
pub const SBC_CV2_CUTOFF: f64 = 0.49;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TopClass {
    Regular,
    SmoothIntermittent,
    LumpyIntermittent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Valueness {
    Count,
    Fractional,
}

/// The six fundamental demand categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DemandCategory {
    RegularFractional,
    RegularCount,
    SmoothIntermittentFractional,
    LumpyIntermittentFractional,
    SmoothIntermittentCount,
    LumpyIntermittentCount,
}

impl DemandCategory {
    pub const ALL: [DemandCategory; 6] = [
        DemandCategory::RegularFractional,
        DemandCategory::SmoothIntermittentFractional,
        DemandCategory::LumpyIntermittentFractional,
        DemandCategory::RegularCount,
        DemandCategory::SmoothIntermittentCount,
        DemandCategory::LumpyIntermittentCount,
    ];

    pub fn new(top: TopClass, valueness: Valueness) -> Self {
        match (top, valueness) {
            (TopClass::Regular, Valueness::Fractional) => Self::RegularFractional,
            (TopClass::Regular, Valueness::Count) => Self::RegularCount,
            (TopClass::SmoothIntermittent, Valueness::Fractional) => Self::SmoothIntermittentFractional,
            (TopClass::SmoothIntermittent, Valueness::Count) => Self::SmoothIntermittentCount,
            (TopClass::LumpyIntermittent, Valueness::Fractional) => Self::LumpyIntermittentFractional,
            (TopClass::LumpyIntermittent, Valueness::Count) => Self::LumpyIntermittentCount,
        }
    }

    pub fn top(self) -> TopClass {
        match self {
            Self::RegularFractional | Self::RegularCount => TopClass::Regular,
            Self::SmoothIntermittentFractional | Self::SmoothIntermittentCount => {
                TopClass::SmoothIntermittent
            }
            Self::LumpyIntermittentFractional | Self::LumpyIntermittentCount => TopClass::LumpyIntermittent,
        }
    }

    pub fn valueness(self) -> Valueness {
        match self {
            Self::RegularCount | Self::SmoothIntermittentCount | Self::LumpyIntermittentCount => {
                Valueness::Count
            }
            _ => Valueness::Fractional,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::RegularFractional => "regular_fractional",
            Self::RegularCount => "regular_count",
            Self::SmoothIntermittentFractional => "smooth_intermittent_fractional",
            Self::LumpyIntermittentFractional => "lumpy_intermittent_fractional",
            Self::SmoothIntermittentCount => "smooth_intermittent_count",
            Self::LumpyIntermittentCount => "lumpy_intermittent_count",
        }
    }
}

impl std::fmt::Display for DemandCategory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateAic {
    pub kind: ModelKind,
    pub aic: Option<f64>,
    pub loglik: Option<f64>,
    /// Why the candidate could not be fitted.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub is_count: bool,
    pub candidates: Vec<CandidateAic>,
    pub winner: Option<ModelKind>,
    pub removed_observations: usize,
    pub zeros_remaining: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandClass {
    pub top: TopClass,
    pub valueness: Valueness,
    /// Zeroes plus a single repeated non-zero value.
    pub binary_special: bool,
    pub evidence: Evidence,
    pub stockouts: StockoutReport,
}

impl DemandClass {
    pub fn category(&self) -> DemandCategory {
        DemandCategory::new(self.top, self.valueness)
    }
}

pub fn is_count(values: &[f64]) -> bool {
    is_integer_valued(values)
}

fn select(candidates: &[CandidateAic]) -> Option<ModelKind> {
    candidates
        .iter()
        .filter_map(|c| c.aic.map(|a| (a, c.kind)))
        .min_by(|(a, ka), (b, kb)| {
            a.total_cmp(b)
                .then(ka.n_params().cmp(&kb.n_params()))
                .then(ka.cmp(kb))
        })
        .map(|(_, k)| k)
}

fn run_candidates(kinds: &[ModelKind], y: &[f64], reg: &Regressors) -> Vec<CandidateAic> {
    kinds
        .iter()
        .map(|&kind| match fit_candidate(kind, y, reg) {
            Ok(m) => CandidateAic {
                kind,
                aic: Some(m.aic),
                loglik: Some(m.loglik),
                error: None,
            },
            Err(e) => CandidateAic {
                kind,
                aic: None,
                loglik: None,
                error: Some(e.to_string()),
            },
        })
        .collect()
}

pub fn classify(series: &DemandSeries, level: f64, smoothing: &SmoothConfig) -> Result<DemandClass> {
    if series.len() < MIN_CLASSIFY_LEN {
        return Err(AidError::InsufficientData(format!(
            "classification needs at least {MIN_CLASSIFY_LEN} observations, got {}",
            series.len()
        )));
    }
    if decompose(series).degenerate {
        return Err(AidError::EmptyDemand);
    }
    let stockouts = detect_stockouts(series, level, smoothing)?;
    let cleaned = drop_flagged(series, &stockouts.flags).map_err(|_| AidError::EmptyDemand)?;
    let y = cleaned.values();
    if y.iter().all(|v| *v == 0.0) {
        return Err(AidError::EmptyDemand);
    }
    if y.len() < 3 {
        return Err(AidError::InsufficientData(
            "fewer than 3 observations remain after stockout removal".into(),
        ));
    }
    let count = is_count(y);
    let zeros_remaining = cleaned.zero_count();
    let removed = stockouts.flagged_count();

    let kinds: &[ModelKind] = match (zeros_remaining > 0, count) {
        (false, false) => &[],
        (false, true) => &[ModelKind::RegularFractional, ModelKind::RegularCount],
        (true, false) => &[
            ModelKind::SmoothIntermittentFractional,
            ModelKind::LumpyIntermittentFractional,
        ],
        (true, true) => &[
            ModelKind::SmoothIntermittentFractional,
            ModelKind::LumpyIntermittentFractional,
            ModelKind::SmoothIntermittentCount,
            ModelKind::LumpyIntermittentCount,
        ],
    };
    let candidates = if kinds.is_empty() {
        Vec::new()
    } else {
        let reg = Regressors::from_values(y, smoothing)?;
        run_candidates(kinds, y, &reg)
    };
    let winner = select(&candidates);
    if !kinds.is_empty() && winner.is_none() {
        return Err(AidError::InsufficientData(
            "no candidate model could be fitted".into(),
        ));
    }

    let mut nonzero: Vec<f64> = y.iter().copied().filter(|v| *v > 0.0).collect();
    nonzero.sort_by(f64::total_cmp);
    nonzero.dedup();
    let binary_special = zeros_remaining > 0 && nonzero.len() == 1;

    let (top, valueness) = if zeros_remaining == 0 {
        let valueness = match winner {
            Some(k) if k.is_count() => Valueness::Count,
            _ => Valueness::Fractional,
        };
        (TopClass::Regular, valueness)
    } else if binary_special {
        (TopClass::SmoothIntermittent, Valueness::Count)
    } else {
        let w = winner.expect("checked above");
        let top = if w.is_mixture() {
            TopClass::LumpyIntermittent
        } else {
            TopClass::SmoothIntermittent
        };
        let valueness = if w.is_count() {
            Valueness::Count
        } else {
            Valueness::Fractional
        };
        (top, valueness)
    };

    Ok(DemandClass {
        top,
        valueness,
        binary_special,
        evidence: Evidence {
            is_count: count,
            candidates,
            winner,
            removed_observations: removed,
            zeros_remaining,
        },
        stockouts,
    })
}

/// Classifies every series in parallel; results keep the input order.
pub fn classify_all(
    series: &[DemandSeries],
    level: f64,
    smoothing: &SmoothConfig,
) -> Vec<Result<DemandClass>> {
    series.par_iter().map(|s| classify(s, level, smoothing)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SbcQuadrant {
    Smooth,
    Intermittent,
    Erratic,
    Lumpy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SbcClass {
    pub adi: f64,
    pub cv2: f64,
    pub quadrant: SbcQuadrant,
}

/// Average demand interval and squared size CV on the raw series; stockouts
/// are not consulted.
pub fn sbc_classify(series: &DemandSeries) -> Result<SbcClass> {
    let d = decompose(series);
    if d.sizes.len() < 2 {
        return Err(AidError::InsufficientData(
            "SBC needs at least two non-zero observations".into(),
        ));
    }
    let adi = d.intervals.iter().map(|i| i.length as f64).sum::<f64>() / d.intervals.len() as f64;
    let k = d.sizes.len() as f64;
    let mean = d.sizes.iter().map(|s| s.value).sum::<f64>() / k;
    let var = d.sizes.iter().map(|s| (s.value - mean).powi(2)).sum::<f64>() / (k - 1.0);
    let cv2 = var / (mean * mean);
    let quadrant = match (adi > SBC_ADI_CUTOFF, cv2 > SBC_CV2_CUTOFF) {
        (false, false) => SbcQuadrant::Smooth,
        (true, false) => SbcQuadrant::Intermittent,
        (false, true) => SbcQuadrant::Erratic,
        (true, true) => SbcQuadrant::Lumpy,
    };
    Ok(SbcClass { adi, cv2, quadrant })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(values: Vec<f64>) -> DemandSeries {
        DemandSeries::new("c", values, 52).unwrap()
    }

    #[test]
    fn is_count_cases() {
        assert!(is_count(&[1.0, 0.0, 3.0]));
        assert!(!is_count(&[1.5, 2.0]));
        assert!(is_count(&[2.0000000001, 3.0]));
    }

    #[test]
    fn positive_fractional_short_circuits() {
        let s = series((0..100).map(|i| 10.5 + ((i * 13) % 7) as f64 * 0.3).collect());
        let c = classify(&s, 0.999, &SmoothConfig::default()).unwrap();
        assert_eq!(c.category(), DemandCategory::RegularFractional);
        assert!(c.evidence.candidates.is_empty());
    }

    #[test]
    fn regular_count_compares_two() {
        let s = series((0..100).map(|i| (20 + (i * 7) % 9) as f64).collect());
        let c = classify(&s, 0.999, &SmoothConfig::default()).unwrap();
        assert_eq!(c.top, TopClass::Regular);
        assert_eq!(c.evidence.candidates.len(), 2);
    }

    #[test]
    fn binary_demand() {
        let v: Vec<f64> = (0..120)
            .map(|i| if (i * 7) % 5 < 2 { 0.0 } else { 4.0 })
            .collect();
        let c = classify(&series(v), 0.999, &SmoothConfig::default()).unwrap();
        assert!(c.binary_special);
        assert_eq!(c.top, TopClass::SmoothIntermittent);
        assert_eq!(c.valueness, Valueness::Count);
        assert_eq!(c.evidence.candidates.len(), 4);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            classify(&series(vec![1.0; 5]), 0.999, &SmoothConfig::default()),
            Err(AidError::InsufficientData(_))
        ));
        assert_eq!(
            classify(&series(vec![0.0; 20]), 0.999, &SmoothConfig::default()),
            Err(AidError::EmptyDemand)
        );
    }

    #[test]
    fn level_one_agrees_when_nothing_flagged() {
        let v: Vec<f64> = (0..150)
            .map(|i| {
                if (i * 11) % 7 == 0 {
                    0.0
                } else {
                    (3 + i % 5) as f64
                }
            })
            .collect();
        let s = series(v);
        let a = classify(&s, 0.999, &SmoothConfig::default()).unwrap();
        assert_eq!(a.stockouts.flagged_count(), 0);
        let b = classify(&s, 1.0, &SmoothConfig::default()).unwrap();
        assert_eq!(a.category(), b.category());
        assert_eq!(a.evidence.candidates, b.evidence.candidates);
    }

    #[test]
    fn tie_breaks_toward_fewer_parameters() {
        let c = vec![
            CandidateAic {
                kind: ModelKind::LumpyIntermittentFractional,
                aic: Some(10.0),
                loglik: None,
                error: None,
            },
            CandidateAic {
                kind: ModelKind::SmoothIntermittentFractional,
                aic: Some(10.0),
                loglik: None,
                error: None,
            },
        ];
        assert_eq!(select(&c), Some(ModelKind::SmoothIntermittentFractional));
    }

    #[test]
    fn sbc_smooth_corner() {
        let c = sbc_classify(&series(vec![3.0; 20])).unwrap();
        assert_eq!(c.adi, 1.0);
        assert_eq!(c.cv2, 0.0);
        assert_eq!(c.quadrant, SbcQuadrant::Smooth);
    }

    #[test]
    fn sbc_lumpy() {
        let mut v = Vec::new();
        for k in 0..10 {
            v.extend([0.0, 0.0, 0.0, 0.0]);
            v.push(if k % 2 == 0 { 1.0 } else { 9.0 });
        }
        let c = sbc_classify(&series(v)).unwrap();
        // Intervals are all 5; sizes mean 5 with sample variance 160/9.
        assert_eq!(c.adi, 5.0);
        assert!((c.cv2 - (160.0 / 9.0) / 25.0).abs() < 1e-12);
        assert_eq!(c.quadrant, SbcQuadrant::Lumpy);
    }

    #[test]
    fn sbc_intermittent() {
        let v: Vec<f64> = (0..30).map(|i| if i % 3 == 2 { 6.0 } else { 0.0 }).collect();
        let c = sbc_classify(&series(v)).unwrap();
        assert_eq!(c.adi, 3.0);
        assert_eq!(c.cv2, 0.0);
        assert_eq!(c.quadrant, SbcQuadrant::Intermittent);
        assert!(sbc_classify(&series(vec![0.0, 1.0, 0.0])).is_err());
    }
}
