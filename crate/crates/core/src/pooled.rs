//! Pooled least squares over a stacked panel.
//!
//! Columns are orthogonalised in order with modified Gram-Schmidt (two
//! passes); a column whose residual norm collapses relative to its own norm
//! is linearly dependent on earlier ones and is dropped. The intercept is
//! always the first column, so constant features fall away automatically.

use serde::{Deserialize, Serialize};

use crate::error::{AidError, Result};

const DEPENDENCE_TOLERANCE: f64 = 1e-9;

/// Column-major design without the intercept.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Design {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Design {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, column: Vec<f64>) {
        self.names.push(name.into());
        self.columns.push(column);
    }

    pub fn rows(&self) -> Option<usize> {
        self.columns.first().map(Vec::len)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PooledFit {
    pub intercept: f64,
    /// One per design column; dropped columns get zero.
    pub coefficients: Vec<f64>,
    pub names: Vec<String>,
    pub dropped: Vec<String>,
    pub n_obs: usize,
}

impl PooledFit {
    /// `row` follows the design's column order.
    pub fn predict(&self, row: &[f64]) -> f64 {
        self.intercept + self.coefficients.iter().zip(row).map(|(b, x)| b * x).sum::<f64>()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn fit_pooled(design: &Design, y: &[f64]) -> Result<PooledFit> {
    let n = y.len();
    if n == 0 {
        return Err(AidError::InsufficientData("no rows to fit".into()));
    }
    if design.columns.iter().any(|c| c.len() != n) {
        return Err(AidError::InvalidInput(
            "design columns and target differ in length".into(),
        ));
    }
    if y.iter()
        .chain(design.columns.iter().flatten())
        .any(|v| !v.is_finite())
    {
        return Err(AidError::InvalidInput(
            "non-finite value in regression data".into(),
        ));
    }

    let p = design.columns.len();
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(p + 1);
    // r[k] holds the coefficients of accepted column k on q[0..=k].
    let mut r: Vec<Vec<f64>> = Vec::with_capacity(p + 1);
    let mut kept: Vec<usize> = Vec::with_capacity(p);
    let mut dropped = Vec::new();

    let ones = vec![1.0; n];
    for (idx, column) in std::iter::once(&ones).chain(&design.columns).enumerate() {
        let norm0 = dot(column, column).sqrt();
        let mut v = column.clone();
        let mut coeffs = vec![0.0; q.len() + 1];
        for _ in 0..2 {
            for (k, qk) in q.iter().enumerate() {
                let c = dot(qk, &v);
                coeffs[k] += c;
                for (vi, qi) in v.iter_mut().zip(qk) {
                    *vi -= c * qi;
                }
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm0 == 0.0 || norm <= DEPENDENCE_TOLERANCE * norm0 {
            if idx == 0 {
                unreachable!("the intercept column is never zero");
            }
            dropped.push(design.names[idx - 1].clone());
            continue;
        }
        for vi in &mut v {
            *vi /= norm;
        }
        *coeffs.last_mut().expect("non-empty") = norm;
        q.push(v);
        r.push(coeffs);
        if idx > 0 {
            kept.push(idx - 1);
        }
    }

    let qty: Vec<f64> = q.iter().map(|qk| dot(qk, y)).collect();
    let m = q.len();
    let mut beta = vec![0.0; m];
    for i in (0..m).rev() {
        let mut s = qty[i];
        for j in i + 1..m {
            s -= r[j][i] * beta[j];
        }
        beta[i] = s / r[i][i];
    }

    let mut coefficients = vec![0.0; p];
    for (slot, &col) in kept.iter().enumerate() {
        coefficients[col] = beta[slot + 1];
    }
    Ok(PooledFit {
        intercept: beta[0],
        coefficients,
        names: design.names.clone(),
        dropped,
        n_obs: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn intercept_only_is_the_mean() {
        let fit = fit_pooled(&Design::new(), &[1.0, 2.0, 6.0]).unwrap();
        assert!((fit.intercept - 3.0).abs() < 1e-12);
    }

    #[test]
    fn closed_form_line() {
        // x = 1, 2, 3 and y = 1, 2, 2: slope 1/2, intercept 2/3.
        let mut d = Design::new();
        d.push("x", vec![1.0, 2.0, 3.0]);
        let fit = fit_pooled(&d, &[1.0, 2.0, 2.0]).unwrap();
        assert!((fit.intercept - 2.0 / 3.0).abs() < 1e-12);
        assert!((fit.coefficients[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn exact_fit_on_one_feature() {
        let s: Vec<f64> = (0..200)
            .map(|i| 900.0 + 100.0 * ((i as f64) * 0.1).sin())
            .collect();
        let other: Vec<f64> = (0..200).map(|i| ((i * 7) % 13) as f64).collect();
        let mut d = Design::new();
        d.push("smooth_sales", s.clone());
        d.push("other", other.clone());
        let fit = fit_pooled(&d, &s).unwrap();
        assert!((fit.coefficients[0] - 1.0).abs() < 1e-9);
        assert!(fit.coefficients[1].abs() < 1e-9);
        assert!(fit.intercept.abs() < 1e-6);
        for i in 0..200 {
            assert!((fit.predict(&[s[i], other[i]]) - s[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn duplicated_and_constant_columns_drop() {
        let x: Vec<f64> = (0..30).map(|i| (i as f64).sqrt()).collect();
        let y: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(i, v)| 2.0 * v + (i % 3) as f64)
            .collect();
        let mut single = Design::new();
        single.push("x", x.clone());
        let base = fit_pooled(&single, &y).unwrap();

        let mut d = Design::new();
        d.push("x", x.clone());
        d.push("x_copy", x.clone());
        d.push("flat", vec![4.0; 30]);
        let fit = fit_pooled(&d, &y).unwrap();
        assert_eq!(fit.dropped, vec!["x_copy".to_string(), "flat".to_string()]);
        assert!((fit.coefficients[0] - base.coefficients[0]).abs() < 1e-10);
        assert!((fit.intercept - base.intercept).abs() < 1e-10);
    }

    #[test]
    fn rejects_misaligned() {
        let mut d = Design::new();
        d.push("x", vec![1.0, 2.0]);
        assert!(fit_pooled(&d, &[1.0, 2.0, 3.0]).is_err());
        assert!(fit_pooled(&Design::new(), &[]).is_err());
    }

    proptest! {
        #[test]
        fn residuals_orthogonal_to_kept_columns(
            rows in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0, -10.0f64..10.0), 5..60),
        ) {
            let mut d = Design::new();
            d.push("a", rows.iter().map(|r| r.0).collect());
            d.push("b", rows.iter().map(|r| r.1).collect());
            let y: Vec<f64> = rows.iter().map(|r| r.2).collect();
            let fit = fit_pooled(&d, &y).unwrap();
            let resid: Vec<f64> = rows.iter().map(|r| r.2 - fit.predict(&[r.0, r.1])).collect();
            let scale = 1.0 + y.iter().map(|v| v.abs()).sum::<f64>();
            prop_assert!(resid.iter().sum::<f64>().abs() < 1e-8 * scale * 10.0);
            for (k, col) in d.columns.iter().enumerate() {
                if !fit.dropped.contains(&d.names[k]) {
                    prop_assert!(dot(&resid, col).abs() < 1e-7 * scale * 10.0);
                }
            }
        }
    }
}
