//! Likelihood fits for the six candidate demand models.
//!
//! | kind | distribution                                    | params |
//! |------|-------------------------------------------------|--------|
//! | I    | Normal on `y` against smoothed `y`              | 3      |
//! | II   | Negative Binomial on `y`, log link              | 3      |
//! | III  | Rectified Normal on `y`                          | 3      |
//! | IV   | Bernoulli occurrence (logit) x Normal sizes     | 5      |
//! | V    | Negative Binomial on `y` including zeroes        | 3      |
//! | VI   | Bernoulli occurrence (logit) x NB sizes (log)   | 5      |
//!
//! Negative Binomial means use a log link with the log of the smoothed
//! regressor, so `mean = exp(b0) * x^b1` and proportional scaling is in the
//! model family.

use serde::{Deserialize, Serialize};

use crate::dist::{inverse_mills, ln_factorial, ln_normal_cdf, ln_normal_pdf, logistic, nb_ln_pmf};
use crate::error::{AidError, Result};
use crate::optim::{minimize, Options};
use crate::smoothing::{smooth, smooth_indexed, SmoothConfig};

const INTEGER_TOLERANCE: f64 = 1e-9;
/// Bound on the Bernoulli linear predictor.
pub const MAX_LINEAR_PREDICTOR: f64 = 30.0;
const NB_SIZE_BOUNDS: (f64, f64) = (1e-4, 1e7);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    RegularFractional,
    RegularCount,
    SmoothIntermittentFractional,
    LumpyIntermittentFractional,
    SmoothIntermittentCount,
    LumpyIntermittentCount,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::RegularFractional,
        ModelKind::RegularCount,
        ModelKind::SmoothIntermittentFractional,
        ModelKind::LumpyIntermittentFractional,
        ModelKind::SmoothIntermittentCount,
        ModelKind::LumpyIntermittentCount,
    ];

    pub fn numeral(self) -> &'static str {
        match self {
            ModelKind::RegularFractional => "I",
            ModelKind::RegularCount => "II",
            ModelKind::SmoothIntermittentFractional => "III",
            ModelKind::LumpyIntermittentFractional => "IV",
            ModelKind::SmoothIntermittentCount => "V",
            ModelKind::LumpyIntermittentCount => "VI",
        }
    }

    pub fn n_params(self) -> usize {
        if self.is_mixture() {
            5
        } else {
            3
        }
    }

    pub fn is_count(self) -> bool {
        matches!(
            self,
            ModelKind::RegularCount | ModelKind::SmoothIntermittentCount | ModelKind::LumpyIntermittentCount
        )
    }

    pub fn is_mixture(self) -> bool {
        matches!(
            self,
            ModelKind::LumpyIntermittentFractional | ModelKind::LumpyIntermittentCount
        )
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.numeral())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitNote {
    /// Regressor had no variance; the slope was fixed at zero.
    InterceptOnly,
    /// Occurrence was all ones or all zeroes; probability clamped.
    Boundary,
    /// Occurrence perfectly separated by the regressor.
    Separation,
    /// Negative Binomial size reached its upper bound.
    NearPoisson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub value: f64,
}

fn param(name: &str, value: f64) -> Param {
    Param {
        name: name.to_string(),
        value,
    }
}

pub fn aic(loglik: f64, n_params: usize) -> Result<f64> {
    if !loglik.is_finite() {
        return Err(AidError::NonFiniteLikelihood(format!("log-likelihood {loglik}")));
    }
    Ok(2.0 * n_params as f64 - 2.0 * loglik)
}

/// One fitted regression (a full candidate or a component of a mixture).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    pub params: Vec<Param>,
    pub loglik: f64,
    pub start_loglik: f64,
    pub n_params: usize,
    pub aic: f64,
    pub converged: bool,
    pub n_obs: usize,
    pub notes: Vec<FitNote>,
}

impl RegressionFit {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|p| p.name == name).map(|p| p.value)
    }

    #[allow(clippy::too_many_arguments)]
    fn new(
        params: Vec<Param>,
        loglik: f64,
        start_loglik: f64,
        n_params: usize,
        converged: bool,
        n_obs: usize,
        notes: Vec<FitNote>,
    ) -> Result<Self> {
        Ok(Self {
            aic: aic(loglik, n_params)?,
            params,
            loglik,
            start_loglik,
            n_params,
            converged,
            n_obs,
            notes,
        })
    }
}

/// A fitted candidate model I-VI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub kind: ModelKind,
    pub params: Vec<Param>,
    pub loglik: f64,
    pub n_params: usize,
    pub aic: f64,
    pub converged: bool,
    pub n_obs: usize,
    pub notes: Vec<FitNote>,
}

impl FittedModel {
    fn from_fit(kind: ModelKind, fit: RegressionFit) -> Self {
        Self {
            kind,
            params: fit.params,
            loglik: fit.loglik,
            n_params: fit.n_params,
            aic: fit.aic,
            converged: fit.converged,
            n_obs: fit.n_obs,
            notes: fit.notes,
        }
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|p| p.name == name).map(|p| p.value)
    }
}

fn check_lengths(y: &[f64], x: &[f64]) -> Result<()> {
    if y.len() != x.len() {
        return Err(AidError::InvalidInput(format!(
            "response has {} values but regressor has {}",
            y.len(),
            x.len()
        )));
    }
    if y.len() < 3 {
        return Err(AidError::InsufficientData(format!(
            "regression needs at least 3 observations, got {}",
            y.len()
        )));
    }
    if y.iter().chain(x).any(|v| !v.is_finite()) {
        return Err(AidError::InvalidInput("non-finite regression input".into()));
    }
    Ok(())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Centering statistics for a regressor; `None` scale means no variance.
fn centre(x: &[f64]) -> (f64, Option<f64>) {
    let m = mean(x);
    let var = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / x.len() as f64;
    let scale = var.sqrt();
    if scale > 1e-12 * (1.0 + m.abs()) {
        (m, Some(scale))
    } else {
        (m, None)
    }
}

pub fn is_integer_valued(values: &[f64]) -> bool {
    values.iter().all(|v| (v - v.round()).abs() <= INTEGER_TOLERANCE)
}

/// Gaussian linear regression by least squares with the MLE variance.
pub fn fit_normal_reg(y: &[f64], x: &[f64]) -> Result<RegressionFit> {
    check_lengths(y, x)?;
    let n = y.len() as f64;
    let my = mean(y);
    let (mx, scale) = centre(x);
    let (b0, b1, notes) = match scale {
        Some(_) => {
            let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
            let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
            let b1 = sxy / sxx;
            (my - b1 * mx, b1, Vec::new())
        }
        None => (my, 0.0, vec![FitNote::InterceptOnly]),
    };
    let ssr: f64 = x.iter().zip(y).map(|(a, b)| (b - b0 - b1 * a).powi(2)).sum();
    let sigma2 = ssr / n;
    let magnitude = y.iter().map(|v| v * v).sum::<f64>() / n;
    if sigma2.is_nan() || sigma2 <= 1e-24 * magnitude.max(f64::MIN_POSITIVE) {
        return Err(AidError::NonFiniteLikelihood(
            "zero residual variance (perfect fit)".into(),
        ));
    }
    let loglik = -0.5 * n * ((2.0 * std::f64::consts::PI * sigma2).ln() + 1.0);
    RegressionFit::new(
        vec![param("b0", b0), param("b1", b1), param("sigma2", sigma2)],
        loglik,
        loglik,
        3,
        true,
        y.len(),
        notes,
    )
}

/// Negative Binomial regression, `mean = exp(b0 + b1 x)`, size estimated
/// jointly by maximum likelihood.
pub fn fit_nbinom_reg(y: &[f64], x: &[f64]) -> Result<RegressionFit> {
    check_lengths(y, x)?;
    if !is_integer_valued(y) || y.iter().any(|v| *v < 0.0) {
        return Err(AidError::InvalidInput(
            "Negative Binomial response must be non-negative integers".into(),
        ));
    }
    let ybar = mean(y);
    if ybar <= 0.0 {
        return Err(AidError::Degenerate(
            "all-zero counts; mean is at the boundary".into(),
        ));
    }
    let y: Vec<f64> = y.iter().map(|v| v.round()).collect();
    let lf: Vec<f64> = y.iter().map(|v| ln_factorial(*v)).collect();
    let (mx, scale) = centre(x);
    let xc: Vec<f64> = match scale {
        Some(s) => x.iter().map(|v| (v - mx) / s).collect(),
        None => vec![0.0; x.len()],
    };
    let has_slope = scale.is_some();

    let var = y.iter().map(|v| (v - ybar).powi(2)).sum::<f64>() / y.len() as f64;
    let size0 = if var > ybar {
        ybar * ybar / (var - ybar)
    } else {
        NB_SIZE_BOUNDS.1
    };
    let (lo, hi) = (NB_SIZE_BOUNDS.0.ln(), NB_SIZE_BOUNDS.1.ln());
    let start = [ybar.ln(), 0.0, size0.ln().clamp(lo, hi)];
    let inf = f64::INFINITY;
    let slope_bounds = if has_slope { (-inf, inf) } else { (0.0, 0.0) };
    let bounds = [(-inf, inf), slope_bounds, (lo, hi)];

    let objective = |p: &[f64]| {
        let s = p[2].exp();
        let mut value = 0.0;
        let mut grad = [0.0; 3];
        for ((yi, xi), lfi) in y.iter().zip(&xc).zip(&lf) {
            let eta = p[0] + p[1] * xi;
            let (ll, d_eta, d_s) = nb_ln_pmf(*yi, eta, s, *lfi);
            value -= ll;
            grad[0] -= d_eta;
            grad[1] -= d_eta * xi;
            grad[2] -= d_s * s;
        }
        if !value.is_finite() {
            return (f64::INFINITY, vec![0.0; 3]);
        }
        if !has_slope {
            grad[1] = 0.0;
        }
        (value, grad.to_vec())
    };
    let m = minimize(objective, &start, &bounds, Options::default());
    let loglik = -m.value;
    if !loglik.is_finite() {
        return Err(AidError::NonFiniteLikelihood("Negative Binomial fit".into()));
    }
    let (b1, b0) = match scale {
        Some(s) => {
            let b1 = m.x[1] / s;
            (b1, m.x[0] - b1 * mx)
        }
        None => (0.0, m.x[0]),
    };
    let mut notes = Vec::new();
    if !has_slope {
        notes.push(FitNote::InterceptOnly);
    }
    if m.x[2] >= hi - 1e-6 {
        notes.push(FitNote::NearPoisson);
    }
    RegressionFit::new(
        vec![param("b0", b0), param("b1", b1), param("size", m.x[2].exp())],
        loglik,
        -m.start_value,
        3,
        m.converged,
        y.len(),
        notes,
    )
}

/// Zero-censored Gaussian regression: `y = max(w, 0)`, `w ~ N(b0 + b1 x, sigma^2)`.
pub fn fit_rectnorm_reg(y: &[f64], x: &[f64]) -> Result<RegressionFit> {
    check_lengths(y, x)?;
    if y.iter().any(|v| *v < 0.0) {
        return Err(AidError::InvalidInput(
            "rectified normal response must be >= 0".into(),
        ));
    }
    let positives = y.iter().filter(|v| **v > 0.0).count();
    if positives == 0 {
        return Err(AidError::Degenerate(
            "all observations are zero; location diverges to -inf".into(),
        ));
    }
    if positives == y.len() {
        return fit_normal_reg(y, x);
    }

    let c = (y.iter().map(|v| v * v).sum::<f64>() / y.len() as f64).sqrt();
    let ys: Vec<f64> = y.iter().map(|v| v / c).collect();
    let (mx, scale) = centre(x);
    let xc: Vec<f64> = match scale {
        Some(s) => x.iter().map(|v| (v - mx) / s).collect(),
        None => vec![0.0; x.len()],
    };
    let has_slope = scale.is_some();

    // OLS start on the scaled data.
    let my = mean(&ys);
    let b1_start = if has_slope {
        xc.iter().zip(&ys).map(|(a, b)| a * (b - my)).sum::<f64>() / xc.iter().map(|a| a * a).sum::<f64>()
    } else {
        0.0
    };
    let s0 = (ys
        .iter()
        .zip(&xc)
        .map(|(b, a)| (b - my - b1_start * a).powi(2))
        .sum::<f64>()
        / ys.len() as f64)
        .sqrt()
        .max(1e-3);
    let (lo, hi) = (1e-8f64.ln(), 1e4f64.ln());
    let start = [my, b1_start, s0.ln().clamp(lo, hi)];
    let inf = f64::INFINITY;
    let bounds = [
        (-inf, inf),
        if has_slope { (-inf, inf) } else { (0.0, 0.0) },
        (lo, hi),
    ];

    let objective = |p: &[f64]| {
        let sigma = p[2].exp();
        let mut value = 0.0;
        let mut grad = [0.0; 3];
        for (yi, xi) in ys.iter().zip(&xc) {
            let mu = p[0] + p[1] * xi;
            let (ll, d_mu, d_ls) = if *yi > 0.0 {
                let z = (yi - mu) / sigma;
                (ln_normal_pdf(z) - p[2], z / sigma, z * z - 1.0)
            } else {
                let a = -mu / sigma;
                let lambda = inverse_mills(a);
                (ln_normal_cdf(a), -lambda / sigma, -lambda * a)
            };
            value -= ll;
            grad[0] -= d_mu;
            grad[1] -= d_mu * xi;
            grad[2] -= d_ls;
        }
        if !value.is_finite() {
            return (f64::INFINITY, vec![0.0; 3]);
        }
        if !has_slope {
            grad[1] = 0.0;
        }
        (value, grad.to_vec())
    };
    let m = minimize(objective, &start, &bounds, Options::default());
    if m.x[2] <= lo + 1e-6 || !m.value.is_finite() {
        return Err(AidError::NonFiniteLikelihood(
            "rectified normal scale collapsed to zero".into(),
        ));
    }
    let shift = positives as f64 * c.ln();
    let loglik = -m.value - shift;
    let (b1, b0) = match scale {
        Some(s) => {
            let b1 = c * m.x[1] / s;
            (b1, c * m.x[0] - b1 * mx)
        }
        None => (0.0, c * m.x[0]),
    };
    let sigma = c * m.x[2].exp();
    RegressionFit::new(
        vec![param("b0", b0), param("b1", b1), param("sigma2", sigma * sigma)],
        loglik,
        -m.start_value - shift,
        3,
        m.converged,
        y.len(),
        if has_slope {
            Vec::new()
        } else {
            vec![FitNote::InterceptOnly]
        },
    )
}

fn bernoulli_loglik(o: &[bool], x: &[f64], b0: f64, b1: f64) -> f64 {
    o.iter()
        .zip(x)
        .map(|(oi, xi)| {
            let eta = (b0 + b1 * xi).clamp(-MAX_LINEAR_PREDICTOR, MAX_LINEAR_PREDICTOR);
            let softplus = if eta > 0.0 {
                eta + (-eta).exp().ln_1p()
            } else {
                eta.exp().ln_1p()
            };
            if *oi {
                eta - softplus
            } else {
                -softplus
            }
        })
        .sum()
}

/// Logistic regression of the occurrence indicator.
pub fn fit_bernoulli_reg(o: &[bool], x: &[f64]) -> Result<RegressionFit> {
    let as_f: Vec<f64> = o.iter().map(|v| if *v { 1.0 } else { 0.0 }).collect();
    check_lengths(&as_f, x)?;
    let n = o.len() as f64;
    let ones = as_f.iter().sum::<f64>();
    let (mx, scale) = centre(x);

    if ones == 0.0 || ones == n {
        let p = if ones == 0.0 {
            1.0 / (n + 1.0)
        } else {
            n / (n + 1.0)
        };
        let loglik = ones * p.ln() + (n - ones) * (1.0 - p).ln();
        let b0 = (p / (1.0 - p)).ln();
        return RegressionFit::new(
            vec![param("b0", b0), param("b1", 0.0)],
            loglik,
            loglik,
            2,
            true,
            o.len(),
            vec![FitNote::Boundary],
        );
    }

    let p0 = ones / n;
    let mut b = [(p0 / (1.0 - p0)).ln(), 0.0];
    let start_loglik = bernoulli_loglik(o, x, b[0], b[1]);
    let Some(sd) = scale else {
        return RegressionFit::new(
            vec![param("b0", b[0]), param("b1", 0.0)],
            start_loglik,
            start_loglik,
            2,
            true,
            o.len(),
            vec![FitNote::InterceptOnly],
        );
    };

    // Newton-Raphson on the standardised regressor.
    let xc: Vec<f64> = x.iter().map(|v| (v - mx) / sd).collect();
    let mut ll = bernoulli_loglik(o, &xc, b[0], b[1]);
    let mut converged = false;
    let mut separated = false;
    for _ in 0..100 {
        let (mut g0, mut g1, mut h00, mut h01, mut h11) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (yi, xi) in as_f.iter().zip(&xc) {
            let p = logistic(b[0] + b[1] * xi);
            let w = p * (1.0 - p);
            g0 += yi - p;
            g1 += (yi - p) * xi;
            h00 += w;
            h01 += w * xi;
            h11 += w * xi * xi;
        }
        let det = h00 * h11 - h01 * h01;
        if det <= 1e-300 {
            separated = true;
            break;
        }
        let d0 = (h11 * g0 - h01 * g1) / det;
        let d1 = (h00 * g1 - h01 * g0) / det;
        let mut step = 1.0;
        let mut improved = false;
        for _ in 0..40 {
            let cand = [b[0] + step * d0, b[1] + step * d1];
            let cll = bernoulli_loglik(o, &xc, cand[0], cand[1]);
            if cll >= ll - 1e-12 {
                let change = (cll - ll).abs();
                b = cand;
                ll = cll;
                improved = true;
                if change <= 1e-10 * (ll.abs() + 1e-10) {
                    converged = true;
                }
                break;
            }
            step *= 0.5;
        }
        let eta_max = xc.iter().map(|xi| (b[0] + b[1] * xi).abs()).fold(0.0, f64::max);
        if eta_max > MAX_LINEAR_PREDICTOR {
            separated = true;
            break;
        }
        if converged || !improved {
            converged = true;
            break;
        }
    }

    let mut notes = Vec::new();
    if separated {
        // Shrink the predictor back inside the bound.
        let eta_max = xc.iter().map(|xi| (b[0] + b[1] * xi).abs()).fold(0.0, f64::max);
        if eta_max > MAX_LINEAR_PREDICTOR {
            let k = MAX_LINEAR_PREDICTOR / eta_max;
            b = [b[0] * k, b[1] * k];
        }
        ll = bernoulli_loglik(o, &xc, b[0], b[1]);
        converged = false;
        notes.push(FitNote::Separation);
    }
    let b1 = b[1] / sd;
    let b0 = b[0] - b1 * mx;
    RegressionFit::new(
        vec![param("b0", b0), param("b1", b1)],
        ll,
        start_loglik,
        2,
        converged,
        o.len(),
        notes,
    )
}

/// Smoothed regressors: overall demand, demand sizes, occurrence probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regressors {
    pub y_smooth: Vec<f64>,
    /// One entry per non-zero observation, in order.
    pub z_smooth: Vec<f64>,
    pub p_smooth: Vec<f64>,
}

impl Regressors {
    pub fn from_values(values: &[f64], smoothing: &SmoothConfig) -> Result<Self> {
        let y_smooth = smooth_indexed(values, smoothing)?;
        let (zx, zy): (Vec<f64>, Vec<f64>) = values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v > 0.0)
            .map(|(i, v)| ((i + 1) as f64, *v))
            .unzip();
        let z_smooth = if zy.len() >= 2 {
            smooth(&zx, &zy, smoothing)?
        } else {
            zy.clone()
        };
        let occurrence: Vec<f64> = values.iter().map(|v| if *v > 0.0 { 1.0 } else { 0.0 }).collect();
        let p_smooth = smooth_indexed(&occurrence, smoothing)?
            .into_iter()
            .map(|p| p.clamp(0.0, 1.0))
            .collect();
        Ok(Self {
            y_smooth,
            z_smooth,
            p_smooth,
        })
    }
}

/// Log of a non-negative regressor with a small positive floor.
pub fn positive_log(values: &[f64]) -> Vec<f64> {
    let positive: Vec<f64> = values.iter().copied().filter(|v| *v > 0.0).collect();
    let floor = if positive.is_empty() {
        1e-12
    } else {
        (1e-3 * mean(&positive)).max(1e-12)
    };
    values.iter().map(|v| v.max(floor).ln()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SizesKind {
    Normal,
    NegBinomial,
}

/// Occurrence-times-sizes mixture (models IV and VI).
pub fn fit_mixture(y: &[f64], reg: &Regressors, sizes_kind: SizesKind) -> Result<FittedModel> {
    if reg.p_smooth.len() != y.len() {
        return Err(AidError::InvalidInput(
            "probability regressor length mismatch".into(),
        ));
    }
    let occurrence: Vec<bool> = y.iter().map(|v| *v > 0.0).collect();
    let sizes: Vec<f64> = y.iter().copied().filter(|v| *v > 0.0).collect();
    if sizes.len() == y.len() {
        return Err(AidError::InvalidInput("mixture needs at least one zero".into()));
    }
    if sizes.len() < 3 {
        return Err(AidError::InsufficientData(format!(
            "mixture needs at least 3 non-zero values, got {}",
            sizes.len()
        )));
    }
    if reg.z_smooth.len() != sizes.len() {
        return Err(AidError::InvalidInput("sizes regressor length mismatch".into()));
    }
    let occ = fit_bernoulli_reg(&occurrence, &reg.p_smooth)?;
    let (kind, size_fit) = match sizes_kind {
        SizesKind::Normal => (
            ModelKind::LumpyIntermittentFractional,
            fit_normal_reg(&sizes, &reg.z_smooth)?,
        ),
        SizesKind::NegBinomial => (
            ModelKind::LumpyIntermittentCount,
            fit_nbinom_reg(&sizes, &positive_log(&reg.z_smooth))?,
        ),
    };
    let loglik = occ.loglik + size_fit.loglik;
    let n_params = occ.n_params + size_fit.n_params;
    let mut params: Vec<Param> = occ
        .params
        .iter()
        .map(|p| param(&format!("occurrence.{}", p.name), p.value))
        .collect();
    params.extend(
        size_fit
            .params
            .iter()
            .map(|p| param(&format!("sizes.{}", p.name), p.value)),
    );
    let mut notes = occ.notes.clone();
    notes.extend(size_fit.notes.iter().copied());
    Ok(FittedModel {
        kind,
        params,
        loglik,
        n_params,
        aic: aic(loglik, n_params)?,
        converged: occ.converged && size_fit.converged,
        n_obs: y.len(),
        notes,
    })
}

/// Fits candidate `kind` to `y` with the smoothed regressors.
pub fn fit_candidate(kind: ModelKind, y: &[f64], reg: &Regressors) -> Result<FittedModel> {
    let fit = match kind {
        ModelKind::RegularFractional => fit_normal_reg(y, &reg.y_smooth)?,
        ModelKind::RegularCount | ModelKind::SmoothIntermittentCount => {
            fit_nbinom_reg(y, &positive_log(&reg.y_smooth))?
        }
        ModelKind::SmoothIntermittentFractional => fit_rectnorm_reg(y, &reg.y_smooth)?,
        ModelKind::LumpyIntermittentFractional => return fit_mixture(y, reg, SizesKind::Normal),
        ModelKind::LumpyIntermittentCount => return fit_mixture(y, reg, SizesKind::NegBinomial),
    };
    Ok(FittedModel::from_fit(kind, fit))
}
