//! Scatterplot smoothers: Friedman's variable-span Super Smoother and
//! Cleveland's LOWESS.
//!
//! Both take strictly increasing abscissae. Inputs shorter than
//! [`SmoothConfig::min_points`] are replaced by their mean.

use serde::{Deserialize, Serialize};

use crate::error::{AidError, Result};

/// Tweeter, midrange and woofer spans, as fractions of the sample.
const SPANS: [f64; 3] = [0.05, 0.2, 0.5];
const BIG: f64 = 1.0e20;
const SML: f64 = 1.0e-7;
const EPS: f64 = 1.0e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SmoothMethod {
    Supsmu,
    Lowess,
}

impl std::str::FromStr for SmoothMethod {
    type Err = AidError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "supsmu" => Ok(Self::Supsmu),
            "lowess" => Ok(Self::Lowess),
            other => Err(AidError::InvalidInput(format!("unknown smoother '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothConfig {
    pub method: SmoothMethod,
    pub lowess_span: f64,
    pub supsmu_bass: f64,
    pub min_points: usize,
}

impl Default for SmoothConfig {
    fn default() -> Self {
        Self {
            method: SmoothMethod::Supsmu,
            lowess_span: 2.0 / 3.0,
            supsmu_bass: 0.0,
            min_points: 7,
        }
    }
}

impl SmoothConfig {
    pub fn lowess() -> Self {
        Self {
            method: SmoothMethod::Lowess,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lowess_span > 0.0 && self.lowess_span <= 1.0) {
            return Err(AidError::InvalidInput(format!(
                "lowess span {} outside (0, 1]",
                self.lowess_span
            )));
        }
        if !(0.0..=10.0).contains(&self.supsmu_bass) {
            return Err(AidError::InvalidInput(format!(
                "bass {} outside [0, 10]",
                self.supsmu_bass
            )));
        }
        if self.min_points < 2 {
            return Err(AidError::InvalidInput("min_points must be at least 2".into()));
        }
        Ok(())
    }
}

/// Smooths `y` against `x` with the configured method.
pub fn smooth(x: &[f64], y: &[f64], config: &SmoothConfig) -> Result<Vec<f64>> {
    match config.method {
        SmoothMethod::Supsmu => supsmu(x, y, config),
        SmoothMethod::Lowess => {
            check_inputs(x, y)?;
            config.validate()?;
            if y.len() < config.min_points {
                return Ok(mean_fill(y));
            }
            lowess(x, y, config.lowess_span)
        }
    }
}

/// Smooths against the positions 1..=n.
pub fn smooth_indexed(y: &[f64], config: &SmoothConfig) -> Result<Vec<f64>> {
    let x: Vec<f64> = (1..=y.len()).map(|i| i as f64).collect();
    smooth(&x, y, config)
}

fn check_inputs(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(AidError::InvalidInput(format!(
            "x has {} points but y has {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(AidError::InsufficientData(
            "smoothing needs at least two points".into(),
        ));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(AidError::InvalidInput("non-finite smoother input".into()));
    }
    if x.windows(2).any(|w| w[1] <= w[0]) {
        return Err(AidError::InvalidInput(
            "smoother abscissae must be strictly increasing".into(),
        ));
    }
    Ok(())
}

fn mean_fill(y: &[f64]) -> Vec<f64> {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    vec![mean; y.len()]
}

/// Friedman's Super Smoother with cross-validated span selection.
pub fn supsmu(x: &[f64], y: &[f64], config: &SmoothConfig) -> Result<Vec<f64>> {
    check_inputs(x, y)?;
    config.validate()?;
    let n = x.len();
    if n < config.min_points {
        return Ok(mean_fill(y));
    }

    let mut i = n / 4;
    let mut j = 3 * i;
    // 1-based quartile positions as in the reference construction.
    let xat = |k: usize| x[k.max(1) - 1];
    let mut scale = xat(j) - xat(i);
    while scale <= 0.0 {
        if j < n {
            j += 1;
        }
        if i > 1 {
            i -= 1;
        }
        scale = xat(j) - xat(i);
    }
    let vsmlsq = (EPS * scale).powi(2);

    let mut fits: [Vec<f64>; 3] = Default::default();
    let mut residuals: [Vec<f64>; 3] = Default::default();
    for (k, &span) in SPANS.iter().enumerate() {
        let (fit, cv) = running_line(x, y, span, vsmlsq, true);
        fits[k] = fit;
        residuals[k] = running_line(x, &cv, SPANS[1], vsmlsq, false).0;
    }

    let alpha = config.supsmu_bass;
    let chosen: Vec<f64> = (0..n)
        .map(|j| {
            let mut resmin = BIG;
            let mut span = SPANS[0];
            for k in 0..3 {
                if residuals[k][j] < resmin {
                    resmin = residuals[k][j];
                    span = SPANS[k];
                }
            }
            let woofer = residuals[2][j];
            if alpha > 0.0 && alpha <= 10.0 && resmin < woofer && resmin > 0.0 {
                span += (SPANS[2] - span) * (resmin / woofer).max(SML).powf(10.0 - alpha);
            }
            span
        })
        .collect();
    let spans = running_line(x, &chosen, SPANS[1], vsmlsq, false).0;

    let blended: Vec<f64> = (0..n)
        .map(|j| {
            let s = spans[j].clamp(SPANS[0], SPANS[2]);
            let f = s - SPANS[1];
            if f >= 0.0 {
                let f = f / (SPANS[2] - SPANS[1]);
                (1.0 - f) * fits[1][j] + f * fits[2][j]
            } else {
                let f = -f / (SPANS[1] - SPANS[0]);
                (1.0 - f) * fits[1][j] + f * fits[0][j]
            }
        })
        .collect();
    Ok(running_line(x, &blended, SPANS[0], vsmlsq, false).0)
}

/// Running local-linear smoother over a symmetric nearest-neighbour window.
///
/// Window sums are updated incrementally. When `cross_validate` is set the
/// second vector holds absolute leave-one-out residuals.
fn running_line(x: &[f64], y: &[f64], span: f64, vsmlsq: f64, cross_validate: bool) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let mut xm = 0.0;
    let mut ym = 0.0;
    let mut var = 0.0;
    let mut cvar = 0.0;
    let mut fbw = 0.0;

    let mut ibw = (0.5 * span * n as f64 + 0.5) as usize;
    if ibw < 2 {
        ibw = 2;
    }
    let it = (2 * ibw + 1).min(n);

    for j in 0..it {
        let xti = x[j];
        let fbo = fbw;
        fbw += 1.0;
        xm = (fbo * xm + xti) / fbw;
        ym = (fbo * ym + y[j]) / fbw;
        let tmp = if fbo > 0.0 { fbw * (xti - xm) / fbo } else { 0.0 };
        var += tmp * (xti - xm);
        cvar += tmp * (y[j] - ym);
    }

    let mut smo = vec![0.0; n];
    let mut acvr = if cross_validate { vec![0.0; n] } else { Vec::new() };
    for j in 0..n {
        // 1-based window bookkeeping: drop j-ibw, add j+ibw+1 (0-based).
        if j > ibw && j + ibw < n {
            let out = j - ibw - 1;
            let xto = x[out];
            let fbo = fbw;
            fbw -= 1.0;
            let tmp = if fbw > 0.0 { fbo * (xto - xm) / fbw } else { 0.0 };
            var -= tmp * (xto - xm);
            cvar -= tmp * (y[out] - ym);
            if fbw > 0.0 {
                xm = (fbo * xm - xto) / fbw;
                ym = (fbo * ym - y[out]) / fbw;
            }

            let inn = j + ibw;
            let xti = x[inn];
            let fbo = fbw;
            fbw += 1.0;
            xm = (fbo * xm + xti) / fbw;
            ym = (fbo * ym + y[inn]) / fbw;
            let tmp = if fbo > 0.0 { fbw * (xti - xm) / fbo } else { 0.0 };
            var += tmp * (xti - xm);
            cvar += tmp * (y[inn] - ym);
        }

        let slope = if var > vsmlsq { cvar / var } else { 0.0 };
        smo[j] = slope * (x[j] - xm) + ym;

        if cross_validate {
            let mut h = if fbw > 0.0 { 1.0 / fbw } else { 0.0 };
            if var > vsmlsq {
                h += (x[j] - xm).powi(2) / var;
            }
            let a = 1.0 - h;
            acvr[j] = if a > 0.0 {
                (y[j] - smo[j]).abs() / a
            } else if j > 0 {
                acvr[j - 1]
            } else {
                0.0
            };
        }
    }
    (smo, acvr)
}

/// Cleveland's LOWESS: tricube-weighted local lines with two bisquare
/// robustness passes.
pub fn lowess(x: &[f64], y: &[f64], span: f64) -> Result<Vec<f64>> {
    check_inputs(x, y)?;
    if !(span > 0.0 && span <= 1.0) {
        return Err(AidError::InvalidInput(format!(
            "lowess span {span} outside (0, 1]"
        )));
    }
    const ROBUSTNESS_ITERATIONS: usize = 2;
    let n = x.len();
    let ns = ((span * n as f64 + 1e-5) as usize).clamp(2, n);
    let range = x[n - 1] - x[0];
    let y_spread =
        y.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) - y.iter().fold(f64::INFINITY, |a, &b| a.min(b));

    let mut ys = vec![0.0; n];
    let mut rw = vec![1.0; n];
    let mut w = vec![0.0; n];
    for iteration in 0..=ROBUSTNESS_ITERATIONS {
        let robust = iteration > 0;
        let mut nleft = 0usize;
        let mut nright = ns - 1;
        for i in 0..n {
            let xs = x[i];
            while nright < n - 1 {
                let d1 = xs - x[nleft];
                let d2 = x[nright + 1] - xs;
                if d1 <= d2 {
                    break;
                }
                nleft += 1;
                nright += 1;
            }
            ys[i] = local_line(x, y, xs, nleft, nright, range, &mut w, robust.then_some(&rw)).unwrap_or(y[i]);
        }
        if iteration == ROBUSTNESS_ITERATIONS {
            break;
        }

        let residuals: Vec<f64> = y.iter().zip(&ys).map(|(a, b)| (a - b).abs()).collect();
        let scale = residuals.iter().sum::<f64>() / n as f64;
        let mut sorted = residuals.clone();
        sorted.sort_by(f64::total_cmp);
        let m = n / 2;
        let cmad = if n.is_multiple_of(2) {
            3.0 * (sorted[m - 1] + sorted[m])
        } else {
            6.0 * sorted[m]
        };
        // Residuals at rounding level carry no outlier information.
        if cmad < 1e-7 * scale || cmad <= 1e-11 * y_spread {
            break;
        }
        let (c9, c1) = (0.999 * cmad, 0.001 * cmad);
        for (r, weight) in residuals.iter().zip(rw.iter_mut()) {
            *weight = if *r <= c1 {
                1.0
            } else if *r <= c9 {
                (1.0 - (r / cmad).powi(2)).powi(2)
            } else {
                0.0
            };
        }
    }
    Ok(ys)
}

#[allow(clippy::too_many_arguments)]
fn local_line(
    x: &[f64],
    y: &[f64],
    xs: f64,
    nleft: usize,
    nright: usize,
    range: f64,
    w: &mut [f64],
    robustness: Option<&Vec<f64>>,
) -> Option<f64> {
    let n = x.len();
    let h = (xs - x[nleft]).max(x[nright] - xs);
    let (h9, h1) = (0.999 * h, 0.001 * h);
    let mut total = 0.0;
    let mut j = nleft;
    while j < n {
        w[j] = 0.0;
        let r = (x[j] - xs).abs();
        if r <= h9 {
            w[j] = if r <= h1 {
                1.0
            } else {
                (1.0 - (r / h).powi(3)).powi(3)
            };
            if let Some(rw) = robustness {
                w[j] *= rw[j];
            }
            total += w[j];
        } else if x[j] > xs {
            break;
        }
        j += 1;
    }
    let nrt = j;
    if total <= 0.0 {
        return None;
    }
    for wj in &mut w[nleft..nrt] {
        *wj /= total;
    }
    if h > 0.0 {
        let a: f64 = (nleft..nrt).map(|k| w[k] * x[k]).sum();
        let c: f64 = (nleft..nrt).map(|k| w[k] * (x[k] - a).powi(2)).sum();
        if c.sqrt() > 0.001 * range {
            let b = (xs - a) / c;
            for k in nleft..nrt {
                w[k] *= b * (x[k] - a) + 1.0;
            }
        }
    }
    Some((nleft..nrt).map(|k| w[k] * y[k]).sum())
}
