//! Log-density helpers shared by the likelihood fits.

use statrs::function::erf::erfc;
use statrs::function::gamma::{digamma, ln_gamma};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

pub fn ln_normal_pdf(z: f64) -> f64 {
    -0.5 * z * z - LN_SQRT_2PI
}

/// `ln Φ(a)`, accurate far into the lower tail.
pub fn ln_normal_cdf(a: f64) -> f64 {
    if a > -30.0 {
        (0.5 * erfc(-a / std::f64::consts::SQRT_2)).ln()
    } else {
        // Asymptotic expansion of the Mills ratio.
        let a2 = a * a;
        let series = 1.0 - 1.0 / a2 + 3.0 / (a2 * a2) - 15.0 / (a2 * a2 * a2);
        ln_normal_pdf(a) - (-a).ln() + series.ln()
    }
}

/// `φ(a) / Φ(a)`.
pub fn inverse_mills(a: f64) -> f64 {
    (ln_normal_pdf(a) - ln_normal_cdf(a)).exp()
}

/// Negative Binomial log-pmf with mean `exp(eta)` and size `s`, together
/// with its derivatives in `eta` and `s`. `ln_factorial` is `ln Γ(y + 1)`.
pub fn nb_ln_pmf(y: f64, eta: f64, s: f64, ln_factorial: f64) -> (f64, f64, f64) {
    let mu = eta.exp();
    let ln_s_mu = (s + mu).ln();
    let value = ln_gamma(y + s) - ln_gamma(s) - ln_factorial + s * (s.ln() - ln_s_mu) + y * (eta - ln_s_mu);
    let d_eta = s * (y - mu) / (s + mu);
    let d_s = digamma(y + s) - digamma(s) + s.ln() - ln_s_mu + 1.0 - (y + s) / (s + mu);
    (value, d_eta, d_s)
}

pub fn ln_factorial(y: f64) -> f64 {
    ln_gamma(y + 1.0)
}

pub fn logistic(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_cdf_branches_agree() {
        for a in [-29.0, -29.9] {
            let direct = (0.5 * erfc(-a / std::f64::consts::SQRT_2)).ln();
            let a2: f64 = a * a;
            let series = 1.0 - 1.0 / a2 + 3.0 / (a2 * a2) - 15.0 / (a2 * a2 * a2);
            let asymptotic = ln_normal_pdf(a) - (-a).ln() + series.ln();
            assert!((direct - asymptotic).abs() < 1e-8);
        }
        assert!((ln_normal_cdf(0.0) - 0.5f64.ln()).abs() < 1e-15);
        assert!(ln_normal_cdf(-100.0).is_finite());
    }

    #[test]
    fn nb_pmf_sums_to_one_and_gradients_match() {
        let (eta, s) = (2.0f64.ln(), 3.0);
        let total: f64 = (0..200)
            .map(|y| nb_ln_pmf(y as f64, eta, s, ln_factorial(y as f64)).0.exp())
            .sum();
        assert!((total - 1.0).abs() < 1e-10);

        let y = 4.0;
        let lf = ln_factorial(y);
        let h = 1e-6;
        let (_, de, ds) = nb_ln_pmf(y, eta, s, lf);
        let fd_e = (nb_ln_pmf(y, eta + h, s, lf).0 - nb_ln_pmf(y, eta - h, s, lf).0) / (2.0 * h);
        let fd_s = (nb_ln_pmf(y, eta, s + h, lf).0 - nb_ln_pmf(y, eta, s - h, lf).0) / (2.0 * h);
        assert!((de - fd_e).abs() < 1e-6);
        assert!((ds - fd_s).abs() < 1e-6);
    }
}
