//! Synthetic data: Geometric-interval series with injected stockouts, and
//! six local-level generators, one per demand category.
//!
//! Every generator owns a `ChaCha8Rng` seeded from the caller's seed, so
//! output is reproducible across platforms and thread counts.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Geometric, LogNormal, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::classify::DemandCategory;
use crate::error::{AidError, Result};
use crate::series::DemandSeries;

/// Shifted Negative Binomial used for scenario demand sizes.
pub const SIZE_NB_SIZE: f64 = 5.0;
pub const SIZE_NB_PROB: f64 = 0.75;

/// Deterministic stream splitting: mixes a base seed with two indices.
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Negative Binomial draw (failures) through the Gamma-Poisson mixture.
fn nb_draw<R: Rng + ?Sized>(rng: &mut R, size: f64, mean: f64) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    let lambda = Gamma::new(size, mean / size)
        .expect("positive shape and scale")
        .sample(rng);
    if lambda <= 0.0 {
        return 0.0;
    }
    Poisson::new(lambda)
        .map(|p| p.sample(rng))
        .unwrap_or(lambda.round())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StockoutLength {
    Fixed(usize),
    /// Inclusive range, one uniform draw per stockout.
    Range(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub n: usize,
    pub p_occ: f64,
    pub n_stockouts: usize,
    pub stockout_len: StockoutLength,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 30 {
            return Err(AidError::InvalidInput(format!("n = {} below 30", self.n)));
        }
        if !(self.p_occ > 0.0 && self.p_occ < 1.0) {
            return Err(AidError::InvalidInput(format!(
                "occurrence probability {} outside (0, 1)",
                self.p_occ
            )));
        }
        match self.stockout_len {
            StockoutLength::Fixed(0) => {
                return Err(AidError::InvalidInput(
                    "stockout length must be at least 1".into(),
                ))
            }
            StockoutLength::Range(lo, hi) if lo == 0 || hi < lo => {
                return Err(AidError::InvalidInput(format!(
                    "invalid stockout length range {lo}..={hi}"
                )))
            }
            _ => {}
        }
        Ok(())
    }

    fn max_len(&self) -> usize {
        match self.stockout_len {
            StockoutLength::Fixed(l) => l,
            StockoutLength::Range(_, hi) => hi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSeries {
    pub series: DemandSeries,
    /// True on injected stockout observations.
    pub truth_flags: Vec<bool>,
    pub dgp: String,
    /// Fewer stockouts than requested fit into the series.
    pub warning: bool,
    pub injected_stockouts: usize,
}

/// Geometric intervals, Shifted-NB sizes and injected zero runs.
///
/// Injected zeroes are inserted just before a randomly chosen demand, so the
/// interval it closes grows by the stockout length. At most half the series
/// may be injected zeroes; beyond that the stockout count is reduced and
/// `warning` set.
pub fn gen_stockout_series(cfg: &ScenarioConfig) -> Result<LabeledSeries> {
    cfg.validate()?;
    let mut rng = rng(cfg.seed);

    let cap = cfg.n / 2;
    let mut count = cfg.n_stockouts;
    let mut warning = false;
    if count * cfg.max_len() > cap {
        count = cap / cfg.max_len();
        warning = true;
    }
    let lengths: Vec<usize> = (0..count)
        .map(|_| match cfg.stockout_len {
            StockoutLength::Fixed(l) => l,
            StockoutLength::Range(lo, hi) => rng.random_range(lo..=hi),
        })
        .collect();
    let injected: usize = lengths.iter().sum();
    let m = cfg.n - injected;

    let geom = Geometric::new(cfg.p_occ).expect("validated probability");
    let mut occurrence = Vec::with_capacity(m + 1);
    while occurrence.len() < m {
        let zeros = geom.sample(&mut rng) as usize;
        occurrence.extend(std::iter::repeat_n(false, zeros));
        occurrence.push(true);
    }
    occurrence.truncate(m);

    let demands: Vec<usize> = (0..m).filter(|&i| occurrence[i]).collect();
    let mut chosen: Vec<(usize, usize)> = if demands.len() < count {
        warning = true;
        Vec::new()
    } else {
        sample(&mut rng, demands.len(), count)
            .into_iter()
            .zip(&lengths)
            .map(|(k, &l)| (demands[k], l))
            .collect()
    };
    chosen.sort_unstable();
    let injected_stockouts = chosen.len();

    let mut values = Vec::with_capacity(cfg.n);
    let mut truth = Vec::with_capacity(cfg.n);
    let mut next = chosen.iter().peekable();
    for (i, &o) in occurrence.iter().enumerate() {
        if let Some(&&(pos, len)) = next.peek() {
            if pos == i {
                values.extend(std::iter::repeat_n(0.0, len));
                truth.extend(std::iter::repeat_n(true, len));
                next.next();
            }
        }
        let v = if o {
            1.0 + nb_draw(
                &mut rng,
                SIZE_NB_SIZE,
                SIZE_NB_SIZE * (1.0 - SIZE_NB_PROB) / SIZE_NB_PROB,
            )
        } else {
            0.0
        };
        values.push(v);
        truth.push(false);
    }
    // Pad when stockouts were dropped for lack of demands.
    while values.len() < cfg.n {
        values.push(0.0);
        truth.push(false);
    }

    Ok(LabeledSeries {
        series: DemandSeries::new(format!("scenario-{}", cfg.seed), values, 52)?,
        truth_flags: truth,
        dgp: "scenario".into(),
        warning,
        injected_stockouts,
    })
}

/// Parameters the generators need but that have no canonical value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DgpConfig {
    /// Level smoothing parameter.
    pub alpha: f64,
    /// Log-normal error scale for the multiplicative recursion.
    pub sdlog: f64,
    /// Gaussian error sd for the additive recursion.
    pub additive_sd: f64,
    pub zero_fraction: f64,
    pub initial_level: f64,
    pub additive_level: f64,
    pub count_size: f64,
    pub small_count_level: f64,
    pub small_count_size: f64,
    pub frequency: usize,
}

impl Default for DgpConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            sdlog: 0.05,
            additive_sd: 5.0,
            zero_fraction: 0.3,
            initial_level: 1000.0,
            additive_level: 10.0,
            count_size: 20.0,
            small_count_level: 5.0,
            small_count_size: 2.0,
            frequency: 52,
        }
    }
}

/// The category each generator is built to produce.
pub fn dgp_category(kind: u8) -> Result<DemandCategory> {
    Ok(match kind {
        1 => DemandCategory::RegularFractional,
        2 => DemandCategory::SmoothIntermittentFractional,
        3 => DemandCategory::LumpyIntermittentFractional,
        4 => DemandCategory::RegularCount,
        5 => DemandCategory::SmoothIntermittentCount,
        6 => DemandCategory::LumpyIntermittentCount,
        _ => return Err(AidError::InvalidInput(format!("unknown generator kind {kind}"))),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DgpSample {
    pub series: DemandSeries,
    /// The latent path driving the draws (the conditional mean for the
    /// count generators, before any zeroes are inserted).
    pub mean_path: Vec<f64>,
}

/// Multiplicative-error local level: `y_t = l_{t-1}(1 + e_t)`,
/// `l_t = l_{t-1}(1 + alpha e_t)` with log-normal `1 + e_t`.
fn multiplicative_path(rng: &mut ChaCha8Rng, n: usize, level: f64, cfg: &DgpConfig) -> Vec<f64> {
    let ln = (cfg.sdlog > 0.0).then(|| LogNormal::new(0.0, cfg.sdlog).expect("positive sdlog"));
    let mut l = level;
    (0..n)
        .map(|_| {
            let e = ln.as_ref().map_or(0.0, |d| d.sample(rng) - 1.0);
            let y = l * (1.0 + e);
            l *= 1.0 + cfg.alpha * e;
            y
        })
        .collect()
}

fn additive_path(rng: &mut ChaCha8Rng, n: usize, cfg: &DgpConfig) -> Vec<f64> {
    let normal = Normal::new(0.0, cfg.additive_sd.max(0.0)).expect("finite sd");
    let mut l = cfg.additive_level;
    (0..n)
        .map(|_| {
            let e = normal.sample(rng);
            let y = l + e;
            l += cfg.alpha * e;
            y
        })
        .collect()
}

fn zero_out(rng: &mut ChaCha8Rng, values: &mut [f64], fraction: f64) {
    let k = (fraction * values.len() as f64).round() as usize;
    for i in sample(rng, values.len(), k.min(values.len())) {
        values[i] = 0.0;
    }
}

pub fn simulate_dgp(kind: u8, n: usize, seed: u64, cfg: &DgpConfig) -> Result<DgpSample> {
    dgp_category(kind)?;
    if n < 10 {
        return Err(AidError::InvalidInput(format!("n = {n} below 10")));
    }
    let mut rng = rng(seed);
    let (values, mean_path) = match kind {
        1 | 3 => {
            let path = multiplicative_path(&mut rng, n, cfg.initial_level, cfg);
            let mut v = path.clone();
            if kind == 3 {
                zero_out(&mut rng, &mut v, cfg.zero_fraction);
            }
            (v, path)
        }
        2 => {
            let path = additive_path(&mut rng, n, cfg);
            (path.iter().map(|v| v.max(0.0)).collect(), path)
        }
        _ => {
            let (level, size) = if kind == 5 {
                (cfg.small_count_level, cfg.small_count_size)
            } else {
                (cfg.initial_level, cfg.count_size)
            };
            let path = multiplicative_path(&mut rng, n, level, cfg);
            let mut v: Vec<f64> = path.iter().map(|&mu| nb_draw(&mut rng, size, mu)).collect();
            if kind == 6 {
                zero_out(&mut rng, &mut v, cfg.zero_fraction);
            }
            (v, path)
        }
    };
    let series = DemandSeries::new(format!("dgp{kind}-{seed}"), values, cfg.frequency)?;
    Ok(DgpSample { series, mean_path })
}

pub fn gen_dgp(kind: u8, n: usize, seed: u64) -> Result<DemandSeries> {
    simulate_dgp(kind, n, seed, &DgpConfig::default()).map(|s| s.series)
}

/// Multiplies `round(rate * #non-zero)` randomly chosen non-zero values.
pub fn inject_promotions(
    series: &DemandSeries,
    rate: f64,
    multiplier: f64,
    seed: u64,
) -> Result<DemandSeries> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(AidError::InvalidInput(format!(
            "promotion rate {rate} outside [0, 1]"
        )));
    }
    if !(multiplier > 0.0 && multiplier.is_finite()) {
        return Err(AidError::InvalidInput(format!(
            "multiplier {multiplier} must be positive"
        )));
    }
    let nonzero: Vec<usize> = (0..series.len()).filter(|&i| series.values()[i] > 0.0).collect();
    let k = (rate * nonzero.len() as f64).round() as usize;
    let mut values = series.values().to_vec();
    let mut rng = rng(seed);
    for j in sample(&mut rng, nonzero.len(), k) {
        values[nonzero[j]] *= multiplier;
    }
    series.with_values(values)
}

/// Zeroes out `count` non-overlapping runs of an existing series and labels
/// them. Runs that cannot be placed within 100 attempts are skipped and
/// `warning` is set.
pub fn inject_stockout_runs(
    series: &DemandSeries,
    count: usize,
    len: StockoutLength,
    seed: u64,
) -> Result<LabeledSeries> {
    let n = series.len();
    let mut rng = rng(seed);
    let mut values = series.values().to_vec();
    let mut truth = vec![false; n];
    let mut placed = 0;
    let mut warning = false;
    for _ in 0..count {
        let l = match len {
            StockoutLength::Fixed(l) => l,
            StockoutLength::Range(lo, hi) => rng.random_range(lo..=hi),
        };
        if l == 0 || l > n {
            return Err(AidError::InvalidInput(format!(
                "stockout length {l} does not fit"
            )));
        }
        let start = (0..100)
            .map(|_| rng.random_range(0..=n - l))
            .find(|&s| truth[s.saturating_sub(1)..(s + l + 1).min(n)].iter().all(|t| !t));
        match start {
            Some(s) => {
                for i in s..s + l {
                    values[i] = 0.0;
                    truth[i] = true;
                }
                placed += 1;
            }
            None => warning = true,
        }
    }
    Ok(LabeledSeries {
        series: series.with_values(values)?,
        truth_flags: truth,
        dgp: series.id().to_string(),
        warning,
        injected_stockouts: placed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn scenario(n: usize, p: f64, count: usize, len: usize, seed: u64) -> ScenarioConfig {
        ScenarioConfig {
            n,
            p_occ: p,
            n_stockouts: count,
            stockout_len: StockoutLength::Fixed(len),
            seed,
        }
    }

    #[test]
    fn table_settings_generate() {
        let cfg = ScenarioConfig {
            n: 100,
            p_occ: 0.8,
            n_stockouts: 1,
            stockout_len: StockoutLength::Range(3, 10),
            seed: 5,
        };
        let s = gen_stockout_series(&cfg).unwrap();
        assert_eq!(s.series.len(), 100);
        let injected = s.truth_flags.iter().filter(|f| **f).count();
        assert!((3..=10).contains(&injected));
        assert!(!s.warning);
    }

    #[test]
    fn no_stockouts_no_truth() {
        let s = gen_stockout_series(&scenario(100, 0.5, 0, 5, 1)).unwrap();
        assert!(s.truth_flags.iter().all(|f| !f));
    }

    #[test]
    fn same_seed_same_output() {
        let a = gen_stockout_series(&scenario(200, 0.6, 4, 5, 99)).unwrap();
        let b = gen_stockout_series(&scenario(200, 0.6, 4, 5, 99)).unwrap();
        assert_eq!(a, b);
        assert_eq!(gen_dgp(6, 100, 3).unwrap(), gen_dgp(6, 100, 3).unwrap());
    }

    #[test]
    fn capacity_reduces_count() {
        let s = gen_stockout_series(&scenario(30, 0.8, 5, 5, 2)).unwrap();
        assert!(s.warning);
        assert_eq!(s.injected_stockouts, 3);
        assert_eq!(s.truth_flags.iter().filter(|f| **f).count(), 15);
    }

    #[test]
    fn scenario_sizes_are_positive_integers() {
        let s = gen_stockout_series(&scenario(500, 0.5, 5, 5, 8)).unwrap();
        for v in s.series.values().iter().filter(|v| **v > 0.0) {
            assert!(*v >= 1.0 && v.fract() == 0.0);
        }
    }

    #[test]
    fn noiseless_multiplicative_is_constant() {
        let cfg = DgpConfig {
            sdlog: 0.0,
            ..DgpConfig::default()
        };
        let s = simulate_dgp(1, 50, 4, &cfg).unwrap();
        assert!(s.series.values().iter().all(|v| *v == 1000.0));
    }

    #[test]
    fn exact_zero_fraction() {
        for n in [30, 60, 101, 400] {
            for kind in [3, 6] {
                let s = gen_dgp(kind, n, n as u64).unwrap();
                let expected = (0.3 * n as f64).round() as usize;
                assert_eq!(s.zero_count(), expected, "kind {kind} n {n}");
            }
        }
    }

    #[test]
    fn additive_zeroes_match_negative_draws() {
        let s = simulate_dgp(2, 400, 12, &DgpConfig::default()).unwrap();
        let negatives = s.mean_path.iter().filter(|v| **v <= 0.0).count();
        assert_eq!(s.series.zero_count(), negatives);
    }

    #[test]
    fn regular_generators_have_no_zeroes() {
        assert_eq!(gen_dgp(1, 1000, 1).unwrap().zero_count(), 0);
        assert_eq!(gen_dgp(4, 1000, 1).unwrap().zero_count(), 0);
    }

    #[test]
    fn count_generator_tracks_its_mean() {
        let s = simulate_dgp(4, 10_000, 21, &DgpConfig::default()).unwrap();
        let mean = s.series.values().iter().sum::<f64>() / 10_000.0;
        let target = s.mean_path.iter().sum::<f64>() / 10_000.0;
        assert!((mean / target - 1.0).abs() < 0.05, "{mean} vs {target}");
        assert!(s.series.values().iter().all(|v| v.fract() == 0.0));
    }

    #[test]
    fn bad_kind() {
        assert!(gen_dgp(0, 100, 1).is_err());
        assert!(gen_dgp(7, 100, 1).is_err());
    }

    #[test]
    fn promotions_identities() {
        let s = gen_dgp(4, 200, 7).unwrap();
        assert_eq!(inject_promotions(&s, 0.0, 2.0, 1).unwrap(), s);
        assert_eq!(inject_promotions(&s, 0.5, 1.0, 1).unwrap(), s);
        let p = inject_promotions(&s, 0.1, 2.0, 1).unwrap();
        assert!(p.values().iter().all(|v| v.fract() == 0.0));
        let changed = p.values().iter().zip(s.values()).filter(|(a, b)| a != b).count();
        assert_eq!(changed, 20);
    }

    #[test]
    fn stockout_runs_on_existing_series() {
        let s = gen_dgp(1, 200, 3).unwrap();
        let l = inject_stockout_runs(&s, 3, StockoutLength::Fixed(6), 9).unwrap();
        assert_eq!(l.injected_stockouts, 3);
        assert_eq!(l.truth_flags.iter().filter(|f| **f).count(), 18);
        for (i, t) in l.truth_flags.iter().enumerate() {
            assert_eq!(*t, l.series.values()[i] == 0.0);
        }
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, 0, 0), derive_seed(1, 0, 1));
        assert_ne!(derive_seed(1, 0, 0), derive_seed(1, 1, 0));
    }

    proptest! {
        #[test]
        fn truth_marks_only_zeros(
            n in 30usize..300,
            p in 0.1f64..0.95,
            count in 0usize..8,
            len in 1usize..8,
            seed in any::<u64>(),
        ) {
            let s = gen_stockout_series(&scenario(n, p, count, len, seed)).unwrap();
            prop_assert_eq!(s.series.len(), n);
            prop_assert_eq!(s.truth_flags.len(), n);
            for (t, v) in s.truth_flags.iter().zip(s.series.values()) {
                prop_assert!(!*t || *v == 0.0);
            }
            let marked = s.truth_flags.iter().filter(|f| **f).count();
            prop_assert_eq!(marked, s.injected_stockouts * len);
            prop_assert!(marked <= n / 2);
        }
    }
}
