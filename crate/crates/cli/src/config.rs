//! Run configuration: TOML file plus command-line overrides (flags win).

use std::path::Path;

use aid_core::features::{Approach, Engine};
use aid_core::{SmoothConfig, SmoothMethod};
use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Stockout detection level; 1 disables detection.
    pub nu: f64,
    pub smoother: SmoothMethod,
    pub lowess_span: f64,
    pub supsmu_bass: f64,
    pub fourier_order: usize,
    pub horizon: usize,
    pub origins: usize,
    pub service_levels: Vec<f64>,
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
    pub frequency: usize,
    pub approaches: Vec<Approach>,
    pub engines: Vec<Engine>,
    pub promo: bool,
    pub promo_rate: f64,
    pub promo_multiplier: f64,
    pub replications: usize,
    pub sample_sizes: Vec<usize>,
    pub kinds: Vec<u8>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            nu: 0.999,
            smoother: SmoothMethod::Supsmu,
            lowess_span: 2.0 / 3.0,
            supsmu_bass: 0.0,
            fourier_order: 2,
            horizon: 2,
            origins: 2,
            service_levels: vec![0.90, 0.95, 0.99],
            seed: 42,
            workers: 0,
            frequency: 52,
            approaches: Approach::ALL.to_vec(),
            engines: Engine::ALL.to_vec(),
            promo: false,
            promo_rate: 0.1,
            promo_multiplier: 2.0,
            replications: 500,
            sample_sizes: vec![30, 60, 100, 400, 1000],
            kinds: vec![1, 2, 3, 4, 5, 6],
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let cfg: Self = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn smoothing(&self) -> SmoothConfig {
        SmoothConfig {
            method: self.smoother,
            lowess_span: self.lowess_span,
            supsmu_bass: self.supsmu_bass,
            ..SmoothConfig::default()
        }
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if !(self.nu > 0.0 && self.nu <= 1.0) {
            bail!("nu {} outside (0, 1]", self.nu);
        }
        self.smoothing().validate()?;
        if self.horizon == 0 {
            bail!("horizon must be at least 1");
        }
        if self.origins == 0 || self.origins > self.horizon {
            bail!("origins must be between 1 and the horizon ({})", self.horizon);
        }
        if let Some(l) = self.service_levels.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
            bail!("service level {l} outside (0, 1)");
        }
        if self.frequency == 0 {
            bail!("frequency must be positive");
        }
        if !(0.0..=1.0).contains(&self.promo_rate) || self.promo_multiplier <= 0.0 {
            bail!("promotion rate must lie in [0, 1] and the multiplier be positive");
        }
        if let Some(k) = self.kinds.iter().find(|k| !(1..=6).contains(*k)) {
            bail!("generator kind {k} outside 1..=6");
        }
        Ok(())
    }
}

/// Runs `f` on a dedicated pool with the configured worker count.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> anyhow::Result<T> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    Ok(pool.install(f))
}
