//! Declarative experiment configurations.
//!
//! Every configuration serializes back into the `config` block of the
//! experiment's `summary.json`, and [`ExperimentConfig::from_json`] accepts
//! that block unchanged, so a result file can always be regenerated.

use serde::{Deserialize, Serialize};

use bvm_core::models::GlmFamily;

use crate::error::ConfigError;

/// Minimum `R·K` for regime experiments.
pub const MIN_TOTAL_DRAWS: usize = 1000;

/// Growth regime of `βₙ = pₙ^{3/2}/n^{1/2}` relative to `pₙ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `βₙ = 1/log pₙ`.
    #[value(name = "inv_log")]
    InvLog,
    /// `βₙ = 1`.
    Unit,
    /// `βₙ = log pₙ`.
    Log,
}

impl Regime {
    pub fn beta(self, p_n: usize) -> f64 {
        let lp = (p_n as f64).ln();
        match self {
            Regime::InvLog => 1.0 / lp,
            Regime::Unit => 1.0,
            Regime::Log => lp,
        }
    }

    /// `Mₙ = round(pₙ²/βₙ²)`, at least 1.
    pub fn group_size(self, p_n: usize) -> u64 {
        let b = self.beta(p_n);
        ((p_n as f64 / b).powi(2).round() as u64).max(1)
    }
}

fn default_p() -> usize {
    1000
}
fn default_reps() -> usize {
    200
}
fn default_draws() -> usize {
    1000
}
fn default_one() -> f64 {
    1.0
}
fn default_seed() -> u64 {
    42
}

/// Grouped-Poisson critical-dimension run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CritdimConfig {
    #[serde(default = "default_p")]
    pub p_n: usize,
    /// Sets `Mₙ` through `βₙ`; exclusive with `m_n`.
    #[serde(default)]
    pub regime: Option<Regime>,
    #[serde(default)]
    pub m_n: Option<u64>,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default = "default_draws")]
    pub draws: usize,
    /// Gamma prior scale `μ`.
    #[serde(default = "default_one")]
    pub mu: f64,
    /// `C` in the admissibility constraint `μ ≤ C√(n/log n)`.
    #[serde(default = "default_one")]
    pub prior_bound: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Fix one data set and draw every replicate's posterior sample from it.
    #[serde(default)]
    pub single_data: bool,
    #[serde(default)]
    pub keep_draws: bool,
}

impl Default for CritdimConfig {
    fn default() -> Self {
        Self {
            p_n: default_p(),
            regime: Some(Regime::Unit),
            m_n: None,
            reps: default_reps(),
            draws: default_draws(),
            mu: 1.0,
            prior_bound: 1.0,
            seed: default_seed(),
            single_data: false,
            keep_draws: false,
        }
    }
}

impl CritdimConfig {
    pub fn group_size(&self) -> u64 {
        match (self.regime, self.m_n) {
            (_, Some(m)) => m,
            (Some(r), None) => r.group_size(self.p_n),
            (None, None) => 1,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.p_n < 2 {
            return Err(ConfigError::field("p_n", "need at least two groups"));
        }
        match (self.regime, self.m_n) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::field(
                    "m_n",
                    "give either regime or m_n, not both",
                ))
            }
            (None, None) => {
                return Err(ConfigError::field(
                    "regime",
                    "one of regime or m_n is required",
                ))
            }
            (None, Some(0)) => {
                return Err(ConfigError::field("m_n", "group size must be at least 1"))
            }
            _ => {}
        }
        check_sampling(self.reps, self.draws, self.regime.is_some())?;
        check_prior(
            self.mu,
            self.prior_bound,
            self.p_n as f64 * self.group_size() as f64,
        )
    }
}

fn check_sampling(reps: usize, draws: usize, regime: bool) -> Result<(), ConfigError> {
    if reps == 0 {
        return Err(ConfigError::field("reps", "need at least one replicate"));
    }
    if draws < 2 {
        return Err(ConfigError::field(
            "draws",
            "need at least two draws per replicate",
        ));
    }
    if regime && reps.saturating_mul(draws) < MIN_TOTAL_DRAWS {
        return Err(ConfigError::field(
            "draws",
            format!("reps * draws must be at least {MIN_TOTAL_DRAWS}"),
        ));
    }
    Ok(())
}

fn check_prior(mu: f64, c: f64, n: f64) -> Result<(), ConfigError> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(ConfigError::field("prior_bound", "must be positive"));
    }
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(ConfigError::field("mu", "prior scale must be positive"));
    }
    let cap = c * (n / n.ln()).sqrt();
    if mu > cap {
        return Err(ConfigError::field(
            "mu",
            format!("prior scale exceeds C sqrt(n / log n) = {cap}"),
        ));
    }
    Ok(())
}

/// One `(p, n)` point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPair {
    pub p: usize,
    pub n: u64,
}

/// Parses `p:n,p:n,...`.
pub fn parse_pairs(text: &str) -> Result<Vec<SweepPair>, ConfigError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (p, n) = item.split_once(':').ok_or_else(|| {
                ConfigError::field("pairs", format!("`{item}` is not of the form p:n"))
            })?;
            let p = p
                .trim()
                .parse()
                .map_err(|_| ConfigError::field("pairs", format!("bad dimension in `{item}`")))?;
            let n = n
                .trim()
                .parse()
                .map_err(|_| ConfigError::field("pairs", format!("bad sample size in `{item}`")))?;
            Ok(SweepPair { p, n })
        })
        .collect()
}

/// Grouped-Poisson shift sweep over `(p, n)` pairs; `Mₙ = round(n/p)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub pairs: Vec<SweepPair>,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default = "default_draws")]
    pub draws: usize,
    #[serde(default = "default_one")]
    pub mu: f64,
    #[serde(default = "default_one")]
    pub prior_bound: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.pairs.is_empty() {
            return Err(ConfigError::field("pairs", "need at least one (p, n) pair"));
        }
        check_sampling(self.reps, self.draws, true)?;
        for pair in &self.pairs {
            if pair.p < 2 {
                return Err(ConfigError::field(
                    "pairs",
                    format!("p = {} needs at least two groups", pair.p),
                ));
            }
            if pair.n < pair.p as u64 {
                return Err(ConfigError::field(
                    "pairs",
                    format!("n = {} is below p = {}", pair.n, pair.p),
                ));
            }
            check_prior(self.mu, self.prior_bound, pair.n as f64)?;
        }
        Ok(())
    }
}

fn default_family() -> GlmFamily {
    GlmFamily::Logistic
}
fn default_n() -> usize {
    500
}
fn default_p_star() -> usize {
    2
}
fn default_target() -> usize {
    1
}
fn default_x() -> f64 {
    5.0
}
fn default_grid_points() -> usize {
    61
}
fn default_box_sd() -> f64 {
    10.0
}
fn default_rw_draws() -> usize {
    20_000
}

/// GLM posterior-versus-Gaussian check at desk scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlmCheckConfig {
    #[serde(default = "default_family")]
    pub family: GlmFamily,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_p_star")]
    pub p_star: usize,
    /// Leading coordinates of `υ` forming the target.
    #[serde(default = "default_target")]
    pub target_dim: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Defaults to zero, or `(−1, 0, …)` for the exponential family.
    #[serde(default)]
    pub upsilon_star: Option<Vec<f64>>,
    /// CSV design (header row); overrides `n` and `p_star`.
    #[serde(default)]
    pub design: Option<String>,
    #[serde(default = "default_x")]
    pub x: f64,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    /// Quadrature box half-width in Laplace standard deviations.
    #[serde(default = "default_box_sd")]
    pub box_sd: f64,
    #[serde(default = "default_rw_draws")]
    pub rw_draws: usize,
    #[serde(default)]
    pub rw_burn_in: Option<usize>,
    #[serde(default)]
    pub proposal_scale: Option<f64>,
}

impl Default for GlmCheckConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl GlmCheckConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.design.is_none() {
            if self.p_star == 0 || self.p_star > 3 {
                return Err(ConfigError::field(
                    "p_star",
                    "quadrature needs 1 <= p_star <= 3",
                ));
            }
            if self.n <= self.p_star {
                return Err(ConfigError::field(
                    "n",
                    "need more observations than parameters",
                ));
            }
        }
        if self.target_dim == 0 {
            return Err(ConfigError::field("target_dim", "must be positive"));
        }
        if !(self.x > 0.0) || !self.x.is_finite() {
            return Err(ConfigError::field("x", "must be positive"));
        }
        if self.grid_points < 31 {
            return Err(ConfigError::field("grid_points", "need at least 31 points"));
        }
        if !(self.box_sd > 0.0) {
            return Err(ConfigError::field("box_sd", "must be positive"));
        }
        if self.rw_draws < 2 {
            return Err(ConfigError::field("rw_draws", "need at least two draws"));
        }
        if let Some(s) = self.proposal_scale {
            if !(s > 0.0) {
                return Err(ConfigError::field("proposal_scale", "must be positive"));
            }
        }
        Ok(())
    }
}

/// Any experiment, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    Critdim(CritdimConfig),
    Sweep(SweepConfig),
    GlmCheck(GlmCheckConfig),
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate().map_err(|e| e.locate(text))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        match self {
            ExperimentConfig::Critdim(c) => c.validate(),
            ExperimentConfig::Sweep(c) => c.validate(),
            ExperimentConfig::GlmCheck(c) => c.validate(),
        }
    }
}
