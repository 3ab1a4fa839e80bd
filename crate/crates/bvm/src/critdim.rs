//! Grouped-Poisson critical-dimension experiment.

use rayon::prelude::*;
use serde::Serialize;

use bvm_core::inference::conjugate_theta_draws;
use bvm_core::models::poisson::{poisson_profile_mle, sample_group_sums, GroupedPoissonModel};
use bvm_core::rng::{stream, BvmRng};
use bvm_core::CoreError;

use crate::config::{CritdimConfig, ExperimentConfig, Regime};
use crate::error::{ConfigError, Result};
use crate::output::{csv_string, Artifacts, VERSION};
use crate::stats::{Histogram, Moments};

/// Tolerance on the aggregate standardized mean and variance.
pub const MOMENT_TOLERANCE: f64 = 0.15;
/// Aggregate standardized mean signalling the breakdown regime.
pub const BREAKDOWN_MEAN: f64 = 2.0;
/// Data sets drawn per replicate before a persistent zero count is fatal.
const MAX_DATA_ATTEMPTS: u64 = 10_000;

/// Stream index of the shared data set under `single_data`.
const SINGLE_DATA_STREAM: u64 = u64::MAX;

/// Group sums with every `Z_j > 0`, resampling on zero counts.
///
/// Returns the sums, the profile MLE `θ̃ₙ` and the number of rejected data sets.
pub fn sample_positive_data(
    model: &GroupedPoissonModel,
    rng: &mut BvmRng,
) -> Result<(Vec<u64>, f64, u64)> {
    let mut rejected = 0;
    loop {
        let z = sample_group_sums(model, rng)?;
        match poisson_profile_mle(&z, model) {
            Ok(mle) => return Ok((z, mle, rejected)),
            Err(CoreError::ZeroCount { group }) => {
                rejected += 1;
                if rejected >= MAX_DATA_ATTEMPTS {
                    return Err(CoreError::ZeroCount { group }.into());
                }
            }
            Err(e) => return Err(e.into()),
        }
    }
}

/// Per-replicate accumulators; merged in replicate order.
#[derive(Debug, Clone, Default)]
pub(crate) struct ReplicateStats {
    /// `√Mₙ (θ − θ̃ₙ)`.
    pub standardized: Moments,
    /// `pₙ (θ − θ̃ₙ)`.
    pub scaled_shift: Moments,
    pub hist: Histogram,
    pub rejections: u64,
    pub draws: Option<Vec<f64>>,
}

impl ReplicateStats {
    fn merge(&mut self, other: &ReplicateStats) {
        self.standardized.merge(&other.standardized);
        self.scaled_shift.merge(&other.scaled_shift);
        self.hist.merge(&other.hist);
        self.rejections += other.rejections;
    }
}

/// Draws `k` posterior samples and accumulates their standardizations.
pub(crate) fn posterior_replicate(
    model: &GroupedPoissonModel,
    z: &[u64],
    mle: f64,
    k: usize,
    rng: &mut BvmRng,
    keep: bool,
) -> Result<ReplicateStats> {
    let mut thetas = Vec::with_capacity(k);
    conjugate_theta_draws(model, z, k, rng, &mut thetas)?;
    let root_m = (model.m_n() as f64).sqrt();
    let p = model.p_n() as f64;
    let mut out = ReplicateStats::default();
    let mut kept = keep.then(|| Vec::with_capacity(k));
    for theta in thetas {
        let d = theta - mle;
        let t = root_m * d;
        out.standardized.push(t);
        out.scaled_shift.push(p * d);
        out.hist.push(t);
        if let Some(v) = kept.as_mut() {
            v.push(t);
        }
    }
    out.draws = kept;
    Ok(out)
}

/// Runs `f` on a pool of `threads` workers, or on the global pool.
pub(crate) fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| ConfigError::field("threads", e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CritdimVerdicts {
    /// `|mean − βₙ/2| ≤ 0.15`.
    pub shift_matches: bool,
    /// `|variance − 1| ≤ 0.15`.
    pub unit_variance: bool,
    /// `mean ≥ 2`.
    pub breakdown: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CritdimSummary {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub version: &'static str,
    pub regime: Option<Regime>,
    pub p_n: usize,
    pub m_n: u64,
    pub n: u64,
    /// Requested `βₙ` (regime runs only).
    pub beta_target: Option<f64>,
    /// `pₙ/√Mₙ` after rounding `Mₙ`.
    pub beta: f64,
    /// Limit-law mean `βₙ/2`.
    pub predicted_mean: f64,
    pub mean: f64,
    pub variance: f64,
    /// Standard error of `mean` from the spread of replicate means.
    pub mean_se: f64,
    pub draw_count: u64,
    pub rejections: u64,
    pub verdicts: CritdimVerdicts,
}

#[derive(Debug, Clone)]
pub struct CritdimResult {
    pub summary: CritdimSummary,
    pub hist: Histogram,
    /// Standardized draws per replicate when `keep_draws` is set.
    pub draws: Option<Vec<Vec<f64>>>,
}

impl CritdimResult {
    pub fn artifacts(&self) -> Result<Artifacts> {
        let mut a = Artifacts::new(&self.summary)?.with_file("hist.csv", self.hist.to_csv()?);
        if let Some(draws) = &self.draws {
            let rows = draws.iter().enumerate().flat_map(|(r, ds)| {
                ds.iter()
                    .enumerate()
                    .map(move |(i, t)| vec![r.to_string(), i.to_string(), t.to_string()])
            });
            a = a.with_file(
                "draws.csv",
                csv_string(&["replicate", "draw_index", "value"], rows)?,
            );
        }
        Ok(a)
    }
}

/// Replicate `r` draws its data and posterior sample from stream `r` of the
/// master seed, so the merged result does not depend on the worker count.
/// Under `single_data` the data come from a separate stream shared by all
/// replicates.
pub fn run_critdim(cfg: &CritdimConfig, threads: Option<usize>) -> Result<CritdimResult> {
    cfg.validate()?;
    let m_n = cfg.group_size();
    let model = GroupedPoissonModel::with_prior_bound(cfg.p_n, m_n, cfg.mu, cfg.prior_bound)?;

    let shared = if cfg.single_data {
        Some(sample_positive_data(
            &model,
            &mut stream(cfg.seed, SINGLE_DATA_STREAM),
        )?)
    } else {
        None
    };

    let parts: Vec<ReplicateStats> = in_pool(threads, || {
        (0..cfg.reps)
            .into_par_iter()
            .map(|r| {
                let mut rng = stream(cfg.seed, r as u64);
                let (z, mle, rejected) = match &shared {
                    Some((z, mle, _)) => (z.clone(), *mle, 0),
                    None => sample_positive_data(&model, &mut rng)?,
                };
                let mut out =
                    posterior_replicate(&model, &z, mle, cfg.draws, &mut rng, cfg.keep_draws)?;
                out.rejections = rejected;
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()
    })??;

    let mut total = ReplicateStats::default();
    if let Some((_, _, rejected)) = &shared {
        total.rejections = *rejected;
    }
    let replicate_means: Moments = parts.iter().map(|p| p.standardized.mean).collect();
    for part in &parts {
        total.merge(part);
    }
    let draws = cfg.keep_draws.then(|| {
        parts
            .into_iter()
            .map(|p| p.draws.unwrap_or_default())
            .collect()
    });

    let beta = model.beta();
    let mean = total.standardized.mean;
    let variance = total.standardized.variance();
    let predicted_mean = beta / 2.0;
    let summary = CritdimSummary {
        config: ExperimentConfig::Critdim(cfg.clone()),
        seed: cfg.seed,
        version: VERSION,
        regime: cfg.regime,
        p_n: cfg.p_n,
        m_n,
        n: model.n(),
        beta_target: cfg.regime.map(|r| r.beta(cfg.p_n)),
        beta,
        predicted_mean,
        mean,
        variance,
        mean_se: replicate_means.standard_error(),
        draw_count: total.standardized.count,
        rejections: total.rejections,
        verdicts: CritdimVerdicts {
            shift_matches: (mean - predicted_mean).abs() <= MOMENT_TOLERANCE,
            unit_variance: (variance - 1.0).abs() <= MOMENT_TOLERANCE,
            breakdown: mean >= BREAKDOWN_MEAN,
        },
    };
    Ok(CritdimResult {
        summary,
        hist: total.hist,
        draws,
    })
}
