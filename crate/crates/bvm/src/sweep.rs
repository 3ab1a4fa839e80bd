//! Posterior shift across `(p, n)` pairs in the grouped Poisson model.
//!
//! For each pair the experiment reports two columns:
//! * `p (θ − θ̃ₙ)`, whose mean is predicted to be `p³/(2n)`;
//! * the standardized `√Mₙ (θ − θ̃ₙ)`, whose mean is predicted to be `βₙ/2`.
//!
//! The two predictions coincide only at `βₙ = 1`.

use rayon::prelude::*;
use serde::Serialize;

use bvm_core::models::poisson::GroupedPoissonModel;
use bvm_core::rng::stream;

use crate::config::{ExperimentConfig, SweepConfig};
use crate::critdim::{in_pool, posterior_replicate, sample_positive_data, ReplicateStats};
use crate::error::Result;
use crate::output::{csv_string, Artifacts, VERSION};

/// Relative tolerance of the empirical shift around `p³/(2n)`.
pub const SHIFT_REL_TOLERANCE: f64 = 0.3;
pub const CUBIC_SLOPE: f64 = 3.0;
pub const SLOPE_TOLERANCE: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub p: usize,
    /// `p·Mₙ` after rounding `Mₙ = n/p`.
    pub n: u64,
    pub m_n: u64,
    pub beta: f64,
    /// `p³/(2n)`.
    pub predicted_shift: f64,
    /// Mean of `p (θ − θ̃ₙ)`.
    pub empirical_shift: f64,
    pub shift_se: f64,
    pub relative_error: f64,
    /// `βₙ/2`.
    pub predicted_standardized_mean: f64,
    pub standardized_mean: f64,
    pub standardized_variance: f64,
    pub draw_count: u64,
    pub rejections: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SweepVerdicts {
    /// Every empirical shift within 30% of `p³/(2n)`.
    pub shifts_match: bool,
    /// Log-log slope of shift against `p` in `3 ± 0.3`.
    pub cubic_slope: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub version: &'static str,
    pub rows: Vec<SweepRow>,
    /// Least-squares slope of `log empirical_shift` on `log p`; absent with
    /// fewer than two distinct `p` or a nonpositive shift.
    pub slope: Option<f64>,
    pub verdicts: SweepVerdicts,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub summary: SweepSummary,
}

impl SweepResult {
    pub fn artifacts(&self) -> Result<Artifacts> {
        let rows = self.summary.rows.iter().map(|r| {
            vec![
                r.p.to_string(),
                r.n.to_string(),
                r.m_n.to_string(),
                r.beta.to_string(),
                r.predicted_shift.to_string(),
                r.empirical_shift.to_string(),
                r.shift_se.to_string(),
                r.predicted_standardized_mean.to_string(),
                r.standardized_mean.to_string(),
                r.standardized_variance.to_string(),
                r.draw_count.to_string(),
                r.rejections.to_string(),
            ]
        });
        let csv = csv_string(
            &[
                "p",
                "n",
                "m_n",
                "beta",
                "predicted_shift",
                "empirical_shift",
                "shift_se",
                "predicted_standardized_mean",
                "standardized_mean",
                "standardized_variance",
                "draw_count",
                "rejections",
            ],
            rows,
        )?;
        Ok(Artifacts::new(&self.summary)?.with_file("sweep.csv", csv))
    }
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Pair `i`, replicate `r` uses stream `(i << 32) | r` of the master seed.
pub fn run_sweep(cfg: &SweepConfig, threads: Option<usize>) -> Result<SweepResult> {
    cfg.validate()?;
    let mut rows = Vec::with_capacity(cfg.pairs.len());
    for (i, pair) in cfg.pairs.iter().enumerate() {
        let m_n = ((pair.n as f64 / pair.p as f64).round() as u64).max(1);
        let model = GroupedPoissonModel::with_prior_bound(pair.p, m_n, cfg.mu, cfg.prior_bound)?;
        let parts: Vec<ReplicateStats> = in_pool(threads, || {
            (0..cfg.reps)
                .into_par_iter()
                .map(|r| {
                    let mut rng = stream(cfg.seed, ((i as u64) << 32) | r as u64);
                    let (z, mle, rejected) = sample_positive_data(&model, &mut rng)?;
                    let mut out = posterior_replicate(&model, &z, mle, cfg.draws, &mut rng, false)?;
                    out.rejections = rejected;
                    Ok(out)
                })
                .collect::<Result<Vec<_>>>()
        })??;
        let mut total = ReplicateStats::default();
        let mut replicate_shifts = crate::stats::Moments::default();
        for part in &parts {
            total.standardized.merge(&part.standardized);
            total.scaled_shift.merge(&part.scaled_shift);
            total.rejections += part.rejections;
            replicate_shifts.push(part.scaled_shift.mean);
        }
        let n = model.n();
        let p = pair.p as f64;
        let predicted = p * p * p / (2.0 * n as f64);
        let empirical = total.scaled_shift.mean;
        rows.push(SweepRow {
            p: pair.p,
            n,
            m_n,
            beta: model.beta(),
            predicted_shift: predicted,
            empirical_shift: empirical,
            shift_se: replicate_shifts.standard_error(),
            relative_error: (empirical - predicted).abs() / predicted,
            predicted_standardized_mean: model.beta() / 2.0,
            standardized_mean: total.standardized.mean,
            standardized_variance: total.standardized.variance(),
            draw_count: total.standardized.count,
            rejections: total.rejections,
        });
    }

    let slope = if rows.iter().all(|r| r.empirical_shift > 0.0) {
        let x: Vec<f64> = rows.iter().map(|r| (r.p as f64).ln()).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.empirical_shift.ln()).collect();
        ols_slope(&x, &y)
    } else {
        None
    };
    let verdicts = SweepVerdicts {
        shifts_match: rows.iter().all(|r| r.relative_error <= SHIFT_REL_TOLERANCE),
        cubic_slope: slope.is_some_and(|s| (s - CUBIC_SLOPE).abs() <= SLOPE_TOLERANCE),
    };
    Ok(SweepResult {
        summary: SweepSummary {
            config: ExperimentConfig::Sweep(cfg.clone()),
            seed: cfg.seed,
            version: VERSION,
            rows,
            slope,
            verdicts,
        },
    })
}
