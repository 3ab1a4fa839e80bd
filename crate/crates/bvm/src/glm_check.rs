//! GLM posterior versus its Gaussian approximation, with the budget derived
//! from the model's Lipschitz constant.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use bvm_core::blockinfo::{efficient_score, schur_complement, FullInfo, FullScore};
use bvm_core::bounds::{budget_from_delta, BvmBudget, TauVariant};
use bvm_core::gausstools::{z_quantile, z_score_bound};
use bvm_core::inference::{
    diagnose, glm_laplace, grid_box_from_moments, posterior_grid_oracle, sample_posterior_rw,
    theta_circ, BvmDiagnostic, GlmPosterior, PosteriorSummary, Prior, RwSettings, Verdicts,
};
use bvm_core::models::glm::{
    glm_fisher, glm_grad, glm_local_lipschitz, glm_n2_inv_sqrt, random_design, sample_responses,
    GlmFamily, GlmModel,
};
use bvm_core::rng::stream;

use crate::config::{ExperimentConfig, GlmCheckConfig};
use crate::design::load_design;
use crate::error::{ConfigError, Result};
use crate::output::{Artifacts, VERSION};

/// Largest combined z-score at which sampler and quadrature agree.
pub const AGREEMENT_Z: f64 = 4.0;

const DATA_STREAM: u64 = 0;
const SAMPLER_STREAM: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticReport {
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
    pub mean_err: f64,
    pub cov_err: f64,
    pub tv_est: f64,
    pub verdict: Verdicts,
}

impl DiagnosticReport {
    fn new(summary: &PosteriorSummary, d: &BvmDiagnostic) -> Self {
        Self {
            mean: summary.mean.iter().copied().collect(),
            cov: rows(&summary.cov),
            mean_err: d.mean_err,
            cov_err: d.cov_err,
            tv_est: d.tv_est,
            verdict: d.verdict,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplerReport {
    #[serde(flatten)]
    pub diagnostic: DiagnosticReport,
    pub acceptance_rate: Option<f64>,
    pub draw_count: usize,
    /// Largest `|sampler − quadrature| / se` over target mean and covariance entries.
    pub max_z_vs_grid: f64,
    pub agrees_with_grid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlmCheckSummary {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub version: &'static str,
    pub family: GlmFamily,
    pub n: usize,
    pub p_star: usize,
    pub target_dim: usize,
    pub upsilon_star: Vec<f64>,
    pub mle: Vec<f64>,
    pub theta_circ: Vec<f64>,
    pub efficient_information: Vec<Vec<f64>>,
    /// Lipschitz constant of `d″` used for `δ(r) = L r / √N₂`.
    pub lipschitz: f64,
    pub n2_inv_sqrt: f64,
    pub budget: BvmBudget,
    pub quadrature: DiagnosticReport,
    pub sampler: SamplerReport,
}

#[derive(Debug, Clone)]
pub struct GlmCheckResult {
    pub summary: GlmCheckSummary,
}

impl GlmCheckResult {
    pub fn artifacts(&self) -> Result<Artifacts> {
        Artifacts::new(&self.summary)
    }
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn default_truth(family: GlmFamily, p_star: usize) -> DVector<f64> {
    let mut v = DVector::zeros(p_star);
    if family == GlmFamily::Exponential {
        v[0] = -1.0;
    }
    v
}

fn max_z(a: &PosteriorSummary, oracle: &PosteriorSummary) -> f64 {
    let mut z: f64 = 0.0;
    let ratio = |d: f64, se: f64| if d == 0.0 { 0.0 } else { d.abs() / se };
    for j in 0..a.dim() {
        z = z.max(ratio(a.mean[j] - oracle.mean[j], a.mean_se[j]));
        for k in 0..a.dim() {
            z = z.max(ratio(a.cov[(j, k)] - oracle.cov[(j, k)], a.cov_se[(j, k)]));
        }
    }
    z
}

/// Data come from stream 0 of the seed and the sampler from stream 1.
pub fn run_glm_check(cfg: &GlmCheckConfig) -> Result<GlmCheckResult> {
    cfg.validate()?;
    let mut data_rng = stream(cfg.seed, DATA_STREAM);
    let design = match &cfg.design {
        Some(path) => load_design(path.as_ref())?,
        None => random_design(cfg.n, cfg.p_star, &mut data_rng),
    };
    let (n, p_star) = design.shape();
    if p_star == 0 || p_star > 3 {
        return Err(ConfigError::field("design", "quadrature needs 1 to 3 columns").into());
    }
    if cfg.target_dim > p_star {
        return Err(ConfigError::field("target_dim", "exceeds the number of parameters").into());
    }
    let ups = match &cfg.upsilon_star {
        Some(v) if v.len() == p_star => DVector::from_column_slice(v),
        Some(_) => {
            return Err(ConfigError::field("upsilon_star", "length must equal p_star").into())
        }
        None => default_truth(cfg.family, p_star),
    };
    let y = sample_responses(cfg.family, &design, &ups, &mut data_rng)?;
    let model = GlmModel::new(design, cfg.family, y)?;

    let p = cfg.target_dim;
    let fisher = glm_fisher(&ups, &model)?;
    let info = FullInfo::from_full(&fisher, p)?;
    let eff = schur_complement(&info)?;
    let score = FullScore::from_full(&glm_grad(&ups, &model)?, p)?;
    let xi = efficient_score(&info, &score)?;
    let tc = theta_circ(&ups.rows(0, p).clone_owned(), &eff, &xi)?;

    let r0 = z_score_bound(p as f64, 1.0, cfg.x)? + z_quantile(p_star, cfg.x)?;
    let n2 = glm_n2_inv_sqrt(&ups, &model, &fisher)?;
    let lipschitz = if model.lipschitz_d2().is_finite() {
        model.lipschitz_d2()
    } else {
        glm_local_lipschitz(&ups, &model, &fisher, r0)?
    };
    let delta = if lipschitz == 0.0 {
        0.0
    } else {
        lipschitz * n2 * r0.powi(3)
    };
    let budget = budget_from_delta(delta, r0, cfg.x, p, TauVariant::Plain);

    let (mle, precision) = glm_laplace(&model, &Prior::Flat)?;
    let laplace_cov = precision
        .clone()
        .try_inverse()
        .ok_or(bvm_core::CoreError::SingularMatrix)?;
    let (center, half) = grid_box_from_moments(&mle, &laplace_cov, cfg.box_sd);
    let posterior = GlmPosterior::new(&model, Prior::Flat)?;
    let grid = posterior_grid_oracle(&posterior, &center, &half, cfg.grid_points, p)?;
    let grid_diag = diagnose(&grid, &tc, &eff, &budget)?;

    let settings = RwSettings {
        n_draws: cfg.rw_draws,
        burn_in: cfg.rw_burn_in,
        thin: 1,
        proposal_scale: cfg.proposal_scale,
    };
    let mut rng = stream(cfg.seed, SAMPLER_STREAM);
    let rw = sample_posterior_rw(&posterior, &mle, &precision, &settings, p, &mut rng)?;
    let rw_diag = diagnose(&rw, &tc, &eff, &budget)?;
    let z = max_z(&rw, &grid);

    Ok(GlmCheckResult {
        summary: GlmCheckSummary {
            config: ExperimentConfig::GlmCheck(cfg.clone()),
            seed: cfg.seed,
            version: VERSION,
            family: cfg.family,
            n,
            p_star,
            target_dim: p,
            upsilon_star: ups.iter().copied().collect(),
            mle: mle.iter().copied().collect(),
            theta_circ: tc.iter().copied().collect(),
            efficient_information: rows(&eff.matrix),
            lipschitz,
            n2_inv_sqrt: n2,
            budget,
            quadrature: DiagnosticReport::new(&grid, &grid_diag),
            sampler: SamplerReport {
                diagnostic: DiagnosticReport::new(&rw, &rw_diag),
                acceptance_rate: rw.acceptance_rate,
                draw_count: rw.draw_count,
                max_z_vs_grid: z,
                agrees_with_grid: z <= AGREEMENT_Z,
            },
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_family_is_exact() {
        let cfg = GlmCheckConfig {
            family: GlmFamily::Gaussian,
            n: 200,
            rw_draws: 2000,
            ..Default::default()
        };
        let s = run_glm_check(&cfg).unwrap().summary;
        assert!(s.quadrature.mean_err <= 1e-8, "{}", s.quadrature.mean_err);
        assert!(s.quadrature.cov_err <= 1e-8, "{}", s.quadrature.cov_err);
        assert!(s.quadrature.tv_est <= 1e-8, "{}", s.quadrature.tv_est);
        assert_eq!(s.lipschitz, 0.0);
        assert_eq!(s.budget.delta, 0.0);
        assert!(s.quadrature.verdict.all());
    }

    #[test]
    fn logistic_desk_scale() {
        let s = run_glm_check(&GlmCheckConfig::default()).unwrap().summary;
        assert!(s.quadrature.cov_err <= 0.1, "{}", s.quadrature.cov_err);
        assert!(s.quadrature.tv_est <= 0.1, "{}", s.quadrature.tv_est);
        assert!(s.budget.delta > 0.0);
        let rate = s.sampler.acceptance_rate.unwrap();
        assert!(rate > 0.1 && rate < 0.9);
    }

    #[test]
    fn target_dimension_checked_against_design() {
        let cfg = GlmCheckConfig {
            target_dim: 3,
            ..Default::default()
        };
        assert!(matches!(
            run_glm_check(&cfg),
            Err(crate::error::BvmError::Config(_))
        ));
        let cfg = GlmCheckConfig {
            upsilon_star: Some(vec![0.0]),
            ..Default::default()
        };
        assert!(matches!(
            run_glm_check(&cfg),
            Err(crate::error::BvmError::Config(_))
        ));
    }

    #[test]
    fn every_family_runs() {
        for family in [GlmFamily::Poisson, GlmFamily::Exponential] {
            let cfg = GlmCheckConfig {
                family,
                n: 300,
                rw_draws: 5000,
                ..Default::default()
            };
            let s = run_glm_check(&cfg).unwrap().summary;
            // The exponential local set may reach w ≥ 0, where d″ is unbounded.
            assert!(s.lipschitz > 0.0);
            if family == GlmFamily::Poisson {
                assert!(s.lipschitz.is_finite());
            }
            assert!(
                s.quadrature.cov_err < 0.2,
                "{family:?}: {}",
                s.quadrature.cov_err
            );
        }
    }
}
