use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, CoreError, Result};
use crate::models::glm::{glm_fisher, glm_mle, GlmModel};
use crate::rng::{seeded, BvmRng};

use super::{GlmPosterior, LogDensity, PosteriorSummary, Prior};

#[cfg(not(feature = "std"))]
use num_traits::Float as _;

/// Random-walk Metropolis settings. `None` selects the defaults: burn-in
/// `min(10⁴ p*, 10⁵)` steps and proposal scale `2.4/√p*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RwSettings {
    pub n_draws: usize,
    pub burn_in: Option<usize>,
    pub thin: usize,
    pub proposal_scale: Option<f64>,
}

impl RwSettings {
    pub fn new(n_draws: usize) -> Self {
        Self {
            n_draws,
            burn_in: None,
            thin: 1,
            proposal_scale: None,
        }
    }
}

/// Random-walk Metropolis with Gaussian proposals of covariance
/// `s² · (proposal_precision)⁻¹`.
pub fn sample_posterior_rw<D: LogDensity + ?Sized, R: Rng + ?Sized>(
    density: &D,
    start: &DVector<f64>,
    proposal_precision: &DMatrix<f64>,
    settings: &RwSettings,
    target_dim: usize,
    rng: &mut R,
) -> Result<PosteriorSummary> {
    let d = density.dim();
    if start.len() != d || proposal_precision.nrows() != d {
        return Err(CoreError::DimensionMismatch {
            context: "sampler start",
            expected: d,
            found: start.len(),
        });
    }
    if target_dim == 0 || target_dim > d {
        return Err(invalid("target dimension out of range"));
    }
    if settings.n_draws < 2 || settings.thin == 0 {
        return Err(invalid("need at least two draws and a positive thinning"));
    }
    let scale = settings.proposal_scale.unwrap_or(2.4 / (d as f64).sqrt());
    if !(scale > 0.0) {
        return Err(invalid("proposal scale must be positive"));
    }
    let burn_in = settings.burn_in.unwrap_or((10_000 * d).min(100_000));

    // Proposal step s·L⁻ᵀγ has covariance s²(LLᵀ)⁻¹.
    let chol = crate::linalg::cholesky(proposal_precision, "proposal precision")?;
    let lt = chol.l().transpose();

    let mut current = start.clone();
    let mut current_ld = density.log_density(&current);
    if !current_ld.is_finite() {
        return Err(CoreError::NonFiniteDensity);
    }

    let mut draws = DMatrix::zeros(settings.n_draws, target_dim);
    let mut accepted = 0usize;
    let mut proposed = 0usize;
    let total = burn_in + settings.n_draws * settings.thin;
    let mut kept = 0usize;
    let mut gamma = DVector::zeros(d);
    for step in 0..total {
        for g in gamma.iter_mut() {
            *g = rng.sample(StandardNormal);
        }
        let delta = lt
            .solve_upper_triangular(&gamma)
            .expect("Cholesky factor has a positive diagonal");
        let proposal = &current + delta * scale;
        let ld = density.log_density(&proposal);
        let log_u: f64 = rng.random::<f64>().ln();
        proposed += 1;
        if ld.is_finite() && log_u < ld - current_ld {
            current = proposal;
            current_ld = ld;
            accepted += 1;
        }
        if step >= burn_in && (step - burn_in + 1).is_multiple_of(settings.thin) {
            for j in 0..target_dim {
                draws[(kept, j)] = current[j];
            }
            kept += 1;
        }
    }

    let mut summary = PosteriorSummary::from_draws(draws, true)?;
    summary.acceptance_rate = Some(accepted as f64 / proposed as f64);
    Ok(summary)
}

/// GLM posterior by random walk started at the MLE, with the proposal
/// shaped by the Fisher matrix there plus the prior precision.
pub fn sample_glm_posterior_rw(
    model: &GlmModel,
    prior: Prior,
    settings: &RwSettings,
    target_dim: usize,
    rng_seed: u64,
) -> Result<PosteriorSummary> {
    let (start, precision) = glm_laplace(model, &prior)?;
    let post = GlmPosterior::new(model, prior)?;
    let mut rng: BvmRng = seeded(rng_seed);
    sample_posterior_rw(&post, &start, &precision, settings, target_dim, &mut rng)
}

/// MLE and the curvature there (Fisher matrix plus prior precision).
pub fn glm_laplace(model: &GlmModel, prior: &Prior) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let mle = glm_mle(model, 1e-10, 200)?;
    let precision = glm_fisher(&mle, model)? + prior.precision(model.p_star());
    Ok((mle, precision))
}
