//! Posterior computation and the posterior-versus-Gaussian diagnostic.

mod conjugate;
mod diagnostic;
mod grid;
mod rw;
mod summary;

pub use conjugate::{
    conjugate_theta_draws, sample_posterior_conjugate, sample_posterior_conjugate_with,
};
pub use diagnostic::{
    diagnose, standardized_target_draws, theta_circ, BvmDiagnostic, ThetaCircMode, Verdicts,
};
pub use grid::{grid_box_from_moments, posterior_grid_oracle};
pub use rw::{glm_laplace, sample_glm_posterior_rw, sample_posterior_rw, RwSettings};
pub use summary::PosteriorSummary;

use nalgebra::{DMatrix, DVector};

use crate::error::{CoreError, Result};
use crate::models::glm::{glm_loglik, GlmModel};
use crate::models::poisson::{poisson_posterior_params, GroupedPoissonModel};

#[cfg(not(feature = "std"))]
use num_traits::Float as _;

/// Unnormalized log posterior density; `−∞` outside the support.
pub trait LogDensity {
    fn dim(&self) -> usize;
    fn log_density(&self, point: &DVector<f64>) -> f64;
}

#[derive(Debug, Clone, PartialEq)]
pub enum Prior {
    Flat,
    /// Centered Gaussian prior with precision `G²`.
    Gaussian {
        precision: DMatrix<f64>,
    },
}

impl Prior {
    pub fn log_density(&self, point: &DVector<f64>) -> f64 {
        match self {
            Prior::Flat => 0.0,
            Prior::Gaussian { precision } => -0.5 * (precision * point).dot(point),
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if let Prior::Gaussian { precision } = self {
            if precision.nrows() != dim || precision.ncols() != dim {
                return Err(CoreError::DimensionMismatch {
                    context: "prior precision",
                    expected: dim,
                    found: precision.nrows(),
                });
            }
            crate::linalg::spd_eigen(precision, "prior precision")?;
        }
        Ok(())
    }

    pub(crate) fn precision(&self, dim: usize) -> DMatrix<f64> {
        match self {
            Prior::Flat => DMatrix::zeros(dim, dim),
            Prior::Gaussian { precision } => precision.clone(),
        }
    }
}

/// GLM posterior `exp{L(υ)} π(υ)`.
#[derive(Debug, Clone)]
pub struct GlmPosterior<'a> {
    model: &'a GlmModel,
    prior: Prior,
}

impl<'a> GlmPosterior<'a> {
    pub fn new(model: &'a GlmModel, prior: Prior) -> Result<Self> {
        prior.validate(model.p_star())?;
        Ok(Self { model, prior })
    }

    pub fn model(&self) -> &GlmModel {
        self.model
    }

    pub fn prior(&self) -> &Prior {
        &self.prior
    }
}

impl LogDensity for GlmPosterior<'_> {
    fn dim(&self) -> usize {
        self.model.p_star()
    }

    fn log_density(&self, point: &DVector<f64>) -> f64 {
        match glm_loglik(point, self.model) {
            Ok(l) => l + self.prior.log_density(point),
            Err(_) => f64::NEG_INFINITY,
        }
    }
}

/// Grouped Poisson posterior in intensity coordinates `υ_j > 0`, i.e. a
/// product of `Gamma(1 + Z_j, μ/(Mμ + 1))` densities.
#[derive(Debug, Clone)]
pub struct PoissonGroupPosterior {
    shapes: alloc::vec::Vec<f64>,
    scale: f64,
}

impl PoissonGroupPosterior {
    pub fn new(z: &[u64], model: &GroupedPoissonModel) -> Result<Self> {
        let (shapes, scale) = poisson_posterior_params(z, model)?;
        Ok(Self { shapes, scale })
    }
}

impl LogDensity for PoissonGroupPosterior {
    fn dim(&self) -> usize {
        self.shapes.len()
    }

    fn log_density(&self, point: &DVector<f64>) -> f64 {
        let mut total = 0.0;
        for (a, v) in self.shapes.iter().zip(point.iter()) {
            if !(*v > 0.0) {
                return f64::NEG_INFINITY;
            }
            total += (a - 1.0) * v.ln() - v / self.scale;
        }
        total
    }
}
