//! Concrete models with likelihoods, Fisher matrices and condition constants.

pub mod glm;
pub mod linear;
pub mod poisson;
pub mod sieve;

pub use glm::{GlmFamily, GlmModel};
pub use linear::{ErrorDensity, LinearModel};
pub use poisson::GroupedPoissonModel;
pub use sieve::SieveModel;

use nalgebra::DMatrix;

use crate::error::{CoreError, Result};

#[cfg(not(feature = "std"))]
use num_traits::Float as _;

/// Rejects designs whose smallest singular value is negligible.
pub(crate) fn check_full_rank(design: &DMatrix<f64>) -> Result<()> {
    if design.ncols() == 0 {
        return Ok(());
    }
    if design.nrows() < design.ncols() || design.iter().any(|v| !v.is_finite()) {
        return Err(CoreError::RankDeficient);
    }
    let sv = design.clone().singular_values();
    if !(sv.min() > 1e-10 * sv.max()) {
        return Err(CoreError::RankDeficient);
    }
    Ok(())
}

/// `maxᵢ wᵢ ‖D⁻¹Ψᵢ‖` over design rows, with `D²` given by its Cholesky factor.
pub(crate) fn max_weighted_leverage(
    design: &DMatrix<f64>,
    fisher: &DMatrix<f64>,
    weight: impl Fn(usize) -> f64,
) -> Result<f64> {
    let chol = crate::linalg::cholesky(fisher, "Fisher matrix")?;
    let mut best = 0.0_f64;
    for i in 0..design.nrows() {
        let row = design.row(i).transpose();
        let norm = crate::linalg::inverse_quadratic_form(&chol, &row).sqrt();
        best = best.max(weight(i) * norm);
    }
    Ok(best)
}
