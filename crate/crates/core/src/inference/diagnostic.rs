use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::blockinfo::EfficientInfo;
use crate::bounds::BvmBudget;
use crate::error::{invalid, CoreError, Result};
use crate::gausstools::{kl_gaussians_precision, tv_pinsker};
use crate::linalg;

use super::PosteriorSummary;

#[cfg(not(feature = "std"))]
use num_traits::Float as _;

/// How `θ°` is obtained for the diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ThetaCircMode {
    /// `θ* + D̆⁻¹ξ̆` from the true parameter and the score there (simulation).
    #[default]
    TrueParameter,
    /// The MLE stands in for `θ°` (real data).
    Mle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Verdicts {
    pub mean: bool,
    pub cov: bool,
    pub tv: bool,
}

impl Verdicts {
    pub fn all(&self) -> bool {
        self.mean && self.cov && self.tv
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BvmDiagnostic {
    pub theta_circ: DVector<f64>,
    /// `‖D̆(θ̄ − θ°)‖²`.
    pub mean_err: f64,
    /// `‖I − D̆ 𝔖² D̆‖`.
    pub cov_err: f64,
    /// Pinsker bound between `N(θ°, D̆⁻²)` and the moment-matched Gaussian.
    pub tv_est: f64,
    pub budget: BvmBudget,
    pub verdict: Verdicts,
}

/// `θ° = θ* + D̆⁻¹ ξ̆`.
pub fn theta_circ(
    theta_star: &DVector<f64>,
    eff: &EfficientInfo,
    xi_breve: &DVector<f64>,
) -> Result<DVector<f64>> {
    let p = eff.dim();
    if theta_star.len() != p || xi_breve.len() != p {
        return Err(CoreError::DimensionMismatch {
            context: "theta circ",
            expected: p,
            found: theta_star.len().max(xi_breve.len()),
        });
    }
    Ok(theta_star + &eff.inv_sqrt * xi_breve)
}

/// Compares the posterior moments with `N(θ°, D̆⁻²)` and with the budget.
pub fn diagnose(
    summary: &PosteriorSummary,
    theta_circ: &DVector<f64>,
    eff: &EfficientInfo,
    budget: &BvmBudget,
) -> Result<BvmDiagnostic> {
    let p = eff.dim();
    if summary.dim() != p || theta_circ.len() != p {
        return Err(CoreError::DimensionMismatch {
            context: "diagnostic",
            expected: p,
            found: summary.dim(),
        });
    }
    let shift = &eff.sqrt * (&summary.mean - theta_circ);
    let standardized = linalg::symmetrize(&(&eff.sqrt * &summary.cov * &eff.sqrt));
    let mean_err = shift.norm_squared();
    let cov_err = linalg::op_norm_symmetric(&(DMatrix::identity(p, p) - &standardized));
    let tv_est = match linalg::spd_eigen(&standardized, "standardized covariance") {
        Ok(eig) => {
            let precision = linalg::eigen_map(&eig, |l| 1.0 / l);
            tv_pinsker(kl_gaussians_precision(&precision, &shift)?)
        }
        Err(_) => 1.0,
    };
    Ok(BvmDiagnostic {
        theta_circ: theta_circ.clone(),
        mean_err,
        cov_err,
        tv_est,
        budget: *budget,
        verdict: Verdicts {
            mean: mean_err <= budget.mean_bound,
            cov: cov_err <= budget.cov_bound,
            tv: tv_est <= budget.tv_bound,
        },
    })
}

/// `t = √Mₙ (θ − θ̃ₙ)` for each stored scalar draw.
pub fn standardized_target_draws(
    summary: &PosteriorSummary,
    profile_mle: f64,
    m_n: u64,
) -> Result<Vec<f64>> {
    let draws = summary
        .draws
        .as_ref()
        .ok_or_else(|| invalid("summary holds no draws"))?;
    if draws.ncols() != 1 {
        return Err(invalid("standardization needs a scalar target"));
    }
    let root = (m_n as f64).sqrt();
    Ok(draws
        .column(0)
        .iter()
        .map(|t| root * (t - profile_mle))
        .collect())
}
