//! Linear regression `Yᵢ = Ψᵢᵀυ + εᵢ` with a known smooth error log-density
//! `h`, so that `L(υ) = Σ h(Yᵢ − Ψᵢᵀυ)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, CoreError, Result};

use super::{check_full_rank, max_weighted_leverage};

#[cfg(not(feature = "std"))]
use num_traits::Float as _;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ErrorDensity {
    Gaussian {
        sigma: f64,
    },
    /// Logistic law with scale `s`.
    Logistic {
        scale: f64,
    },
}

impl ErrorDensity {
    fn validate(self) -> Result<()> {
        let s = match self {
            ErrorDensity::Gaussian { sigma } => sigma,
            ErrorDensity::Logistic { scale } => scale,
        };
        if s > 0.0 && s.is_finite() {
            Ok(())
        } else {
            Err(invalid("error scale must be positive"))
        }
    }

    /// Log-density `h(z)`.
    pub fn h(self, z: f64) -> f64 {
        match self {
            ErrorDensity::Gaussian { sigma } => {
                -0.5 * (z / sigma).powi(2) - (sigma * (2.0 * core::f64::consts::PI).sqrt()).ln()
            }
            ErrorDensity::Logistic { scale } => {
                let t = (z / scale).abs();
                -t - 2.0 * (-t).exp().ln_1p() - scale.ln()
            }
        }
    }

    pub fn h1(self, z: f64) -> f64 {
        match self {
            ErrorDensity::Gaussian { sigma } => -z / (sigma * sigma),
            ErrorDensity::Logistic { scale } => -(z / (2.0 * scale)).tanh() / scale,
        }
    }

    pub fn h2(self, z: f64) -> f64 {
        match self {
            ErrorDensity::Gaussian { sigma } => -1.0 / (sigma * sigma),
            ErrorDensity::Logistic { scale } => {
                let c = (z / (2.0 * scale)).cosh();
                -1.0 / (2.0 * scale * scale * c * c)
            }
        }
    }

    /// `𝔥 = −∫ h″ f`, the information per observation.
    pub fn h_bar(self) -> f64 {
        match self {
            ErrorDensity::Gaussian { sigma } => 1.0 / (sigma * sigma),
            ErrorDensity::Logistic { scale } => 1.0 / (3.0 * scale * scale),
        }
    }

    /// Lipschitz constant of `h″`.
    pub fn lipschitz_h2(self) -> f64 {
        match self {
            ErrorDensity::Gaussian { .. } => 0.0,
            ErrorDensity::Logistic { scale } => 1.0 / (3.0 * 3f64.sqrt() * scale.powi(3)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    design: DMatrix<f64>,
    error: ErrorDensity,
    noise_scales: DVector<f64>,
}

impl LinearModel {
    pub fn new(
        design: DMatrix<f64>,
        error: ErrorDensity,
        noise_scales: DVector<f64>,
    ) -> Result<Self> {
        error.validate()?;
        if noise_scales.len() != design.nrows() {
            return Err(CoreError::DimensionMismatch {
                context: "noise scales",
                expected: design.nrows(),
                found: noise_scales.len(),
            });
        }
        if noise_scales.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(invalid("noise scales must be positive"));
        }
        if design.ncols() == 0 {
            return Err(invalid("design needs at least one column"));
        }
        check_full_rank(&design)?;
        Ok(Self {
            design,
            error,
            noise_scales,
        })
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.design
    }

    pub fn error(&self) -> ErrorDensity {
        self.error
    }

    pub fn noise_scales(&self) -> &DVector<f64> {
        &self.noise_scales
    }

    pub fn h_bar(&self) -> f64 {
        self.error.h_bar()
    }

    pub fn lipschitz_h2(&self) -> f64 {
        self.error.lipschitz_h2()
    }

    pub fn n(&self) -> usize {
        self.design.nrows()
    }

    fn residuals(&self, upsilon: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        if upsilon.len() != self.design.ncols() || y.len() != self.n() {
            return Err(CoreError::DimensionMismatch {
                context: "linear model inputs",
                expected: self.design.ncols(),
                found: upsilon.len(),
            });
        }
        Ok(y - &self.design * upsilon)
    }
}

pub fn linear_loglik(upsilon: &DVector<f64>, y: &DVector<f64>, model: &LinearModel) -> Result<f64> {
    let e = model.residuals(upsilon, y)?;
    Ok(e.iter().map(|&z| model.error.h(z)).sum())
}

pub fn linear_grad(
    upsilon: &DVector<f64>,
    y: &DVector<f64>,
    model: &LinearModel,
) -> Result<DVector<f64>> {
    let e = model.residuals(upsilon, y)?;
    Ok(-model.design.tr_mul(&e.map(|z| model.error.h1(z))))
}

pub fn linear_hessian(
    upsilon: &DVector<f64>,
    y: &DVector<f64>,
    model: &LinearModel,
) -> Result<DMatrix<f64>> {
    let e = model.residuals(upsilon, y)?;
    let mut scaled = model.design.clone();
    for (i, z) in e.iter().enumerate() {
        scaled.row_mut(i).scale_mut(model.error.h2(*z));
    }
    Ok(crate::linalg::symmetrize(&model.design.tr_mul(&scaled)))
}

/// `D₀² = 𝔥 Σ ΨᵢΨᵢᵀ`.
pub fn linear_fisher(model: &LinearModel) -> DMatrix<f64> {
    crate::linalg::symmetrize(&(model.design.tr_mul(&model.design) * model.h_bar()))
}

/// `δ(r) = L r / (𝔥 √N₁)` with `N₁^{-1/2} = maxᵢ ‖D₀⁻¹Ψᵢ‖`.
pub fn linear_delta_r(r: f64, model: &LinearModel, fisher: &DMatrix<f64>) -> Result<f64> {
    let l = model.lipschitz_h2();
    if l == 0.0 {
        return Ok(0.0);
    }
    let n1_inv_sqrt = max_weighted_leverage(&model.design, fisher, |_| 1.0)?;
    Ok(l * r * n1_inv_sqrt / model.h_bar())
}

/// `N₂^{-1/2} = maxᵢ 𝔰ᵢ ‖D₀⁻¹Ψᵢ‖`.
pub fn linear_n2_inv_sqrt(model: &LinearModel, fisher: &DMatrix<f64>) -> Result<f64> {
    max_weighted_leverage(&model.design, fisher, |i| model.noise_scales[i])
}

/// `ω = √n / N₂`.
pub fn linear_omega(model: &LinearModel, fisher: &DMatrix<f64>) -> Result<f64> {
    let s = linear_n2_inv_sqrt(model, fisher)?;
    Ok((model.n() as f64).sqrt() * s * s)
}
