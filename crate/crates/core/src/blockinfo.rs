//! Partitioned information-matrix algebra.
//!
//! The full information matrix of `υ = (θ, η)` is stored by blocks
//!
//! ```text
//!     ⎡ D²   A  ⎤
//!     ⎣ Aᵀ   H² ⎦
//! ```
//!
//! with `θ` of dimension `p` (target) and `η` of dimension `q` (nuisance).
//! The efficient information is the Schur complement `D̆² = D² − A H⁻² Aᵀ`.

use nalgebra::{DMatrix, DVector};

use crate::error::{CoreError, Result};
use crate::linalg;

#[cfg(not(feature = "std"))]
use num_traits::Float as _;

const SYMMETRY_TOL: f64 = 1e-10;

/// Partitioned `(p+q)×(p+q)` information matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FullInfo {
    target: DMatrix<f64>,
    cross: DMatrix<f64>,
    nuisance: DMatrix<f64>,
}

impl FullInfo {
    /// Builds the partition, checking shapes, symmetry and that both diagonal
    /// blocks are positive definite. `q = 0` (no nuisance) is allowed.
    pub fn new(target: DMatrix<f64>, cross: DMatrix<f64>, nuisance: DMatrix<f64>) -> Result<Self> {
        let p = target.nrows();
        let q = nuisance.nrows();
        if target.ncols() != p {
            return Err(CoreError::DimensionMismatch {
                context: "target block",
                expected: p,
                found: target.ncols(),
            });
        }
        if nuisance.ncols() != q {
            return Err(CoreError::DimensionMismatch {
                context: "nuisance block",
                expected: q,
                found: nuisance.ncols(),
            });
        }
        if cross.nrows() != p || cross.ncols() != q {
            return Err(CoreError::DimensionMismatch {
                context: "cross block",
                expected: p * q,
                found: cross.nrows() * cross.ncols(),
            });
        }
        if p == 0 {
            return Err(crate::error::invalid("target dimension must be positive"));
        }
        if !linalg::is_symmetric(&target, SYMMETRY_TOL) {
            return Err(crate::error::invalid("target block is not symmetric"));
        }
        if !linalg::is_symmetric(&nuisance, SYMMETRY_TOL) {
            return Err(crate::error::invalid("nuisance block is not symmetric"));
        }
        linalg::spd_eigen(&target, "target block")?;
        if q > 0 {
            linalg::spd_eigen(&nuisance, "nuisance block")?;
        }
        Ok(Self {
            target: linalg::symmetrize(&target),
            cross,
            nuisance: linalg::symmetrize(&nuisance),
        })
    }

    /// Splits a full symmetric matrix after its first `p` coordinates.
    pub fn from_full(full: &DMatrix<f64>, p: usize) -> Result<Self> {
        let n = full.nrows();
        if full.ncols() != n {
            return Err(CoreError::DimensionMismatch {
                context: "full information",
                expected: n,
                found: full.ncols(),
            });
        }
        if p == 0 || p > n {
            return Err(crate::error::invalid("target dimension out of range"));
        }
        if !linalg::is_symmetric(full, SYMMETRY_TOL) {
            return Err(crate::error::invalid("full information is not symmetric"));
        }
        let q = n - p;
        Self::new(
            full.view((0, 0), (p, p)).clone_owned(),
            full.view((0, p), (p, q)).clone_owned(),
            full.view((p, p), (q, q)).clone_owned(),
        )
    }

    pub fn p(&self) -> usize {
        self.target.nrows()
    }

    pub fn q(&self) -> usize {
        self.nuisance.nrows()
    }

    pub fn target_block(&self) -> &DMatrix<f64> {
        &self.target
    }

    pub fn cross_block(&self) -> &DMatrix<f64> {
        &self.cross
    }

    pub fn nuisance_block(&self) -> &DMatrix<f64> {
        &self.nuisance
    }

    /// The assembled `(p+q)×(p+q)` matrix.
    pub fn assemble(&self) -> DMatrix<f64> {
        let (p, q) = (self.p(), self.q());
        let mut full = DMatrix::zeros(p + q, p + q);
        full.view_mut((0, 0), (p, p)).copy_from(&self.target);
        full.view_mut((0, p), (p, q)).copy_from(&self.cross);
        full.view_mut((p, 0), (q, p))
            .copy_from(&self.cross.transpose());
        full.view_mut((p, p), (q, q)).copy_from(&self.nuisance);
        full
    }

    /// `A H⁻² Aᵀ`, the information lost to the nuisance.
    fn nuisance_projection(&self) -> Result<DMatrix<f64>> {
        if self.q() == 0 {
            return Ok(DMatrix::zeros(self.p(), self.p()));
        }
        let chol = linalg::cholesky(&self.nuisance, "nuisance block")?;
        let h_inv_at = chol.solve(&self.cross.transpose());
        Ok(linalg::symmetrize(&(&self.cross * h_inv_at)))
    }
}

/// Efficient information `D̆²` with its inverse and symmetric square roots.
#[derive(Debug, Clone, PartialEq)]
pub struct EfficientInfo {
    pub matrix: DMatrix<f64>,
    pub inverse: DMatrix<f64>,
    pub sqrt: DMatrix<f64>,
    pub inv_sqrt: DMatrix<f64>,
}

impl EfficientInfo {
    /// Wraps an SPD matrix directly, e.g. a known closed form.
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        let eig = linalg::spd_eigen(&matrix, "efficient information")?;
        Ok(Self {
            inverse: linalg::eigen_map(&eig, |l| 1.0 / l),
            sqrt: linalg::eigen_map(&eig, f64::sqrt),
            inv_sqrt: linalg::eigen_map(&eig, |l| 1.0 / l.sqrt()),
            matrix: linalg::symmetrize(&matrix),
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Gradient of the log-likelihood at `υ*`, split conformally with [`FullInfo`].
#[derive(Debug, Clone, PartialEq)]
pub struct FullScore {
    pub target_grad: DVector<f64>,
    pub nuisance_grad: DVector<f64>,
}

impl FullScore {
    pub fn new(target_grad: DVector<f64>, nuisance_grad: DVector<f64>) -> Result<Self> {
        if target_grad
            .iter()
            .chain(nuisance_grad.iter())
            .any(|v| !v.is_finite())
        {
            return Err(crate::error::invalid("score has non-finite entries"));
        }
        Ok(Self {
            target_grad,
            nuisance_grad,
        })
    }

    pub fn from_full(grad: &DVector<f64>, p: usize) -> Result<Self> {
        if p > grad.len() {
            return Err(crate::error::invalid(
                "target dimension exceeds score length",
            ));
        }
        Self::new(
            grad.rows(0, p).clone_owned(),
            grad.rows(p, grad.len() - p).clone_owned(),
        )
    }
}

/// Identifiability diagnostics for condition (I).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IdentifiabilityReport {
    /// `‖D⁻¹ A H⁻² Aᵀ D⁻¹‖`, bounding the target/nuisance angle.
    pub nu: f64,
    /// Smallest `a` with `a² D² ≥ V²` on the target block.
    pub a_target: f64,
    /// Same for the nuisance block.
    pub a_nuisance: f64,
    /// Same for the full matrices.
    pub a_full: f64,
    /// `nu < 1`.
    pub satisfied: bool,
}

/// Efficient information `D̆² = D² − A H⁻² Aᵀ`.
pub fn schur_complement(info: &FullInfo) -> Result<EfficientInfo> {
    let lost = info.nuisance_projection()?;
    let schur = &info.target - lost;
    linalg::spd_eigen(&schur, "Schur complement")?;
    EfficientInfo::from_matrix(schur)
}

/// Nuisance-corrected gradient `∇̆θ = ∇θ − A H⁻² ∇η`.
pub fn efficient_gradient(info: &FullInfo, score: &FullScore) -> Result<DVector<f64>> {
    check_score(info, score)?;
    if info.q() == 0 {
        return Ok(score.target_grad.clone());
    }
    let chol = linalg::cholesky(info.nuisance_block(), "nuisance block")?;
    let h_inv_grad = chol.solve(&score.nuisance_grad);
    Ok(&score.target_grad - info.cross_block() * h_inv_grad)
}

/// Efficient score `ξ̆ = D̆⁻¹ ∇̆θ`.
pub fn efficient_score(info: &FullInfo, score: &FullScore) -> Result<DVector<f64>> {
    let grad = efficient_gradient(info, score)?;
    let eff = schur_complement(info)?;
    Ok(&eff.inv_sqrt * grad)
}

fn check_score(info: &FullInfo, score: &FullScore) -> Result<()> {
    if score.target_grad.len() != info.p() {
        return Err(CoreError::DimensionMismatch {
            context: "target score",
            expected: info.p(),
            found: score.target_grad.len(),
        });
    }
    if score.nuisance_grad.len() != info.q() {
        return Err(CoreError::DimensionMismatch {
            context: "nuisance score",
            expected: info.q(),
            found: score.nuisance_grad.len(),
        });
    }
    Ok(())
}

/// Evaluates condition (I) against a conformal variance matrix `V²`.
///
/// Each `a_*` is the square root of the largest generalized eigenvalue of the
/// `(V², D²)` pencil for the corresponding blocks.
pub fn identifiability(info: &FullInfo, v_full: &DMatrix<f64>) -> Result<IdentifiabilityReport> {
    let (p, q) = (info.p(), info.q());
    if v_full.nrows() != p + q || v_full.ncols() != p + q {
        return Err(CoreError::DimensionMismatch {
            context: "variance matrix",
            expected: p + q,
            found: v_full.nrows(),
        });
    }
    let lost = info.nuisance_projection()?;
    let nu =
        linalg::max_generalized_eigenvalue(&lost, info.target_block(), "target block")?.max(0.0);

    let v_target = v_full.view((0, 0), (p, p)).clone_owned();
    let v_nuisance = v_full.view((p, p), (q, q)).clone_owned();
    let a = |v: &DMatrix<f64>, d: &DMatrix<f64>, what| -> Result<f64> {
        Ok(linalg::max_generalized_eigenvalue(v, d, what)?
            .max(0.0)
            .sqrt())
    };
    let a_target = a(&v_target, info.target_block(), "target block")?;
    let a_nuisance = a(&v_nuisance, info.nuisance_block(), "nuisance block")?;
    let a_full = a(v_full, &info.assemble(), "full information")?;
    Ok(IdentifiabilityReport {
        nu,
        a_target,
        a_nuisance,
        a_full,
        satisfied: nu < 1.0,
    })
}
