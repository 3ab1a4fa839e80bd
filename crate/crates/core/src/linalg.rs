//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{CoreError, Result};

#[cfg(not(feature = "std"))]
use num_traits::Float as _;

/// Smallest admissible eigenvalue relative to the largest one.
pub const SPD_RELATIVE_FLOOR: f64 = 1e-10;

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Largest absolute entry, zero for empty matrices.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn is_symmetric(m: &DMatrix<f64>, rel_tol: f64) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    let scale = max_abs(m).max(1.0);
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            if (m[(i, j)] - m[(j, i)]).abs() > rel_tol * scale {
                return false;
            }
        }
    }
    true
}

/// Symmetric eigendecomposition that insists on positive definiteness:
/// every eigenvalue must exceed [`SPD_RELATIVE_FLOOR`] times the largest.
pub fn spd_eigen(m: &DMatrix<f64>, what: &'static str) -> Result<SymmetricEigen<f64, Dyn>> {
    if m.nrows() != m.ncols() {
        return Err(CoreError::DimensionMismatch {
            context: what,
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(CoreError::NotPositiveDefinite { what });
    }
    let eig = SymmetricEigen::new(symmetrize(m));
    if eig.eigenvalues.is_empty() {
        return Ok(eig);
    }
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if !(max > 0.0) || !(min > SPD_RELATIVE_FLOOR * max) {
        return Err(CoreError::NotPositiveDefinite { what });
    }
    Ok(eig)
}

/// `V f(Λ) Vᵀ` for a symmetric eigendecomposition.
pub fn eigen_map(eig: &SymmetricEigen<f64, Dyn>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, lambda) in eig.eigenvalues.iter().enumerate() {
        let fj = f(*lambda);
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= fj;
        }
    }
    symmetrize(&(scaled * v.transpose()))
}

/// Operator norm of a symmetric matrix (largest absolute eigenvalue).
pub fn op_norm_symmetric(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Spectral norm of a general matrix.
pub fn op_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

pub fn cholesky(m: &DMatrix<f64>, what: &'static str) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(symmetrize(m)).ok_or(CoreError::NotPositiveDefinite { what })
}

/// Largest eigenvalue of the pencil `(a, b)`, i.e. of `L⁻¹ a L⁻ᵀ` with `b = LLᵀ`.
pub fn max_generalized_eigenvalue(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    what: &'static str,
) -> Result<f64> {
    if a.is_empty() {
        return Ok(0.0);
    }
    let chol = cholesky(b, what)?;
    let w = whiten(&chol, a);
    Ok(w.symmetric_eigenvalues().max())
}

/// `L⁻¹ a L⁻ᵀ` for a Cholesky factor `L`, using triangular solves only.
pub fn whiten(chol: &Cholesky<f64, Dyn>, a: &DMatrix<f64>) -> DMatrix<f64> {
    let l = chol.l();
    let left = l
        .solve_lower_triangular(a)
        .expect("Cholesky factor has a positive diagonal");
    let both = l
        .solve_lower_triangular(&left.transpose())
        .expect("Cholesky factor has a positive diagonal");
    symmetrize(&both)
}

/// `xᵀ m⁻¹ x` through a Cholesky factor of `m`.
pub fn inverse_quadratic_form(chol: &Cholesky<f64, Dyn>, x: &DVector<f64>) -> f64 {
    let y = chol
        .l()
        .solve_lower_triangular(x)
        .expect("Cholesky factor has a positive diagonal");
    y.norm_squared()
}

pub fn log_det_cholesky(chol: &Cholesky<f64, Dyn>) -> f64 {
    let l = chol.l();
    (0..l.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>() * 2.0
}
