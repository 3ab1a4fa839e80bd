use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, CoreError, Result};

use super::{LogDensity, PosteriorSummary};

#[cfg(not(feature = "std"))]
use num_traits::Float as _;

const MAX_GRID_DIM: usize = 3;
const MIN_POINTS: usize = 31;
const BOUNDARY_RATIO: f64 = 1e-8;

/// Box `mean ± k·sd` for the quadrature oracle.
pub fn grid_box_from_moments(
    mean: &DVector<f64>,
    cov: &DMatrix<f64>,
    k: f64,
) -> (DVector<f64>, DVector<f64>) {
    let half = DVector::from_fn(mean.len(), |i, _| k * cov[(i, i)].max(0.0).sqrt());
    (mean.clone(), half)
}

/// Tensor-product trapezoid quadrature of the posterior over a box.
///
/// Returns the normalized mean and covariance of the first `target_dim`
/// coordinates. Fails with `BoxTooSmall` when the density anywhere on the box
/// boundary exceeds `1e-8` times its maximum.
pub fn posterior_grid_oracle<D: LogDensity + ?Sized>(
    density: &D,
    box_center: &DVector<f64>,
    box_halfwidths: &DVector<f64>,
    points_per_dim: usize,
    target_dim: usize,
) -> Result<PosteriorSummary> {
    let d = density.dim();
    if d == 0 || d > MAX_GRID_DIM {
        return Err(invalid("quadrature oracle supports dimensions 1 to 3"));
    }
    if points_per_dim < MIN_POINTS {
        return Err(invalid("need at least 31 points per dimension"));
    }
    if box_center.len() != d || box_halfwidths.len() != d {
        return Err(CoreError::DimensionMismatch {
            context: "quadrature box",
            expected: d,
            found: box_center.len(),
        });
    }
    if box_halfwidths.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
        return Err(invalid("box half-widths must be positive"));
    }
    if target_dim == 0 || target_dim > d {
        return Err(invalid("target dimension out of range"));
    }

    let n = points_per_dim;
    let step: Vec<f64> = box_halfwidths
        .iter()
        .map(|h| 2.0 * h / (n - 1) as f64)
        .collect();
    let node =
        |axis: usize, i: usize| box_center[axis] - box_halfwidths[axis] + step[axis] * i as f64;
    let total = n.pow(d as u32);

    let mut log_dens = Vec::with_capacity(total);
    let mut max_ld = f64::NEG_INFINITY;
    let mut point = DVector::zeros(d);
    let mut idx = [0usize; MAX_GRID_DIM];
    for flat in 0..total {
        unflatten(flat, n, d, &mut idx);
        for axis in 0..d {
            point[axis] = node(axis, idx[axis]);
        }
        let ld = density.log_density(&point);
        if ld.is_nan() || ld == f64::INFINITY {
            return Err(CoreError::NonFiniteDensity);
        }
        max_ld = max_ld.max(ld);
        log_dens.push(ld);
    }
    if !max_ld.is_finite() {
        return Err(CoreError::NonFiniteDensity);
    }

    let mut boundary = 0.0_f64;
    let mut mass = 0.0;
    let mut first = DVector::<f64>::zeros(d);
    for (flat, ld) in log_dens.iter().enumerate() {
        unflatten(flat, n, d, &mut idx);
        let rel = (ld - max_ld).exp();
        let mut w = rel;
        let mut on_edge = false;
        for &i in &idx[..d] {
            if i == 0 || i == n - 1 {
                w *= 0.5;
                on_edge = true;
            }
        }
        if on_edge {
            boundary = boundary.max(rel);
        }
        mass += w;
        for axis in 0..d {
            first[axis] += w * node(axis, idx[axis]);
        }
    }
    if boundary >= BOUNDARY_RATIO {
        return Err(CoreError::BoxTooSmall { ratio: boundary });
    }
    let mean = first / mass;

    let mut second = DMatrix::<f64>::zeros(d, d);
    let mut centered = DVector::<f64>::zeros(d);
    for (flat, ld) in log_dens.iter().enumerate() {
        unflatten(flat, n, d, &mut idx);
        let mut w = (ld - max_ld).exp();
        for (axis, &i) in idx[..d].iter().enumerate() {
            if i == 0 || i == n - 1 {
                w *= 0.5;
            }
            centered[axis] = node(axis, i) - mean[axis];
        }
        second.ger(w, &centered, &centered, 1.0);
    }
    let cov = crate::linalg::symmetrize(&(second / mass));

    Ok(PosteriorSummary::exact(
        mean.rows(0, target_dim).clone_owned(),
        cov.view((0, 0), (target_dim, target_dim)).clone_owned(),
    ))
}

fn unflatten(mut flat: usize, n: usize, d: usize, idx: &mut [usize; MAX_GRID_DIM]) {
    for slot in idx.iter_mut().take(d) {
        *slot = flat % n;
        flat /= n;
    }
}
