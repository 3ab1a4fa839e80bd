//! Shared helpers for unit tests.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

pub fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Random SPD matrix `G Gᵀ / n + ridge I` with moderate conditioning.
pub fn random_spd(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    let g = gaussian_matrix(rng, n, n + 3);
    let mut m = &g * g.transpose() / (n as f64);
    for i in 0..n {
        m[(i, i)] += 0.5;
    }
    m
}

pub fn random_orthogonal(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    gaussian_matrix(rng, n, n).qr().q()
}
