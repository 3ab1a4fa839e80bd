use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{invalid, Result};
use crate::models::poisson::{poisson_posterior_params, GroupedPoissonModel};
use crate::rng::{seeded, BvmRng};

use super::PosteriorSummary;

#[cfg(not(feature = "std"))]
use num_traits::Float as _;

/// Appends `n_draws` posterior draws of `θ = (1/p) Σ log υ_j` to `out`.
pub fn conjugate_theta_draws<R: Rng + ?Sized>(
    model: &GroupedPoissonModel,
    z: &[u64],
    n_draws: usize,
    rng: &mut R,
    out: &mut Vec<f64>,
) -> Result<()> {
    let (shapes, scale) = poisson_posterior_params(z, model)?;
    let dists = shapes
        .iter()
        .map(|&a| Gamma::new(a, scale).map_err(|_| invalid("invalid Gamma parameters")))
        .collect::<Result<Vec<_>>>()?;
    let p = dists.len() as f64;
    out.reserve(n_draws);
    for _ in 0..n_draws {
        let mut total = 0.0;
        for d in &dists {
            total += d.sample(rng).ln();
        }
        out.push(total / p);
    }
    Ok(())
}

/// Conjugate posterior draws of the target, seeded.
pub fn sample_posterior_conjugate(
    model: &GroupedPoissonModel,
    z: &[u64],
    n_draws: usize,
    rng_seed: u64,
) -> Result<PosteriorSummary> {
    let mut rng: BvmRng = seeded(rng_seed);
    sample_posterior_conjugate_with(model, z, n_draws, &mut rng)
}

pub fn sample_posterior_conjugate_with<R: Rng + ?Sized>(
    model: &GroupedPoissonModel,
    z: &[u64],
    n_draws: usize,
    rng: &mut R,
) -> Result<PosteriorSummary> {
    if n_draws < 2 {
        return Err(invalid("need at least two draws"));
    }
    let mut out = Vec::with_capacity(n_draws);
    conjugate_theta_draws(model, z, n_draws, rng, &mut out)?;
    PosteriorSummary::from_draws(DMatrix::from_vec(n_draws, 1, out), true)
}
