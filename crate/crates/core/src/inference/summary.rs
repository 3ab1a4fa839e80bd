use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Result};

#[cfg(not(feature = "std"))]
use num_traits::Float as _;

/// Posterior moments of the target coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSummary {
    /// `θ̄`.
    pub mean: DVector<f64>,
    /// `𝔖²` (unbiased when built from draws).
    pub cov: DMatrix<f64>,
    /// Retained draws, one per row.
    pub draws: Option<DMatrix<f64>>,
    pub draw_count: usize,
    pub effective_sample_hint: usize,
    /// Monte-Carlo standard errors of `mean` (zero for quadrature).
    pub mean_se: DVector<f64>,
    /// Monte-Carlo standard errors of `cov` entries (zero for quadrature).
    pub cov_se: DMatrix<f64>,
    pub acceptance_rate: Option<f64>,
}

impl PosteriorSummary {
    /// Exact moments, e.g. from quadrature or a closed form.
    pub fn exact(mean: DVector<f64>, cov: DMatrix<f64>) -> Self {
        let p = mean.len();
        Self {
            mean,
            cov,
            draws: None,
            draw_count: 0,
            effective_sample_hint: 0,
            mean_se: DVector::zeros(p),
            cov_se: DMatrix::zeros(p, p),
            acceptance_rate: None,
        }
    }

    /// Moments of the rows of `draws` with batch-means standard errors, which
    /// remain valid for autocorrelated chains.
    pub fn from_draws(draws: DMatrix<f64>, keep: bool) -> Result<Self> {
        let (n, p) = draws.shape();
        if n < 2 || p == 0 {
            return Err(invalid("need at least two draws of a nonempty vector"));
        }
        let mean = DVector::from_fn(p, |j, _| draws.column(j).mean());
        let mut centered = draws.clone();
        for j in 0..p {
            centered.column_mut(j).add_scalar_mut(-mean[j]);
        }
        let cov = crate::linalg::symmetrize(&(centered.tr_mul(&centered) / (n - 1) as f64));

        let batches = ((n as f64).sqrt() as usize).max(2);
        let size = n / batches;
        let used = batches * size;
        let mut mean_se = DVector::zeros(p);
        let mut cov_se = DMatrix::zeros(p, p);
        let mut ess = usize::MAX;
        let bmean = |f: &dyn Fn(usize) -> f64| -> f64 {
            let mut acc = 0.0;
            let mut sq = 0.0;
            for b in 0..batches {
                let m: f64 = (b * size..(b + 1) * size).map(f).sum::<f64>() / size as f64;
                acc += m;
                sq += m * m;
            }
            let avg = acc / batches as f64;
            let var_b = (sq - batches as f64 * avg * avg).max(0.0) / (batches - 1) as f64;
            (var_b / batches as f64).sqrt()
        };
        for j in 0..p {
            mean_se[j] = bmean(&|i| draws[(i, j)]);
            let var = cov[(j, j)];
            if mean_se[j] > 0.0 {
                let hint = (var / (mean_se[j] * mean_se[j])).min(used as f64);
                ess = ess.min(hint as usize);
            }
            for k in 0..=j {
                let se = bmean(&|i| centered[(i, j)] * centered[(i, k)]);
                cov_se[(j, k)] = se;
                cov_se[(k, j)] = se;
            }
        }
        if ess == usize::MAX {
            ess = n;
        }
        Ok(Self {
            mean,
            cov,
            draws: keep.then_some(draws),
            draw_count: n,
            effective_sample_hint: ess,
            mean_se,
            cov_se,
            acceptance_rate: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}
