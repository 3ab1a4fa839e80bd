//! Grouped Poisson model: `p` groups of `M` observations with group
//! intensities `υ_j = e^{u_j}`; the target is `θ = (1/p) Σ u_j`.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::blockinfo::FullInfo;
use crate::error::{invalid, CoreError, Result};

#[cfg(not(feature = "std"))]
use num_traits::Float as _;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GroupedPoissonModel {
    p_n: usize,
    m_n: u64,
    u_star: f64,
    prior_scale: f64,
}

impl GroupedPoissonModel {
    /// Model with the default truth `u* = log(1/p)` and the prior-scale
    /// constraint `μ ≤ √(n / log n)`.
    pub fn new(p_n: usize, m_n: u64, prior_scale: f64) -> Result<Self> {
        Self::with_prior_bound(p_n, m_n, prior_scale, 1.0)
    }

    /// As [`new`](Self::new) with the constraint `μ ≤ C √(n / log n)`.
    pub fn with_prior_bound(p_n: usize, m_n: u64, prior_scale: f64, c: f64) -> Result<Self> {
        if p_n < 2 {
            return Err(invalid("need at least two groups"));
        }
        if m_n == 0 {
            return Err(invalid("group size must be at least 1"));
        }
        if !(prior_scale > 0.0) || !prior_scale.is_finite() {
            return Err(invalid("prior scale must be positive"));
        }
        let n = p_n as f64 * m_n as f64;
        let cap = c * (n / n.ln()).sqrt();
        if prior_scale > cap {
            return Err(invalid(alloc::format!(
                "prior scale {prior_scale} exceeds C sqrt(n / log n) = {cap}"
            )));
        }
        Ok(Self {
            p_n,
            m_n,
            u_star: -(p_n as f64).ln(),
            prior_scale,
        })
    }

    pub fn with_u_star(mut self, u_star: f64) -> Result<Self> {
        if !u_star.is_finite() {
            return Err(invalid("u* must be finite"));
        }
        self.u_star = u_star;
        Ok(self)
    }

    pub fn p_n(&self) -> usize {
        self.p_n
    }

    pub fn m_n(&self) -> u64 {
        self.m_n
    }

    pub fn n(&self) -> u64 {
        self.p_n as u64 * self.m_n
    }

    pub fn u_star(&self) -> f64 {
        self.u_star
    }

    /// True target `θ* = u*` (all groups share the same intensity).
    pub fn theta_star(&self) -> f64 {
        self.u_star
    }

    pub fn prior_scale(&self) -> f64 {
        self.prior_scale
    }

    /// `βₙ = pₙ^{3/2} / n^{1/2} = pₙ / √Mₙ`.
    pub fn beta(&self) -> f64 {
        self.p_n as f64 / (self.m_n as f64).sqrt()
    }

    fn check_len(&self, len: usize, context: &'static str) -> Result<()> {
        if len == self.p_n {
            Ok(())
        } else {
            Err(CoreError::DimensionMismatch {
                context,
                expected: self.p_n,
                found: len,
            })
        }
    }
}

/// Group sums `Z_j` over consecutive blocks of `Mₙ` observations.
pub fn poisson_group_sums(y: &[u64], model: &GroupedPoissonModel) -> Result<Vec<u64>> {
    let expected = model.n() as usize;
    if y.len() != expected {
        return Err(CoreError::DimensionMismatch {
            context: "observations",
            expected,
            found: y.len(),
        });
    }
    Ok(y.chunks(model.m_n as usize)
        .map(|c| c.iter().sum())
        .collect())
}

/// `L(u) = Σ (Z_j u_j − Mₙ e^{u_j})`.
pub fn poisson_loglik(u: &DVector<f64>, z: &[u64], model: &GroupedPoissonModel) -> Result<f64> {
    model.check_len(u.len(), "log-intensities")?;
    model.check_len(z.len(), "group sums")?;
    let m = model.m_n as f64;
    Ok(u.iter()
        .zip(z)
        .map(|(&uj, &zj)| zj as f64 * uj - m * uj.exp())
        .sum())
}

pub fn poisson_grad(
    u: &DVector<f64>,
    z: &[u64],
    model: &GroupedPoissonModel,
) -> Result<DVector<f64>> {
    model.check_len(u.len(), "log-intensities")?;
    model.check_len(z.len(), "group sums")?;
    let m = model.m_n as f64;
    Ok(DVector::from_fn(u.len(), |j, _| {
        z[j] as f64 - m * u[j].exp()
    }))
}

pub fn poisson_hessian(u: &DVector<f64>, model: &GroupedPoissonModel) -> Result<DMatrix<f64>> {
    model.check_len(u.len(), "log-intensities")?;
    let m = model.m_n as f64;
    Ok(DMatrix::from_diagonal(&u.map(|uj| -m * uj.exp())))
}

/// Profile MLE `θ̃ = (1/p) Σ log(Z_j / Mₙ)`.
pub fn poisson_profile_mle(z: &[u64], model: &GroupedPoissonModel) -> Result<f64> {
    model.check_len(z.len(), "group sums")?;
    if let Some(group) = z.iter().position(|&zj| zj == 0) {
        return Err(CoreError::ZeroCount { group });
    }
    let log_m = (model.m_n as f64).ln();
    let total: f64 = z.iter().map(|&zj| (zj as f64).ln() - log_m).sum();
    Ok(total / model.p_n as f64)
}

/// Conjugate posterior: `υ_j ~ Gamma(shape 1 + Z_j, scale μ/(Mₙμ + 1))`.
pub fn poisson_posterior_params(z: &[u64], model: &GroupedPoissonModel) -> Result<(Vec<f64>, f64)> {
    model.check_len(z.len(), "group sums")?;
    let mu = model.prior_scale;
    let scale = mu / (model.m_n as f64 * mu + 1.0);
    Ok((z.iter().map(|&zj| 1.0 + zj as f64).collect(), scale))
}

/// Full Fisher information in `(θ, ū₂, …, ū_p)` coordinates:
/// `Mₙe^{u*} · [[p², −p𝟙ᵀ], [−p𝟙, I + 𝟙𝟙ᵀ]]`.
pub fn poisson_full_fisher(model: &GroupedPoissonModel) -> Result<FullInfo> {
    let p = model.p_n;
    let q = p - 1;
    let c = model.m_n as f64 * model.u_star.exp();
    let pf = p as f64;
    let target = DMatrix::from_element(1, 1, c * pf * pf);
    let cross = DMatrix::from_element(1, q, -c * pf);
    let nuisance = DMatrix::from_fn(q, q, |i, j| if i == j { 2.0 * c } else { c });
    FullInfo::new(target, cross, nuisance)
}

/// Draws `Z_j ~ Poisson(Mₙ e^{u*})` directly.
pub fn sample_group_sums<R: Rng + ?Sized>(
    model: &GroupedPoissonModel,
    rng: &mut R,
) -> Result<Vec<u64>> {
    let lambda = model.m_n as f64 * model.u_star.exp();
    let dist =
        Poisson::new(lambda).map_err(|_| invalid("Poisson rate must be positive and finite"))?;
    Ok((0..model.p_n).map(|_| dist.sample(rng) as u64).collect())
}
