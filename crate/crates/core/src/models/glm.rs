//! Canonical generalized linear models `L(υ) = Σ {Yᵢ Ψᵢᵀυ − d(Ψᵢᵀυ)}`.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Bernoulli, Distribution, Exp, Normal, Poisson, StandardNormal};

use crate::error::{invalid, CoreError, Result};
use crate::linalg;

use super::{check_full_rank, max_weighted_leverage};

#[cfg(not(feature = "std"))]
use num_traits::Float as _;

/// Largest linear predictor accepted by the Poisson family.
pub const POISSON_MAX_PREDICTOR: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum GlmFamily {
    /// `d(w) = w²/2`.
    Gaussian,
    /// `d(w) = log(1 + eʷ)`.
    Logistic,
    /// `d(w) = eʷ`.
    Poisson,
    /// `d(w) = −log(−w)` on `w < 0`.
    Exponential,
}

impl GlmFamily {
    fn check(self, w: f64) -> Result<()> {
        let ok = w.is_finite()
            && match self {
                GlmFamily::Gaussian | GlmFamily::Logistic => true,
                GlmFamily::Poisson => w <= POISSON_MAX_PREDICTOR,
                GlmFamily::Exponential => w < 0.0,
            };
        if ok {
            Ok(())
        } else {
            Err(CoreError::Domain { value: w })
        }
    }

    pub fn d(self, w: f64) -> Result<f64> {
        self.check(w)?;
        Ok(match self {
            GlmFamily::Gaussian => 0.5 * w * w,
            GlmFamily::Logistic => {
                if w > 0.0 {
                    w + (-w).exp().ln_1p()
                } else {
                    w.exp().ln_1p()
                }
            }
            GlmFamily::Poisson => w.exp(),
            GlmFamily::Exponential => -(-w).ln(),
        })
    }

    pub fn d1(self, w: f64) -> Result<f64> {
        self.check(w)?;
        Ok(match self {
            GlmFamily::Gaussian => w,
            GlmFamily::Logistic => sigmoid(w),
            GlmFamily::Poisson => w.exp(),
            GlmFamily::Exponential => -1.0 / w,
        })
    }

    pub fn d2(self, w: f64) -> Result<f64> {
        self.check(w)?;
        Ok(match self {
            GlmFamily::Gaussian => 1.0,
            GlmFamily::Logistic => {
                let s = sigmoid(w);
                s * (1.0 - s)
            }
            GlmFamily::Poisson => w.exp(),
            GlmFamily::Exponential => 1.0 / (w * w),
        })
    }

    /// Global Lipschitz constant of `d″`, when one exists.
    pub fn global_lipschitz(self) -> Option<f64> {
        match self {
            GlmFamily::Gaussian => Some(0.0),
            GlmFamily::Logistic => Some(1.0 / (6.0 * 3f64.sqrt())),
            GlmFamily::Poisson | GlmFamily::Exponential => None,
        }
    }

    /// Lipschitz constant of `d″` on `[lo, hi]`.
    pub fn lipschitz_on(self, lo: f64, hi: f64) -> f64 {
        match self {
            GlmFamily::Gaussian => 0.0,
            GlmFamily::Logistic => 1.0 / (6.0 * 3f64.sqrt()),
            GlmFamily::Poisson => hi.exp(),
            GlmFamily::Exponential => {
                if hi < 0.0 && lo <= hi {
                    2.0 / (-hi).powi(3)
                } else {
                    f64::INFINITY
                }
            }
        }
    }
}

fn sigmoid(w: f64) -> f64 {
    if w >= 0.0 {
        1.0 / (1.0 + (-w).exp())
    } else {
        let e = w.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlmModel {
    design: DMatrix<f64>,
    family: GlmFamily,
    responses: DVector<f64>,
    noise_scales: DVector<f64>,
    lipschitz_d2: f64,
}

impl GlmModel {
    /// Checks the design rank; noise scales default to one and the Lipschitz
    /// constant to the family's global value (infinite if none).
    pub fn new(design: DMatrix<f64>, family: GlmFamily, responses: DVector<f64>) -> Result<Self> {
        if design.nrows() != responses.len() {
            return Err(CoreError::DimensionMismatch {
                context: "responses",
                expected: design.nrows(),
                found: responses.len(),
            });
        }
        if design.ncols() == 0 {
            return Err(invalid("design needs at least one column"));
        }
        check_full_rank(&design)?;
        if responses.iter().any(|v| !v.is_finite()) {
            return Err(invalid("responses must be finite"));
        }
        let n = design.nrows();
        Ok(Self {
            design,
            family,
            responses,
            noise_scales: DVector::from_element(n, 1.0),
            lipschitz_d2: family.global_lipschitz().unwrap_or(f64::INFINITY),
        })
    }

    pub fn with_noise_scales(mut self, scales: DVector<f64>) -> Result<Self> {
        if scales.len() != self.n() {
            return Err(CoreError::DimensionMismatch {
                context: "noise scales",
                expected: self.n(),
                found: scales.len(),
            });
        }
        if scales.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(invalid("noise scales must be positive"));
        }
        self.noise_scales = scales;
        Ok(self)
    }

    /// Sets `𝔰ᵢ² = d″(Ψᵢᵀυ*)`, the correctly specified variance.
    pub fn with_model_noise(self, upsilon_star: &DVector<f64>) -> Result<Self> {
        let w = self.predictor(upsilon_star)?;
        let scales = w
            .iter()
            .map(|&wi| self.family.d2(wi).map(f64::sqrt))
            .collect::<Result<Vec<_>>>()?;
        self.with_noise_scales(DVector::from_vec(scales))
    }

    pub fn with_lipschitz(mut self, l: f64) -> Result<Self> {
        if !(l >= 0.0) {
            return Err(invalid("Lipschitz constant must be nonnegative"));
        }
        self.lipschitz_d2 = l;
        Ok(self)
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.design
    }

    pub fn family(&self) -> GlmFamily {
        self.family
    }

    pub fn responses(&self) -> &DVector<f64> {
        &self.responses
    }

    pub fn noise_scales(&self) -> &DVector<f64> {
        &self.noise_scales
    }

    pub fn lipschitz_d2(&self) -> f64 {
        self.lipschitz_d2
    }

    pub fn n(&self) -> usize {
        self.design.nrows()
    }

    pub fn p_star(&self) -> usize {
        self.design.ncols()
    }

    fn predictor(&self, upsilon: &DVector<f64>) -> Result<DVector<f64>> {
        if upsilon.len() != self.p_star() {
            return Err(CoreError::DimensionMismatch {
                context: "parameter",
                expected: self.p_star(),
                found: upsilon.len(),
            });
        }
        Ok(&self.design * upsilon)
    }
}

pub fn glm_loglik(upsilon: &DVector<f64>, model: &GlmModel) -> Result<f64> {
    let w = model.predictor(upsilon)?;
    let mut total = 0.0;
    for (wi, yi) in w.iter().zip(model.responses.iter()) {
        total += yi * wi - model.family.d(*wi)?;
    }
    Ok(total)
}

pub fn glm_grad(upsilon: &DVector<f64>, model: &GlmModel) -> Result<DVector<f64>> {
    let w = model.predictor(upsilon)?;
    let mut resid = DVector::zeros(model.n());
    for i in 0..model.n() {
        resid[i] = model.responses[i] - model.family.d1(w[i])?;
    }
    Ok(model.design.tr_mul(&resid))
}

pub fn glm_hessian(upsilon: &DVector<f64>, model: &GlmModel) -> Result<DMatrix<f64>> {
    Ok(-weighted_gram(&model.design, &curvature(upsilon, model)?))
}

fn curvature(upsilon: &DVector<f64>, model: &GlmModel) -> Result<DVector<f64>> {
    let w = model.predictor(upsilon)?;
    let mut out = DVector::zeros(model.n());
    for i in 0..model.n() {
        out[i] = model.family.d2(w[i])?;
    }
    Ok(out)
}

/// `Σ wᵢ ΨᵢΨᵢᵀ`.
fn weighted_gram(design: &DMatrix<f64>, weights: &DVector<f64>) -> DMatrix<f64> {
    let mut scaled = design.clone();
    for (i, w) in weights.iter().enumerate() {
        scaled.row_mut(i).scale_mut(*w);
    }
    linalg::symmetrize(&design.tr_mul(&scaled))
}

/// Newton's method with step halving, started at a family-appropriate point.
pub fn glm_mle(model: &GlmModel, tol: f64, max_iter: usize) -> Result<DVector<f64>> {
    glm_mle_from(model, &default_start(model)?, tol, max_iter)
}

fn default_start(model: &GlmModel) -> Result<DVector<f64>> {
    let p = model.p_star();
    if model.family != GlmFamily::Exponential {
        return Ok(DVector::zeros(p));
    }
    // Least-squares fit of the constant predictor −1/Ȳ.
    let ybar = model.responses.mean();
    if !(ybar > 0.0) {
        return Err(invalid("exponential responses must have a positive mean"));
    }
    let target = DVector::from_element(model.n(), -1.0 / ybar);
    let start = model
        .design
        .clone()
        .svd(true, true)
        .solve(&target, 1e-12)
        .map_err(|_| CoreError::SingularHessian)?;
    if (&model.design * &start).iter().all(|w| *w < 0.0) {
        Ok(start)
    } else {
        Err(invalid(
            "no feasible starting point found; supply one explicitly",
        ))
    }
}

pub fn glm_mle_from(
    model: &GlmModel,
    start: &DVector<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<DVector<f64>> {
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    let threshold = tol * (1.0 + model.responses.norm());
    let mut u = start.clone();
    let mut value = glm_loglik(&u, model)?;
    for _ in 0..max_iter {
        let g = glm_grad(&u, model)?;
        if g.norm() <= threshold {
            return Ok(u);
        }
        let info = -glm_hessian(&u, model)?;
        let step = info.cholesky().ok_or(CoreError::SingularHessian)?.solve(&g);
        // Below roundoff the ascent test is meaningless; take the Newton step.
        let negligible = g.dot(&step) <= 100.0 * f64::EPSILON * (1.0 + value.abs());
        let mut t = 1.0;
        loop {
            let cand = &u + &step * t;
            match glm_loglik(&cand, model) {
                Ok(v) if v >= value || negligible => {
                    u = cand;
                    value = v;
                    break;
                }
                Ok(_) | Err(CoreError::Domain { .. }) => {}
                Err(e) => return Err(e),
            }
            t *= 0.5;
            if t < 1e-12 {
                // No ascent possible at machine precision: accept the point
                // if the gradient is already tiny, otherwise give up.
                let g = glm_grad(&u, model)?;
                if g.norm() <= threshold * 1e3 {
                    return Ok(u);
                }
                return Err(CoreError::NoConvergence {
                    iterations: max_iter,
                });
            }
        }
    }
    let g = glm_grad(&u, model)?;
    if g.norm() <= threshold {
        Ok(u)
    } else {
        Err(CoreError::NoConvergence {
            iterations: max_iter,
        })
    }
}

/// `D₀² = Σ d″(Ψᵢᵀυ*) ΨᵢΨᵢᵀ`.
pub fn glm_fisher(upsilon_star: &DVector<f64>, model: &GlmModel) -> Result<DMatrix<f64>> {
    Ok(weighted_gram(
        &model.design,
        &curvature(upsilon_star, model)?,
    ))
}

/// `V₀² = Σ 𝔰ᵢ² ΨᵢΨᵢᵀ`.
pub fn glm_vmatrix(model: &GlmModel) -> DMatrix<f64> {
    weighted_gram(&model.design, &model.noise_scales.map(|s| s * s))
}

/// Expected log-likelihood at `υ` when the data follow the model at `υ*`.
pub fn glm_expected_loglik(
    upsilon: &DVector<f64>,
    upsilon_star: &DVector<f64>,
    model: &GlmModel,
) -> Result<f64> {
    let w = model.predictor(upsilon)?;
    let ws = model.predictor(upsilon_star)?;
    let mut total = 0.0;
    for i in 0..model.n() {
        total += model.family.d1(ws[i])? * w[i] - model.family.d(w[i])?;
    }
    Ok(total)
}

/// Excess `Σ {d(wᵢ) − d(wᵢ*) − d′(wᵢ*)(wᵢ − wᵢ*)}`, a Kullback–Leibler divergence.
pub fn glm_excess(
    upsilon: &DVector<f64>,
    upsilon_star: &DVector<f64>,
    model: &GlmModel,
) -> Result<f64> {
    let w = model.predictor(upsilon)?;
    let ws = model.predictor(upsilon_star)?;
    let f = model.family;
    let mut total = 0.0;
    for i in 0..model.n() {
        total += f.d(w[i])? - f.d(ws[i])? - f.d1(ws[i])? * (w[i] - ws[i]);
    }
    Ok(total.max(0.0))
}

/// `N₂^{-1/2} = maxᵢ ‖D₀⁻¹Ψᵢ‖ / d″(Ψᵢᵀυ*)`.
pub fn glm_n2_inv_sqrt(
    upsilon_star: &DVector<f64>,
    model: &GlmModel,
    fisher: &DMatrix<f64>,
) -> Result<f64> {
    let curv = curvature(upsilon_star, model)?;
    max_weighted_leverage(&model.design, fisher, |i| 1.0 / curv[i])
}

/// `δ(r) = L r / √N₂`.
pub fn glm_delta_r(
    r: f64,
    upsilon_star: &DVector<f64>,
    model: &GlmModel,
    fisher: &DMatrix<f64>,
) -> Result<f64> {
    if model.lipschitz_d2 == 0.0 {
        return Ok(0.0);
    }
    Ok(model.lipschitz_d2 * r * glm_n2_inv_sqrt(upsilon_star, model, fisher)?)
}

/// Lipschitz constant of `d″` over the predictors reachable from `υ*` within
/// the local set `‖D₀(υ − υ*)‖ ≤ r`.
pub fn glm_local_lipschitz(
    upsilon_star: &DVector<f64>,
    model: &GlmModel,
    fisher: &DMatrix<f64>,
    r: f64,
) -> Result<f64> {
    let ws = model.predictor(upsilon_star)?;
    let chol = linalg::cholesky(fisher, "Fisher matrix")?;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..model.n() {
        let reach =
            r * linalg::inverse_quadratic_form(&chol, &model.design.row(i).transpose()).sqrt();
        lo = lo.min(ws[i] - reach);
        hi = hi.max(ws[i] + reach);
    }
    Ok(model.family.lipschitz_on(lo, hi))
}

/// Design with an intercept column and standard normal covariates.
pub fn random_design<R: Rng + ?Sized>(n: usize, p_star: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(n, p_star, |_, j| {
        if j == 0 {
            1.0
        } else {
            rng.sample(StandardNormal)
        }
    })
}

/// Responses drawn from the family at `υ*` (unit variance for Gaussian).
pub fn sample_responses<R: Rng + ?Sized>(
    family: GlmFamily,
    design: &DMatrix<f64>,
    upsilon_star: &DVector<f64>,
    rng: &mut R,
) -> Result<DVector<f64>> {
    let w = design * upsilon_star;
    let mut y = DVector::zeros(w.len());
    for (i, wi) in w.iter().copied().enumerate() {
        family.check(wi)?;
        y[i] = match family {
            GlmFamily::Gaussian => Normal::new(wi, 1.0)
                .map_err(|_| CoreError::Domain { value: wi })?
                .sample(rng),
            GlmFamily::Logistic => {
                let b = Bernoulli::new(sigmoid(wi)).map_err(|_| CoreError::Domain { value: wi })?;
                if b.sample(rng) {
                    1.0
                } else {
                    0.0
                }
            }
            GlmFamily::Poisson => {
                let lambda = wi.exp();
                if lambda == 0.0 {
                    0.0
                } else {
                    Poisson::new(lambda)
                        .map_err(|_| CoreError::Domain { value: wi })?
                        .sample(rng)
                }
            }
            GlmFamily::Exponential => Exp::new(-wi)
                .map_err(|_| CoreError::Domain { value: wi })?
                .sample(rng),
        };
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::testutil::{gaussian_matrix, random_orthogonal};
    use alloc::vec;
    use proptest::prelude::*;
    use rand::Rng;

    const FAMILIES: [GlmFamily; 4] = [
        GlmFamily::Gaussian,
        GlmFamily::Logistic,
        GlmFamily::Poisson,
        GlmFamily::Exponential,
    ];

    /// Instance whose predictors stay in every family's domain near `υ*`.
    fn instance(family: GlmFamily, n: usize, p: usize, seed: u64) -> (GlmModel, DVector<f64>) {
        let mut r = rng::seeded(seed);
        let mut design = random_design(n, p, &mut r) * 0.3;
        design.column_mut(0).fill(1.0);
        let mut ups = DVector::from_fn(p, |_, _| r.random_range(-0.3..0.3));
        if family == GlmFamily::Exponential {
            ups[0] = -2.0;
        }
        let y = sample_responses(family, &design, &ups, &mut r).unwrap();
        (GlmModel::new(design, family, y).unwrap(), ups)
    }

    #[test]
    fn gaussian_identity_design() {
        let y = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let m = GlmModel::new(DMatrix::identity(3, 3), GlmFamily::Gaussian, y.clone()).unwrap();
        let u = DVector::from_vec(vec![0.2, 0.1, -0.3]);
        let l = glm_loglik(&u, &m).unwrap();
        assert!((l - (y.dot(&u) - u.norm_squared() / 2.0)).abs() < 1e-14);
        let mle = glm_mle(&m, 1e-10, 50).unwrap();
        assert!((mle - y).abs().max() < 1e-12);
    }

    #[test]
    fn logistic_hessian_at_zero() {
        let m = GlmModel::new(
            DMatrix::from_element(4, 1, 1.0),
            GlmFamily::Logistic,
            DVector::from_vec(vec![1.0, 0.0, 1.0, 1.0]),
        )
        .unwrap();
        let h = glm_hessian(&DVector::zeros(1), &m).unwrap();
        assert!((h[(0, 0)] + 1.0).abs() < 1e-15);
        let f = glm_fisher(&DVector::zeros(1), &m).unwrap();
        assert!((f[(0, 0)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for family in FAMILIES {
            for seed in 0..25 {
                let (m, ups) = instance(family, 40, 3, seed);
                let g = glm_grad(&ups, &m).unwrap();
                let h = glm_hessian(&ups, &m).unwrap();
                let eps = 1e-5;
                for k in 0..3 {
                    let mut up = ups.clone();
                    let mut dn = ups.clone();
                    up[k] += eps;
                    dn[k] -= eps;
                    let fd =
                        (glm_loglik(&up, &m).unwrap() - glm_loglik(&dn, &m).unwrap()) / (2.0 * eps);
                    assert!(
                        (fd - g[k]).abs() <= 1e-5 * g.norm().max(1.0),
                        "{family:?} grad"
                    );
                    let fdg =
                        (glm_grad(&up, &m).unwrap() - glm_grad(&dn, &m).unwrap()) / (2.0 * eps);
                    for j in 0..3 {
                        assert!(
                            (fdg[j] - h[(j, k)]).abs() <= 1e-5 * h.norm().max(1.0),
                            "{family:?} hessian"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn gaussian_mle_is_least_squares() {
        let mut r = rng::seeded(1);
        let x = gaussian_matrix(&mut r, 30, 3);
        let y = gaussian_matrix(&mut r, 30, 1).column(0).clone_owned();
        let m = GlmModel::new(x.clone(), GlmFamily::Gaussian, y.clone()).unwrap();
        let ls = (x.transpose() * &x).try_inverse().unwrap() * x.transpose() * y;
        let mle = glm_mle(&m, 1e-10, 1).unwrap();
        assert!((mle - ls).abs().max() < 1e-10);
    }

    #[test]
    fn logistic_mle_matches_grid_search() {
        let (m, _) = instance(GlmFamily::Logistic, 200, 2, 4);
        let mle = glm_mle(&m, 1e-10, 100).unwrap();
        let step = 0.01;
        let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
        for i in -300..=300 {
            for j in -300..=300 {
                let u = DVector::from_vec(vec![i as f64 * step, j as f64 * step]);
                let l = glm_loglik(&u, &m).unwrap();
                if l > best.0 {
                    best = (l, u[0], u[1]);
                }
            }
        }
        assert!((mle[0] - best.1).abs() <= step);
        assert!((mle[1] - best.2).abs() <= step);
    }

    #[test]
    fn converges_when_ascent_is_below_roundoff() {
        // Newton reaches |∇L| ~ 1e-8 while L no longer changes in f64.
        let mut r = rng::stream(42, 0);
        let x = random_design(500, 2, &mut r);
        let y = sample_responses(GlmFamily::Logistic, &x, &DVector::zeros(2), &mut r).unwrap();
        let m = GlmModel::new(x, GlmFamily::Logistic, y).unwrap();
        let mle = glm_mle(&m, 1e-10, 200).unwrap();
        assert!(glm_grad(&mle, &m).unwrap().norm() < 1e-8);
    }

    #[test]
    fn poisson_scalar_mle_is_log_mean() {
        let y = DVector::from_vec(vec![3.0, 1.0, 0.0, 4.0, 2.0, 2.0, 5.0, 1.0, 0.0, 3.0]);
        let m = GlmModel::new(
            DMatrix::from_element(10, 1, 1.0),
            GlmFamily::Poisson,
            y.clone(),
        )
        .unwrap();
        let mle = glm_mle(&m, 1e-12, 100).unwrap();
        assert!((mle[0] - y.mean().ln()).abs() < 1e-10);
    }

    #[test]
    fn exponential_mle_and_domain() {
        let y = DVector::from_vec(vec![0.5, 1.5, 2.0, 0.2, 0.8]);
        let m = GlmModel::new(
            DMatrix::from_element(5, 1, 1.0),
            GlmFamily::Exponential,
            y.clone(),
        )
        .unwrap();
        let mle = glm_mle(&m, 1e-12, 100).unwrap();
        assert!((mle[0] + 1.0 / y.mean()).abs() < 1e-10);
        assert!(matches!(
            glm_loglik(&DVector::from_vec(vec![0.5]), &m),
            Err(CoreError::Domain { .. })
        ));
        assert!(matches!(
            GlmFamily::Poisson.d(701.0),
            Err(CoreError::Domain { .. })
        ));
    }

    #[test]
    fn rank_deficient_design_rejected() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0]);
        assert_eq!(
            GlmModel::new(x, GlmFamily::Gaussian, DVector::zeros(3)).unwrap_err(),
            CoreError::RankDeficient
        );
    }

    #[test]
    fn fisher_and_vmatrix() {
        let (m, ups) = instance(GlmFamily::Logistic, 50, 3, 5);
        let m = m.with_model_noise(&ups).unwrap();
        let d = glm_fisher(&ups, &m).unwrap();
        let v = glm_vmatrix(&m);
        assert!((&d - &v).abs().max() <= 1e-12 * d.abs().max());
    }

    #[test]
    fn fisher_matches_expected_loglik_hessian() {
        for family in FAMILIES {
            let (m, ups) = instance(family, 30, 2, 6);
            let d = glm_fisher(&ups, &m).unwrap();
            let eps = 1e-4;
            let f = |u: &DVector<f64>| glm_expected_loglik(u, &ups, &m).unwrap();
            for a in 0..2 {
                for b in 0..2 {
                    let mut e_a = DVector::zeros(2);
                    let mut e_b = DVector::zeros(2);
                    e_a[a] = eps;
                    e_b[b] = eps;
                    let fd = (f(&(&ups + &e_a + &e_b))
                        - f(&(&ups + &e_a - &e_b))
                        - f(&(&ups - &e_a + &e_b))
                        + f(&(&ups - &e_a - &e_b)))
                        / (4.0 * eps * eps);
                    assert!(
                        (-fd - d[(a, b)]).abs() <= 1e-6 * d.abs().max().max(1.0),
                        "{family:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn excess_examples() {
        let (m, ups) = instance(GlmFamily::Gaussian, 20, 3, 7);
        assert_eq!(glm_excess(&ups, &ups, &m).unwrap(), 0.0);
        let u = &ups + DVector::from_vec(vec![0.3, -0.2, 0.1]);
        let e = glm_excess(&u, &ups, &m).unwrap();
        let direct = (m.design() * (&u - &ups)).norm_squared() / 2.0;
        assert!((e - direct).abs() < 1e-12);
    }

    #[test]
    fn excess_is_bracketed_by_segment_quadratics() {
        for family in [
            GlmFamily::Logistic,
            GlmFamily::Poisson,
            GlmFamily::Exponential,
        ] {
            let (m, ups) = instance(family, 40, 2, 8);
            let diff = DVector::from_vec(vec![0.15, -0.1]);
            let u = &ups + &diff;
            let e = glm_excess(&u, &ups, &m).unwrap();
            let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
            for k in 0..=200 {
                let t = k as f64 / 200.0;
                let mid = &ups + &diff * t;
                let q = 0.5 * (glm_fisher(&mid, &m).unwrap() * &diff).dot(&diff);
                lo = lo.min(q);
                hi = hi.max(q);
            }
            assert!(
                e >= lo * (1.0 - 1e-9) && e <= hi * (1.0 + 1e-9),
                "{family:?}"
            );
        }
    }

    #[test]
    fn delta_r_examples() {
        let (m, ups) = instance(GlmFamily::Gaussian, 20, 2, 9);
        let d = glm_fisher(&ups, &m).unwrap();
        assert_eq!(glm_delta_r(3.0, &ups, &m, &d).unwrap(), 0.0);

        // L = 2, r = 1 and N₂ = 100 through ‖D₀⁻¹Ψ‖ = 0.1 with d″ = 1.
        let x = DMatrix::from_element(1, 1, 0.1);
        let m = GlmModel::new(x, GlmFamily::Gaussian, DVector::zeros(1))
            .unwrap()
            .with_lipschitz(2.0)
            .unwrap();
        let fisher = DMatrix::from_element(1, 1, 1.0);
        let v = glm_delta_r(1.0, &DVector::zeros(1), &m, &fisher).unwrap();
        assert!((v - 0.2).abs() < 1e-14);
    }

    #[test]
    fn n2_sup_matches_random_directions() {
        let (m, ups) = instance(GlmFamily::Logistic, 15, 3, 10);
        let d = glm_fisher(&ups, &m).unwrap();
        let exact = glm_n2_inv_sqrt(&ups, &m, &d).unwrap();
        let root = linalg::eigen_map(&linalg::spd_eigen(&d, "d").unwrap(), f64::sqrt);
        let w = m.design() * &ups;
        let mut r = rng::seeded(11);
        let mut best = 0.0_f64;
        for _ in 0..100_000 {
            let g = gaussian_matrix(&mut r, 3, 1).column(0).clone_owned();
            let denom = (&root * &g).norm();
            for i in 0..m.n() {
                let v = m.design().row(i).transpose().dot(&g).abs()
                    / (GlmFamily::Logistic.d2(w[i]).unwrap() * denom);
                best = best.max(v);
            }
        }
        assert!(best <= exact * (1.0 + 1e-12));
        assert!(best >= 0.99 * exact);
    }

    #[test]
    fn logistic_lipschitz_constant() {
        let mut worst = 0.0_f64;
        for k in -4000..4000 {
            let w = k as f64 * 0.005;
            let s = sigmoid(w);
            worst = worst.max((s * (1.0 - s) * (1.0 - 2.0 * s)).abs());
        }
        let l = GlmFamily::Logistic.global_lipschitz().unwrap();
        assert!(worst <= l && worst >= 0.999 * l);
    }

    proptest! {
        #[test]
        fn excess_nonnegative(seed in any::<u64>(), fam in 0usize..4) {
            let family = FAMILIES[fam];
            let (m, ups) = instance(family, 25, 2, seed);
            let mut r = rng::seeded(seed ^ 0xabc);
            let u = &ups + DVector::from_fn(2, |_, _| r.random_range(-0.2..0.2));
            prop_assert!(glm_excess(&u, &ups, &m).unwrap() >= 0.0);
        }

        #[test]
        fn orthogonal_reparametrization_preserves_loglik(seed in any::<u64>()) {
            let (m, ups) = instance(GlmFamily::Logistic, 20, 3, seed);
            let mut r = rng::seeded(seed);
            let q = random_orthogonal(&mut r, 3);
            let rotated = GlmModel::new(m.design() * &q, GlmFamily::Logistic, m.responses().clone()).unwrap();
            let a = glm_loglik(&ups, &m).unwrap();
            let b = glm_loglik(&(q.transpose() * &ups), &rotated).unwrap();
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}
