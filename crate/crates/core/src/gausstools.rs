//! Closed-form Gaussian inequalities: norm quantiles, shifted tails, and
//! KL / total-variation distances between Gaussians.
//!
//! Bounds are returned unclamped (except [`tv_pinsker`]) so that callers can
//! compose them.

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, CoreError, Result};
use crate::linalg;

#[cfg(not(feature = "std"))]
use num_traits::Float as _;

fn check_x(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(invalid("x must be positive and finite"))
    }
}

/// Upper quantile `z(p,x)` with `P(‖γ‖ ≥ z(p,x)) ≤ e⁻ˣ` for `γ ~ N(0, I_p)`.
pub fn z_quantile(p: usize, x: f64) -> Result<f64> {
    if p == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    check_x(x)?;
    let p = p as f64;
    Ok((p + (6.6 * p * x).sqrt().max(6.6 * x)).sqrt())
}

/// Lower quantile `z₁(p,x)` with `P(‖γ‖ ≤ z₁(p,x)) ≤ e⁻ˣ`.
pub fn z_lower(p: usize, x: f64) -> Result<f64> {
    check_x(x)?;
    let p = p as f64;
    let z2 = p - 2.0 * (p * x).sqrt();
    if z2 > 0.0 {
        Ok(z2.sqrt())
    } else {
        Err(invalid(
            "lower quantile is degenerate: p - 2 sqrt(p x) <= 0",
        ))
    }
}

/// `z(B,x) = √(𝔭_B + 6 λ_B x)`, the quantile of `‖B^{1/2} γ‖`.
pub fn z_score_bound(trace_b: f64, lambda_b: f64, x: f64) -> Result<f64> {
    check_x(x)?;
    if !(lambda_b > 0.0) || !(trace_b >= lambda_b) || !trace_b.is_finite() {
        return Err(invalid("need trace_B >= lambda_B > 0"));
    }
    Ok((trace_b + 6.0 * lambda_b * x).sqrt())
}

/// `exp{−z²/4 + p/2 + ‖u‖²/2}`, bounding `P(‖γ − u‖ ≥ z)`.
pub fn gauss_shifted_tail(p: usize, u_norm: f64, z: f64) -> f64 {
    (-z * z / 4.0 + p as f64 / 2.0 + u_norm * u_norm / 2.0).exp()
}

/// `KL(N(0,I), N(β, (UᵀU)⁻¹))`.
pub fn kl_gaussians(u_matrix: &DMatrix<f64>, beta: &DVector<f64>) -> Result<f64> {
    if u_matrix.nrows() != u_matrix.ncols() {
        return Err(CoreError::DimensionMismatch {
            context: "KL matrix",
            expected: u_matrix.nrows(),
            found: u_matrix.ncols(),
        });
    }
    kl_gaussians_precision(&(u_matrix.transpose() * u_matrix), beta)
}

/// Same as [`kl_gaussians`] with the precision `UᵀU` supplied directly.
pub fn kl_gaussians_precision(precision: &DMatrix<f64>, beta: &DVector<f64>) -> Result<f64> {
    let p = precision.nrows();
    if precision.ncols() != p || beta.len() != p {
        return Err(CoreError::DimensionMismatch {
            context: "KL precision",
            expected: p,
            found: beta.len(),
        });
    }
    if precision.iter().chain(beta.iter()).any(|v| !v.is_finite()) {
        return Err(CoreError::SingularMatrix);
    }
    linalg::spd_eigen(precision, "precision").map_err(|_| CoreError::SingularMatrix)?;
    let chol = linalg::cholesky(precision, "precision").map_err(|_| CoreError::SingularMatrix)?;
    let log_det = linalg::log_det_cholesky(&chol);
    let quad = (precision * beta).dot(beta);
    let two_kl = -log_det + precision.trace() - p as f64 + quad;
    Ok((two_kl / 2.0).max(0.0))
}

/// Pinsker bound `min(1, √(KL/2))` on total variation.
pub fn tv_pinsker(kl: f64) -> f64 {
    (kl.max(0.0) / 2.0).sqrt().min(1.0)
}

/// TV penalty `½√(α²p + (1+α)²β²)` for a relative scale change `α` and a
/// standardized shift `β`.
pub fn rescale_tv_penalty(alpha: f64, beta: f64, p: usize) -> f64 {
    0.5 * (alpha * alpha * p as f64 + (1.0 + alpha).powi(2) * beta * beta).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::testutil::{gaussian_matrix, random_orthogonal};
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn norm_tail_mc(p: usize, shift: f64, z: f64, n: usize, seed: u64) -> (f64, f64) {
        let mut rng = rng::seeded(seed);
        let mut hits = 0usize;
        for _ in 0..n {
            let mut s = 0.0;
            for j in 0..p {
                let g: f64 = rng.sample(StandardNormal);
                let d = if j == 0 { g - shift } else { g };
                s += d * d;
            }
            if s >= z * z {
                hits += 1;
            }
        }
        let phat = hits as f64 / n as f64;
        (phat, (phat * (1.0 - phat) / n as f64).sqrt())
    }

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    fn log_normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
        -0.5 * (2.0 * core::f64::consts::PI * var).ln() - (x - mean).powi(2) / (2.0 * var)
    }

    #[test]
    fn z_quantile_examples() {
        let z = z_quantile(1, 1.0).unwrap();
        assert!((z * z - 7.6).abs() < 1e-12);
        assert!((z - 2.7568).abs() < 1e-4);
        let z = z_quantile(4, 1e-12).unwrap();
        assert!((z * z - 4.0).abs() < 1e-4);
        assert!(z_quantile(3, 0.0).is_err());
    }

    #[test]
    fn z_quantile_dominates_tail_mc() {
        let z = z_quantile(5, 2.0).unwrap();
        let (phat, se) = norm_tail_mc(5, 0.0, z, 1_000_000, 1);
        assert!(phat <= (-2.0f64).exp() + 3.0 * se);
    }

    #[test]
    fn z_lower_examples() {
        let z = z_lower(100, 1.0).unwrap();
        assert!((z * z - 80.0).abs() < 1e-12);
        assert!((z - 8.944).abs() < 1e-3);
        assert!((z_lower(9, 1e-12).unwrap().powi(2) - 9.0).abs() < 1e-4);
        assert!(matches!(z_lower(16, 4.0), Err(CoreError::InvalidInput(_))));
    }

    #[test]
    fn z_score_bound_examples() {
        let z = z_score_bound(5.0, 2.0, 1.0).unwrap();
        assert!((z * z - 17.0).abs() < 1e-12);
        assert!((z_score_bound(5.0, 2.0, 1e-12).unwrap().powi(2) - 5.0).abs() < 1e-9);
        assert!(z_score_bound(1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn z_score_bound_dominates_chi_square_quantile() {
        // B = I_5: 𝔭_B = 5, λ_B = 1.
        let z = z_score_bound(5.0, 1.0, 2.0).unwrap();
        let mut rng = rng::seeded(2);
        let n = 1_000_000;
        let mut sq: alloc::vec::Vec<f64> = (0..n)
            .map(|_| {
                (0..5)
                    .map(|_| rng.sample::<f64, _>(StandardNormal).powi(2))
                    .sum()
            })
            .collect();
        sq.sort_by(f64::total_cmp);
        let level = 1.0 - (-2.0f64).exp();
        let q = sq[(level * n as f64) as usize];
        assert!(z * z >= q);
    }

    #[test]
    fn shifted_tail_examples() {
        assert!((gauss_shifted_tail(2, 0.0, 3.0) - (-1.25f64).exp()).abs() < 1e-15);
        assert!((gauss_shifted_tail(2, 0.0, 3.0) - 0.2865).abs() < 1e-4);
        assert!(gauss_shifted_tail(2, 0.0, 100.0) < 1e-300);
        let bound = gauss_shifted_tail(3, 1.0, 5.0);
        let (phat, se) = norm_tail_mc(3, 1.0, 5.0, 1_000_000, 3);
        assert!(phat <= bound + 3.0 * se);
    }

    #[test]
    fn kl_examples() {
        let zero = kl_gaussians(&DMatrix::identity(3, 3), &DVector::zeros(3)).unwrap();
        assert!(zero.abs() < 1e-15);
        let u = DMatrix::from_element(1, 1, 1.2f64.sqrt());
        let kl = kl_gaussians(&u, &DVector::from_element(1, 0.3)).unwrap();
        assert!((kl - 0.06284).abs() < 1e-5);
        let oracle = simpson(
            |x| {
                let lp = log_normal_pdf(x, 0.0, 1.0);
                lp.exp() * (lp - log_normal_pdf(x, 0.3, 1.0 / 1.2))
            },
            -15.0,
            15.0,
            20_000,
        );
        assert!((kl - oracle).abs() < 1e-6);
    }

    #[test]
    fn kl_rejects_singular() {
        let u = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert_eq!(
            kl_gaussians(&u, &DVector::zeros(2)),
            Err(CoreError::SingularMatrix)
        );
    }

    #[test]
    fn kl_bound_on_random_instances() {
        let mut rng = rng::seeded(4);
        for _ in 0..200 {
            let p = rng.random_range(1..8);
            // UᵀU = Q diag(1+e) Qᵀ with |e| ≤ 0.4.
            let q = random_orthogonal(&mut rng, p);
            let eig = DVector::from_fn(p, |_, _| 1.0 + rng.random_range(-0.4..0.4));
            let root = &q * DMatrix::from_diagonal(&eig.map(f64::sqrt)) * q.transpose();
            let beta = gaussian_matrix(&mut rng, p, 1).column(0).clone_owned();
            let kl = kl_gaussians(&root, &beta).unwrap();
            assert!(2.0 * kl <= 0.16 * p as f64 + 1.4 * beta.norm_squared() + 1e-12);
        }
    }

    #[test]
    fn pinsker_dominates_quadrature_tv() {
        let mut rng = rng::seeded(5);
        for _ in 0..20 {
            let u: f64 = rng.random_range(0.5..2.0);
            let beta: f64 = rng.random_range(-1.5..1.5);
            let kl = kl_gaussians(
                &DMatrix::from_element(1, 1, u),
                &DVector::from_element(1, beta),
            )
            .unwrap();
            let var1 = 1.0 / (u * u);
            let tv = 0.5
                * simpson(
                    |x| {
                        (log_normal_pdf(x, 0.0, 1.0).exp() - log_normal_pdf(x, beta, var1).exp())
                            .abs()
                    },
                    -20.0,
                    20.0,
                    40_000,
                );
            assert!(tv_pinsker(kl) + 1e-4 >= tv);
        }
    }

    #[test]
    fn pinsker_examples() {
        assert_eq!(tv_pinsker(0.0), 0.0);
        assert!((tv_pinsker(0.125679) - 0.2507).abs() < 1e-4);
        assert_eq!(tv_pinsker(10.0), 1.0);
    }

    #[test]
    fn rescale_penalty_examples() {
        assert_eq!(rescale_tv_penalty(0.0, 0.0, 3), 0.0);
        assert!((rescale_tv_penalty(0.1, 0.2, 4) - 0.1487).abs() < 1e-4);
        assert!((rescale_tv_penalty(0.0, 0.7, 9) - 0.35).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn kl_is_rotation_invariant(seed in any::<u64>(), p in 1usize..7) {
            let mut rng = rng::seeded(seed);
            let mut u = gaussian_matrix(&mut rng, p, p);
            for i in 0..p {
                u[(i, i)] += 3.0;
            }
            let beta = gaussian_matrix(&mut rng, p, 1).column(0).clone_owned();
            let q = random_orthogonal(&mut rng, p);
            let a = kl_gaussians(&u, &beta).unwrap();
            let b = kl_gaussians(&(&u * q.transpose()), &(&q * &beta)).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }

        #[test]
        fn kl_is_nonnegative(seed in any::<u64>(), p in 1usize..6) {
            let mut rng = rng::seeded(seed);
            let mut u = gaussian_matrix(&mut rng, p, p);
            for i in 0..p {
                u[(i, i)] += 2.5;
            }
            let beta = gaussian_matrix(&mut rng, p, 1).column(0).clone_owned();
            prop_assert!(kl_gaussians(&u, &beta).unwrap() >= 0.0);
        }

        #[test]
        fn z_quantile_monotone(p in 1usize..50, x in 0.01f64..10.0, dx in 0.0f64..5.0) {
            prop_assert!(z_quantile(p, x + dx).unwrap() >= z_quantile(p, x).unwrap());
            prop_assert!(z_quantile(p + 1, x).unwrap() > z_quantile(p, x).unwrap());
        }
    }
}
