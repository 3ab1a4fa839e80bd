//! Composition of the explicit non-asymptotic BvM error budgets from model
//! constants.

use alloc::vec::Vec;

use crate::error::{invalid, CoreError, Result};
use crate::gausstools::{z_quantile, z_score_bound};

#[cfg(not(feature = "std"))]
use num_traits::Float as _;

const RADIUS_MAX_ITER: usize = 200;
const RADIUS_REL_TOL: f64 = 1e-8;

/// Local quadratic-approximation error `δ(r)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DeltaProfile {
    /// `δ(r) = coeff · r`, the form produced by Lipschitz-Hessian models.
    Linear { coeff: f64 },
    /// Piecewise-linear interpolation through `(r, delta)` knots; constant
    /// below the first knot and extrapolated with the last slope.
    Table { r: Vec<f64>, delta: Vec<f64> },
}

impl DeltaProfile {
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            DeltaProfile::Linear { coeff } => coeff * r,
            DeltaProfile::Table { r: knots, delta } => {
                let n = knots.len();
                if n == 1 || r <= knots[0] {
                    return delta[0];
                }
                let i = knots.partition_point(|k| *k <= r).clamp(1, n - 1);
                let (r0, r1) = (knots[i - 1], knots[i]);
                let (d0, d1) = (delta[i - 1], delta[i]);
                d0 + (d1 - d0) * (r - r0) / (r1 - r0)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DeltaProfile::Linear { coeff } => {
                if *coeff >= 0.0 && coeff.is_finite() {
                    Ok(())
                } else {
                    Err(invalid("delta coefficient must be finite and nonnegative"))
                }
            }
            DeltaProfile::Table { r, delta } => {
                if r.is_empty() || r.len() != delta.len() {
                    return Err(invalid("delta table needs equally many r and delta knots"));
                }
                if r.iter().chain(delta.iter()).any(|v| !v.is_finite()) {
                    return Err(invalid("delta table has non-finite entries"));
                }
                if r.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(invalid("delta table radii must be strictly increasing"));
                }
                if delta[0] < 0.0 || delta.windows(2).any(|w| w[1] < w[0]) {
                    return Err(invalid("delta table must be nonnegative and nondecreasing"));
                }
                Ok(())
            }
        }
    }
}

/// Condition constants of a model.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelConstants {
    pub nu0: f64,
    pub omega: f64,
    pub g: f64,
    /// Global identifiability constant, `0 < b ≤ 1`.
    pub b: f64,
    pub delta: DeltaProfile,
    /// Full dimension `p*`.
    pub p_star: usize,
    /// Target dimension `p`.
    pub p: usize,
    pub trace_b: f64,
    pub lambda_b: f64,
}

impl ModelConstants {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu0 > 0.0) || !self.nu0.is_finite() {
            return Err(invalid("nu0 must be positive"));
        }
        if !(self.omega >= 0.0) || !self.omega.is_finite() {
            return Err(invalid("omega must be nonnegative"));
        }
        if !(self.g > 0.0) {
            return Err(invalid("g must be positive"));
        }
        if !(self.b > 0.0 && self.b <= 1.0) {
            return Err(invalid("b must lie in (0, 1]"));
        }
        if self.p == 0 || self.p_star < self.p {
            return Err(invalid("need 1 <= p <= p_star"));
        }
        if !(self.lambda_b > 0.0) || !(self.trace_b >= self.lambda_b) || !self.trace_b.is_finite() {
            return Err(invalid("need trace_B >= lambda_B > 0"));
        }
        self.delta.validate()
    }
}

/// Composed error budget.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BvmBudget {
    pub r0: f64,
    pub x: f64,
    /// Spread `Δ(r₀, x)`.
    pub delta: f64,
    pub tau: f64,
    pub tau_variant: TauVariant,
    pub rho_star: f64,
    pub delta_plus: f64,
    pub delta_minus: f64,
    /// Bound on `‖D̆(θ̄ − θ°)‖²`.
    pub mean_bound: f64,
    /// Bound on `‖I − D̆ 𝔖² D̆‖`.
    pub cov_bound: f64,
    /// Upper TV sandwich factor `exp(2Δ + 5e⁻ˣ)`.
    pub tv_factor: f64,
    /// Lower TV sandwich factor `exp(−2Δ − 8e⁻ˣ)`.
    pub tv_lower_factor: f64,
    /// Total-variation bound implied by the sandwich, clamped to 1.
    pub tv_bound: f64,
    pub sieve: Option<SieveCorrection>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SieveCorrection {
    pub alpha_m: f64,
    pub beta_m: f64,
}

/// Which of the two printed forms of `τ` to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum TauVariant {
    /// `½(pΔ² + (1+Δ)²Δ²)`.
    #[default]
    Plain,
    /// `½√(pΔ² + (1+Δ)²Δ²)`.
    Sqrt,
}

fn check_positive(v: f64, name: &str) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(alloc::format!(
            "{name} must be positive and finite"
        )))
    }
}

/// Entropy term `qQ(x) = 2√p* + √(2x) + g⁻¹(g⁻²x + 1)·4p*`.
pub fn entropy_term(p_star: usize, x: f64, g: f64) -> Result<f64> {
    if p_star == 0 {
        return Err(invalid("p_star must be at least 1"));
    }
    check_positive(x, "x")?;
    check_positive(g, "g")?;
    let p = p_star as f64;
    Ok(2.0 * p.sqrt() + (2.0 * x).sqrt() + (x / (g * g) + 1.0) * 4.0 * p / g)
}

/// Spread `Δ(r₀,x) = {δ(r₀) + 6ν₀ qQ(x) ω} r₀²`.
pub fn spread(constants: &ModelConstants, r0: f64, x: f64) -> Result<f64> {
    constants.validate()?;
    check_positive(r0, "r0")?;
    let stochastic = if constants.omega == 0.0 {
        check_positive(x, "x")?;
        0.0
    } else {
        6.0 * constants.nu0 * entropy_term(constants.p_star, x, constants.g)? * constants.omega
    };
    Ok((constants.delta.eval(r0) + stochastic) * r0 * r0)
}

/// Right-hand side `(2/b){z(B,x) + 6ν₀ qQ(x + log(2r/r₀)) ω}` of the radius
/// condition.
fn radius_rhs(constants: &ModelConstants, z_b: f64, r: f64, r0: f64, x: f64) -> Result<f64> {
    let stochastic = if constants.omega == 0.0 {
        0.0
    } else {
        let shifted = x + (2.0 * r / r0).ln();
        6.0 * constants.nu0
            * entropy_term(constants.p_star, shifted, constants.g)?
            * constants.omega
    };
    Ok(2.0 / constants.b * (z_b + stochastic))
}

/// Smallest `r ≥ max(r₀, z(p*,x) + z(B,x))` satisfying the radius condition.
///
/// Fixed-point iteration from below; the map is increasing in `r`, so the
/// iterates climb monotonically to the smallest fixed point. Bisection takes
/// over if the iteration has not settled within the iteration budget.
pub fn radius_solver(constants: &ModelConstants, r0: f64, x: f64) -> Result<f64> {
    constants.validate()?;
    check_positive(r0, "r0")?;
    let z_b = z_score_bound(constants.trace_b, constants.lambda_b, x)?;
    let start = r0.max(z_quantile(constants.p_star, x)? + z_b);
    let h = |r: f64| -> Result<f64> { radius_rhs(constants, z_b, r, r0, x) };

    let mut r = start;
    for _ in 0..RADIUS_MAX_ITER {
        let next = h(r)?.max(start);
        if (next - r).abs() <= RADIUS_REL_TOL * r {
            return Ok(next.max(r));
        }
        r = next;
    }

    // Fallback: bracket a crossing of r - h(r) and bisect.
    let mut lo = r;
    let mut hi = r * 2.0;
    while hi - h(hi)? < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 * start {
            return Err(CoreError::NoConvergence {
                iterations: RADIUS_MAX_ITER,
            });
        }
    }
    for _ in 0..RADIUS_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid - h(mid)? >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= RADIUS_REL_TOL * hi {
            return Ok(hi);
        }
    }
    Err(CoreError::NoConvergence {
        iterations: RADIUS_MAX_ITER,
    })
}

/// Smallest radius meeting both the global identifiability condition
/// `b r₀² ≥ z²(p*, x + (p/2) log(e/b))` and the radius condition.
pub fn solve_r0(constants: &ModelConstants, x: f64) -> Result<f64> {
    constants.validate()?;
    let shifted = x + constants.p as f64 / 2.0 * (1.0 - constants.b.ln());
    let r_min = z_quantile(constants.p_star, shifted)? / constants.b.sqrt();
    radius_solver(constants, r_min, x)
}

/// Bound `ρ* ≤ exp(2Δ + 2e⁻ˣ − x)` on the posterior mass outside the local set.
pub fn tail_mass(delta: f64, x: f64) -> f64 {
    (2.0 * delta + 2.0 * (-x).exp() - x).exp()
}

pub fn tau(delta: f64, p: usize, variant: TauVariant) -> f64 {
    let inner = p as f64 * delta * delta + (1.0 + delta).powi(2) * delta * delta;
    match variant {
        TauVariant::Plain => 0.5 * inner,
        TauVariant::Sqrt => 0.5 * inner.sqrt(),
    }
}

/// `(Δ⁺, Δ⁻)`.
pub fn delta_plus_minus(delta: f64, x: f64) -> (f64, f64) {
    let ex = (-x).exp();
    let tail = (delta + 4.0 * ex - x).exp();
    (
        2.0 * delta + 2.0 * ex + 2.0 * tail,
        2.0 * delta + 3.0 * ex + 4.0 * tail,
    )
}

/// Budget assembled from a spread value directly.
pub fn budget_from_delta(delta: f64, r0: f64, x: f64, p: usize, variant: TauVariant) -> BvmBudget {
    let ex = (-x).exp();
    let (delta_plus, delta_minus) = delta_plus_minus(delta, x);
    let star = 4.0 * delta + 16.0 * ex;
    let tv_factor = (2.0 * delta + 5.0 * ex).exp();
    let tv_lower_factor = (-2.0 * delta - 8.0 * ex).exp();
    BvmBudget {
        r0,
        x,
        delta,
        tau: tau(delta, p, variant),
        tau_variant: variant,
        rho_star: tail_mass(delta, x),
        delta_plus,
        delta_minus,
        mean_bound: star,
        cov_bound: star,
        tv_factor,
        tv_lower_factor,
        tv_bound: (tv_factor - 1.0).max(1.0 - tv_lower_factor + ex).min(1.0),
        sieve: None,
    }
}

pub fn bvm_budget(constants: &ModelConstants, r0: f64, x: f64) -> Result<BvmBudget> {
    bvm_budget_with(constants, r0, x, TauVariant::Plain)
}

pub fn bvm_budget_with(
    constants: &ModelConstants,
    r0: f64,
    x: f64,
    variant: TauVariant,
) -> Result<BvmBudget> {
    let delta = spread(constants, r0, x)?;
    Ok(budget_from_delta(delta, r0, x, constants.p, variant))
}

/// Applies the sieve corrections: mean `(1+β)Δ* + α`, covariance `β + (1+β)Δ*`.
pub fn sieve_budget(budget: &BvmBudget, alpha_m: f64, beta_m: f64) -> Result<BvmBudget> {
    if !(alpha_m >= 0.0) || !(beta_m >= 0.0) {
        return Err(invalid("sieve bias terms must be nonnegative"));
    }
    let star = 4.0 * budget.delta + 16.0 * (-budget.x).exp();
    Ok(BvmBudget {
        mean_bound: (1.0 + beta_m) * star + alpha_m,
        cov_bound: beta_m + (1.0 + beta_m) * star,
        sieve: Some(SieveCorrection { alpha_m, beta_m }),
        ..*budget
    })
}

/// Flatness correction for a Gaussian prior `N(0, G⁻²)`:
/// `α(r₀) = max(ε r₀ ‖Gυ*‖, ε² r₀²/2)` and `C(r₀) = exp(‖Gυ*‖²/2)`.
pub fn gaussian_prior_flatness(eps: f64, r0: f64, g_ups_norm: f64) -> (f64, f64) {
    let alpha = (eps * r0 * g_ups_norm).max(eps * eps * r0 * r0 / 2.0);
    (alpha, (g_ups_norm * g_ups_norm / 2.0).exp())
}

/// i.i.d. spread `C √(p³/n)`.
pub fn iid_spread(c: f64, p: usize, n: u64) -> f64 {
    let p = p as f64;
    c * (p * p * p / n as f64).sqrt()
}
