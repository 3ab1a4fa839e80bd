//! Sieve regression: a parametric target design `Ψ` plus the first `m`
//! functions of a Fourier basis approximating a Sobolev-smooth nuisance.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{invalid, CoreError, Result};

use super::check_full_rank;

#[cfg(not(feature = "std"))]
use num_traits::Float as _;

#[derive(Debug, Clone, PartialEq)]
pub struct SieveModel {
    target_design: DMatrix<f64>,
    points: Vec<f64>,
    m: usize,
    s: f64,
    sobolev_radius: f64,
    n3: f64,
    n4: f64,
}

impl SieveModel {
    /// `points` are the design points in `[0, 1]` where the nuisance basis is
    /// evaluated. `N₃ = N₄ = n` unless overridden.
    pub fn new(
        target_design: DMatrix<f64>,
        points: Vec<f64>,
        m: usize,
        s: f64,
        sobolev_radius: f64,
    ) -> Result<Self> {
        if points.len() != target_design.nrows() {
            return Err(CoreError::DimensionMismatch {
                context: "design points",
                expected: target_design.nrows(),
                found: points.len(),
            });
        }
        if !(s > 0.0) || !(sobolev_radius > 0.0) {
            return Err(invalid("smoothness and Sobolev radius must be positive"));
        }
        let n = points.len() as f64;
        Ok(Self {
            target_design,
            points,
            m,
            s,
            sobolev_radius,
            n3: n,
            n4: n,
        })
    }

    pub fn with_design_constants(mut self, n3: f64, n4: f64) -> Result<Self> {
        if !(n3 > 0.0) || !(n4 > 0.0) {
            return Err(invalid("design constants must be positive"));
        }
        self.n3 = n3;
        self.n4 = n4;
        Ok(self)
    }

    pub fn with_m(mut self, m: usize) -> Self {
        self.m = m;
        self
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn p(&self) -> usize {
        self.target_design.ncols()
    }
}

/// `k`-th (1-based) orthonormal Fourier function on `[0, 1]`:
/// `√2 cos(2π⌈k/2⌉x)` for odd `k`, `√2 sin(2π(k/2)x)` for even `k`.
pub fn fourier_basis(k: usize, x: f64) -> f64 {
    let freq = k.div_ceil(2) as f64;
    let arg = 2.0 * core::f64::consts::PI * freq * x;
    let v = if k % 2 == 1 { arg.cos() } else { arg.sin() };
    core::f64::consts::SQRT_2 * v
}

/// `Ξ = [Ψ | Φ₁ … Φₘ]`.
pub fn sieve_design(model: &SieveModel) -> Result<DMatrix<f64>> {
    let (n, p, m) = (model.n(), model.p(), model.m);
    let mut xi = DMatrix::zeros(n, p + m);
    xi.view_mut((0, 0), (n, p)).copy_from(&model.target_design);
    for (i, &x) in model.points.iter().enumerate() {
        for k in 1..=m {
            xi[(i, p + k - 1)] = fourier_basis(k, x);
        }
    }
    check_full_rank(&xi)?;
    Ok(xi)
}

/// `(αₘ, βₘ) = (C N₃ / m^{2s}, C N₃ / N₄²)`.
pub fn sieve_bias_bounds(c: f64, n3: f64, n4: f64, m: usize, s: f64) -> (f64, f64) {
    (c * n3 / (m as f64).powf(2.0 * s), c * n3 / (n4 * n4))
}

pub fn sieve_bias(model: &SieveModel) -> Result<(f64, f64)> {
    if model.m == 0 {
        return Err(invalid("truncation level must be at least 1"));
    }
    Ok(sieve_bias_bounds(
        model.sobolev_radius,
        model.n3,
        model.n4,
        model.m,
        model.s,
    ))
}

/// Largest integer `k` with `k³ ≤ n`.
pub fn integer_cbrt(n: u64) -> u64 {
    let mut k = (n as f64).cbrt() as u64;
    while (k + 1).checked_pow(3).is_some_and(|c| c <= n) {
        k += 1;
    }
    while k > 0 && k.checked_pow(3).is_none_or(|c| c > n) {
        k -= 1;
    }
    k
}

/// Smallest `m ≤ ⌊n^{1/3}⌋` with `max(αₘ, βₘ) ≤ target`.
pub fn sieve_choose_m(model: &SieveModel, target: f64) -> Result<usize> {
    if !(target > 0.0) {
        return Err(invalid("target must be positive"));
    }
    let cap = integer_cbrt(model.n() as u64) as usize;
    (1..=cap)
        .find(|&m| {
            let (a, b) = sieve_bias_bounds(model.sobolev_radius, model.n3, model.n4, m, model.s);
            a.max(b) <= target
        })
        .ok_or(CoreError::Infeasible { cap })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn equispaced(n: usize) -> Vec<f64> {
        (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect()
    }

    fn model(n: usize, m: usize, s: f64) -> SieveModel {
        let psi = DMatrix::from_fn(n, 1, |i, _| if i % 2 == 0 { 1.0 } else { -1.0 });
        SieveModel::new(psi, equispaced(n), m, s, 1.0).unwrap()
    }

    #[test]
    fn design_shapes() {
        let m0 = model(50, 0, 2.0);
        let xi = sieve_design(&m0).unwrap();
        assert_eq!(xi.ncols(), 1);
        for m in [1, 3, 8] {
            assert_eq!(sieve_design(&model(64, m, 2.0)).unwrap().ncols(), 1 + m);
        }
    }

    #[test]
    fn fourier_gram_is_near_identity() {
        let n = 4000;
        let mut md = model(n, 6, 2.0);
        md.target_design = DMatrix::from_element(n, 1, 1.0);
        let xi = sieve_design(&md).unwrap();
        let gram = xi.tr_mul(&xi) / n as f64;
        assert!((gram - DMatrix::<f64>::identity(7, 7)).abs().max() < 10.0 / n as f64);
    }

    #[test]
    fn duplicate_columns_are_rank_deficient() {
        let n = 40;
        let points = equispaced(n);
        let psi = DMatrix::from_fn(n, 1, |i, _| fourier_basis(1, points[i]));
        let md = SieveModel::new(psi, points, 2, 2.0, 1.0).unwrap();
        assert_eq!(sieve_design(&md).unwrap_err(), CoreError::RankDeficient);
    }

    #[test]
    fn bias_examples() {
        let (a, b) = sieve_bias(&model(1000, 10, 2.0)).unwrap();
        assert!((a - 0.1).abs() < 1e-15);
        assert!((b - 1e-3).abs() < 1e-18);
        let (far, _) = sieve_bias_bounds(1.0, 1000.0, 1000.0, 1_000_000, 2.0);
        assert!(far < 1e-20);
        // s = 3/2 and m = n^{1/3}: αₘ = C.
        let (a, _) = sieve_bias_bounds(1.0, 1e6, 1e6, 100, 1.5);
        assert!((a - 1.0).abs() < 1e-12);
    }

    #[test]
    fn choose_m_examples() {
        let md = model(1000, 1, 2.0);
        let (a1, _) = sieve_bias(&md).unwrap();
        assert_eq!(sieve_choose_m(&md, a1).unwrap(), 1);

        let big = SieveModel::new(
            DMatrix::from_element(1_000_000, 1, 1.0),
            equispaced(1_000_000),
            1,
            2.0,
            1.0,
        )
        .unwrap();
        assert_eq!(sieve_choose_m(&big, 0.01).unwrap(), 100);

        assert_eq!(
            sieve_choose_m(&model(1000, 1, 0.5), 1e-3),
            Err(CoreError::Infeasible { cap: 10 })
        );
    }

    #[test]
    fn integer_cube_roots() {
        assert_eq!(integer_cbrt(0), 0);
        assert_eq!(integer_cbrt(26), 2);
        assert_eq!(integer_cbrt(27), 3);
        assert_eq!(integer_cbrt(1_000_000), 100);
        assert_eq!(integer_cbrt(999_999), 99);
        assert_eq!(integer_cbrt(u64::MAX), 2_642_245);
    }

    #[test]
    fn bias_monotone_in_m() {
        let mut prev = f64::INFINITY;
        for m in 1..50 {
            let (a, _) = sieve_bias_bounds(2.0, 500.0, 500.0, m, 1.7);
            assert!(a < prev);
            prev = a;
        }
    }
}
