//! Finite-sample Bernstein–von Mises toolkit.
//!
//! The crate covers four layers:
//!
//! * [`blockinfo`]: partitioned information matrices, Schur complements
//!   (efficient information), efficient scores and identifiability checks.
//! * [`gausstools`] and [`bounds`]: closed-form Gaussian inequalities and the
//!   composed non-asymptotic error budgets built from model constants.
//! * [`models`]: grouped Poisson, GLM, linear and sieve regression models with
//!   likelihoods, Fisher matrices and their condition constants.
//! * [`inference`]: conjugate, quadrature and random-walk posterior
//!   computation plus the posterior-versus-Gaussian diagnostic.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature. IO, configuration and the experiment harness live in the `bvm`
//! companion crate.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod blockinfo;
pub mod bounds;
pub mod error;
pub mod gausstools;
pub mod inference;
pub mod linalg;
pub mod models;
pub mod rng;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{CoreError, Result};
