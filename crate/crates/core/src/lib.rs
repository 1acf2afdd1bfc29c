//! Estimation of gradient sensitivity matrices from Monte Carlo samples,
//! with fully explicit error certificates.
//!
//! Given a function f whose gradient norm is uniformly bounded by L over
//! the sampling density, the matrix E = mean of ∇f(X)∇f(X)ᵀ encodes the
//! directions along which f is on average most sensitive; the span of its
//! leading k eigenvectors is the active subspace of dimension k. E is
//! estimated by the sample average Ê of gradient outer products, and this
//! crate answers, with computable non-asymptotic bounds:
//!
//! - how large ‖Ê−E‖₂/‖E‖₂ can be at a given failure probability
//!   ([`bounds::relative_error_bound`]);
//! - how many samples certify a target relative error
//!   ([`bounds::required_samples`]) — a count that depends on the
//!   intrinsic dimension trace(E)/‖E‖₂, not on the ambient dimension;
//! - how far the dominant subspace of Ê can rotate away from that of E
//!   ([`bounds::angle_certificate`], [`perturbation::theorem_t1_check`]).
//!
//! The [`sampling`] module provides builtin test functions whose E, L and
//! spectra are known in closed form; the [`harness`] module measures the
//! empirical exceedance frequency of every certificate against its stated
//! failure probability on repeated seeded trials.
//!
//! Everything is deterministic given its seed. Trials run data-parallel
//! under the `parallel` feature (default); disabling it falls back to a
//! sequential loop with identical output.

pub mod bounds;
pub mod error;
pub mod exec;
pub mod harness;
pub mod instances;
pub mod perturbation;
pub mod quadrature;
pub mod rng;
pub mod sampling;
pub mod stats;

mod eigen;
mod matrix;
mod subspace;

pub use eigen::EigenSystem;
pub use error::{Error, Result};
pub use matrix::{Matrix, SymmetricMatrix, TOL_PSD};
pub use subspace::{principal_angle_sin, SubspaceBasis};
