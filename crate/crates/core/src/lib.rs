//! Random Dirichlet series over primes and Rademacher random multiplicative
//! functions.
//!
//! The crate evaluates truncated realizations of `X(s) = Σ_p η_p p^{-1/2-s}`,
//! their exact truncated variances and covariances, finite Euler products of
//! k-free random multiplicative functions with their term-by-term
//! expansions, and the per-prime remainders of the log-decomposition. The
//! [`harness`] module runs Monte Carlo experiments against these exact
//! oracles.
//!
//! Numeric kernels are generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`, which is what the experiments use.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dirichlet;
pub mod error;
pub mod harness;
pub mod multiplicative;
pub mod noise;
pub mod primes;
pub mod report;
pub mod scalar;
pub mod special;
pub mod summation;

pub use error::{Error, Result};
pub use noise::{eta_at, sign_at, NoiseKind, NoiseModel, Realization, SeedSpec, SeededNoise, SeededSigns};
pub use primes::{enumerate_smooth_kfree, sieve_primes, PrimeTable, SmoothEntry, SmoothSet};
pub use scalar::Scalar;
pub use special::{exp_integral_e1, zeta_series};

/// Working precision of the experiments.
pub type Real = f64;

pub type SeriesQuery = dirichlet::SeriesQuery<Real>;
pub type PathQuery = dirichlet::PathQuery<Real>;
pub type PathPoint = dirichlet::PathPoint<Real>;
pub type TimeChange = dirichlet::TimeChange<Real>;
pub type VarianceBreakdown = dirichlet::VarianceBreakdown<Real>;
pub type SequencePoint = dirichlet::SequencePoint<Real>;
pub type EulerProduct = multiplicative::EulerProduct<Real>;
pub type DecompositionReport = multiplicative::DecompositionReport<Real>;
pub type Compensated = summation::Compensated<Real>;
