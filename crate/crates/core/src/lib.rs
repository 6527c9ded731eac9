#![no_std]
//! Generalized free gamma laws `mu_{t,theta,lambda}`: densities, Cauchy/R/S
//! transforms, exact cumulants, convolution identities, Gibbs measures,
//! equilibrium checks and finite free polynomials.

// `!(x > 0.0)` is how NaN gets rejected; quadrature tables are kept as published
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

extern crate alloc;

pub mod convolution;
pub mod cumulants;
pub mod equilibrium;
pub mod error;
pub mod finite_free;
pub mod gibbs;
pub mod measures;
pub mod quad;
pub mod stats;
pub mod transforms;

pub use error::{Error, Result};
