//! Random-matrix and Monte Carlo checks for the laws in `fgamma-core`,
//! output formats and the `fgamma` command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod cli;
pub mod error;
pub mod output;
pub mod rmt;
pub mod rng;

pub use error::{Error, Result};
pub use fgamma_core as core;
