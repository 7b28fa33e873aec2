//! Benchmarking and training toolkit for periodic extrapolation.
//!
//! The crate is organised around the experimental pipeline:
//!
//! - [`signals`] builds hierarchical periodic signals (optionally offset by a
//!   trend) and samples training/evaluation datasets from them.
//! - [`nets`] provides small dense networks with periodic and snake
//!   activations, exact gradients, six optimizers and an early-stopping trainer.
//! - [`metrics`] scores predictors with distance-adjusted and warp-corrected
//!   (shift, speedup, acceleration) metrics.
//! - [`pbt`] and [`bayes`] search over a period guess with populations of
//!   trend/periodicity/composer units.
//! - [`bench`] runs rosters of models over scenario suites and renders tables
//!   and plots; [`cli`] exposes all of it on the command line.

pub mod bayes;
pub mod bench;
pub mod cli;
pub mod drift;
pub mod error;
pub mod metrics;
pub mod nets;
pub mod pbt;
pub mod plot;
pub mod rng;
pub mod signals;

pub use error::{Error, Result};
