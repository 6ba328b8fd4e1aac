//! Extremum seeking and Nash equilibrium seeking through PDE actuation
//! channels: payoff games, channel solvers, probe synthesis, estimators,
//! compensating control laws, stability analysis and a scenario runner.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod control;
pub mod dither;
pub mod error;
pub mod estimate;
pub mod game;
pub mod harness;
pub mod pde_sim;

pub use error::{Error, Result};
