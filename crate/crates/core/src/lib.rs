//! Computing, bounding and certifying the number `k` of second-stage
//! policies that k-adaptability needs to match two-stage robust integer
//! optimization.
//!
//! * [`instance`] and [`generate`]: finite-scenario and affine instances,
//!   JSON I/O, the robust knapsack generator, the set-cover reduction and
//!   the built-in worked examples.
//! * [`oracle`]: exact per-scenario solving, `v*`, coverage sets, and
//!   brute-force `k_opt` / `opt(k)` for small instances.
//! * [`greedy`]: greedy min-k with an exact max-coverage subproblem.
//! * [`bounds`]: closed-form bounds on `k`, `η`, `ω` and approximation gaps.
//! * [`arrangement`]: exact enumeration of recourse-stable regions.
//! * [`sweep`]: seeded knapsack experiment sweeps emitting CSV.

pub mod arrangement;
pub mod bounds;
pub mod coverage;
pub mod error;
pub mod fourier_motzkin;
pub mod generate;
pub mod greedy;
pub mod instance;
pub mod oracle;
pub mod rational;
mod search;
pub mod sweep;

pub use coverage::CoverageSet;
pub use error::{Error, Result};
pub use instance::{AffineInstance, FiniteInstance, Instance, YSpace};
pub use rational::{Value, Q};
