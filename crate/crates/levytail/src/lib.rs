//! Tail probabilities of Lévy processes `X(t) = σB(t) + Z(t) − bt` on `[0,1]`
//! and of their running suprema.
//!
//! The crate has four layers:
//!
//! * [`jump_laws`] — the jump-distribution zoo (hazard-represented continuous
//!   laws, exact discrete laws on integer-scaled supports, discretization,
//!   Lévy-measure constructors) plus numeric tail-class probes.
//! * [`exact`] — deterministic log-space evaluation of compound-Poisson tail
//!   series, Gaussian-smoothed tails, barrier-restricted convolutions and the
//!   auxiliary series/integrals needed by the limit-theorem harnesses, all
//!   with certified truncation remainders.
//! * [`path_sim`] — exact-in-distribution Monte Carlo: Poisson jump skeleton,
//!   Gaussian increments, and conditional bridge maxima for the running
//!   supremum (no time discretization). Trials run over counter-based RNG
//!   substreams so results are reproducible for any worker count.
//! * [`experiments`] — harnesses that tie numeric evidence to each limit
//!   statement and emit structured reports.
//!
//! The `parallel` feature (on by default) runs Monte Carlo blocks on rayon;
//! without it the same block schedule runs sequentially, producing identical
//! estimates.

pub mod error;
pub mod exact;
pub mod experiments;
pub mod jump_laws;
pub mod logspace;
pub mod normal;
pub mod path_sim;
pub mod quad;

pub use error::{Error, Result};
pub use exact::LevyModel;
pub use jump_laws::JumpLaw;
