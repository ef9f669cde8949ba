//! Coral Reefs Optimization with Substrate Layers (CRO-SL) and its
//! probabilistic ensembles.
//!
//! A reef is a grid of candidate solutions (corals). Each generation the
//! corals reproduce through a bank of search operators (substrates), the
//! offspring compete for reef cells, and the worst corals are occasionally
//! removed. Three policies decide which substrate a coral uses:
//!
//! * [`AssignmentMode::Static`]: the reef is split into fixed regions, one per
//!   substrate (classic CRO-SL).
//! * [`AssignmentMode::UniformProbabilistic`]: every coral draws a substrate
//!   tag uniformly at random each generation (PCRO-SL).
//! * [`AssignmentMode::Dynamic`]: tags are drawn from a distribution that is
//!   periodically refit with a softmax over per-substrate credit (DPCRO-SL).
//!
//! The crate also ships the benchmark suite, a wind-farm layout objective and
//! an experiment harness that drives repeated seeded runs and writes CSV
//! traces.

// Negated comparisons are used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmark;
mod error;
pub mod harness;
pub mod local_search;
pub mod objective;
pub mod operators;
pub mod probability;
pub mod reef;
pub mod windfarm;

pub use error::{Error, Result};
pub use objective::BoundedObjective;
pub use operators::{OperatorParams, Substrate};
pub use probability::{Aggregate, AssignmentMode, AssignmentPolicy, Metric, ProbabilityState};
pub use reef::{Coral, GenerationStats, Horizon, Optimizer, Reef, ReefParams};
