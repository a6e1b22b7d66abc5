//! Probe scheduling toolkit for silent-failure detection.
//!
//! A monitored system is modelled as a set of *elements* (e.g. network
//! links) with positive priorities and a set of *tests* (e.g. probe
//! paths), each of which detects a failure of any element it covers. A
//! schedule is an infinite sequence of tests; the cost of a schedule is
//! measured by how many probes it takes to detect a failure, aggregated
//! over elements and failure times in six ways (SUM and MAX families,
//! three time quantifications each).
//!
//! The crate provides:
//!
//! - [`instance`]: the scheduling instance, validation, weight
//!   normalization, and generators for structured instances (singletons,
//!   folded-Clos fabrics, combinatorial lower-bound families, random).
//! - [`memoryless`]: optimal memoryless probing frequencies via a convex
//!   program (SUM objectives) and a covering LP (MAX objectives), exact
//!   analytic evaluation, and the Kuhn-Tucker balance residual.
//! - [`evaluator`]: exact evaluation of all six objectives on cyclic
//!   deterministic schedules, the probabilistic-test extension,
//!   Monte-Carlo validation of memoryless schedules, and reverse-CDF
//!   export.
//! - [`tree`]: tree schedules: power-of-two frequency rounding, random
//!   prefix-free mappings of tests onto binary-tree nodes, level-N cyclic
//!   schedules, and the best-of-K randomized tree scheduler.
//! - [`kt`]: the Kuhn-Tucker greedy scheduler with cycle extraction,
//!   suited to SUM objectives and on-line priority changes.
//! - [`cover`]: the greedy set-cover baseline scheduler.
//! - [`oracle`]: brute-force ground truth on tiny instances (exhaustive
//!   deterministic optima, simplex grid search for memoryless optima).
//! - [`compare`]: the scheduler-by-objective comparison grid.
//! - [`cli`]: the `probesched` command-line entry points.
//!
//! Run `cargo run --example compare_schedulers` (or any other example in
//! `examples/`) for end-to-end walkthroughs of each capability.

// `!(x > 0.0)` deliberately treats NaN like a non-positive rate: an
// element whose probing rate is not demonstrably positive is uncovered.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod compare;
pub mod cover;
pub mod error;
pub mod evaluator;
pub mod instance;
pub mod kt;
pub mod memoryless;
pub mod oracle;
pub mod tree;

mod simplex;

pub use error::{Error, Result};
pub use evaluator::{CyclicSchedule, Objective, ObjectiveFamily, ObjectiveReport, Provenance};
pub use instance::{Instance, ValidationReport, WeightMode};
pub use memoryless::{Frequencies, SolveConfig};
pub use tree::TreeMapping;
