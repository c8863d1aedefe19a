//! Structured sparse coding with hierarchical and collaborative
//! hierarchical regularizers.
//!
//! The crate provides four convex coding models over a grouped
//! dictionary — Lasso, group Lasso, the hierarchical l2+l1 model
//! (HiLasso) and its collaborative multi-signal extension (C-HiLasso) —
//! together with the proximal machinery that solves them, a synthetic
//! data generator, evaluation metrics and JSON/CSV interchange.
//!
//! - [`model`]: dictionaries, group partitions, problems, reports and
//!   the model objectives.
//! - [`prox`]: soft-thresholding, vector shrinkage and the splitting
//!   solver for the per-group l1+l2 prox.
//! - [`solvers`]: the spectral proximal-gradient engine and the four
//!   model solvers, including the collaborative alternating scheme.
//! - [`synth`]: reproducible synthetic dictionaries, trials, noise and
//!   observation masks.
//! - [`metrics`]: coefficient/support/group errors, separation error
//!   and dictionary coherence.
//! - [`io`]: versioned JSON artifacts with atomic writes.

pub mod error;
pub mod io;
pub mod metrics;
pub mod model;
pub mod prox;
pub mod solvers;
pub mod synth;

pub use error::{Error, Result};
pub use model::{
    evaluate_objective, validate_partition, CodingProblem, CoefficientMatrix, Dictionary,
    GroupPartition, Model, SolverConfig, SolverReport,
};
pub use solvers::{solve, solve_chilasso, solve_group_lasso, solve_hilasso, solve_lasso};
pub use synth::{gen_dictionary, gen_trial, GroundTruth, SynthSpec};
