//! Bi-objective regularization paths for linear models and small neural
//! networks.
//!
//! The library treats training loss and the scaled l1 norm as two conflicting
//! objectives and approximates the full Pareto front ("regularization path")
//! of the pair. The pieces:
//!
//! - [`mpg`]: multiobjective proximal gradient descent — a corrector that
//!   converges to Pareto-critical points via a descent-direction subproblem
//!   solved through a one-dimensional dual search,
//! - [`continuation`]: predictor-corrector traversal of the front in both
//!   directions (gradient steps toward lower loss, shrinkage toward higher
//!   sparsity),
//! - [`baselines`]: the weighted-sum sweep the continuation method is
//!   compared against, plus an ISTA oracle for convex ground truth,
//! - [`metrics`]: hypervolume, max-gap spread, and budget counters,
//! - [`nn`] / [`data`]: a hand-written MLP with exact backprop and loaders
//!   for label-column CSV and IDX image data,
//! - [`experiment`]: config-driven runs with CSV/JSON artifacts.
//!
//! See the `examples/` directory for one runnable walkthrough per
//! capability, and the `regpath` binary for config-driven runs.

pub mod adam;
pub mod baselines;
pub mod continuation;
pub mod data;
pub mod error;
pub mod experiment;
pub mod front;
pub mod mat;
pub mod metrics;
pub mod mpg;
pub mod nn;
pub mod param;
pub mod problem;
pub mod problems;
pub mod prox;

pub use adam::AdamConfig;
pub use continuation::{continuation_run, ContinuationConfig, LegDirection, SampleMode};
pub use error::{Error, Result};
pub use front::{
    dominates, front_filter_nondominated, front_slope, Direction, FrontArchive, ParetoPoint,
};
pub use mat::Matrix;
pub use metrics::{hypervolume_2d, max_gap, Budget, ReferencePoint};
pub use mpg::{
    criticality_residual, direction_subproblem, mpg_solve, BatchMode, DirectionResult,
    MpgOutcome, SolverConfig,
};
pub use param::ParamVector;
pub use problem::{evaluate, BatchSpec, BiObjectiveProblem, SupervisedEval};
pub use problems::{random_lasso_instance, LassoProblem, MlpProblem};
pub use prox::{prox_scaled_l1, soft_threshold, ProxSpec};
