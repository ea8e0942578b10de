//! Label differential privacy for regression targets on the real line.
//!
//! The centerpiece is a two-level interval randomizer: a released label is
//! drawn with high density from a `2 zeta` neighborhood of the true label
//! and with density lower by `exp(-epsilon)` from the rest of a fixed
//! interval. The interval itself is tuned to the label distribution, which
//! is estimated from Laplace-randomized labels under a separate slice of the
//! budget, so the whole pipeline is label-DP end to end under sequential
//! composition.
//!
//! Module map:
//!
//! - [`step_density`]: piecewise-constant densities, the prior language
//!   everything else speaks.
//! - [`optimizer`]: exact maximization of the in-neighborhood mass over
//!   candidate intervals.
//! - [`mechanism`]: the randomizer itself (density, sampling, policies for
//!   labels outside the interval).
//! - [`additive`]: Laplace and Gaussian baselines, also used for the
//!   prior-estimation stage.
//! - [`prior`]: histogram prior estimation from randomized labels.
//! - [`pipeline`]: budget splitting, end-to-end privatization, error
//!   accounting.
//! - [`audit`]: analytic and sampling-based certification of the privacy
//!   claim.
//! - [`dataset`], [`seeding`]: CSV plumbing and deterministic per-row RNG
//!   streams.

pub mod additive;
pub mod audit;
pub mod dataset;
pub mod error;
pub mod mechanism;
pub mod optimizer;
pub mod pipeline;
pub mod prior;
pub mod seeding;
pub mod step_density;

pub use additive::{AdditiveNoiseSpec, NoiseKind};
pub use audit::{analytic_audit, analytic_audit_against, empirical_audit, AuditReport};
pub use error::{Error, Result};
pub use mechanism::{PolicyKind, RandomizerSpec};
pub use optimizer::{critical_points, gradient_f, objective_f, optimal_interval};
pub use optimizer::{CriticalPoints, Interval, OptimizationResult};
pub use pipeline::{privatize_dataset, PipelineReport, PrivacyBudgetSplit};
pub use prior::{estimate_prior, HistogramPlan, SigmaPolicy};
pub use step_density::StepDensity;
