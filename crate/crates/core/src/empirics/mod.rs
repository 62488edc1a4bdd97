//! Monte Carlo harnesses for the quantities the theory bounds.
//!
//! Every harness draws its replications from seeds derived from one base
//! seed and the replication index, runs them through [`run_tasks`], and
//! reduces the results in index order, so outputs do not depend on the
//! number of worker threads.

mod bernstein;
mod concentration;
mod harness;
mod scaling;
mod stability;
pub mod stats;

pub use bernstein::{bernstein_terms, verify_bernstein, BernsteinReport};
pub use concentration::{
    selfbounding_mc_validation, AdditiveUniformCase, ConcentrationReport, ErmSecondMomentCase,
    SelfBoundedCase, SelfBoundingDraw, TailRow,
};
pub use harness::{run_tasks, Parallelism};
pub use scaling::{
    excess_risk_experiment, fit_log_log, fit_quantile_slope, fit_scaling_slope,
    generalization_gap_experiment, run_replications, BootstrapConfig, ExperimentPlan, GapExperiment,
    GapReport, QuantileCurve, ReplicationRecord, ScalingExperiment, ScalingReport, SlopeFit, EXTRA_DELTAS,
};
pub use stability::{estimate_stability, StabilityEstimate};
