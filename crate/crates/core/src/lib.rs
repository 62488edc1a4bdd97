//! A laboratory for stochastic convex optimization with strongly convex,
//! Lipschitz losses.
//!
//! The crate provides
//! - domain types: losses, feasible sets, data distributions and exact
//!   population risks for finite supports ([`problem`]),
//! - solvers: exact ERM and projected (sub)gradient descent ([`solvers`]),
//! - closed-form evaluators for the stability and excess-risk bounds
//!   ([`bounds`]),
//! - Monte Carlo harnesses measuring stability, the Bernstein condition,
//!   excess-risk scaling and lower-tail concentration ([`empirics`]).

pub mod bounds;
pub mod distribution;
pub mod domain;
pub mod empirics;
pub mod error;
pub mod loss;
pub mod point;
pub mod problem;
pub mod rng;
pub mod solvers;

pub use distribution::{Atom, DataDistribution};
pub use domain::ConvexDomain;
pub use error::{Error, Result};
pub use loss::{Datum, LossKind, LossModel};
pub use point::Point;
pub use problem::{Dataset, ProblemInstance, ProblemSpec};
pub use solvers::{Algorithm, SolverResult, StepRule, Steps};
