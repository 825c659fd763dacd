//! Scenario aggregation for robust combinatorial optimization.
//!
//! Robust min-max and min-max regret problems over a finite scenario set
//! are approximated by averaging groups of scenarios and solving the much
//! smaller aggregated problem. A solution that is an `α`-approximation on an
//! aggregation whose largest group holds `r` scenarios is an `α·r`
//! approximation on the original set; choosing the level from a target
//! `ε` gives an `ε·K` guarantee.
//!
//! Modules:
//! - [`model`]: instances, scenarios, solutions and objective evaluation.
//! - [`aggregation`]: partitions, similarity matching, midpoint aggregation.
//! - [`solvers`]: nominal, exact Pareto-label, FPTAS and brute-force solvers.
//! - [`approx`]: the aggregation pipelines with certificates.
//! - [`instances`]: generators and the instance file format.
//! - [`experiment`]: the aggregation-level sweep with CSV and SVG output.

pub mod aggregation;
pub mod approx;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod instances;
pub mod model;
pub mod par;
pub mod solvers;

pub use error::{Error, Result};
pub use model::{CostVector, GroundStructure, Instance, ScenarioSet, Solution, TOL};
