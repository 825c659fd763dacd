//! Solvers for the nominal, min-max and generalized min-max regret problems.
//!
//! - [`nominal_solve`]: exact single-scenario optimum.
//! - [`exact_minmax`] / [`exact_generalized_regret`]: Pareto label-setting
//!   with dominance and bound pruning.
//! - [`fptas_solve`]: the same label machinery with trimmed dominance,
//!   returning a `(1+ε̃)`-approximation.
//! - [`brute_force`]: exhaustive enumeration, the test oracle.

mod brute;
mod labels;
mod nominal;

pub use brute::{brute_force, brute_force_adversarial, enumerate_solutions, DEFAULT_ENUMERATION_CAP};
pub use labels::{exact_generalized_regret, exact_minmax, exact_solve, fptas_solve};
pub use nominal::{nominal_solve, per_scenario_optima};

use crate::error::Result;
use crate::model::{max_with_offsets, Instance, Solution};

/// Objective of a robust solve.
#[derive(Debug, Clone, PartialEq)]
pub enum Criterion {
    /// `max_i c_i^t x`.
    MinMax,
    /// `max_i (c_i^t x - offsets[i])`. Classic regret uses `offsets[i] = opt(c_i)`.
    GeneralizedRegret(Vec<f64>),
}

impl Criterion {
    pub fn offsets(&self) -> Option<&[f64]> {
        match self {
            Criterion::MinMax => None,
            Criterion::GeneralizedRegret(d) => Some(d),
        }
    }

    /// Objective of a vector of per-scenario values.
    pub fn objective(&self, values: &[f64]) -> f64 {
        max_with_offsets(values, self.offsets()).0
    }

    /// Objective of `x` on `inst`, with a feasibility check.
    pub fn evaluate(&self, inst: &Instance, x: &Solution) -> Result<f64> {
        self.validate(inst)?;
        inst.structure.check_feasible(x)?;
        Ok(self.objective(&inst.scenario_values(x)))
    }

    pub(crate) fn validate(&self, inst: &Instance) -> Result<()> {
        match self {
            Criterion::MinMax => Ok(()),
            Criterion::GeneralizedRegret(d) => inst.check_offsets(d),
        }
    }
}

/// Caps and switches for the label engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelOptions {
    /// Largest Pareto set allowed at a single state.
    pub max_labels_per_state: usize,
    /// Largest number of labels created over a whole run.
    pub max_total_labels: usize,
    /// Discard componentwise-dominated labels.
    pub dominance_pruning: bool,
    /// Compare each label with at most this many kept labels per state
    /// (`0` = all). Dominance is rare with many scenarios and the full
    /// pairwise check is quadratic.
    pub dominance_window: usize,
    /// Discard labels whose completion bound exceeds the incumbent value.
    pub bound_pruning: bool,
    /// Enumeration cap used by the selection fallback.
    pub enumeration_cap: u128,
}

impl Default for LabelOptions {
    fn default() -> Self {
        Self {
            max_labels_per_state: 500_000,
            max_total_labels: 4_000_000,
            dominance_pruning: true,
            dominance_window: 64,
            bound_pruning: true,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub solution: Solution,
    /// Objective value of `solution` under the solved criterion.
    pub value: f64,
    /// Whether `value` is the proven optimum.
    pub exact: bool,
    /// Labels (or enumerated solutions) touched; diagnostics only.
    pub labels_explored: usize,
}
