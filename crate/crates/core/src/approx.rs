//! The `(εK)`-approximation pipelines.
//!
//! Pick the level `ℓ' = min(⌈log2(1/ε) + 1⌉, ⌈log2 K⌉)`, aggregate to at most
//! `2^ℓ'` scenarios, solve the aggregate with an `α`-approximate sub-solver
//! and certify `α · r` where `r` is the largest group size. With `K` a power
//! of two and the default `α = 2` this is `2K/2^ℓ' <= εK`.

use crate::aggregation::{aggregate_to_level, AggregatedProblem, AggregationMode, Scheme};
use crate::error::{invalid, Result};
use crate::model::{Instance, Solution, TOL};
use crate::par::Execution;
use crate::solvers::{
    brute_force_adversarial, exact_solve, fptas_solve, per_scenario_optima, Criterion, LabelOptions,
    SolveResult,
};

/// How the aggregated problem is solved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SubSolver {
    /// Exact Pareto-label solve, `α = 1`.
    Exact,
    /// Trimmed label solve, `α = 1 + ε̃`.
    Fptas { eps_tilde: f64 },
    /// Exhaustive solve of the aggregate; among its optima, the one that is
    /// worst on the original scenarios. `α = 1`. Exhibits how bad an
    /// optimal aggregated solution can be.
    Adversarial,
}

impl Default for SubSolver {
    fn default() -> Self {
        SubSolver::Fptas { eps_tilde: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproxOptions {
    pub epsilon: f64,
    pub scheme: Scheme,
    pub sub_solver: SubSolver,
    /// Replaces the level chosen from `epsilon`.
    pub level_override: Option<usize>,
    pub labels: LabelOptions,
    /// Used for the per-scenario optima in regret mode.
    pub execution: Execution,
}

impl Default for ApproxOptions {
    fn default() -> Self {
        Self {
            epsilon: 1.0,
            scheme: Scheme::Consecutive,
            sub_solver: SubSolver::default(),
            level_override: None,
            labels: LabelOptions::default(),
            execution: Execution::default(),
        }
    }
}

/// Approximation certificate for a returned solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    /// Certified ratio `α · r`.
    pub guarantee_factor: f64,
    /// Objective of the solution on the original scenarios.
    pub achieved_value: f64,
    /// Aggregated value divided by `α`; at most the true optimum.
    pub lower_bound: f64,
    pub level_used: usize,
    pub scheme: Scheme,
    pub sub_solver_alpha: f64,
    /// Largest group size `r`.
    pub group_factor: usize,
    pub scenario_count: usize,
    /// Sub-solver value on the aggregated problem.
    pub aggregated_value: f64,
}

impl Certificate {
    /// `achieved / lower_bound`, or 1 when both are zero.
    pub fn certified_ratio(&self) -> f64 {
        if self.achieved_value <= TOL && self.lower_bound <= TOL {
            1.0
        } else {
            self.achieved_value / self.lower_bound
        }
    }
}

/// `min(⌈log2(1/ε) + 1⌉, ⌈log2 K⌉)`.
pub fn choose_level(epsilon: f64, k: usize) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return invalid(format!("epsilon must be in (0, 1], got {epsilon}"));
    }
    if k == 0 {
        return invalid("scenario count must be >= 1");
    }
    let raw = ((1.0 / epsilon).log2() + 1.0 - 1e-12).ceil().max(0.0) as usize;
    Ok(raw.min(crate::model::ceil_log2(k)))
}

fn pipeline(
    inst: &Instance,
    opts: &ApproxOptions,
    mode: AggregationMode,
) -> Result<(Solution, Certificate)> {
    let mut level = choose_level(opts.epsilon, inst.k())?;
    if let Some(forced) = opts.level_override {
        level = forced;
    }
    let (optima, true_criterion) = match mode {
        AggregationMode::MinMax => (None, Criterion::MinMax),
        AggregationMode::Regret => {
            let opt = per_scenario_optima(inst, opts.execution)?;
            (Some(opt.clone()), Criterion::GeneralizedRegret(opt))
        }
    };
    let agg: AggregatedProblem = aggregate_to_level(inst, level, opts.scheme, mode, optima.as_deref())?;
    let agg_criterion = agg.criterion();
    let (result, alpha): (SolveResult, f64) = match opts.sub_solver {
        SubSolver::Exact => (exact_solve(&agg.instance, &agg_criterion, &opts.labels)?, 1.0),
        SubSolver::Fptas { eps_tilde } => {
            let r = fptas_solve(&agg.instance, eps_tilde, &agg_criterion, &opts.labels)?;
            let alpha = if r.exact { 1.0 } else { 1.0 + eps_tilde };
            (r, alpha)
        }
        SubSolver::Adversarial => {
            let worst = |x: &Solution| true_criterion.objective(&inst.scenario_values(x));
            let r = brute_force_adversarial(&agg.instance, &agg_criterion, opts.labels.enumeration_cap, &worst)?;
            (r, 1.0)
        }
    };
    let achieved_value = true_criterion.evaluate(inst, &result.solution)?;
    let certificate = Certificate {
        guarantee_factor: alpha * agg.factor as f64,
        achieved_value,
        lower_bound: result.value / alpha,
        level_used: level,
        scheme: opts.scheme,
        sub_solver_alpha: alpha,
        group_factor: agg.factor,
        scenario_count: agg.scenario_count(),
        aggregated_value: result.value,
    };
    Ok((result.solution, certificate))
}

/// Min-max approximation by aggregation.
pub fn approx_minmax(inst: &Instance, opts: &ApproxOptions) -> Result<(Solution, Certificate)> {
    pipeline(inst, opts, AggregationMode::MinMax)
}

/// Min-max regret approximation: aggregates scenarios together with the
/// means of their original optima and solves the generalized regret problem.
pub fn approx_regret(inst: &Instance, opts: &ApproxOptions) -> Result<(Solution, Certificate)> {
    pipeline(inst, opts, AggregationMode::Regret)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gen_example1, gen_layered, gen_tight};
    use crate::solvers::{brute_force, DEFAULT_ENUMERATION_CAP};

    #[test]
    fn level_choice() {
        assert_eq!(choose_level(0.5, 16).unwrap(), 2);
        assert_eq!(choose_level(1.0, 16).unwrap(), 1);
        assert_eq!(choose_level(1.0 / 16.0, 16).unwrap(), 4);
        assert_eq!(choose_level(1.0 / 3.0, 64).unwrap(), 3);
        assert_eq!(choose_level(0.5, 1).unwrap(), 0);
        assert!(choose_level(0.0, 16).is_err());
        assert!(choose_level(1.5, 16).is_err());
        assert!(choose_level(f64::NAN, 16).is_err());
    }

    #[test]
    fn example1_minmax_exact() {
        let opts = ApproxOptions { sub_solver: SubSolver::Exact, ..ApproxOptions::default() };
        let (x, cert) = approx_minmax(&gen_example1(), &opts).unwrap();
        assert_eq!(cert.guarantee_factor, 2.0);
        assert_eq!(cert.level_used, 1);
        assert!(cert.achieved_value <= 2.0 * 1.0 + TOL);
        assert!(gen_example1().structure.is_feasible(&x));
    }

    #[test]
    fn example1_regret_takes_middle() {
        let opts = ApproxOptions { sub_solver: SubSolver::Exact, ..ApproxOptions::default() };
        let (x, cert) = approx_regret(&gen_example1(), &opts).unwrap();
        assert_eq!(x.elements().collect::<Vec<_>>(), vec![1]);
        assert_eq!(cert.achieved_value, 1.0);
        assert_eq!(cert.guarantee_factor, 2.0);
    }

    #[test]
    fn single_scenario_guarantee_one() {
        let inst = gen_layered(3, 3, 1, 8).unwrap();
        for eps in [0.1, 1.0] {
            let opts = ApproxOptions { epsilon: eps, ..ApproxOptions::default() };
            let (_, cert) = approx_minmax(&inst, &opts).unwrap();
            assert_eq!(cert.guarantee_factor, 1.0);
            let (_, cert) = approx_regret(&inst, &opts).unwrap();
            assert_eq!(cert.guarantee_factor, 1.0);
            assert!(cert.achieved_value.abs() <= TOL);
        }
    }

    #[test]
    fn tight_instance_adversarial_gap() {
        let inst = gen_tight(4, 2).unwrap();
        let opts = ApproxOptions {
            epsilon: 0.5,
            sub_solver: SubSolver::Adversarial,
            ..ApproxOptions::default()
        };
        let (_, cert) = approx_minmax(&inst, &opts).unwrap();
        let opt = brute_force(&inst, &Criterion::MinMax, DEFAULT_ENUMERATION_CAP).unwrap().value;
        assert_eq!(cert.level_used, 2);
        assert_eq!(cert.achieved_value / opt, 4.0);
    }

    #[test]
    fn default_guarantee_is_eps_k() {
        let inst = gen_layered(4, 3, 16, 77).unwrap();
        let opts = ApproxOptions { epsilon: 0.5, ..ApproxOptions::default() };
        let (_, cert) = approx_minmax(&inst, &opts).unwrap();
        assert!(cert.guarantee_factor <= 0.5 * 16.0);
        assert!(cert.lower_bound <= cert.achieved_value + TOL);
    }
}
