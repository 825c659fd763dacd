//! Pareto label-setting over the state graph.
//!
//! A label is the vector of accumulated costs of a partial solution, one
//! entry per scenario. Both objectives are a maximum of nondecreasing affine
//! functions of that vector, so a componentwise dominated label can never
//! complete to a strictly better solution. States are processed in
//! topological order; at each state the incoming labels are filtered by
//! dominance, optionally trimmed to one label per grid cell, and extended.
//!
//! A completion bound `max_j (label_j + dist_j(state) - d_j)`, where
//! `dist_j` is the exact remaining shortest distance under scenario `j`,
//! discards labels that cannot beat the best of a few cheap incumbent
//! solutions (the midpoint solution and every single-scenario optimum).

use std::collections::HashSet;

use crate::error::{invalid, Error, Result};
use crate::graph::StateGraph;
use crate::model::{CostVector, GroundStructure, Instance, Solution, TOL};

use super::brute::brute_force;
use super::nominal::{nominal_solve, per_scenario_optima};
use super::{Criterion, LabelOptions, SolveResult};
use crate::par::Execution;

#[derive(Debug, Clone, Copy)]
enum Trim {
    None,
    /// Cells `[m(1+δ)^b, m(1+δ)^{b+1})` per component; zero is its own cell.
    Geometric { ln_step: f64, min_positive: f64 },
    /// Cells `[bΔ, (b+1)Δ)` per component.
    Additive { step: f64 },
}

impl Trim {
    fn cell(self, v: f64) -> i64 {
        match self {
            Trim::None => unreachable!(),
            Trim::Geometric { ln_step, min_positive } => {
                if v <= 0.0 {
                    0
                } else {
                    1 + ((v / min_positive).ln() / ln_step).floor().max(0.0) as i64
                }
            }
            Trim::Additive { step } => (v / step).floor() as i64,
        }
    }
}

struct Arena {
    k: usize,
    costs: Vec<f64>,
    parent: Vec<usize>,
    element: Vec<Option<usize>>,
}

impl Arena {
    fn costs(&self, id: usize) -> &[f64] {
        &self.costs[id * self.k..(id + 1) * self.k]
    }

    fn len(&self) -> usize {
        self.parent.len()
    }

    fn solution(&self, mut id: usize, n: usize) -> Solution {
        let mut elements = Vec::new();
        while id != usize::MAX {
            elements.extend(self.element[id]);
            id = self.parent[id];
        }
        Solution::from_elements(n, elements)
    }
}

/// Keeps the labels not dominated by an earlier kept label. Labels are
/// scanned by ascending cost sum, so a dominator always precedes the labels
/// it dominates; equal vectors keep the first one. With `window > 0` each
/// label is only compared with the first `window` kept labels (the smallest
/// sums), which can leave some dominated labels in place but never removes
/// an undominated one.
fn pareto_filter(arena: &Arena, mut ids: Vec<usize>, window: usize) -> Vec<usize> {
    let sums: Vec<(f64, usize)> = ids.iter().map(|&id| (arena.costs(id).iter().sum(), id)).collect();
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.sort_by(|&a, &b| sums[a].0.total_cmp(&sums[b].0).then(sums[a].1.cmp(&sums[b].1)));
    let mut kept: Vec<usize> = Vec::with_capacity(ids.len());
    for i in order {
        let cand = arena.costs(ids[i]);
        let limit = if window == 0 { kept.len() } else { kept.len().min(window) };
        let dominated = kept[..limit]
            .iter()
            .any(|&k| arena.costs(k).iter().zip(cand).all(|(a, b)| a <= b));
        if !dominated {
            kept.push(ids[i]);
        }
    }
    ids.clear();
    kept
}

fn trim_filter(arena: &Arena, ids: Vec<usize>, trim: Trim) -> Vec<usize> {
    if matches!(trim, Trim::None) {
        return ids;
    }
    let mut seen: HashSet<Vec<i64>> = HashSet::with_capacity(ids.len());
    ids.into_iter()
        .filter(|&id| seen.insert(arena.costs(id).iter().map(|&v| trim.cell(v)).collect()))
        .collect()
}

fn incumbents(inst: &Instance, criterion: &Criterion) -> Result<(Solution, f64)> {
    let mut candidates = vec![nominal_solve(&inst.structure, &inst.scenarios.midpoint())?.solution];
    for c in inst.scenarios.iter() {
        candidates.push(nominal_solve(&inst.structure, c)?.solution);
    }
    Ok(best_of(inst, criterion, candidates))
}

/// Lowest objective, ties to the lexicographically smallest incidence.
fn best_of(inst: &Instance, criterion: &Criterion, candidates: Vec<Solution>) -> (Solution, f64) {
    let mut scored: Vec<(f64, Solution)> = candidates
        .into_iter()
        .map(|x| (criterion.objective(&inst.scenario_values(&x)), x))
        .collect();
    let best = scored.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    scored.retain(|s| s.0 <= best + TOL);
    scored.sort_by(|a, b| a.1.cmp(&b.1));
    let (v, x) = scored.swap_remove(0);
    (x, v)
}

fn run(inst: &Instance, criterion: &Criterion, trim: Trim, opts: &LabelOptions) -> Result<SolveResult> {
    let g: StateGraph = inst.structure.state_graph();
    let k = inst.k();
    let n = inst.ground_size();
    let zeros = vec![0.0; k];
    let offsets = criterion.offsets().unwrap_or(&zeros);

    // dist[state * k + j]: exact remaining cost under scenario j
    let per_scenario: Vec<Vec<f64>> = inst
        .scenarios
        .iter()
        .map(|c| g.distances_to_sink(c.entries()))
        .collect();
    let mut dist = vec![0.0; g.num_states() * k];
    for (j, d) in per_scenario.iter().enumerate() {
        for (u, v) in d.iter().enumerate() {
            dist[u * k + j] = *v;
        }
    }

    let (incumbent, ub) = incumbents(inst, criterion)?;
    let threshold = ub + TOL;

    let mut arena = Arena { k, costs: vec![0.0; k], parent: vec![usize::MAX], element: vec![None] };
    let mut sets: Vec<Vec<usize>> = vec![Vec::new(); g.num_states()];
    sets[g.source].push(0);
    let mut sink_labels = Vec::new();
    let mut scratch = vec![0.0; k];

    for u in 0..g.num_states() {
        if sets[u].is_empty() {
            continue;
        }
        let mut ids = std::mem::take(&mut sets[u]);
        if opts.dominance_pruning {
            ids = pareto_filter(&arena, ids, opts.dominance_window);
        }
        ids = trim_filter(&arena, ids, trim);
        if ids.len() > opts.max_labels_per_state {
            return Err(Error::ResourceCap(format!(
                "{} labels at one state exceed the cap of {}",
                ids.len(),
                opts.max_labels_per_state
            )));
        }
        if u == g.sink {
            sink_labels = ids;
            continue;
        }
        for &id in &ids {
            for t in &g.out[u] {
                let h = &dist[t.to * k..(t.to + 1) * k];
                if h[0].is_infinite() {
                    continue;
                }
                let base = arena.costs(id);
                let mut bound = f64::NEG_INFINITY;
                for j in 0..k {
                    let w = t.element.map_or(0.0, |e| inst.scenarios.get(j).entries()[e]);
                    scratch[j] = base[j] + w;
                    bound = bound.max(scratch[j] + h[j] - offsets[j]);
                }
                if opts.bound_pruning && bound > threshold {
                    continue;
                }
                if arena.len() >= opts.max_total_labels {
                    return Err(Error::ResourceCap(format!(
                        "label count exceeds the cap of {}",
                        opts.max_total_labels
                    )));
                }
                arena.costs.extend_from_slice(&scratch);
                arena.parent.push(id);
                arena.element.push(t.element);
                sets[t.to].push(arena.len() - 1);
            }
        }
    }

    let mut candidates: Vec<Solution> = sink_labels.iter().map(|&id| arena.solution(id, n)).collect();
    candidates.push(incumbent);
    let (solution, value) = best_of(inst, criterion, candidates);
    Ok(SolveResult {
        solution,
        value,
        exact: matches!(trim, Trim::None),
        labels_explored: arena.len(),
    })
}

/// Exact optimum of `criterion` on `inst`.
///
/// Ties are resolved to the lexicographically smallest incidence among the
/// labels that survive pruning. Selection instances whose label sets exceed
/// the caps fall back to exhaustive enumeration (which has its own cap);
/// path instances report [`Error::ResourceCap`].
pub fn exact_solve(inst: &Instance, criterion: &Criterion, opts: &LabelOptions) -> Result<SolveResult> {
    criterion.validate(inst)?;
    match run(inst, criterion, Trim::None, opts) {
        Err(Error::ResourceCap(_)) if matches!(inst.structure, GroundStructure::Selection { .. }) => {
            brute_force(inst, criterion, opts.enumeration_cap)
        }
        other => other,
    }
}

/// Exact min-max optimum `min_x max_i c_i^t x`.
pub fn exact_minmax(inst: &Instance, opts: &LabelOptions) -> Result<SolveResult> {
    exact_solve(inst, &Criterion::MinMax, opts)
}

/// Exact optimum of `min_x max_i (c_i^t x - offsets[i])`.
pub fn exact_generalized_regret(inst: &Instance, offsets: &[f64], opts: &LabelOptions) -> Result<SolveResult> {
    exact_solve(inst, &Criterion::GeneralizedRegret(offsets.to_vec()), opts)
}

/// `(1+ε̃)`-approximation of `criterion` by trimmed label-setting.
///
/// Min-max merges labels lying in the same geometric cell of ratio `1+δ`
/// with `δ = min(ε̃/(2H), ln(1+ε̃)/H)`, `H` the largest solution size; the
/// per-merge error compounds to at most `(1+δ)^H <= 1+ε̃`.
///
/// Generalized regret requires `offsets[i] <= opt(c_i)`. Then the midpoint
/// solution's value `U` satisfies `U <= K·OPT`, and labels are merged on an
/// additive grid `Δ = ε̃·L/H` with `L = max(U/K, max_i(opt(c_i) - offsets[i]))`,
/// so the accumulated error is at most `ε̃·OPT`.
pub fn fptas_solve(
    inst: &Instance,
    eps_tilde: f64,
    criterion: &Criterion,
    opts: &LabelOptions,
) -> Result<SolveResult> {
    if !(eps_tilde.is_finite() && eps_tilde > 0.0) {
        return invalid(format!("epsilon_tilde must be > 0, got {eps_tilde}"));
    }
    criterion.validate(inst)?;
    if inst.k() == 1 {
        return exact_solve(inst, criterion, opts);
    }
    let h = inst.structure.max_solution_size() as f64;
    let trim = match criterion {
        Criterion::MinMax => {
            let Some(min_positive) = inst.scenarios.min_positive_cost() else {
                return exact_solve(inst, criterion, opts);
            };
            let delta = (eps_tilde / (2.0 * h)).min(eps_tilde.ln_1p() / h);
            Trim::Geometric { ln_step: delta.ln_1p(), min_positive }
        }
        Criterion::GeneralizedRegret(d) => {
            let optima = per_scenario_optima(inst, Execution::Sequential)?;
            if let Some(i) = (0..d.len()).find(|&i| d[i] > optima[i] + TOL) {
                return invalid(format!(
                    "offset {i} = {} exceeds opt(c_{i}) = {}; the regret FPTAS needs offsets <= optima",
                    d[i], optima[i]
                ));
            }
            let mid = nominal_solve(&inst.structure, &CostVector::mean(inst.scenarios.iter()))?.solution;
            let upper = criterion.objective(&inst.scenario_values(&mid));
            if upper <= TOL {
                return Ok(SolveResult { solution: mid, value: upper, exact: true, labels_explored: 0 });
            }
            let spread = (0..d.len()).map(|i| optima[i] - d[i]).fold(0.0, f64::max);
            let lower = (upper / inst.k() as f64).max(spread);
            Trim::Additive { step: eps_tilde * lower / h }
        }
    };
    let mut result = run(inst, criterion, trim, opts)?;
    result.exact = false;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gen_example1, gen_layered, gen_tight};
    use crate::model::ScenarioSet;
    use crate::solvers::brute_force;

    const CAP: u128 = 2_000_000;

    #[test]
    fn example1_minmax_and_regret() {
        let inst = gen_example1();
        let r = exact_minmax(&inst, &LabelOptions::default()).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.solution.elements().collect::<Vec<_>>(), vec![1]);
        let r = exact_generalized_regret(&inst, &[0.0; 4], &LabelOptions::default()).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.solution.elements().collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn example1_aggregated_offsets() {
        // top (2,0), middle (1,1), bottom (2,0)
        let agg = gen_example1()
            .with_scenarios(ScenarioSet::from_rows(vec![vec![2.0, 1.0, 2.0], vec![0.0, 1.0, 0.0]]).unwrap())
            .unwrap();
        let naive = exact_generalized_regret(&agg, &[1.0, 0.0], &LabelOptions::default()).unwrap();
        assert_eq!(naive.value, 1.0);
        let general = exact_generalized_regret(&agg, &[0.0, 0.0], &LabelOptions::default()).unwrap();
        assert_eq!(general.value, 1.0);
        assert_eq!(general.solution.elements().collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn tight_instance_optimum_is_one() {
        for k in 0..=4 {
            for ell in 0..=k {
                let r = exact_minmax(&gen_tight(k, ell).unwrap(), &LabelOptions::default()).unwrap();
                assert_eq!(r.value, 1.0, "k={k} ell={ell}");
            }
        }
    }

    #[test]
    fn single_scenario_matches_nominal() {
        let inst = gen_layered(4, 3, 1, 5).unwrap();
        let r = exact_minmax(&inst, &LabelOptions::default()).unwrap();
        let nominal = nominal_solve(&inst.structure, inst.scenarios.get(0)).unwrap();
        assert!((r.value - nominal.value).abs() <= TOL);
        let f = fptas_solve(&inst, 1.0, &Criterion::MinMax, &LabelOptions::default()).unwrap();
        assert!((f.value - nominal.value).abs() <= TOL);
        assert!(f.exact);
    }

    #[test]
    fn pruning_does_not_change_the_optimum() {
        let bare = LabelOptions { dominance_pruning: false, bound_pruning: false, ..LabelOptions::default() };
        for seed in 0..20 {
            let inst = gen_layered(4, 3, 4, seed).unwrap();
            let full = exact_minmax(&inst, &LabelOptions::default()).unwrap();
            let unpruned = exact_minmax(&inst, &bare).unwrap();
            assert!((full.value - unpruned.value).abs() <= TOL);
            assert!(full.labels_explored <= unpruned.labels_explored);
        }
    }

    #[test]
    fn fptas_within_factor() {
        for seed in 0..10 {
            let inst = gen_layered(5, 3, 4, 100 + seed).unwrap();
            let exact = brute_force(&inst, &Criterion::MinMax, CAP).unwrap().value;
            for eps in [1.0, 0.5, 0.1] {
                let f = fptas_solve(&inst, eps, &Criterion::MinMax, &LabelOptions::default()).unwrap();
                assert!(f.value >= exact - TOL);
                assert!(f.value <= (1.0 + eps) * exact + TOL);
                assert!(!f.exact);
            }
        }
    }

    #[test]
    fn fptas_rejects_bad_input() {
        let inst = gen_example1();
        assert!(fptas_solve(&inst, 0.0, &Criterion::MinMax, &LabelOptions::default()).is_err());
        assert!(fptas_solve(&inst, -1.0, &Criterion::MinMax, &LabelOptions::default()).is_err());
        let too_big = Criterion::GeneralizedRegret(vec![5.0, 0.0, 0.0, 0.0]);
        assert!(fptas_solve(&inst, 1.0, &too_big, &LabelOptions::default()).is_err());
    }

    #[test]
    fn label_cap_is_a_hard_failure_on_paths() {
        let inst = gen_layered(6, 4, 8, 3).unwrap();
        let tiny = LabelOptions { max_labels_per_state: 1, bound_pruning: false, ..LabelOptions::default() };
        assert!(matches!(exact_minmax(&inst, &tiny), Err(Error::ResourceCap(_))));
    }

    #[test]
    fn selection_falls_back_to_enumeration() {
        let inst = crate::instances::gen_selection(8, 3, 4, 9).unwrap();
        let tiny = LabelOptions { max_labels_per_state: 1, bound_pruning: false, ..LabelOptions::default() };
        let r = exact_minmax(&inst, &tiny).unwrap();
        let oracle = brute_force(&inst, &Criterion::MinMax, CAP).unwrap();
        assert!((r.value - oracle.value).abs() <= TOL);
    }
}
