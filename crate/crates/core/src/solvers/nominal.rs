use crate::error::{invalid, Result};
use crate::model::{CostVector, GroundStructure, Instance, Solution, TOL};
use crate::par::{map_slice, Execution};

use super::SolveResult;

/// `opt(c) = min_x c^t x`, solved exactly.
///
/// Paths use a backward dynamic program over the state graph; among optimal
/// paths the lexicographically smallest incidence vector is returned.
/// Selection takes the `p` cheapest items, lower index first on ties.
pub fn nominal_solve(structure: &GroundStructure, c: &CostVector) -> Result<SolveResult> {
    structure.validate()?;
    let n = structure.ground_size();
    if c.len() != n {
        return invalid(format!("cost vector has length {}, expected {n}", c.len()));
    }
    let costs = c.entries();
    let solution = match structure {
        GroundStructure::Selection { p, .. } => {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|a, b| costs[*a].total_cmp(&costs[*b]).then(a.cmp(b)));
            Solution::from_elements(n, order.into_iter().take(*p))
        }
        _ => {
            let g = structure.state_graph();
            let dist = g.distances_to_sink(costs);
            let mut picked = Vec::new();
            let mut u = g.source;
            while u != g.sink {
                // Walking forward, the largest optimal edge index at the first
                // divergence gives the lexicographically smallest incidence.
                let t = g.out[u]
                    .iter()
                    .filter(|t| {
                        let w = t.element.map_or(0.0, |e| costs[e]);
                        w + dist[t.to] <= dist[u] + TOL
                    })
                    .max_by_key(|t| t.element)
                    .expect("every state on a shortest path has an optimal successor");
                picked.extend(t.element);
                u = t.to;
            }
            Solution::from_elements(n, picked)
        }
    };
    let value = c.dot(&solution);
    Ok(SolveResult { solution, value, exact: true, labels_explored: 0 })
}

/// `opt(c_i)` for every scenario of `inst`.
pub fn per_scenario_optima(inst: &Instance, exec: Execution) -> Result<Vec<f64>> {
    map_slice(inst.scenarios.as_slice(), exec, |c| {
        nominal_solve(&inst.structure, c).map(|r| r.value)
    })
    .into_iter()
    .collect()
}
