use crate::error::{invalid, Error, Result};
use crate::model::{GroundStructure, Instance, Solution, TOL};

use super::{Criterion, SolveResult};

/// Default enumeration cap. A 10-layer width-4 layered graph has
/// `4^10 ≈ 1.05e6` paths.
pub const DEFAULT_ENUMERATION_CAP: u128 = 2_000_000;

fn check_cap(structure: &GroundStructure, cap: u128) -> Result<()> {
    let count = structure.state_graph().count_paths();
    if count > cap {
        return Err(Error::ResourceCap(format!(
            "{count} feasible solutions exceed the enumeration cap of {cap}"
        )));
    }
    Ok(())
}

/// Calls `visit(elements, values)` for every feasible solution, where
/// `values[j]` is the cost under scenario `j`.
fn for_each(inst: &Instance, mut visit: impl FnMut(&[usize], &[f64])) {
    struct Walk<'a> {
        g: crate::graph::StateGraph,
        live: Vec<bool>,
        inst: &'a Instance,
        k: usize,
        elements: Vec<usize>,
        // one row of k values per depth
        values: Vec<f64>,
    }

    fn dfs(w: &mut Walk<'_>, u: usize, depth: usize, visit: &mut dyn FnMut(&[usize], &[f64])) {
        let k = w.k;
        if u == w.g.sink {
            visit(&w.elements, &w.values[depth * k..(depth + 1) * k]);
            return;
        }
        for ti in 0..w.g.out[u].len() {
            let t = w.g.out[u][ti];
            if !w.live[t.to] {
                continue;
            }
            if w.values.len() < (depth + 2) * k {
                w.values.resize((depth + 2) * k, 0.0);
            }
            for j in 0..k {
                let add = t.element.map_or(0.0, |e| w.inst.scenarios.get(j).entries()[e]);
                w.values[(depth + 1) * k + j] = w.values[depth * k + j] + add;
            }
            w.elements.extend(t.element);
            dfs(w, t.to, depth + 1, visit);
            if t.element.is_some() {
                w.elements.pop();
            }
        }
    }

    let g = inst.structure.state_graph();
    let live = g.reaches_sink();
    let source = g.source;
    let k = inst.k();
    if !live[source] {
        return;
    }
    let mut w = Walk { g, live, inst, k, elements: Vec::new(), values: vec![0.0; k] };
    dfs(&mut w, source, 0, &mut visit);
}

/// Every feasible solution of `structure`, refusing when there are more than `cap`.
pub fn enumerate_solutions(structure: &GroundStructure, cap: u128) -> Result<Vec<Solution>> {
    structure.validate()?;
    check_cap(structure, cap)?;
    let n = structure.ground_size();
    let probe = Instance::new(
        structure.clone(),
        crate::model::ScenarioSet::new(vec![crate::model::CostVector::zeros(n)])?,
    )?;
    let mut out = Vec::new();
    for_each(&probe, |elements, _| out.push(Solution::from_elements(n, elements.iter().copied())));
    Ok(out)
}

fn search(
    inst: &Instance,
    criterion: &Criterion,
    cap: u128,
    secondary: Option<&dyn Fn(&Solution) -> f64>,
) -> Result<SolveResult> {
    criterion.validate(inst)?;
    check_cap(&inst.structure, cap)?;
    let n = inst.ground_size();
    let mut best = f64::INFINITY;
    let mut ties: Vec<(f64, Vec<usize>)> = Vec::new();
    let mut explored = 0usize;
    for_each(inst, |elements, values| {
        explored += 1;
        let v = criterion.objective(values);
        if v < best - TOL {
            best = v;
            ties.retain(|(w, _)| *w <= best + TOL);
        } else if v < best {
            best = v;
        }
        if v <= best + TOL {
            ties.push((v, elements.to_vec()));
        }
    });
    ties.retain(|(w, _)| *w <= best + TOL);
    let Some(pick) = ties
        .into_iter()
        .map(|(_, e)| Solution::from_elements(n, e))
        .map(|x| (secondary.map_or(0.0, |f| f(&x)), x))
        .max_by(|a, b| a.0.total_cmp(&b.0).then_with(|| b.1.cmp(&a.1)))
    else {
        return invalid("structure has no feasible solution");
    };
    let solution = pick.1;
    let value = criterion.objective(&inst.scenario_values(&solution));
    Ok(SolveResult { solution, value, exact: true, labels_explored: explored })
}

/// Exhaustive optimum; ties go to the lexicographically smallest incidence.
/// Refuses with [`Error::ResourceCap`] when the feasible set exceeds `cap`.
pub fn brute_force(inst: &Instance, criterion: &Criterion, cap: u128) -> Result<SolveResult> {
    search(inst, criterion, cap, None)
}

/// Exhaustive optimum where ties are broken toward the largest `secondary`
/// score, e.g. the true objective on an unaggregated scenario set.
pub fn brute_force_adversarial(
    inst: &Instance,
    criterion: &Criterion,
    cap: u128,
    secondary: &dyn Fn(&Solution) -> f64,
) -> Result<SolveResult> {
    search(inst, criterion, cap, Some(secondary))
}
