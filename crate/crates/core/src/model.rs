//! Domain types and objective evaluation.
//!
//! Scenario indices and ground-set element indices are zero-based throughout
//! the library. Costs are `f64`; every comparison that decides an objective
//! or a bound uses the absolute tolerance [`TOL`].

use crate::error::{invalid, Result};
use crate::graph::StateGraph;

/// Absolute tolerance used for all objective comparisons.
pub const TOL: f64 = 1e-9;

/// Costs per ground-set element for one scenario. Entries are finite and
/// nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct CostVector(Vec<f64>);

impl CostVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if let Some((e, v)) = entries
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return invalid(format!("cost entry {e} is {v}; costs must be finite and >= 0"));
        }
        Ok(Self(entries))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Inner product with an incidence vector.
    pub fn dot(&self, x: &Solution) -> f64 {
        x.elements().map(|e| self.0[e]).sum()
    }

    /// Componentwise mean of `vectors`, which must be non-empty and share a length.
    pub fn mean<'a>(vectors: impl IntoIterator<Item = &'a CostVector>) -> CostVector {
        let mut acc: Vec<f64> = Vec::new();
        let mut count = 0usize;
        for v in vectors {
            if acc.is_empty() {
                acc = vec![0.0; v.len()];
            }
            for (a, c) in acc.iter_mut().zip(&v.0) {
                *a += c;
            }
            count += 1;
        }
        assert!(count > 0, "mean of an empty set of cost vectors");
        let k = count as f64;
        CostVector(acc.into_iter().map(|a| a / k).collect())
    }

    /// Euclidean distance between two cost vectors of equal length.
    pub fn distance(&self, other: &CostVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// The uncertainty set: `K >= 1` cost vectors of a common length.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSet {
    scenarios: Vec<CostVector>,
}

impl ScenarioSet {
    pub fn new(scenarios: Vec<CostVector>) -> Result<Self> {
        let Some(first) = scenarios.first() else {
            return invalid("scenario set must contain at least one scenario");
        };
        let n = first.len();
        if let Some(i) = scenarios.iter().position(|c| c.len() != n) {
            return invalid(format!(
                "scenario {i} has {} entries, expected {n}",
                scenarios[i].len()
            ));
        }
        Ok(Self { scenarios })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(rows.into_iter().map(CostVector::new).collect::<Result<_>>()?)
    }

    /// Number of scenarios `K`.
    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    /// Ground-set size `n`.
    pub fn dim(&self) -> usize {
        self.scenarios[0].len()
    }

    pub fn get(&self, i: usize) -> &CostVector {
        &self.scenarios[i]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, CostVector> {
        self.scenarios.iter()
    }

    pub fn as_slice(&self) -> &[CostVector] {
        &self.scenarios
    }

    /// The midpoint scenario: the componentwise mean of all scenarios.
    pub fn midpoint(&self) -> CostVector {
        CostVector::mean(&self.scenarios)
    }

    /// `ceil(log2 K)`, the number of halving steps down to one scenario.
    pub fn levels(&self) -> usize {
        ceil_log2(self.len())
    }

    /// Smallest strictly positive cost over all scenarios, if any.
    pub fn min_positive_cost(&self) -> Option<f64> {
        self.scenarios
            .iter()
            .flat_map(|c| c.entries().iter().copied())
            .filter(|v| *v > 0.0)
            .min_by(f64::total_cmp)
    }
}

pub(crate) fn ceil_log2(k: usize) -> usize {
    assert!(k >= 1);
    (usize::BITS - (k - 1).leading_zeros()) as usize
}

/// The feasible set `X`.
///
/// Edge indexing of `LayeredPath` (layers `L`, width `w`): the `w` source
/// edges come first, then for each consecutive layer pair the `w²` edges in
/// (from-node, to-node) order, then the `w` edges into the sink.
/// `ParallelPaths` is a set of internally disjoint s-t paths with the given
/// edge counts, indexed path by path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroundStructure {
    LayeredPath { layers: usize, width: usize },
    ParallelPaths { lengths: Vec<usize> },
    Selection { n: usize, p: usize },
}

impl GroundStructure {
    pub fn validate(&self) -> Result<()> {
        match self {
            GroundStructure::LayeredPath { layers, width } => {
                if *layers == 0 || *width == 0 {
                    return invalid("layered graph needs at least one layer of width >= 1");
                }
            }
            GroundStructure::ParallelPaths { lengths } => {
                if lengths.is_empty() || lengths.contains(&0) {
                    return invalid("parallel paths need at least one path, each of length >= 1");
                }
            }
            GroundStructure::Selection { n, p } => {
                if *p == 0 || p > n {
                    return invalid(format!("selection needs 1 <= p <= n, got p={p}, n={n}"));
                }
            }
        }
        Ok(())
    }

    /// Ground-set size `n`.
    pub fn ground_size(&self) -> usize {
        match self {
            GroundStructure::LayeredPath { layers, width } => {
                2 * width + (layers - 1) * width * width
            }
            GroundStructure::ParallelPaths { lengths } => lengths.iter().sum(),
            GroundStructure::Selection { n, .. } => *n,
        }
    }

    /// Largest number of ground-set elements in any feasible solution.
    pub fn max_solution_size(&self) -> usize {
        match self {
            GroundStructure::LayeredPath { layers, .. } => layers + 1,
            GroundStructure::ParallelPaths { lengths } => lengths.iter().copied().max().unwrap_or(0),
            GroundStructure::Selection { p, .. } => *p,
        }
    }

    pub fn state_graph(&self) -> StateGraph {
        StateGraph::for_structure(self)
    }

    /// Checks that `x` is the incidence vector of a feasible solution.
    pub fn check_feasible(&self, x: &Solution) -> Result<()> {
        let n = self.ground_size();
        if x.len() != n {
            return invalid(format!("solution has length {}, ground set has {n}", x.len()));
        }
        match self {
            GroundStructure::Selection { p, .. } => {
                let ones = x.count();
                if ones != *p {
                    return invalid(format!("selection must pick exactly {p} items, got {ones}"));
                }
                Ok(())
            }
            _ => {
                let g = self.state_graph();
                let mut node = g.source;
                let mut steps = 0usize;
                while node != g.sink {
                    let mut chosen = g.out[node]
                        .iter()
                        .filter(|t| t.element.is_some_and(|e| x.contains(e)));
                    let (Some(t), None) = (chosen.next(), chosen.next()) else {
                        return invalid("selected edges do not form a single s-t path");
                    };
                    node = t.to;
                    steps += 1;
                }
                if steps != x.count() {
                    return invalid("selected edges contain edges off the s-t path");
                }
                Ok(())
            }
        }
    }

    pub fn is_feasible(&self, x: &Solution) -> bool {
        self.check_feasible(x).is_ok()
    }
}

/// Binary incidence vector over the ground set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Solution {
    incidence: Vec<bool>,
}

impl Solution {
    pub fn from_incidence(incidence: Vec<bool>) -> Self {
        Self { incidence }
    }

    pub fn from_elements(n: usize, elements: impl IntoIterator<Item = usize>) -> Self {
        let mut incidence = vec![false; n];
        for e in elements {
            incidence[e] = true;
        }
        Self { incidence }
    }

    pub fn incidence(&self) -> &[bool] {
        &self.incidence
    }

    pub fn len(&self) -> usize {
        self.incidence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.incidence.is_empty()
    }

    pub fn contains(&self, e: usize) -> bool {
        self.incidence[e]
    }

    pub fn count(&self) -> usize {
        self.incidence.iter().filter(|b| **b).count()
    }

    /// Indices of the selected elements in increasing order.
    pub fn elements(&self) -> impl Iterator<Item = usize> + '_ {
        self.incidence
            .iter()
            .enumerate()
            .filter_map(|(e, b)| b.then_some(e))
    }

    /// `0`/`1` string, one character per element.
    pub fn bit_string(&self) -> String {
        self.incidence.iter().map(|b| if *b { '1' } else { '0' }).collect()
    }
}

/// Largest `values[i] - offsets[i]`; returns the value and the lowest index
/// attaining it.
pub fn max_with_offsets(values: &[f64], offsets: Option<&[f64]>) -> (f64, usize) {
    let mut best = f64::NEG_INFINITY;
    let mut arg = 0;
    for (i, v) in values.iter().enumerate() {
        let r = v - offsets.map_or(0.0, |d| d[i]);
        if r > best {
            best = r;
            arg = i;
        }
    }
    (best, arg)
}

/// An uncertain problem: a ground structure with a scenario set.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub structure: GroundStructure,
    pub scenarios: ScenarioSet,
    pub name: Option<String>,
    pub seed: Option<u64>,
    pub generator: Option<String>,
}

impl Instance {
    pub fn new(structure: GroundStructure, scenarios: ScenarioSet) -> Result<Self> {
        structure.validate()?;
        let n = structure.ground_size();
        if scenarios.dim() != n {
            return invalid(format!(
                "scenario vectors have length {}, structure has {n} elements",
                scenarios.dim()
            ));
        }
        Ok(Self {
            structure,
            scenarios,
            name: None,
            seed: None,
            generator: None,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    /// Same structure and metadata, different scenarios.
    pub fn with_scenarios(&self, scenarios: ScenarioSet) -> Result<Self> {
        let mut inst = Instance::new(self.structure.clone(), scenarios)?;
        inst.name = self.name.clone();
        inst.seed = self.seed;
        inst.generator = self.generator.clone();
        Ok(inst)
    }

    /// Number of scenarios `K`.
    pub fn k(&self) -> usize {
        self.scenarios.len()
    }

    pub fn ground_size(&self) -> usize {
        self.structure.ground_size()
    }

    /// `c_i^t x`.
    pub fn evaluate_scenario(&self, x: &Solution, i: usize) -> Result<f64> {
        self.structure.check_feasible(x)?;
        if i >= self.k() {
            return invalid(format!("scenario index {i} out of range 0..{}", self.k()));
        }
        Ok(self.scenarios.get(i).dot(x))
    }

    /// All `K` scenario values of `x`, without a feasibility check.
    pub fn scenario_values(&self, x: &Solution) -> Vec<f64> {
        self.scenarios.iter().map(|c| c.dot(x)).collect()
    }

    /// Worst-case value of `x` and the lowest scenario index attaining it.
    pub fn evaluate_max(&self, x: &Solution) -> Result<(f64, usize)> {
        self.structure.check_feasible(x)?;
        Ok(max_with_offsets(&self.scenario_values(x), None))
    }

    /// `max_i (c_i^t x - offsets[i])` and its lowest argmax.
    pub fn evaluate_generalized_regret(&self, x: &Solution, offsets: &[f64]) -> Result<(f64, usize)> {
        self.check_offsets(offsets)?;
        self.structure.check_feasible(x)?;
        Ok(max_with_offsets(&self.scenario_values(x), Some(offsets)))
    }

    pub(crate) fn check_offsets(&self, offsets: &[f64]) -> Result<()> {
        if offsets.len() != self.k() {
            return invalid(format!(
                "expected {} offsets, got {}",
                self.k(),
                offsets.len()
            ));
        }
        if offsets.iter().any(|d| !d.is_finite()) {
            return invalid("offsets must be finite");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::gen_example1;

    fn path(inst: &Instance, edge: usize) -> Solution {
        Solution::from_elements(inst.ground_size(), [edge])
    }

    #[test]
    fn layered_edge_count() {
        let s = GroundStructure::LayeredPath { layers: 10, width: 4 };
        assert_eq!(s.ground_size(), 4 + 9 * 16 + 4);
        let s = GroundStructure::LayeredPath { layers: 1, width: 1 };
        assert_eq!(s.ground_size(), 2);
    }

    #[test]
    fn example1_evaluations() {
        let inst = gen_example1();
        let middle = path(&inst, 1);
        let top = path(&inst, 0);
        for i in 0..4 {
            assert_eq!(inst.evaluate_scenario(&middle, i).unwrap(), 1.0);
        }
        assert_eq!(inst.evaluate_scenario(&top, 0).unwrap(), 4.0);
        assert_eq!(inst.evaluate_max(&middle).unwrap(), (1.0, 0));
        let opt = [0.0; 4];
        assert_eq!(inst.evaluate_generalized_regret(&middle, &opt).unwrap().0, 1.0);
        assert_eq!(inst.evaluate_generalized_regret(&top, &opt).unwrap().0, 4.0);
    }

    #[test]
    fn self_offsets_give_zero() {
        let inst = gen_example1();
        let top = path(&inst, 0);
        let d = inst.scenario_values(&top);
        assert_eq!(inst.evaluate_generalized_regret(&top, &d).unwrap().0, 0.0);
    }

    #[test]
    fn zero_scenario_evaluates_to_zero() {
        let s = GroundStructure::Selection { n: 3, p: 2 };
        let inst = Instance::new(s, ScenarioSet::from_rows(vec![vec![0.0; 3]]).unwrap()).unwrap();
        let x = Solution::from_elements(3, [0, 2]);
        assert_eq!(inst.evaluate_scenario(&x, 0).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(CostVector::new(vec![1.0, -0.5]).is_err());
        assert!(CostVector::new(vec![f64::NAN]).is_err());
        assert!(ScenarioSet::new(vec![]).is_err());
        assert!(ScenarioSet::from_rows(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(GroundStructure::Selection { n: 3, p: 0 }.validate().is_err());
        assert!(GroundStructure::Selection { n: 3, p: 4 }.validate().is_err());

        let inst = gen_example1();
        let bad = Solution::from_elements(3, [0, 1]);
        assert!(inst.evaluate_max(&bad).is_err());
        assert!(inst.evaluate_scenario(&path(&inst, 1), 4).is_err());
        assert!(inst
            .evaluate_generalized_regret(&path(&inst, 1), &[0.0; 3])
            .is_err());
    }

    #[test]
    fn argmax_ties_take_lowest_index() {
        assert_eq!(max_with_offsets(&[1.0, 3.0, 3.0], None), (3.0, 1));
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(5), 3);
        assert_eq!(ceil_log2(16), 4);
    }
}
