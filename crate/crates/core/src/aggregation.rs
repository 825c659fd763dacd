//! Scenario partitions and midpoint aggregation.
//!
//! An aggregated scenario is the componentwise mean of a group of original
//! scenarios. In regret mode each aggregated scenario also carries the mean
//! of the groups' original optima as its offset; for every feasible `x`
//!
//! ```text
//! max_j (c̄_j x - d_j) <= max_i (c_i x - opt(c_i)) <= r · max_j (c̄_j x - d_j)
//! ```
//!
//! where `r` is the largest group size (and likewise without offsets for
//! min-max). Using `opt(c̄_j)` instead of `d_j` breaks the right-hand bound.

use crate::error::{invalid, Result};
use crate::model::{ceil_log2, CostVector, Instance, ScenarioSet, TOL};
use crate::par::Execution;
use crate::solvers::per_scenario_optima;

/// Largest scenario count matched exactly by [`similarity_matching`].
pub const EXACT_MATCHING_LIMIT: usize = 16;

/// Disjoint, covering, non-empty groups of scenario indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    groups: Vec<Vec<usize>>,
}

impl Partition {
    /// Validates that `groups` partition `0..k`. Each group is sorted.
    pub fn new(mut groups: Vec<Vec<usize>>, k: usize) -> Result<Self> {
        let mut seen = vec![false; k];
        for g in &mut groups {
            if g.is_empty() {
                return invalid("partition groups must be non-empty");
            }
            g.sort_unstable();
            for &i in g.iter() {
                if i >= k {
                    return invalid(format!("index {i} out of range 0..{k}"));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return invalid(format!("index {i} appears in two groups"));
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return invalid(format!("index {i} is not covered"));
        }
        Ok(Self { groups })
    }

    pub fn singletons(k: usize) -> Self {
        Self { groups: (0..k).map(|i| vec![i]).collect() }
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Number of indices covered.
    pub fn universe(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    pub fn max_group_size(&self) -> usize {
        self.groups.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Merges groups of `self` according to `outer`, a partition of
    /// `0..self.len()`. The result is over the same indices as `self`.
    pub fn compose(&self, outer: &Partition) -> Partition {
        assert_eq!(outer.universe(), self.len());
        let groups = outer
            .groups
            .iter()
            .map(|og| {
                let mut g: Vec<usize> = og.iter().flat_map(|&j| self.groups[j].iter().copied()).collect();
                g.sort_unstable();
                g
            })
            .collect();
        Partition { groups }
    }
}

/// Contiguous runs of `0..k` in `group_count` groups whose sizes differ by
/// at most one, larger groups first.
pub fn consecutive_partition(k: usize, group_count: usize) -> Result<Partition> {
    if group_count == 0 || group_count > k {
        return invalid(format!("group count must be in 1..={k}, got {group_count}"));
    }
    let base = k / group_count;
    let extra = k % group_count;
    let mut groups = Vec::with_capacity(group_count);
    let mut start = 0;
    for j in 0..group_count {
        let size = base + usize::from(j < extra);
        groups.push((start..start + size).collect());
        start += size;
    }
    Ok(Partition { groups })
}

/// A pairing of scenarios; one singleton when the count is odd.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    pub partition: Partition,
    /// Sum of Euclidean distances over the pairs.
    pub total_distance: f64,
    /// False when the greedy fallback was used.
    pub optimal: bool,
}

/// Minimum total Euclidean distance pairing of the scenarios.
///
/// Up to [`EXACT_MATCHING_LIMIT`] scenarios the pairing is optimal (dynamic
/// program over index subsets, ties to the lexicographically smallest pair
/// list; with an odd count the left-out singleton is chosen by total cost,
/// then smallest index). Beyond that a greedy closest-pair heuristic is used
/// and `optimal` is false.
pub fn similarity_matching(scenarios: &ScenarioSet) -> Result<Matching> {
    let k = scenarios.len();
    if k < 2 {
        return invalid("similarity matching needs at least two scenarios");
    }
    let dist: Vec<Vec<f64>> = (0..k)
        .map(|a| (0..k).map(|b| scenarios.get(a).distance(scenarios.get(b))).collect())
        .collect();
    let (pairs, singleton, optimal) = if k <= EXACT_MATCHING_LIMIT {
        let (p, s) = exact_pairs(&dist);
        (p, s, true)
    } else {
        let (p, s) = greedy_pairs(&dist);
        (p, s, false)
    };
    let total_distance = pairs.iter().map(|&(a, b)| dist[a][b]).sum();
    let mut groups: Vec<Vec<usize>> = pairs.into_iter().map(|(a, b)| vec![a, b]).collect();
    groups.extend(singleton.map(|s| vec![s]));
    groups.sort();
    Ok(Matching { partition: Partition { groups }, total_distance, optimal })
}

fn exact_pairs(dist: &[Vec<f64>]) -> (Vec<(usize, usize)>, Option<usize>) {
    let k = dist.len();
    let full = (1usize << k) - 1;
    // cost[mask]: optimal pairing of the indices in `mask` (even popcount)
    let mut cost = vec![f64::INFINITY; 1 << k];
    cost[0] = 0.0;
    for mask in 1..=full {
        if mask.count_ones() % 2 == 1 {
            continue;
        }
        let i = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << i);
        let mut best = f64::INFINITY;
        let mut r = rest;
        while r != 0 {
            let j = r.trailing_zeros() as usize;
            r &= r - 1;
            best = best.min(dist[i][j] + cost[rest & !(1 << j)]);
        }
        cost[mask] = best;
    }
    let (mask, singleton) = if k.is_multiple_of(2) {
        (full, None)
    } else {
        let s = (0..k)
            .min_by(|&a, &b| {
                cost[full & !(1 << a)]
                    .total_cmp(&cost[full & !(1 << b)])
                    .then(a.cmp(&b))
            })
            .expect("k >= 2");
        // prefer the smallest index among near-ties
        let target = cost[full & !(1 << s)];
        let s = (0..k).find(|&a| cost[full & !(1 << a)] <= target + TOL).unwrap_or(s);
        (full & !(1 << s), Some(s))
    };
    let mut pairs = Vec::new();
    let mut m = mask;
    while m != 0 {
        let i = m.trailing_zeros() as usize;
        let rest = m & !(1 << i);
        let mut r = rest;
        let mut chosen = None;
        while r != 0 {
            let j = r.trailing_zeros() as usize;
            r &= r - 1;
            if dist[i][j] + cost[rest & !(1 << j)] <= cost[m] + TOL {
                chosen = Some(j);
                break;
            }
        }
        let j = chosen.expect("optimal partner exists");
        pairs.push((i, j));
        m = rest & !(1 << j);
    }
    (pairs, singleton)
}

fn greedy_pairs(dist: &[Vec<f64>]) -> (Vec<(usize, usize)>, Option<usize>) {
    let k = dist.len();
    let mut candidates: Vec<(f64, usize, usize)> = (0..k)
        .flat_map(|a| (a + 1..k).map(move |b| (a, b)))
        .map(|(a, b)| (dist[a][b], a, b))
        .collect();
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))));
    let mut used = vec![false; k];
    let mut pairs = Vec::new();
    for (_, a, b) in candidates {
        if !used[a] && !used[b] {
            used[a] = true;
            used[b] = true;
            pairs.push((a, b));
        }
    }
    (pairs, used.iter().position(|u| !u))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AggregationMode {
    MinMax,
    Regret,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// Groups of adjacent scenario indices.
    Consecutive,
    /// Minimum-distance pairing of the current aggregated scenarios, repeated
    /// level by level.
    Similarity,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Consecutive => "consecutive",
            Scheme::Similarity => "similarity",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "consecutive" => Ok(Scheme::Consecutive),
            "similarity" => Ok(Scheme::Similarity),
            other => invalid(format!("unknown scheme '{other}'")),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// An aggregated scenario set ready to be solved.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedProblem {
    /// Same structure as the original, with the aggregated scenarios.
    pub instance: Instance,
    /// `d_j`, present in regret mode.
    pub offsets: Option<Vec<f64>>,
    /// Original scenario indices behind each aggregated scenario.
    pub group_map: Partition,
    /// `ceil(log2(group count))`.
    pub level: usize,
    /// Largest group size; the approximation factor of an optimal solution.
    pub factor: usize,
    /// False if a greedy matching was involved.
    pub matching_optimal: bool,
}

impl AggregatedProblem {
    pub fn scenario_count(&self) -> usize {
        self.group_map.len()
    }

    /// The criterion to solve on the aggregated instance.
    pub fn criterion(&self) -> crate::solvers::Criterion {
        match &self.offsets {
            None => crate::solvers::Criterion::MinMax,
            Some(d) => crate::solvers::Criterion::GeneralizedRegret(d.clone()),
        }
    }
}

/// Averages the scenarios of each group; in regret mode the offsets are the
/// group means of `opt_values` (the original per-scenario optima).
pub fn aggregate(
    inst: &Instance,
    partition: &Partition,
    mode: AggregationMode,
    opt_values: Option<&[f64]>,
) -> Result<AggregatedProblem> {
    let k = inst.k();
    if partition.universe() != k || partition.groups().iter().flatten().any(|&i| i >= k) {
        return invalid(format!("partition does not cover the {k} scenarios"));
    }
    let offsets = match mode {
        AggregationMode::MinMax => None,
        AggregationMode::Regret => {
            let Some(opt) = opt_values else {
                return invalid("regret aggregation needs the per-scenario optima");
            };
            if opt.len() != k {
                return invalid(format!("expected {k} optima, got {}", opt.len()));
            }
            Some(
                partition
                    .groups()
                    .iter()
                    .map(|g| g.iter().map(|&s| opt[s]).sum::<f64>() / g.len() as f64)
                    .collect(),
            )
        }
    };
    let scenarios = ScenarioSet::new(
        partition
            .groups()
            .iter()
            .map(|g| CostVector::mean(g.iter().map(|&s| inst.scenarios.get(s))))
            .collect(),
    )?;
    Ok(AggregatedProblem {
        instance: inst.with_scenarios(scenarios)?,
        offsets,
        group_map: partition.clone(),
        level: ceil_log2(partition.len()),
        factor: partition.max_group_size(),
        matching_optimal: true,
    })
}

/// The partition used by `scheme` at `level`, and whether every matching
/// step was optimal.
///
/// Consecutive: `min(2^level, K)` contiguous groups. Similarity: repeatedly
/// pair the current group means until at most `2^level` groups remain.
pub fn scheme_partition(scenarios: &ScenarioSet, level: usize, scheme: Scheme) -> Result<(Partition, bool)> {
    let k = scenarios.len();
    let top = ceil_log2(k);
    if level > top {
        return invalid(format!("level {level} out of range 0..={top}"));
    }
    let target = (1usize << level).min(k);
    match scheme {
        Scheme::Consecutive => Ok((consecutive_partition(k, target)?, true)),
        Scheme::Similarity => {
            let mut partition = Partition::singletons(k);
            let mut optimal = true;
            while partition.len() > target {
                let means = ScenarioSet::new(
                    partition
                        .groups()
                        .iter()
                        .map(|g| CostVector::mean(g.iter().map(|&s| scenarios.get(s))))
                        .collect(),
                )?;
                let m = similarity_matching(&means)?;
                optimal &= m.optimal;
                partition = partition.compose(&m.partition);
            }
            Ok((partition, optimal))
        }
    }
}

/// Aggregates `inst` to `level` with `scheme`. In regret mode the offsets
/// come from the original scenarios' optima; they are computed when
/// `opt_values` is `None`.
pub fn aggregate_to_level(
    inst: &Instance,
    level: usize,
    scheme: Scheme,
    mode: AggregationMode,
    opt_values: Option<&[f64]>,
) -> Result<AggregatedProblem> {
    let (partition, optimal) = scheme_partition(&inst.scenarios, level, scheme)?;
    let computed;
    let opt = match (mode, opt_values) {
        (AggregationMode::Regret, None) => {
            computed = per_scenario_optima(inst, Execution::Sequential)?;
            Some(computed.as_slice())
        }
        (_, given) => given,
    };
    let mut agg = aggregate(inst, &partition, mode, opt)?;
    agg.matching_optimal = optimal;
    Ok(agg)
}
