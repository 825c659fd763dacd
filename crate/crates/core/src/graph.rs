//! Every ground structure is solved as a path problem in a small DAG of
//! states whose transitions optionally pick one ground-set element.
//!
//! For the path structures the states are the graph nodes and every
//! transition is an edge. For selection, state `(i, c)` means "items
//! `0..i` decided, `c` of them taken"; each item is either skipped or taken.
//! States are numbered in topological order.

use crate::model::GroundStructure;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transition {
    pub to: usize,
    pub element: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct StateGraph {
    pub out: Vec<Vec<Transition>>,
    pub source: usize,
    pub sink: usize,
}

impl StateGraph {
    pub fn for_structure(s: &GroundStructure) -> Self {
        match s {
            GroundStructure::LayeredPath { layers, width } => layered(*layers, *width),
            GroundStructure::ParallelPaths { lengths } => parallel(lengths),
            GroundStructure::Selection { n, p } => selection(*n, *p),
        }
    }

    pub fn num_states(&self) -> usize {
        self.out.len()
    }

    /// For each state, whether the sink is reachable from it.
    pub fn reaches_sink(&self) -> Vec<bool> {
        let mut ok = vec![false; self.num_states()];
        ok[self.sink] = true;
        for u in (0..self.num_states()).rev() {
            if self.out[u].iter().any(|t| ok[t.to]) {
                ok[u] = true;
            }
        }
        ok
    }

    /// Number of source-sink paths, saturating.
    pub fn count_paths(&self) -> u128 {
        let mut count = vec![0u128; self.num_states()];
        count[self.sink] = 1;
        for u in (0..self.num_states()).rev() {
            if u == self.sink {
                continue;
            }
            count[u] = self.out[u]
                .iter()
                .fold(0u128, |acc, t| acc.saturating_add(count[t.to]));
        }
        count[self.source]
    }

    /// Cheapest cost from every state to the sink under `costs`
    /// (`+inf` where the sink is unreachable).
    pub fn distances_to_sink(&self, costs: &[f64]) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.num_states()];
        dist[self.sink] = 0.0;
        for u in (0..self.num_states()).rev() {
            for t in &self.out[u] {
                let w = t.element.map_or(0.0, |e| costs[e]);
                let d = w + dist[t.to];
                if d < dist[u] {
                    dist[u] = d;
                }
            }
        }
        dist
    }
}

fn layered(layers: usize, width: usize) -> StateGraph {
    let node = |l: usize, a: usize| 1 + l * width + a;
    let sink = 1 + layers * width;
    let mut out = vec![Vec::new(); sink + 1];
    let mut e = 0;
    for a in 0..width {
        out[0].push(Transition { to: node(0, a), element: Some(e) });
        e += 1;
    }
    for l in 0..layers - 1 {
        for a in 0..width {
            for b in 0..width {
                out[node(l, a)].push(Transition { to: node(l + 1, b), element: Some(e) });
                e += 1;
            }
        }
    }
    for a in 0..width {
        out[node(layers - 1, a)].push(Transition { to: sink, element: Some(e) });
        e += 1;
    }
    StateGraph { out, source: 0, sink }
}

fn parallel(lengths: &[usize]) -> StateGraph {
    let inner: usize = lengths.iter().map(|m| m - 1).sum();
    let sink = inner + 1;
    let mut out = vec![Vec::new(); sink + 1];
    let mut next_node = 1;
    let mut e = 0;
    for &m in lengths {
        let mut from = 0;
        for step in 0..m {
            let to = if step + 1 == m {
                sink
            } else {
                next_node += 1;
                next_node - 1
            };
            out[from].push(Transition { to, element: Some(e) });
            e += 1;
            from = to;
        }
    }
    StateGraph { out, source: 0, sink }
}

fn selection(n: usize, p: usize) -> StateGraph {
    let id = |i: usize, c: usize| i * (p + 1) + c;
    let mut out = vec![Vec::new(); (n + 1) * (p + 1)];
    for i in 0..n {
        for c in 0..=p {
            out[id(i, c)].push(Transition { to: id(i + 1, c), element: None });
            if c < p {
                out[id(i, c)].push(Transition { to: id(i + 1, c + 1), element: Some(i) });
            }
        }
    }
    StateGraph { out, source: id(0, 0), sink: id(n, p) }
}
