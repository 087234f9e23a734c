//! Weighted undirected graphs.
//!
//! Graphs are stored as a dense symmetric weight matrix with a zero diagonal,
//! which is what every downstream computation (comparison matrices,
//! eigendecompositions, modularity) consumes anyway.

use std::collections::{HashMap, VecDeque};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightGranularity {
    Binary,
    Integer,
    Real,
}

impl WeightGranularity {
    /// Granularity of a set of nonzero weights.
    pub fn infer<I: IntoIterator<Item = f64>>(weights: I) -> Self {
        let mut granularity = WeightGranularity::Binary;
        for w in weights {
            if w == 0.0 {
                continue;
            }
            if w.fract() != 0.0 {
                return WeightGranularity::Real;
            }
            if w != 1.0 {
                granularity = WeightGranularity::Integer;
            }
        }
        granularity
    }
}

/// Symmetric, nonnegative, zero-diagonal weighted graph with unique labels.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    labels: Vec<String>,
    weights: DenseMatrix,
    granularity: WeightGranularity,
}

impl WeightedGraph {
    /// Builds a graph from labels and a weight matrix, checking every
    /// invariant.
    pub fn new(labels: Vec<String>, weights: DenseMatrix) -> Result<Self> {
        let n = labels.len();
        if weights.rows() != n || weights.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: weights.rows(),
            });
        }
        let mut seen = HashMap::with_capacity(n);
        for (i, label) in labels.iter().enumerate() {
            if label.is_empty() || label.chars().any(char::is_whitespace) {
                return Err(Error::InvalidGraph(format!("bad node label {label:?}")));
            }
            if seen.insert(label.as_str(), i).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate label {label}")));
            }
        }
        for i in 0..n {
            if weights[(i, i)] != 0.0 {
                return Err(Error::InvalidGraph(format!("nonzero diagonal at node {i}")));
            }
            for j in 0..n {
                let w = weights[(i, j)];
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::InvalidGraph(format!("weight {w} at ({i}, {j})")));
                }
                if w != weights[(j, i)] {
                    return Err(Error::InvalidGraph(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        let granularity = WeightGranularity::infer(weights.as_slice().iter().copied());
        Ok(Self {
            labels,
            weights,
            granularity,
        })
    }

    /// Graph on `n` nodes labelled `0..n` from an undirected edge list.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut w = DenseMatrix::zeros(n, n);
        for &(a, b, weight) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) out of range")));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop on {a}")));
            }
            w[(a, b)] = weight;
            w[(b, a)] = weight;
        }
        Self::new((0..n).map(|i| i.to_string()).collect(), w)
    }

    pub fn empty() -> Self {
        Self {
            labels: Vec::new(),
            weights: DenseMatrix::zeros(0, 0),
            granularity: WeightGranularity::Binary,
        }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn weights(&self) -> &DenseMatrix {
        &self.weights
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[(i, j)]
    }

    pub fn granularity(&self) -> WeightGranularity {
        self.granularity
    }

    /// Node strengths `s_i = sum_j W_ij`.
    pub fn strengths(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.weights.row(i).iter().sum()).collect()
    }

    /// Node degrees `k_i = sum_j A_ij`.
    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n())
            .map(|i| self.weights.row(i).iter().filter(|&&w| w > 0.0).count())
            .collect()
    }

    /// Number of unique undirected links `m`.
    pub fn unique_links(&self) -> usize {
        self.degrees().iter().sum::<usize>() / 2
    }

    /// Number of nonzero matrix entries (`2m`).
    pub fn nonzero_entries(&self) -> usize {
        2 * self.unique_links()
    }

    /// Total of unique weights `w = (1/2) sum_i s_i`.
    pub fn total_weight(&self) -> f64 {
        let mut total = 0.0;
        for i in 0..self.n() {
            for j in (i + 1)..self.n() {
                total += self.weights[(i, j)];
            }
        }
        total
    }

    /// Link density `2m / (n (n - 1))`.
    pub fn density(&self) -> f64 {
        let n = self.n() as f64;
        if n < 2.0 {
            return 0.0;
        }
        self.nonzero_entries() as f64 / (n * (n - 1.0))
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.weights
            .row(i)
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(j, _)| j)
    }

    /// Unique links as `(i, j, w)` with `i < j`, in row-major order.
    pub fn links(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.n() {
            for j in (i + 1)..self.n() {
                let w = self.weights[(i, j)];
                if w > 0.0 {
                    out.push((i, j, w));
                }
            }
        }
        out
    }

    /// Induced subgraph on `nodes`, in the given order.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> WeightedGraph {
        let weights = self.weights.submatrix(nodes);
        let labels = nodes.iter().map(|&i| self.labels[i].clone()).collect();
        let granularity = WeightGranularity::infer(weights.as_slice().iter().copied());
        WeightedGraph {
            labels,
            weights,
            granularity,
        }
    }

    /// Copy with every weight multiplied by `kappa` and rounded to the nearest
    /// integer; links that round to zero disappear.
    pub fn kappa_scaled(&self, kappa: f64) -> Result<WeightedGraph> {
        if !(kappa.is_finite() && kappa >= 1.0) {
            return Err(Error::InvalidParameter(format!("kappa must be >= 1, got {kappa}")));
        }
        let mut weights = self.weights.clone();
        for i in 0..self.n() {
            for j in 0..self.n() {
                let scaled = (weights[(i, j)] * kappa).round();
                if scaled > MAX_EXACT_INTEGER {
                    return Err(Error::Overflow(format!("{} * {kappa}", weights[(i, j)])));
                }
                weights[(i, j)] = scaled;
            }
        }
        let granularity = WeightGranularity::infer(weights.as_slice().iter().copied());
        Ok(WeightedGraph {
            labels: self.labels.clone(),
            weights,
            granularity,
        })
    }
}

/// Largest integer below which every `f64` integer is exact.
pub(crate) const MAX_EXACT_INTEGER: f64 = 9_007_199_254_740_992.0;

/// Reads a whitespace-separated `src dst weight` edge list.
///
/// Lines starting with `#` and blank lines are skipped. A line holding a
/// single label declares a node without adding a link; [`write_edge_list`]
/// uses that to carry isolated nodes and index order through a round trip.
/// Node indices follow first appearance.
///
/// With `directed_symmetrize` each line is a directed arc and the result is
/// `(W + W^T) / 2`. Without it, a pair listed in both directions must carry
/// the same weight.
pub fn load_edge_list<R: BufRead>(source: R, directed_symmetrize: bool) -> Result<WeightedGraph> {
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut labels: Vec<String> = Vec::new();
    // keyed by (src, dst); undirected input is keyed by (min, max)
    let mut arcs: HashMap<(usize, usize), (f64, usize)> = HashMap::new();
    let mut order: Vec<(usize, usize)> = Vec::new();

    let mut intern = |label: &str, index: &mut HashMap<String, usize>| -> usize {
        if let Some(&i) = index.get(label) {
            return i;
        }
        let i = labels.len();
        labels.push(label.to_string());
        index.insert(label.to_string(), i);
        i
    };

    for (lineno, line) in source.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        match fields.len() {
            1 => {
                intern(fields[0], &mut index);
                continue;
            }
            3 => {}
            k => {
                return Err(Error::Malformed {
                    line: lineno,
                    reason: format!("expected `src dst weight`, found {k} fields"),
                })
            }
        }
        let (src, dst) = (fields[0], fields[1]);
        let weight: f64 = fields[2].parse().map_err(|_| Error::Malformed {
            line: lineno,
            reason: format!("weight {:?} is not a number", fields[2]),
        })?;
        if !weight.is_finite() {
            return Err(Error::Malformed {
                line: lineno,
                reason: format!("weight {weight} is not finite"),
            });
        }
        if weight < 0.0 {
            return Err(Error::NegativeWeight {
                line: lineno,
                src: src.to_string(),
                dst: dst.to_string(),
                weight,
            });
        }
        if src == dst {
            return Err(Error::SelfLoop {
                line: lineno,
                node: src.to_string(),
            });
        }
        let a = intern(src, &mut index);
        let b = intern(dst, &mut index);
        let key = if directed_symmetrize {
            (a, b)
        } else {
            (a.min(b), a.max(b))
        };
        match arcs.get(&key) {
            Some(&(previous, _)) if previous != weight => {
                return Err(Error::ConflictingWeights {
                    line: lineno,
                    src: src.to_string(),
                    dst: dst.to_string(),
                    first: previous,
                    second: weight,
                })
            }
            Some(_) => {}
            None => {
                arcs.insert(key, (weight, lineno));
                order.push(key);
            }
        }
    }

    let n = labels.len();
    let mut weights = DenseMatrix::zeros(n, n);
    for key in order {
        let (w, _) = arcs[&key];
        let (a, b) = key;
        if directed_symmetrize {
            weights[(a, b)] += w / 2.0;
            weights[(b, a)] += w / 2.0;
        } else {
            weights[(a, b)] = w;
            weights[(b, a)] = w;
        }
    }
    WeightedGraph::new(labels, weights)
}

/// Writes the graph as a tab-separated edge list that [`load_edge_list`]
/// reads back to the same weight matrix and node order.
pub fn write_edge_list<W: Write>(g: &WeightedGraph, mut out: W) -> Result<()> {
    let links = g.links();
    // Node declarations are only needed when first appearance in the link
    // list would not reproduce the index order.
    let mut appearance = Vec::with_capacity(g.n());
    let mut seen = vec![false; g.n()];
    for &(i, j, _) in &links {
        for v in [i, j] {
            if !seen[v] {
                seen[v] = true;
                appearance.push(v);
            }
        }
    }
    let in_order = appearance.len() == g.n() && appearance.iter().enumerate().all(|(k, &v)| k == v);
    if !in_order {
        for label in g.labels() {
            writeln!(out, "{label}")?;
        }
    }
    for (i, j, w) in links {
        writeln!(out, "{}\t{}\t{}", g.label(i), g.label(j), w)?;
    }
    Ok(())
}

/// Connected components as sorted index lists, ordered by their lowest node.
pub fn connected_components(g: &WeightedGraph) -> Vec<Vec<usize>> {
    components_within(g, &vec![true; g.n()])
}

fn components_within(g: &WeightedGraph, alive: &[bool]) -> Vec<Vec<usize>> {
    let n = g.n();
    let mut visited = vec![false; n];
    let mut components = Vec::new();
    for start in 0..n {
        if visited[start] || !alive[start] {
            continue;
        }
        let mut component = vec![start];
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for u in g.neighbors(v) {
                if alive[u] && !visited[u] {
                    visited[u] = true;
                    component.push(u);
                    queue.push_back(u);
                }
            }
        }
        component.sort_unstable();
        components.push(component);
    }
    components
}

/// Largest component among `components`; ties go to the one holding the
/// lowest node index (they arrive ordered by lowest node).
fn largest(components: Vec<Vec<usize>>) -> Vec<usize> {
    let mut best: Vec<usize> = Vec::new();
    for c in components {
        if c.len() > best.len() {
            best = c;
        }
    }
    best
}

/// Node indices of the giant component.
pub fn giant_component_nodes(g: &WeightedGraph) -> Vec<usize> {
    largest(connected_components(g))
}

/// Induced subgraph on the largest connected component.
pub fn giant_component(g: &WeightedGraph) -> Result<WeightedGraph> {
    if g.is_empty() {
        return Err(Error::EmptyGraph);
    }
    Ok(g.induced_subgraph(&giant_component_nodes(g)))
}

/// Node indices kept by [`strip_leaves`].
pub fn strip_leaves_nodes(g: &WeightedGraph) -> Vec<usize> {
    let n = g.n();
    let mut alive = vec![true; n];
    let mut degree = g.degrees();
    let mut leaves: Vec<usize> = (0..n).filter(|&i| degree[i] == 1).collect();
    while let Some(leaf) = leaves.pop() {
        if !alive[leaf] || degree[leaf] != 1 {
            // a leaf whose partner was stripped first is now isolated
            if alive[leaf] && degree[leaf] == 0 {
                alive[leaf] = false;
            }
            continue;
        }
        alive[leaf] = false;
        degree[leaf] = 0;
        for u in g.neighbors(leaf) {
            if alive[u] {
                degree[u] -= 1;
                if degree[u] <= 1 {
                    leaves.push(u);
                }
            }
        }
    }
    largest(components_within(g, &alive))
}

/// Repeatedly removes degree-1 nodes, then keeps the largest remaining
/// component. The result may be empty.
pub fn strip_leaves(g: &WeightedGraph) -> WeightedGraph {
    g.induced_subgraph(&strip_leaves_nodes(g))
}

/// One row of an integer weight distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightDistributionSummary {
    pub weight_value: u64,
    pub observed_count: u64,
    pub cumulative_fraction: f64,
}

/// Counts of each integer weight over unique links, with the empirical
/// cumulative distribution.
pub fn weight_distribution(g: &WeightedGraph) -> Result<Vec<WeightDistributionSummary>> {
    if g.granularity() == WeightGranularity::Real {
        return Err(Error::RealWeights);
    }
    Ok(distribution_from_weights(g.links().into_iter().map(|(_, _, w)| w as u64)))
}

/// Weight distribution of `g` after scaling by `kappa` and rounding.
pub fn weight_distribution_scaled(
    g: &WeightedGraph,
    kappa: f64,
) -> Result<Vec<WeightDistributionSummary>> {
    weight_distribution(&g.kappa_scaled(kappa)?)
}

pub(crate) fn distribution_from_weights<I: IntoIterator<Item = u64>>(
    weights: I,
) -> Vec<WeightDistributionSummary> {
    let mut counts = std::collections::BTreeMap::new();
    let mut total = 0u64;
    for w in weights {
        if w > 0 {
            *counts.entry(w).or_insert(0u64) += 1;
            total += 1;
        }
    }
    let mut running = 0u64;
    counts
        .into_iter()
        .map(|(weight_value, observed_count)| {
            running += observed_count;
            WeightDistributionSummary {
                weight_value,
                observed_count,
                cumulative_fraction: if running == total {
                    1.0
                } else {
                    running as f64 / total as f64
                },
            }
        })
        .collect()
}

/// Per-weight count difference `model - data` over the union of observed
/// weight values, sorted by weight.
pub fn count_difference(
    data: &[WeightDistributionSummary],
    model: &[WeightDistributionSummary],
) -> Vec<(u64, i64)> {
    let mut diff = std::collections::BTreeMap::new();
    for row in data {
        *diff.entry(row.weight_value).or_insert(0i64) -= row.observed_count as i64;
    }
    for row in model {
        *diff.entry(row.weight_value).or_insert(0i64) += row.observed_count as i64;
    }
    diff.into_iter().collect()
}
