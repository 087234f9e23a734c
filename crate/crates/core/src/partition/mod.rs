//! Community detection on a comparison matrix `C = W - <P>`.
//!
//! Every method scores partitions by the modularity `Q = Tr(S^T C S)`:
//! k-means restarts in a spectral projection, iterated consensus clustering,
//! Louvain, and multi-way vector partitioning.

mod consensus;
mod kmeans;
mod louvain;
mod multiway;

pub use consensus::{consensus_cluster, null_value, ConsensusConfig, ConsensusResult, ConsensusState};
pub use kmeans::{distinct_rows, kmeans_once, kmeans_partition, kmeans_runs};
pub use louvain::louvain;
pub use multiway::{knee, multiway_partition, multiway_unsupervised, MultiwayResult, MultiwayScan};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::matrix::DenseMatrix;
use crate::spectral;

/// Node-to-group assignment with contiguous labels `0..num_groups`,
/// numbered by first appearance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    assignment: Vec<usize>,
    num_groups: usize,
    /// Modularity against the comparison matrix the partition was scored on.
    pub quality: Option<f64>,
}

impl Partition {
    /// Relabels `labels` contiguously; no quality attached.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut map = std::collections::HashMap::new();
        let assignment: Vec<usize> = labels
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect();
        Self {
            assignment,
            num_groups: map.len(),
            quality: None,
        }
    }

    /// Relabels `labels` and scores them on `c`.
    pub fn scored(labels: &[usize], c: &DenseMatrix) -> Result<Self> {
        let mut p = Self::from_labels(labels);
        p.quality = Some(modularity(c, &p)?);
        Ok(p)
    }

    /// Every node in group 0.
    pub fn single(n: usize) -> Self {
        Self::from_labels(&vec![0; n])
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn num_groups(&self) -> usize {
        self.num_groups
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn group_of(&self, node: usize) -> usize {
        self.assignment[node]
    }

    /// Members of each group, in node order.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_groups];
        for (i, &g) in self.assignment.iter().enumerate() {
            out[g].push(i);
        }
        out
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.num_groups];
        for &g in &self.assignment {
            sizes[g] += 1;
        }
        sizes
    }

    /// Restriction to `nodes`, relabelled.
    pub fn restrict(&self, nodes: &[usize]) -> Partition {
        Partition::from_labels(&nodes.iter().map(|&i| self.assignment[i]).collect::<Vec<_>>())
    }
}

/// `Q = Tr(S^T C S) = Σ_ij C_ij [g_i = g_j]`.
pub fn modularity(c: &DenseMatrix, part: &Partition) -> Result<f64> {
    if c.rows() != part.len() || c.cols() != part.len() {
        return Err(Error::DimensionMismatch {
            expected: c.rows(),
            found: part.len(),
        });
    }
    let groups = part.groups();
    let mut q = 0.0;
    for members in &groups {
        for &i in members {
            let row = c.row(i);
            q += members.iter().map(|&j| row[j]).sum::<f64>();
        }
    }
    Ok(q)
}

/// Modularity of `part` on `g` against `expectation`, optionally divided by
/// `Σ_ij W_ij`.
pub fn modularity_of(
    g: &WeightedGraph,
    expectation: &DenseMatrix,
    part: &Partition,
    normalized: bool,
) -> Result<f64> {
    let c = spectral::comparison_matrix(g, expectation)?;
    let q = modularity(&c, part)?;
    if normalized {
        let total = g.weights().sum();
        if total <= 0.0 {
            return Err(Error::ZeroWeight);
        }
        return Ok(q / total);
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::null_model::wcm_expectation;

    pub(super) fn two_triangles() -> WeightedGraph {
        WeightedGraph::from_edges(
            6,
            &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (3, 4, 1.0), (4, 5, 1.0), (3, 5, 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn contiguous_relabelling() {
        let p = Partition::from_labels(&[7, 7, 3, 9, 3]);
        assert_eq!(p.assignment(), &[0, 0, 1, 2, 1]);
        assert_eq!(p.num_groups(), 3);
        assert_eq!(p.groups(), vec![vec![0, 1], vec![2, 4], vec![3]]);
        assert_eq!(p.group_sizes(), vec![2, 2, 1]);
        assert_eq!(p.restrict(&[2, 3]).assignment(), &[0, 1]);
    }

    #[test]
    fn single_group_modularity_vanishes() {
        let g = two_triangles();
        let p = wcm_expectation(&g).unwrap();
        let q = modularity_of(&g, &p, &Partition::single(6), false).unwrap();
        assert!(q.abs() < 1e-8);
    }

    #[test]
    fn planted_triangles_are_modular() {
        let g = two_triangles();
        let p = wcm_expectation(&g).unwrap();
        let part = Partition::from_labels(&[0, 0, 0, 1, 1, 1]);
        assert!(modularity_of(&g, &p, &part, false).unwrap() > 0.0);
        let normalized = modularity_of(&g, &p, &part, true).unwrap();
        // each triangle: 6 - 36/12 = 3, twice, over total 12
        assert!((normalized - 0.5).abs() < 1e-12);
        let relabelled = Partition::from_labels(&[5, 5, 5, 2, 2, 2]);
        assert_eq!(
            modularity_of(&g, &p, &part, false).unwrap(),
            modularity_of(&g, &p, &relabelled, false).unwrap()
        );
    }

    #[test]
    fn size_mismatch() {
        let g = two_triangles();
        let p = wcm_expectation(&g).unwrap();
        assert!(modularity_of(&g, &p, &Partition::single(5), false).is_err());
    }
}
