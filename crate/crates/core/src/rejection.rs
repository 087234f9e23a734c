//! Node projection, noise-node rejection and k-partite group recovery.
//!
//! Nodes are placed in the space spanned by the retained eigenvectors, each
//! axis scaled by its eigenvalue. A node is retained when its distance from
//! the origin exceeds the mean distance it has in the same-dimensional
//! projection of the null samples.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::{self, SymmetricEigen};
use crate::error::{Error, Result};
use crate::graph::{self, WeightedGraph};
use crate::matrix::DenseMatrix;
use crate::null_model::NullEnsemble;
use crate::spectral::SpectralEstimate;

/// Axis scaling of the node projection.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormWeighting {
    /// Column `i` is `|λ_i| u_i`.
    #[default]
    Eigenvalue,
    /// Column `i` is `sqrt(|λ_i|) u_i`.
    SqrtEigenvalue,
}

impl NormWeighting {
    fn factor(self, lambda: f64) -> f64 {
        match self {
            NormWeighting::Eigenvalue => lambda.abs(),
            NormWeighting::SqrtEigenvalue => lambda.abs().sqrt(),
        }
    }
}

/// n × d matrix whose column `i` is the `i`-th eigenvector scaled by its
/// eigenvalue magnitude.
pub fn project_eigenpairs(pairs: &SymmetricEigen, weighting: NormWeighting) -> DenseMatrix {
    let v = &pairs.vectors;
    DenseMatrix::from_fn(v.rows(), pairs.values.len(), |j, i| {
        weighting.factor(pairs.values[i]) * v[(j, i)]
    })
}

/// Projection onto the top `d` retained eigenpairs.
pub fn project_nodes(estimate: &SpectralEstimate, d: usize, weighting: NormWeighting) -> Result<DenseMatrix> {
    if d == 0 {
        return Err(Error::NoStructure("no retained dimensions to project onto"));
    }
    if d > estimate.d_pos {
        return Err(Error::InvalidParameter(format!(
            "d = {d} exceeds the {} retained dimensions",
            estimate.d_pos
        )));
    }
    Ok(project_eigenpairs(&estimate.decomposition.top(d), weighting))
}

/// Euclidean norm of every projection row.
pub fn node_norms(projection: &DenseMatrix) -> Vec<f64> {
    (0..projection.rows())
        .map(|j| projection.row(j).iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect()
}

/// Which end of the spectrum a projection uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumEnd {
    Top,
    Bottom,
}

/// Mean per-node norm over the null samples, each sample projected onto its
/// own `d` extremal eigenpairs of `C*_i`.
pub fn expected_norms_at(
    ensemble: &NullEnsemble,
    expectation: &DenseMatrix,
    d: usize,
    end: SpectrumEnd,
    weighting: NormWeighting,
) -> Result<Vec<f64>> {
    if d == 0 {
        return Err(Error::InvalidParameter("d must be >= 1".into()));
    }
    if ensemble.is_empty() {
        return Err(Error::InvalidParameter("ensemble has no samples".into()));
    }
    let per_sample: Vec<Vec<f64>> = ensemble
        .samples
        .par_iter()
        .map(|s| {
            let c = s.comparison(expectation)?;
            let pairs = match end {
                SpectrumEnd::Top => eigen::extremal_eigenpairs(&c, d, 0)?.top(d),
                SpectrumEnd::Bottom => eigen::extremal_eigenpairs(&c, 0, d)?.bottom(d),
            };
            Ok(node_norms(&project_eigenpairs(&pairs, weighting)))
        })
        .collect::<Result<_>>()?;
    let n = expectation.rows();
    let mut mean = vec![0.0; n];
    for norms in &per_sample {
        for (m, x) in mean.iter_mut().zip(norms) {
            *m += x;
        }
    }
    let count = per_sample.len() as f64;
    Ok(mean.into_iter().map(|m| m / count).collect())
}

/// [`expected_norms_at`] on the top of the spectrum.
pub fn expected_norms(
    ensemble: &NullEnsemble,
    expectation: &DenseMatrix,
    d: usize,
    weighting: NormWeighting,
) -> Result<Vec<f64>> {
    expected_norms_at(ensemble, expectation, d, SpectrumEnd::Top, weighting)
}

/// `(retained, rejected)`: node `j` is retained iff `L(j) > <L(j)*>`.
pub fn reject_nodes(data_norms: &[f64], expected: &[f64]) -> (Vec<usize>, Vec<usize>) {
    (0..data_norms.len()).partition(|&j| data_norms[j] > expected[j])
}

/// Induced subgraph on `retained`, leaf-stripped, largest component. Returns
/// the graph and the original index of each of its nodes.
pub fn signal_network(g: &WeightedGraph, retained: &[usize]) -> (WeightedGraph, Vec<usize>) {
    let sub = g.induced_subgraph(retained);
    let kept = graph::strip_leaves_nodes(&sub);
    let original: Vec<usize> = kept.iter().map(|&k| retained[k]).collect();
    (g.induced_subgraph(&original), original)
}

#[derive(Debug, Clone)]
pub struct SignalDecomposition {
    pub projection: DenseMatrix,
    pub data_norms: Vec<f64>,
    pub expected_norms: Vec<f64>,
    pub retained: Vec<usize>,
    pub rejected: Vec<usize>,
    pub signal_graph: WeightedGraph,
    /// Original index of every signal-graph node.
    pub signal_nodes: Vec<usize>,
}

/// Projection on all `d_pos` retained dimensions, rejection and signal
/// network extraction.
pub fn decompose(
    g: &WeightedGraph,
    estimate: &SpectralEstimate,
    ensemble: &NullEnsemble,
    weighting: NormWeighting,
) -> Result<SignalDecomposition> {
    let d = estimate.d_pos;
    let projection = project_nodes(estimate, d, weighting)?;
    let data_norms = node_norms(&projection);
    let expected_norms = expected_norms(ensemble, &ensemble.expectation, d, weighting)?;
    let (retained, rejected) = reject_nodes(&data_norms, &expected_norms);
    let (signal_graph, signal_nodes) = signal_network(g, &retained);
    Ok(SignalDecomposition {
        projection,
        data_norms,
        expected_norms,
        retained,
        rejected,
        signal_graph,
        signal_nodes,
    })
}

#[derive(Debug, Clone)]
pub struct KPartiteResult {
    /// n × d_neg, most negative eigenvalue first.
    pub negative_vectors: DenseMatrix,
    pub negative_values: Vec<f64>,
    pub data_norms: Vec<f64>,
    pub expected_norms: Vec<f64>,
    pub retained: Vec<usize>,
    /// Sign groups over all nodes when `d_neg = 1`: 0 for entries `>= 0`,
    /// 1 for negative entries.
    pub groups: Option<Vec<usize>>,
}

/// Projection and rejection on the `d_neg` most negative eigenpairs; for a
/// single negative dimension the nodes also split by eigenvector sign.
pub fn kpartite_extract(
    estimate: &SpectralEstimate,
    ensemble: &NullEnsemble,
    weighting: NormWeighting,
) -> Result<KPartiteResult> {
    let d = estimate.d_neg;
    if d == 0 {
        return Err(Error::NoStructure("no eigenvalues below the lower bound"));
    }
    let pairs = estimate.negative();
    let data_norms = node_norms(&project_eigenpairs(&pairs, weighting));
    let expected_norms =
        expected_norms_at(ensemble, &ensemble.expectation, d, SpectrumEnd::Bottom, weighting)?;
    let (retained, _) = reject_nodes(&data_norms, &expected_norms);
    let groups = (d == 1).then(|| {
        pairs
            .vectors
            .column(0)
            .iter()
            .map(|&x| if x >= 0.0 { 0 } else { 1 })
            .collect()
    });
    Ok(KPartiteResult {
        negative_vectors: pairs.vectors,
        negative_values: pairs.values,
        data_norms,
        expected_norms,
        retained,
        groups,
    })
}
