//! Comparison matrices, sampled eigenvalue bounds and dimension detection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::{self, SymmetricEigen, FULL_DECOMPOSITION_LIMIT};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::matrix::DenseMatrix;
use crate::null_model::NullEnsemble;
use crate::stats::{self, BoundMethod, TestReport};

/// `C = W - <P>`.
pub fn comparison_matrix(g: &WeightedGraph, expectation: &DenseMatrix) -> Result<DenseMatrix> {
    if expectation.rows() != g.n() || expectation.cols() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            found: expectation.rows(),
        });
    }
    g.weights().sub(expectation)
}

/// Sampled extreme eigenvalues of the null comparison matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub upper_bound: f64,
    pub lower_bound: f64,
    pub sampled_maxima: Vec<f64>,
    pub sampled_minima: Vec<f64>,
}

/// Largest and smallest eigenvalue of every `C*_i = P*_i - <P>`; the bounds
/// are their means.
pub fn estimate_bounds(ensemble: &NullEnsemble, expectation: &DenseMatrix) -> Result<Bounds> {
    if ensemble.is_empty() {
        return Err(Error::InvalidParameter("ensemble has no samples".into()));
    }
    let extremes: Vec<(f64, f64)> = ensemble
        .samples
        .par_iter()
        .map(|s| eigen::extremal_eigenvalues(&s.comparison(expectation)?))
        .collect::<Result<_>>()?;
    let (sampled_maxima, sampled_minima): (Vec<f64>, Vec<f64>) = extremes.into_iter().unzip();
    Ok(Bounds {
        upper_bound: stats::mean(&sampled_maxima),
        lower_bound: stats::mean(&sampled_minima),
        sampled_maxima,
        sampled_minima,
    })
}

/// `(#{λ > upper}, #{λ < lower})`; eigenvalues on a bound do not count.
pub fn detect_dimensions(eigenvalues: &[f64], upper: f64, lower: f64) -> (usize, usize) {
    let d_pos = eigenvalues.iter().filter(|&&l| l > upper).count();
    let d_neg = eigenvalues.iter().filter(|&&l| l < lower).count();
    (d_pos, d_neg)
}

/// Data eigen-analysis measured against the null ensemble.
#[derive(Debug, Clone)]
pub struct SpectralEstimate {
    /// Data eigenpairs, descending. Complete up to
    /// [`FULL_DECOMPOSITION_LIMIT`] nodes, otherwise only the extremal pairs
    /// needed to count dimensions.
    pub decomposition: SymmetricEigen,
    pub bounds: Bounds,
    pub d_pos: usize,
    pub d_neg: usize,
    pub method: BoundMethod,
    pub test: Option<TestReport>,
}

impl SpectralEstimate {
    pub fn n(&self) -> usize {
        self.decomposition.vectors.rows()
    }

    pub fn data_eigenvalues(&self) -> &[f64] {
        &self.decomposition.values
    }

    pub fn upper_bound(&self) -> f64 {
        self.bounds.upper_bound
    }

    pub fn lower_bound(&self) -> f64 {
        self.bounds.lower_bound
    }

    /// The `d_pos` eigenpairs above the upper bound.
    pub fn retained(&self) -> SymmetricEigen {
        self.decomposition.top(self.d_pos)
    }

    /// n × d_pos matrix of retained eigenvectors.
    pub fn retained_vectors(&self) -> DenseMatrix {
        self.retained().vectors
    }

    /// The `d_neg` eigenpairs below the lower bound, most negative first.
    pub fn negative(&self) -> SymmetricEigen {
        self.decomposition.bottom(self.d_neg)
    }

    /// All eigenpairs with positive eigenvalue, descending.
    pub fn positive(&self) -> SymmetricEigen {
        let k = self.decomposition.values.iter().take_while(|&&l| l > 0.0).count();
        self.decomposition.top(k)
    }

    pub fn has_structure(&self) -> bool {
        self.d_pos + self.d_neg > 0
    }
}

/// Enough data eigenpairs to count every eigenvalue outside the bounds. Small
/// matrices are decomposed fully; large ones grow the extremal block until it
/// reaches inside the bounds on both ends.
fn data_decomposition(c: &DenseMatrix, upper: f64, lower: f64, limit: usize) -> Result<SymmetricEigen> {
    let n = c.rows();
    if n <= limit {
        return eigen::eig_symmetric(c);
    }
    let mut block = 8usize;
    loop {
        let e = eigen::extremal_eigenpairs_with_limit(c, block, block, limit)?;
        let len = e.values.len();
        let top_done = e.values[block.min(len) - 1] <= upper;
        let bottom_done = e.values[len - block.min(len)] >= lower;
        if (top_done && bottom_done) || 2 * block >= n {
            return Ok(e);
        }
        block *= 2;
    }
}

pub(crate) fn estimate_with_limit(
    g: &WeightedGraph,
    ensemble: &NullEnsemble,
    method: BoundMethod,
    alpha: f64,
    limit: usize,
) -> Result<SpectralEstimate> {
    let c = comparison_matrix(g, &ensemble.expectation)?;
    let bounds = estimate_bounds(ensemble, &ensemble.expectation)?;
    let decomposition = data_decomposition(&c, bounds.upper_bound, bounds.lower_bound, limit)?;
    let (mut d_pos, d_neg) = detect_dimensions(&decomposition.values, bounds.upper_bound, bounds.lower_bound);
    let test = match method {
        BoundMethod::Mean => None,
        BoundMethod::ConfidenceInterval => {
            Some(stats::ci_test(&bounds.sampled_maxima, &decomposition.values, alpha)?)
        }
        BoundMethod::TTest => Some(stats::t_test(&bounds.sampled_maxima, &decomposition.values, alpha)?),
        BoundMethod::Permutation => Some(stats::permutation_test(
            &bounds.sampled_maxima,
            &decomposition.values,
            alpha,
            stats::DEFAULT_PERMUTATIONS,
            ensemble.spec.seed,
        )?),
    };
    if let Some(report) = &test {
        d_pos = report.exceeding();
    }
    Ok(SpectralEstimate {
        decomposition,
        bounds,
        d_pos,
        d_neg,
        method,
        test,
    })
}

/// Data eigendecomposition, bounds and dimension counts. With a test method
/// other than [`BoundMethod::Mean`], `d_pos` counts the eigenvalues the test
/// declares significant at level `alpha`.
pub fn spectral_estimate(
    g: &WeightedGraph,
    ensemble: &NullEnsemble,
    method: BoundMethod,
    alpha: f64,
) -> Result<SpectralEstimate> {
    estimate_with_limit(g, ensemble, method, alpha, FULL_DECOMPOSITION_LIMIT)
}
