use serde::Serialize;

use super::kmeans::{distinct_rows, kmeans_runs};
use super::Partition;
use crate::eigen;
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::rejection::{project_eigenpairs, NormWeighting};
use crate::rng::{self, Domain};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsensusConfig {
    /// k-means restarts per tested cluster count.
    pub restarts: usize,
    pub max_iterations: usize,
    /// Entries within this distance of 0 or 1 count as binary.
    pub tolerance: f64,
    /// Upper clamp on the number of cluster counts scanned per iteration.
    pub max_k: usize,
    pub seed: u64,
}

impl Default for ConsensusConfig {
    fn default() -> Self {
        Self {
            restarts: 100,
            max_iterations: 50,
            tolerance: 1e-3,
            max_k: 20,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConsensusState {
    /// Last co-clustering matrix `D`.
    #[serde(skip)]
    pub consensus_matrix: DenseMatrix,
    /// The uniform entry of `P^con` used with the last `D`.
    pub null_value: f64,
    /// Largest cluster count scanned in the last iteration.
    pub k_max: usize,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct ConsensusResult {
    pub partition: Partition,
    pub state: ConsensusState,
}

/// `D_ij`: fraction of partitions placing `i` and `j` together.
fn coclustering(n: usize, partitions: &[Vec<usize>]) -> DenseMatrix {
    let mut d = DenseMatrix::zeros(n, n);
    for labels in partitions {
        let groups = Partition::from_labels(labels).groups();
        for members in &groups {
            for &i in members {
                let row = d.row_mut(i);
                for &j in members {
                    row[j] += 1.0;
                }
            }
        }
    }
    d.scale(1.0 / partitions.len() as f64);
    d
}

/// Expected co-clustering rate of a pair under structureless partitions
/// into `c` equal groups, averaged over the tested counts:
/// `(1 / |counts|) Σ_c 1/c`.
pub fn null_value(tested: &[usize]) -> f64 {
    tested.iter().map(|&c| 1.0 / c as f64).sum::<f64>() / tested.len() as f64
}

fn is_binary(d: &DenseMatrix, tolerance: f64) -> bool {
    d.as_slice()
        .iter()
        .all(|&x| x <= tolerance || x >= 1.0 - tolerance)
}

/// Groups of the relation `relation(i, j)` if it is an equivalence relation.
fn equivalence_classes(n: usize, relation: impl Fn(usize, usize) -> bool) -> Option<Vec<usize>> {
    let mut labels = vec![usize::MAX; n];
    let mut next = 0;
    for i in 0..n {
        if labels[i] != usize::MAX {
            continue;
        }
        labels[i] = next;
        for j in (i + 1)..n {
            if relation(i, j) {
                if labels[j] != usize::MAX {
                    return None;
                }
                labels[j] = next;
            }
        }
        next += 1;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if relation(i, j) != (labels[i] == labels[j]) {
                return None;
            }
        }
    }
    Some(labels)
}

/// Iterated consensus clustering.
///
/// The first consensus matrix `D` comes from `restarts` k-means partitions
/// of `points` into `initial_groups` clusters. Each iteration projects
/// `C_con = D - P^con` onto its `K` positive eigenpairs, k-means clusters the
/// projection `restarts` times for every `k` in `2..=K`, and rebuilds `D`.
/// Iteration stops once the positive entries of `C_con` describe a single
/// partition (in particular, once `D` is binary). Without convergence the
/// best-modularity partition seen on `comparison` is returned.
pub fn consensus_cluster(
    points: &DenseMatrix,
    initial_groups: usize,
    comparison: &DenseMatrix,
    config: &ConsensusConfig,
) -> Result<ConsensusResult> {
    let n = points.rows();
    if comparison.rows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: comparison.rows(),
        });
    }
    if config.restarts < 1 || config.max_k < 2 {
        return Err(Error::InvalidParameter("consensus needs restarts >= 1 and max_k >= 2".into()));
    }
    let mut best: Option<Partition> = None;
    let mut consider = |labels: &[usize]| -> Result<()> {
        let p = Partition::scored(labels, comparison)?;
        if best.as_ref().is_none_or(|b| p.quality > b.quality) {
            best = Some(p);
        }
        Ok(())
    };

    let seed_for = |iteration: usize, k: usize| {
        rng::derive_seed(config.seed, Domain::Consensus, ((iteration as u64) << 32) | k as u64)
    };
    let mut partitions = kmeans_runs(points, initial_groups, config.restarts, seed_for(0, initial_groups))?;
    let mut tested = vec![initial_groups];
    for labels in &partitions {
        consider(labels)?;
    }

    let mut state = ConsensusState {
        consensus_matrix: DenseMatrix::zeros(n, n),
        null_value: 0.0,
        k_max: initial_groups,
        iterations: 0,
        converged: false,
    };
    for iteration in 1..=config.max_iterations {
        let d = coclustering(n, &partitions);
        let q = null_value(&tested);
        state.iterations = iteration;
        state.null_value = q;
        state.k_max = *tested.iter().max().expect("tested counts");
        if is_binary(&d, config.tolerance) {
            let labels = equivalence_classes(n, |i, j| d[(i, j)] > 0.5)
                .expect("binary co-clustering of partitions is transitive");
            state.consensus_matrix = d;
            state.converged = true;
            return Ok(ConsensusResult {
                partition: Partition::scored(&labels, comparison)?,
                state,
            });
        }
        let mut c_con = d.clone();
        c_con.as_mut_slice().iter_mut().for_each(|x| *x -= q);
        if iteration > 1 {
            if let Some(labels) = equivalence_classes(n, |i, j| c_con[(i, j)] > 0.0) {
                state.consensus_matrix = d;
                state.converged = true;
                return Ok(ConsensusResult {
                    partition: Partition::scored(&labels, comparison)?,
                    state,
                });
            }
        }
        state.consensus_matrix = d;

        let e = eigen::eig_symmetric(&c_con)?;
        let scale = c_con.norm().max(1.0);
        let positive = e.values.iter().filter(|&&l| l > 1e-10 * scale).count();
        let k_top = positive.clamp(2, config.max_k).min(n);
        let projection = project_eigenpairs(&e.top(k_top), NormWeighting::Eigenvalue);
        let distinct = distinct_rows(&projection);
        tested = (2..=k_top).filter(|&k| k <= distinct).collect();
        if tested.is_empty() {
            break;
        }
        partitions.clear();
        for &k in &tested {
            let runs = kmeans_runs(&projection, k, config.restarts, seed_for(iteration, k))?;
            for labels in &runs {
                consider(labels)?;
            }
            partitions.extend(runs);
        }
    }
    Ok(ConsensusResult {
        partition: best.expect("initial partitions exist"),
        state,
    })
}
