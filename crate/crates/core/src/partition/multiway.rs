use rand::seq::SliceRandom;
use serde::Serialize;

use super::{modularity, Partition};
use crate::eigen::SymmetricEigen;
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::rng::{self, Domain};

const MAX_ITERATIONS: usize = 1000;

#[derive(Debug, Clone)]
pub struct MultiwayResult {
    pub partition: Partition,
    pub converged: bool,
    pub iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Node vectors `[r_i]_l = sqrt(λ_l) U_il` over the top `k - 1` pairs.
fn node_vectors(pairs: &SymmetricEigen, k: usize) -> Result<DenseMatrix> {
    let dims = k - 1;
    let available = pairs.values.iter().take_while(|&&l| l > 0.0).count();
    if dims > available {
        return Err(Error::InvalidParameter(format!(
            "k = {k} needs {dims} positive eigenpairs, only {available} available"
        )));
    }
    let v = &pairs.vectors;
    Ok(DenseMatrix::from_fn(v.rows(), dims, |i, l| pairs.values[l].sqrt() * v[(i, l)]))
}

/// Multi-way vector partitioning into at most `k` groups.
///
/// Group vectors start at `k` distinct node vectors picked at random.
/// Each sweep assigns every node to the group with the largest inner product
/// `R_s^T r_i`, using `(R_s - r_i)^T r_i` for the node's own group; ties keep
/// the current group, otherwise go to the lowest group index. Group vectors
/// are then recomputed as `R_s = Σ_{i in s} r_i`, and sweeps repeat until no
/// node moves. Groups that empty out are dropped.
pub fn multiway_partition(
    pairs: &SymmetricEigen,
    k: usize,
    comparison: &DenseMatrix,
    seed: u64,
) -> Result<MultiwayResult> {
    if k < 2 {
        return Err(Error::InvalidParameter("multi-way partition needs k >= 2".into()));
    }
    let r = node_vectors(pairs, k)?;
    let n = r.rows();
    if n < k {
        return Err(Error::TooFewPoints { points: n, clusters: k });
    }
    let dims = r.cols();
    let mut rng = rng::stream(seed, Domain::Multiway, k as u64);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut groups: Vec<Vec<f64>> = Vec::with_capacity(k);
    for i in order {
        let v = r.row(i);
        if !groups.iter().any(|g| g.as_slice() == v) {
            groups.push(v.to_vec());
            if groups.len() == k {
                break;
            }
        }
    }
    if groups.len() < k {
        return Err(Error::TooFewPoints {
            points: groups.len(),
            clusters: k,
        });
    }
    let mut assignment: Vec<Option<usize>> = vec![None; n];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut next = assignment.clone();
        for i in 0..n {
            let ri = r.row(i);
            let score = |s: usize| {
                let own = dot(&groups[s], ri);
                if assignment[i] == Some(s) {
                    own - dot(ri, ri)
                } else {
                    own
                }
            };
            let mut best = assignment[i].unwrap_or(0);
            let mut best_score = score(best);
            for s in 0..groups.len() {
                let value = score(s);
                if value > best_score {
                    best = s;
                    best_score = value;
                }
            }
            next[i] = Some(best);
        }
        let moved = next != assignment;
        assignment = next;
        if !moved {
            converged = true;
            break;
        }
        let mut sums = vec![vec![0.0; dims]; groups.len()];
        let mut sizes = vec![0usize; groups.len()];
        for (i, a) in assignment.iter().enumerate() {
            let s = a.expect("assigned");
            sizes[s] += 1;
            for (x, y) in sums[s].iter_mut().zip(r.row(i)) {
                *x += y;
            }
        }
        // drop empty groups and renumber the rest
        let mut renumber = vec![usize::MAX; groups.len()];
        let mut kept = Vec::new();
        for (s, sum) in sums.into_iter().enumerate() {
            if sizes[s] > 0 {
                renumber[s] = kept.len();
                kept.push(sum);
            }
        }
        if kept.len() != groups.len() {
            for a in assignment.iter_mut() {
                *a = a.map(|s| renumber[s]);
            }
        }
        groups = kept;
    }
    let labels: Vec<usize> = assignment.into_iter().map(|a| a.unwrap_or(0)).collect();
    let mut partition = Partition::from_labels(&labels);
    partition.quality = Some(modularity(comparison, &partition)?);
    Ok(MultiwayResult {
        partition,
        converged,
        iterations,
    })
}

/// Index into `ks` of the knee of `q` against `ks`: the interior point where
/// separate least-squares lines through the points up to and from it leave
/// the smallest total squared error. Ties go to the lowest `k`.
pub fn knee(ks: &[f64], q: &[f64]) -> Result<usize> {
    if ks.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: ks.len(),
            found: q.len(),
        });
    }
    if ks.is_empty() {
        return Err(Error::InvalidParameter("knee detection needs points".into()));
    }
    let sse = |xs: &[f64], ys: &[f64]| -> f64 {
        if xs.len() < 3 {
            return 0.0;
        }
        let m = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / m;
        let my = ys.iter().sum::<f64>() / m;
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        xs.iter()
            .zip(ys)
            .map(|(x, y)| {
                let e = y - (my + slope * (x - mx));
                e * e
            })
            .sum()
    };
    if ks.len() < 3 {
        return Ok(0);
    }
    let total = |i: usize| sse(&ks[..=i], &q[..=i]) + sse(&ks[i..], &q[i..]);
    let mut best = (1, total(1));
    for i in 2..ks.len() - 1 {
        let t = total(i);
        // relative slack so rounding noise does not break ties
        if t < best.1 - 1e-12 * (1.0 + best.1.abs()) {
            best = (i, t);
        }
    }
    Ok(best.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct MultiwayScan {
    pub ks: Vec<usize>,
    pub qualities: Vec<f64>,
    pub selected_k: usize,
}

/// Multi-way partitions for `k = 2..=k_max` (fewer when there are not enough
/// positive eigenpairs), keeping the partition at the knee of the Q curve.
pub fn multiway_unsupervised(
    pairs: &SymmetricEigen,
    k_max: usize,
    comparison: &DenseMatrix,
    seed: u64,
) -> Result<(MultiwayResult, MultiwayScan)> {
    if k_max < 3 {
        return Err(Error::InvalidParameter("k_max must be >= 3 for knee detection".into()));
    }
    let available = pairs.values.iter().take_while(|&&l| l > 0.0).count();
    let top = k_max.min(available + 1).min(comparison.rows());
    if top < 2 {
        return Err(Error::NoStructure("no positive eigenpairs to partition with"));
    }
    let ks: Vec<usize> = (2..=top).collect();
    let results: Vec<MultiwayResult> = ks
        .iter()
        .map(|&k| multiway_partition(pairs, k, comparison, seed))
        .collect::<Result<_>>()?;
    let qualities: Vec<f64> = results
        .iter()
        .map(|r| r.partition.quality.expect("scored"))
        .collect();
    let xs: Vec<f64> = ks.iter().map(|&k| k as f64).collect();
    let pick = knee(&xs, &qualities)?;
    let scan = MultiwayScan {
        selected_k: ks[pick],
        ks,
        qualities,
    };
    Ok((results.into_iter().nth(pick).expect("picked index"), scan))
}
