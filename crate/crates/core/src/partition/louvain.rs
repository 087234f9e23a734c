use rand::seq::SliceRandom;

use super::Partition;
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::rng::{self, Domain};

const MIN_GAIN: f64 = 1e-12;

/// Local moving on a (possibly aggregated) comparison matrix. Returns the
/// community of every node, or `None` if nothing moved.
fn local_moves(c: &DenseMatrix, order: &[usize]) -> Option<Vec<usize>> {
    let n = c.rows();
    let mut community: Vec<usize> = (0..n).collect();
    let mut moved_any = false;
    let mut links = vec![0.0; n];
    loop {
        let mut moved = false;
        for &i in order {
            links.iter_mut().for_each(|x| *x = 0.0);
            let row = c.row(i);
            for j in 0..n {
                if j != i {
                    links[community[j]] += row[j];
                }
            }
            let current = community[i];
            let mut best = current;
            let mut best_gain = 0.0;
            for (target, &l) in links.iter().enumerate() {
                if target == current {
                    continue;
                }
                // moving i into an empty community only helps if it is
                // currently attached negatively
                let gain = l - links[current];
                if gain > best_gain + MIN_GAIN {
                    best_gain = gain;
                    best = target;
                }
            }
            if best != current {
                community[i] = best;
                moved = true;
                moved_any = true;
            }
        }
        if !moved {
            break;
        }
    }
    moved_any.then_some(community)
}

/// Louvain modularity optimization on a comparison matrix `C`. Node sweeps
/// visit nodes in an order shuffled from `seed`; each level aggregates
/// communities into super-nodes with `C' = S^T C S` until no move improves
/// `Q`.
pub fn louvain(c: &DenseMatrix, seed: u64) -> Result<Partition> {
    if !c.is_square() {
        return Err(Error::DimensionMismatch {
            expected: c.rows(),
            found: c.cols(),
        });
    }
    let n = c.rows();
    let mut membership: Vec<usize> = (0..n).collect();
    let mut level_matrix = c.clone();
    let mut level = 0u64;
    loop {
        let m = level_matrix.rows();
        let mut order: Vec<usize> = (0..m).collect();
        order.shuffle(&mut rng::stream(seed, Domain::Louvain, level));
        let Some(community) = local_moves(&level_matrix, &order) else {
            break;
        };
        let relabelled = Partition::from_labels(&community);
        let k = relabelled.num_groups();
        for g in membership.iter_mut() {
            *g = relabelled.group_of(*g);
        }
        let mut aggregated = DenseMatrix::zeros(k, k);
        for i in 0..m {
            let gi = relabelled.group_of(i);
            for j in 0..m {
                aggregated[(gi, relabelled.group_of(j))] += level_matrix[(i, j)];
            }
        }
        if k == m {
            break;
        }
        level_matrix = aggregated;
        level += 1;
    }
    Partition::scored(&membership, c)
}
