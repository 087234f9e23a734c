use rand::Rng;
use rayon::prelude::*;

use super::{modularity, Partition};
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::rng::{self, Domain, StreamRng};

const MAX_LLOYD_ITERATIONS: usize = 300;

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Number of distinct rows of `points`, compared bitwise.
pub fn distinct_rows(points: &DenseMatrix) -> usize {
    let mut seen = std::collections::HashSet::new();
    for i in 0..points.rows() {
        let key: Vec<u64> = points.row(i).iter().map(|x| x.to_bits()).collect();
        seen.insert(key);
    }
    seen.len()
}

fn nearest(point: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (k, c) in centers.iter().enumerate() {
        let d = squared_distance(point, c);
        if d < best.1 {
            best = (k, d);
        }
    }
    best
}

/// Distance-weighted seeding: the first center is uniform, each further one
/// is drawn with probability proportional to its squared distance from the
/// nearest chosen center.
fn seed_centers(points: &DenseMatrix, c: usize, rng: &mut StreamRng) -> Vec<Vec<f64>> {
    let n = points.rows();
    let mut centers = vec![points.row(rng.random_range(0..n)).to_vec()];
    let mut dist: Vec<f64> = (0..n)
        .map(|i| squared_distance(points.row(i), &centers[0]))
        .collect();
    while centers.len() < c {
        let total: f64 = dist.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in dist.iter().enumerate() {
                if target < d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            // rounding can land on a zero-distance point
            if dist[chosen] == 0.0 {
                chosen = dist.iter().rposition(|&d| d > 0.0).unwrap_or(chosen);
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let center = points.row(pick).to_vec();
        for (i, d) in dist.iter_mut().enumerate() {
            *d = d.min(squared_distance(points.row(i), &center));
        }
        centers.push(center);
    }
    centers
}

/// One k-means run: seeding followed by Lloyd iterations. An emptied
/// cluster takes over the point farthest from its current center.
pub fn kmeans_once(points: &DenseMatrix, c: usize, rng: &mut StreamRng) -> Vec<usize> {
    let n = points.rows();
    let mut centers = seed_centers(points, c, rng);
    let mut labels = vec![usize::MAX; n];
    for _ in 0..MAX_LLOYD_ITERATIONS {
        let mut changed = false;
        let mut dist = vec![0.0; n];
        for i in 0..n {
            let (k, d) = nearest(points.row(i), &centers);
            dist[i] = d;
            if labels[i] != k {
                labels[i] = k;
                changed = true;
            }
        }
        let mut sizes = vec![0usize; c];
        for &l in &labels {
            sizes[l] += 1;
        }
        for k in 0..c {
            if sizes[k] == 0 {
                let far = (0..n)
                    .filter(|&i| sizes[labels[i]] > 1)
                    .max_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(b.cmp(&a)))
                    .expect("more points than clusters");
                sizes[labels[far]] -= 1;
                labels[far] = k;
                sizes[k] = 1;
                dist[far] = 0.0;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        for center in centers.iter_mut() {
            center.iter_mut().for_each(|x| *x = 0.0);
        }
        for i in 0..n {
            for (x, p) in centers[labels[i]].iter_mut().zip(points.row(i)) {
                *x += p;
            }
        }
        for (k, center) in centers.iter_mut().enumerate() {
            let size = sizes[k] as f64;
            center.iter_mut().for_each(|x| *x /= size);
        }
    }
    labels
}

/// `restarts` independent k-means runs; run `r` draws from stream `r` of
/// `seed`.
pub fn kmeans_runs(points: &DenseMatrix, c: usize, restarts: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if c < 1 {
        return Err(Error::InvalidParameter("k-means needs c >= 1".into()));
    }
    let distinct = distinct_rows(points);
    if distinct < c {
        return Err(Error::TooFewPoints {
            points: distinct,
            clusters: c,
        });
    }
    Ok((0..restarts as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::stream(seed, Domain::KMeans, r);
            kmeans_once(points, c, &mut rng)
        })
        .collect())
}

/// Best of `restarts` k-means runs on the rows of `points` by modularity on
/// `comparison`; ties go to the earliest restart.
pub fn kmeans_partition(
    points: &DenseMatrix,
    c: usize,
    restarts: usize,
    comparison: &DenseMatrix,
    seed: u64,
) -> Result<Partition> {
    if c < 2 {
        return Err(Error::InvalidParameter("k-means partition needs c >= 2".into()));
    }
    if restarts < 1 {
        return Err(Error::InvalidParameter("k-means partition needs p >= 1".into()));
    }
    if comparison.rows() != points.rows() {
        return Err(Error::DimensionMismatch {
            expected: points.rows(),
            found: comparison.rows(),
        });
    }
    let mut best: Option<Partition> = None;
    for labels in kmeans_runs(points, c, restarts, seed)? {
        let mut p = Partition::from_labels(&labels);
        p.quality = Some(modularity(comparison, &p)?);
        if best.as_ref().is_none_or(|b| p.quality > b.quality) {
            best = Some(p);
        }
    }
    Ok(best.expect("at least one restart"))
}
