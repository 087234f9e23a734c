//! Partition distances and rejection accuracy.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::synthetic::GroundTruth;

fn entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Variation of information `H(a) + H(b) - 2 I(a, b)` in nats.
pub fn variation_of_information(a: &Partition, b: &Partition) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let n = a.len() as f64;
    let mut joint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (&x, &y) in a.assignment().iter().zip(b.assignment()) {
        *joint.entry((x, y)).or_insert(0) += 1;
    }
    let ha = entropy(a.group_sizes().into_iter(), n);
    let hb = entropy(b.group_sizes().into_iter(), n);
    let hab = entropy(joint.values().copied(), n);
    // VI = 2 H(a,b) - H(a) - H(b); clamp rounding below zero
    Ok((2.0 * hab - ha - hb).max(0.0))
}

/// Variation of information divided by `ln n`, in `[0, 1]`.
pub fn vi_normalized(a: &Partition, b: &Partition) -> Result<f64> {
    let vi = variation_of_information(a, b)?;
    if a.len() < 2 {
        return Ok(0.0);
    }
    Ok((vi / (a.len() as f64).ln()).min(1.0))
}

/// Rejection accuracy; a rate is absent when its class is empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RejectionScore {
    /// Fraction of module nodes retained.
    pub tpr: Option<f64>,
    /// Fraction of noise nodes rejected.
    pub tnr: Option<f64>,
}

pub fn rejection_score(rejected: &[usize], truth: &GroundTruth) -> Result<RejectionScore> {
    let total = truth.total_nodes();
    let mut is_rejected = vec![false; total];
    for &r in rejected {
        if r >= total {
            return Err(Error::InvalidParameter(format!("node {r} is outside the ground truth")));
        }
        is_rejected[r] = true;
    }
    let modules = truth.module_of.len();
    let retained_modular = (0..modules).filter(|&i| !is_rejected[i]).count();
    let rejected_noise = truth.noise_nodes.iter().filter(|&&i| is_rejected[i]).count();
    Ok(RejectionScore {
        tpr: (modules > 0).then(|| retained_modular as f64 / modules as f64),
        tnr: (!truth.noise_nodes.is_empty()).then(|| rejected_noise as f64 / truth.noise_nodes.len() as f64),
    })
}

/// Ground truths over all nodes: (each noise node in its own group, all noise
/// nodes in one extra group).
pub fn ground_truth_variants(truth: &GroundTruth) -> (Partition, Partition) {
    let modules = truth.module_of.iter().max().map_or(0, |m| m + 1);
    let mut own = truth.module_of.clone();
    let mut shared = truth.module_of.clone();
    for (k, _) in truth.noise_nodes.iter().enumerate() {
        own.push(modules + k);
        shared.push(modules);
    }
    (Partition::from_labels(&own), Partition::from_labels(&shared))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(labels: &[usize]) -> Partition {
        Partition::from_labels(labels)
    }

    #[test]
    fn identical_and_crossed() {
        assert_eq!(vi_normalized(&p(&[0, 0, 1, 1]), &p(&[1, 1, 0, 0])).unwrap(), 0.0);
        let crossed = vi_normalized(&p(&[0, 0, 1, 1]), &p(&[0, 1, 0, 1])).unwrap();
        assert!((crossed - 1.0).abs() < 1e-12);
        assert!(vi_normalized(&p(&[0, 0]), &p(&[0, 0, 0])).is_err());
    }

    #[test]
    fn rejection_cases() {
        let truth = GroundTruth {
            module_of: vec![0, 0, 1, 1],
            noise_nodes: vec![4, 5],
        };
        let perfect = rejection_score(&[4, 5], &truth).unwrap();
        assert_eq!((perfect.tpr, perfect.tnr), (Some(1.0), Some(1.0)));
        let all = rejection_score(&[0, 1, 2, 3, 4, 5], &truth).unwrap();
        assert_eq!((all.tpr, all.tnr), (Some(0.0), Some(1.0)));
        let clean = GroundTruth {
            module_of: vec![0, 1],
            noise_nodes: vec![],
        };
        let s = rejection_score(&[1], &clean).unwrap();
        assert_eq!((s.tpr, s.tnr), (Some(0.5), None));
    }

    #[test]
    fn variant_group_counts() {
        let truth = GroundTruth {
            module_of: vec![0, 0, 1, 1, 2, 2, 3, 3],
            noise_nodes: vec![8, 9, 10],
        };
        let (own, shared) = ground_truth_variants(&truth);
        assert_eq!(own.num_groups(), 7);
        assert_eq!(shared.num_groups(), 5);
        let clean = GroundTruth {
            module_of: vec![0, 1, 1],
            noise_nodes: vec![],
        };
        let (own, shared) = ground_truth_variants(&clean);
        assert_eq!(own, clean.modules());
        assert_eq!(shared, clean.modules());
    }
}
