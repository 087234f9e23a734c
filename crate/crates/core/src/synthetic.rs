//! Weighted stochastic block model with an optional halo of noise nodes.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::matrix::DenseMatrix;
use crate::partition::Partition;
use crate::rng::{self, Domain};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    /// Nodes in modules.
    pub n: usize,
    /// Number of equal-sized modules.
    pub groups: usize,
    pub p_within: f64,
    pub p_between: f64,
    /// Link probability of any pair involving a noise node.
    pub p_noise: f64,
    /// Noise nodes as a fraction of `n`.
    pub f_noise: f64,
    /// Mean of the Poisson strength distribution.
    pub lambda_s: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n: 400,
            groups: 4,
            p_within: 0.05,
            p_between: 0.05,
            p_noise: 0.0,
            f_noise: 0.0,
            lambda_s: 200.0,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    /// `T = n + floor(n f_noise)`.
    pub fn total_nodes(&self) -> usize {
        self.n + self.noise_nodes()
    }

    pub fn noise_nodes(&self) -> usize {
        (self.n as f64 * self.f_noise).floor() as usize
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("p_within", self.p_within),
            ("p_between", self.p_between),
            ("p_noise", self.p_noise),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        if self.groups == 0 || self.n % self.groups != 0 {
            return Err(Error::InvalidParameter(format!(
                "n = {} is not divisible into {} groups",
                self.n, self.groups
            )));
        }
        if !(self.f_noise.is_finite() && self.f_noise >= 0.0) {
            return Err(Error::InvalidParameter("f_noise must be >= 0".into()));
        }
        if !(self.lambda_s.is_finite() && self.lambda_s >= 0.0) {
            return Err(Error::InvalidParameter("lambda_s must be >= 0".into()));
        }
        Ok(())
    }
}

/// Planted modules of the first `n` nodes and the noise halo after them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub module_of: Vec<usize>,
    pub noise_nodes: Vec<usize>,
}

impl GroundTruth {
    pub fn total_nodes(&self) -> usize {
        self.module_of.len() + self.noise_nodes.len()
    }

    pub fn is_noise(&self, node: usize) -> bool {
        node >= self.module_of.len()
    }

    /// Planted modules only.
    pub fn modules(&self) -> Partition {
        Partition::from_labels(&self.module_of)
    }
}

/// Draws a network from `spec` and returns it with its ground truth.
///
/// Links are independent Bernoulli draws: `p_within` or `p_between` among
/// module nodes, `p_noise` for any pair touching a noise node. Strengths are
/// Poisson(`lambda_s`), and every link gets weight `1 + Poisson(N_link
/// s_i s_j / Σ_links s_i s_j)` with `N_link = max(0, (1/2) Σ s - m)`.
pub fn generate_wsbm(spec: &SyntheticSpec) -> Result<(WeightedGraph, GroundTruth)> {
    spec.validate()?;
    let t = spec.total_nodes();
    let block = spec.n / spec.groups;
    let module_of: Vec<usize> = (0..spec.n).map(|i| i / block).collect();
    let mut rng = rng::stream(spec.seed, Domain::Synthetic, 0);

    let mut links = Vec::new();
    for i in 0..t {
        for j in (i + 1)..t {
            let p = if i >= spec.n || j >= spec.n {
                spec.p_noise
            } else if module_of[i] == module_of[j] {
                spec.p_within
            } else {
                spec.p_between
            };
            if rng.random::<f64>() < p {
                links.push((i, j));
            }
        }
    }

    let strengths: Vec<f64> = if spec.lambda_s > 0.0 {
        let poisson = Poisson::new(spec.lambda_s).expect("positive rate");
        (0..t).map(|_| poisson.sample(&mut rng)).collect()
    } else {
        vec![0.0; t]
    };
    let budget = (strengths.iter().sum::<f64>() / 2.0 - links.len() as f64).max(0.0);
    let normalizer: f64 = links.iter().map(|&(i, j)| strengths[i] * strengths[j]).sum();

    let mut weights = DenseMatrix::zeros(t, t);
    for &(i, j) in &links {
        let lambda = if normalizer > 0.0 {
            budget * strengths[i] * strengths[j] / normalizer
        } else {
            0.0
        };
        let extra = if lambda > 0.0 {
            Poisson::new(lambda).expect("positive rate").sample(&mut rng)
        } else {
            0.0
        };
        weights[(i, j)] = 1.0 + extra;
        weights[(j, i)] = 1.0 + extra;
    }
    let labels = (0..t).map(|i| i.to_string()).collect();
    let graph = WeightedGraph::new(labels, weights)?;
    let truth = GroundTruth {
        module_of,
        noise_nodes: (spec.n..t).collect(),
    };
    Ok((graph, truth))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halo_size() {
        let spec = SyntheticSpec {
            f_noise: 0.25,
            ..Default::default()
        };
        assert_eq!(spec.total_nodes(), 500);
        let spec = SyntheticSpec {
            n: 10,
            groups: 2,
            f_noise: 0.35,
            ..Default::default()
        };
        assert_eq!(spec.total_nodes(), 13);
    }

    #[test]
    fn invalid_specs() {
        let bad = [
            SyntheticSpec { n: 10, groups: 3, ..Default::default() },
            SyntheticSpec { p_within: 1.5, ..Default::default() },
            SyntheticSpec { f_noise: -0.1, ..Default::default() },
        ];
        for spec in bad {
            assert!(generate_wsbm(&spec).is_err());
        }
    }

    #[test]
    fn ground_truth_layout() {
        let spec = SyntheticSpec {
            n: 12,
            groups: 3,
            f_noise: 0.25,
            p_noise: 0.5,
            ..Default::default()
        };
        let (g, truth) = generate_wsbm(&spec).unwrap();
        assert_eq!(g.n(), 15);
        assert_eq!(truth.module_of, vec![0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2]);
        assert_eq!(truth.noise_nodes, vec![12, 13, 14]);
        assert!(truth.is_noise(13) && !truth.is_noise(11));
    }

    #[test]
    fn zero_probabilities_give_empty_graph() {
        let spec = SyntheticSpec {
            n: 20,
            p_within: 0.0,
            p_between: 0.0,
            ..Default::default()
        };
        let (g, _) = generate_wsbm(&spec).unwrap();
        assert_eq!(g.unique_links(), 0);
    }

    #[test]
    fn deterministic_and_integer() {
        let spec = SyntheticSpec {
            n: 40,
            p_within: 0.3,
            seed: 11,
            ..Default::default()
        };
        let (a, _) = generate_wsbm(&spec).unwrap();
        let (b, _) = generate_wsbm(&spec).unwrap();
        assert_eq!(a.weights(), b.weights());
        assert!(a.links().iter().all(|&(_, _, w)| w >= 1.0 && w.fract() == 0.0));
    }
}
