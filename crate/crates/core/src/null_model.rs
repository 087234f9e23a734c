//! Weighted configuration-model null networks.
//!
//! Two generative models preserve the data's strength sequence:
//!
//! - the full weighted configuration model (WCM) spreads weight over every
//!   pair of nodes with rate proportional to `s_i s_j`;
//! - the sparse WCM first draws an adjacency matrix `A*` with link
//!   probability `k_i k_j / 2m` and then places weight only on those links.
//!
//! Real-valued graphs are scaled by `kappa` and rounded before sampling and
//! the samples are scaled back by `1 / kappa`, so sampled weights always lie
//! on the grid `{0, 1/kappa, 2/kappa, ...}`.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{WeightedGraph, MAX_EXACT_INTEGER};
use crate::matrix::DenseMatrix;
use crate::rng::{self, Domain, StreamRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NullKind {
    FullWcm,
    SparseWcm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    Poisson,
    StubMatching,
}

/// Weight budget left for the sparse model after every sampled link has
/// received its base weight of one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualBudget {
    /// `(1/2) sum_i s_i - m*`: expected sampled total equals the data total.
    Conserving,
    /// `(1/2) sum_i s_i - 2 m*`, as printed in the original method description.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullModelSpec {
    pub kind: NullKind,
    pub num_samples: usize,
    pub kappa: f64,
    pub sampler: SamplerKind,
    pub seed: u64,
    pub residual_budget: ResidualBudget,
}

impl NullModelSpec {
    pub fn new(kind: NullKind) -> Self {
        Self {
            kind,
            num_samples: 100,
            kappa: 1.0,
            sampler: SamplerKind::Poisson,
            seed: 0,
            residual_budget: ResidualBudget::Conserving,
        }
    }

    pub fn with_samples(mut self, n: usize) -> Self {
        self.num_samples = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn with_sampler(mut self, sampler: SamplerKind) -> Self {
        self.sampler = sampler;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_samples < 1 {
            return Err(Error::InvalidParameter("num_samples must be >= 1".into()));
        }
        if !(self.kappa.is_finite() && self.kappa >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "kappa must be >= 1, got {}",
                self.kappa
            )));
        }
        Ok(())
    }
}

/// One sampled null network, kept as its unique links.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledNetwork {
    n: usize,
    links: Vec<(u32, u32, f64)>,
}

impl SampledNetwork {
    fn from_counts(n: usize, counts: Vec<(u32, u32, u64)>, kappa: f64) -> Self {
        let links = counts
            .into_iter()
            .filter(|&(_, _, c)| c > 0)
            .map(|(i, j, c)| (i, j, c as f64 / kappa))
            .collect();
        Self { n, links }
    }

    /// The links of `g` as a sample.
    pub fn from_graph(g: &WeightedGraph) -> Self {
        Self {
            n: g.n(),
            links: g.links().into_iter().map(|(i, j, w)| (i as u32, j as u32, w)).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Unique links `(i, j, w)` with `i < j` and `w > 0`.
    pub fn links(&self) -> &[(u32, u32, f64)] {
        &self.links
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.n, self.n);
        for &(i, j, w) in &self.links {
            m[(i as usize, j as usize)] = w;
            m[(j as usize, i as usize)] = w;
        }
        m
    }

    pub fn strengths(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.n];
        for &(i, j, w) in &self.links {
            s[i as usize] += w;
            s[j as usize] += w;
        }
        s
    }

    pub fn total_weight(&self) -> f64 {
        self.links.iter().map(|l| l.2).sum()
    }

    /// `C* = P* - <P>`.
    pub fn comparison(&self, expectation: &DenseMatrix) -> Result<DenseMatrix> {
        if expectation.rows() != self.n || expectation.cols() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: expectation.rows(),
            });
        }
        let mut c = expectation.clone();
        c.scale(-1.0);
        for &(i, j, w) in &self.links {
            c[(i as usize, j as usize)] += w;
            c[(j as usize, i as usize)] += w;
        }
        Ok(c)
    }

    /// The sample as a graph sharing `g`'s labels.
    pub fn to_graph(&self, g: &WeightedGraph) -> Result<WeightedGraph> {
        WeightedGraph::new(g.labels().to_vec(), self.to_dense())
    }
}

/// `kappa`-scaled integer view of a graph, computed once per ensemble.
#[derive(Debug, Clone)]
struct ScaledGraph {
    n: usize,
    kappa: f64,
    strengths: Vec<u64>,
    degrees: Vec<u64>,
}

impl ScaledGraph {
    fn new(g: &WeightedGraph, kappa: f64) -> Result<Self> {
        let n = g.n();
        let mut strengths = vec![0u64; n];
        let mut degrees = vec![0u64; n];
        for i in 0..n {
            for j in 0..n {
                let scaled = (g.weight(i, j) * kappa).round();
                if !scaled.is_finite() || scaled > MAX_EXACT_INTEGER {
                    return Err(Error::Overflow(format!("weight {} * {kappa}", g.weight(i, j))));
                }
                if scaled > 0.0 {
                    strengths[i] = strengths[i]
                        .checked_add(scaled as u64)
                        .ok_or_else(|| Error::Overflow(format!("strength of node {i}")))?;
                    degrees[i] += 1;
                }
            }
        }
        if strengths.iter().try_fold(0u64, |acc, &s| acc.checked_add(s)).is_none() {
            return Err(Error::Overflow("total strength".into()));
        }
        Ok(Self {
            n,
            kappa,
            strengths,
            degrees,
        })
    }

    fn total_strength(&self) -> u64 {
        self.strengths.iter().sum()
    }
}

/// Analytic full-WCM expectation `<P>_ij = s_i s_j / sum_k s_k`, diagonal
/// included, so that `sum_ij <P>_ij = sum_ij W_ij`.
pub fn wcm_expectation(g: &WeightedGraph) -> Result<DenseMatrix> {
    if g.n() < 2 {
        return Err(Error::InvalidGraph("expectation needs at least two nodes".into()));
    }
    let s = g.strengths();
    let total: f64 = s.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroWeight);
    }
    Ok(DenseMatrix::from_fn(g.n(), g.n(), |i, j| s[i] * s[j] / total))
}

fn poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    // Poisson::new only fails for non-positive or non-finite rates
    Poisson::new(lambda).expect("positive finite rate").sample(rng) as u64
}

/// Places `budget` units of weight on `pairs` with rates proportional to
/// `s_i s_j`: independent Poisson counts, or one multinomial draw.
fn place_weight(
    scaled: &ScaledGraph,
    pairs: &[(u32, u32)],
    budget: f64,
    sampler: SamplerKind,
    rng: &mut StreamRng,
    counts: &mut [u64],
) {
    if budget <= 0.0 || pairs.is_empty() {
        return;
    }
    let s = &scaled.strengths;
    let normalizer: f64 = pairs
        .iter()
        .map(|&(i, j)| s[i as usize] as f64 * s[j as usize] as f64)
        .sum();
    if normalizer <= 0.0 {
        return;
    }
    match sampler {
        SamplerKind::Poisson => {
            for (c, &(i, j)) in counts.iter_mut().zip(pairs) {
                let p = s[i as usize] as f64 * s[j as usize] as f64 / normalizer;
                *c += poisson(budget * p, rng);
            }
        }
        SamplerKind::StubMatching => {
            // multinomial by sequential conditional binomials
            let mut remaining = budget.floor() as u64;
            let mut mass_left = normalizer;
            for (c, &(i, j)) in counts.iter_mut().zip(pairs) {
                if remaining == 0 {
                    break;
                }
                let mass = s[i as usize] as f64 * s[j as usize] as f64;
                let p = (mass / mass_left).clamp(0.0, 1.0);
                let draw = if p >= 1.0 {
                    remaining
                } else {
                    Binomial::new(remaining, p).expect("valid probability").sample(rng)
                };
                *c += draw;
                remaining -= draw;
                mass_left -= mass;
            }
        }
    }
}

fn sample_full_poisson(scaled: &ScaledGraph, rng: &mut StreamRng) -> Vec<(u32, u32, u64)> {
    let n = scaled.n;
    let pairs: Vec<(u32, u32)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i as u32, j as u32)))
        .filter(|&(i, j)| scaled.strengths[i as usize] > 0 && scaled.strengths[j as usize] > 0)
        .collect();
    let mut counts = vec![0u64; pairs.len()];
    let budget = scaled.total_strength() as f64 / 2.0;
    place_weight(scaled, &pairs, budget, SamplerKind::Poisson, rng, &mut counts);
    pairs
        .into_iter()
        .zip(counts)
        .map(|((i, j), c)| (i, j, c))
        .collect()
}

/// Consecutive self-pairings tolerated before a pairing attempt is abandoned.
const STUB_RETRY_BUDGET: usize = 1_000;

/// Fresh pairing attempts before stub matching gives up.
const STUB_ATTEMPTS: usize = 100;

/// Pairs stubs uniformly at random. `None` when the remaining stubs all
/// belong to one node.
fn pair_stubs(mut stubs: Vec<u32>, rng: &mut StreamRng) -> Option<Vec<(u32, u32, u64)>> {
    let mut counts = std::collections::BTreeMap::new();
    let mut retries = 0usize;
    while stubs.len() >= 2 {
        let a = rng.random_range(0..stubs.len());
        let mut b = rng.random_range(0..stubs.len() - 1);
        if b >= a {
            b += 1;
        }
        let (u, v) = (stubs[a], stubs[b]);
        if u == v {
            retries += 1;
            if retries > STUB_RETRY_BUDGET {
                return None;
            }
            continue;
        }
        retries = 0;
        *counts.entry((u.min(v), u.max(v))).or_insert(0u64) += 1;
        // remove the higher position first so the lower one stays valid
        stubs.swap_remove(a.max(b));
        stubs.swap_remove(a.min(b));
    }
    Some(counts.into_iter().map(|((i, j), c)| (i, j, c)).collect())
}

fn sample_full_stubs(scaled: &ScaledGraph, rng: &mut StreamRng) -> Result<Vec<(u32, u32, u64)>> {
    let mut stubs: Vec<u32> = Vec::with_capacity(scaled.total_strength() as usize);
    for (i, &s) in scaled.strengths.iter().enumerate() {
        stubs.extend(std::iter::repeat_n(i as u32, s as usize));
    }
    for _ in 0..STUB_ATTEMPTS {
        if let Some(links) = pair_stubs(stubs.clone(), rng) {
            return Ok(links);
        }
    }
    Err(Error::RetryBudgetExhausted(STUB_ATTEMPTS))
}

fn sample_sparse(
    scaled: &ScaledGraph,
    sampler: SamplerKind,
    residual: ResidualBudget,
    rng: &mut StreamRng,
) -> Vec<(u32, u32, u64)> {
    let n = scaled.n;
    let k = &scaled.degrees;
    let two_m: u64 = k.iter().sum();
    let mut links: Vec<(u32, u32)> = Vec::new();
    if two_m > 0 {
        for i in 0..n {
            if k[i] == 0 {
                continue;
            }
            for j in (i + 1)..n {
                if k[j] == 0 {
                    continue;
                }
                let p = (k[i] as f64 * k[j] as f64 / two_m as f64).min(1.0);
                if rng.random::<f64>() < p {
                    links.push((i as u32, j as u32));
                }
            }
        }
    }
    let m_star = links.len() as f64;
    let half_total = scaled.total_strength() as f64 / 2.0;
    let budget = match residual {
        ResidualBudget::Conserving => half_total - m_star,
        ResidualBudget::Literal => half_total - 2.0 * m_star,
    }
    .max(0.0);
    let mut counts = vec![1u64; links.len()];
    place_weight(scaled, &links, budget, sampler, rng, &mut counts);
    links
        .into_iter()
        .zip(counts)
        .map(|((i, j), c)| (i, j, c))
        .collect()
}

fn draw(scaled: &ScaledGraph, spec: &NullModelSpec, sample_index: u64) -> Result<SampledNetwork> {
    let mut rng = rng::stream(spec.seed, Domain::NullSample, sample_index);
    let counts = match (spec.kind, spec.sampler) {
        (NullKind::FullWcm, SamplerKind::Poisson) => sample_full_poisson(scaled, &mut rng),
        (NullKind::FullWcm, SamplerKind::StubMatching) => sample_full_stubs(scaled, &mut rng)?,
        (NullKind::SparseWcm, sampler) => {
            sample_sparse(scaled, sampler, spec.residual_budget, &mut rng)
        }
    };
    Ok(SampledNetwork::from_counts(scaled.n, counts, scaled.kappa))
}

/// One full-WCM sample: every unordered pair gets a Poisson weight with rate
/// `N_link * s_i s_j / sum_pairs s_i s_j`, `N_link = (1/2) sum_i s_i`.
pub fn sample_full_wcm(g: &WeightedGraph, spec: &NullModelSpec, sample_index: u64) -> Result<SampledNetwork> {
    spec.validate()?;
    let spec = NullModelSpec {
        kind: NullKind::FullWcm,
        sampler: SamplerKind::Poisson,
        ..*spec
    };
    draw(&ScaledGraph::new(g, spec.kappa)?, &spec, sample_index)
}

/// One sparse-WCM sample: Bernoulli links with probability
/// `min(1, k_i k_j / 2m)`, base weight one on each, plus Poisson top-up of
/// the residual budget restricted to the sampled links.
pub fn sample_sparse_wcm(g: &WeightedGraph, spec: &NullModelSpec, sample_index: u64) -> Result<SampledNetwork> {
    spec.validate()?;
    let spec = NullModelSpec {
        kind: NullKind::SparseWcm,
        ..*spec
    };
    draw(&ScaledGraph::new(g, spec.kappa)?, &spec, sample_index)
}

/// One exact full-WCM sample by uniform stub pairing. Self-pairings are
/// redrawn; an odd leftover stub is dropped.
pub fn sample_stub_matching(g: &WeightedGraph, spec: &NullModelSpec, sample_index: u64) -> Result<SampledNetwork> {
    spec.validate()?;
    let spec = NullModelSpec {
        kind: NullKind::FullWcm,
        sampler: SamplerKind::StubMatching,
        ..*spec
    };
    draw(&ScaledGraph::new(g, spec.kappa)?, &spec, sample_index)
}

/// Sampled null networks together with the expectation `<P>`.
#[derive(Debug, Clone)]
pub struct NullEnsemble {
    pub spec: NullModelSpec,
    pub expectation: DenseMatrix,
    pub samples: Vec<SampledNetwork>,
}

impl NullEnsemble {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn n(&self) -> usize {
        self.expectation.rows()
    }
}

/// Generates `spec.num_samples` null networks. Sample `i` only depends on
/// `(graph, spec, i)`, so generation runs in parallel on the current rayon
/// pool without affecting the result. The expectation is analytic for the
/// full WCM and the element-wise sample mean for the sparse WCM.
pub fn build_ensemble(g: &WeightedGraph, spec: &NullModelSpec) -> Result<NullEnsemble> {
    spec.validate()?;
    let scaled = ScaledGraph::new(g, spec.kappa)?;
    let samples: Vec<SampledNetwork> = (0..spec.num_samples as u64)
        .into_par_iter()
        .map(|i| draw(&scaled, spec, i))
        .collect::<Result<_>>()?;
    let expectation = match spec.kind {
        NullKind::FullWcm => wcm_expectation(g)?,
        NullKind::SparseWcm => {
            let n = g.n();
            let mut mean = DenseMatrix::zeros(n, n);
            for sample in &samples {
                for &(i, j, w) in sample.links() {
                    mean[(i as usize, j as usize)] += w;
                    mean[(j as usize, i as usize)] += w;
                }
            }
            mean.scale(1.0 / samples.len() as f64);
            mean
        }
    };
    Ok(NullEnsemble {
        spec: *spec,
        expectation,
        samples,
    })
}
