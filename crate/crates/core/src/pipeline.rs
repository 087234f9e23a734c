//! End-to-end analysis of one network, the weight-distribution diagnostic,
//! and detection sweeps over synthetic networks.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen;
use crate::error::{Error, Result};
use crate::graph::{self, WeightedGraph};
use crate::matrix::DenseMatrix;
use crate::metrics;
use crate::null_model::{build_ensemble, NullEnsemble, NullKind, NullModelSpec};
use crate::partition::{
    consensus_cluster, kmeans_partition, louvain, multiway_unsupervised, ConsensusConfig, ConsensusState,
    MultiwayScan, Partition,
};
use crate::rejection::{decompose, kpartite_extract, KPartiteResult, NormWeighting, SignalDecomposition};
use crate::rng::{self, Domain};
use crate::spectral::{self, SpectralEstimate};
use crate::stats::BoundMethod;
use crate::synthetic::{generate_wsbm, SyntheticSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterMethod {
    Kmeans,
    Consensus,
    Louvain,
    Multiway,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub null: NullModelSpec,
    pub bound: BoundMethod,
    pub alpha: f64,
    pub cluster: ClusterMethod,
    /// k-means restarts `p`.
    pub restarts: usize,
    pub weighting: NormWeighting,
    pub multiway_k_max: usize,
}

impl AnalysisConfig {
    pub fn new(null: NullModelSpec) -> Self {
        Self {
            null,
            bound: BoundMethod::Mean,
            alpha: 0.95,
            cluster: ClusterMethod::Consensus,
            restarts: 100,
            weighting: NormWeighting::Eigenvalue,
            multiway_k_max: 20,
        }
    }
}

#[derive(Debug, Clone)]
pub enum ClusterDetail {
    None,
    Consensus(ConsensusState),
    Multiway(MultiwayScan),
}

/// Partition of the signal network.
#[derive(Debug, Clone)]
pub struct Clustering {
    pub method: ClusterMethod,
    /// Over signal-network nodes, in signal order.
    pub partition: Partition,
    /// Modularity divided by the signal network's total weight.
    pub quality_normalized: Option<f64>,
    pub converged: bool,
    pub detail: ClusterDetail,
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub input_nodes: usize,
    /// Giant component of the input; every index below refers to it.
    pub graph: WeightedGraph,
    /// Input index of every giant-component node.
    pub component: Vec<usize>,
    pub ensemble: NullEnsemble,
    pub estimate: SpectralEstimate,
    pub signal: Option<SignalDecomposition>,
    pub clustering: Option<Clustering>,
    pub kpartite: Option<KPartiteResult>,
}

impl Analysis {
    pub fn has_structure(&self) -> bool {
        self.estimate.has_structure()
    }

    /// Input indices of nodes not retained by rejection; includes nodes
    /// outside the giant component.
    pub fn rejected_input_nodes(&self) -> Option<Vec<usize>> {
        let signal = self.signal.as_ref()?;
        let mut kept = vec![false; self.input_nodes];
        for &r in &signal.retained {
            kept[self.component[r]] = true;
        }
        Some((0..self.input_nodes).filter(|&i| !kept[i]).collect())
    }
}

/// Giant component, null ensemble and spectral estimate.
pub fn estimate_structure(
    input: &WeightedGraph,
    config: &AnalysisConfig,
) -> Result<(WeightedGraph, Vec<usize>, NullEnsemble, SpectralEstimate)> {
    config.null.validate()?;
    if input.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let component = graph::giant_component_nodes(input);
    let g = input.induced_subgraph(&component);
    if g.n() < 2 {
        return Err(Error::ZeroWeight);
    }
    let ensemble = build_ensemble(&g, &config.null)?;
    let estimate = spectral::spectral_estimate(&g, &ensemble, config.bound, config.alpha)?;
    Ok((g, component, ensemble, estimate))
}

fn cluster_signal(
    g: &WeightedGraph,
    estimate: &SpectralEstimate,
    signal: &SignalDecomposition,
    expectation: &DenseMatrix,
    config: &AnalysisConfig,
) -> Result<Option<Clustering>> {
    let nodes = &signal.signal_nodes;
    let groups = estimate.d_pos + 1;
    if nodes.len() < groups.max(2) {
        return Ok(None);
    }
    let c = spectral::comparison_matrix(g, expectation)?.submatrix(nodes);
    // clustering uses the unscaled retained eigenvectors; the eigenvalue
    // weighting lets a few hubs dominate the Euclidean distances
    let vectors = estimate.retained_vectors();
    let points = DenseMatrix::from_fn(nodes.len(), vectors.cols(), |i, k| vectors[(nodes[i], k)]);
    let seed = config.null.seed;
    let (partition, converged, detail) = match config.cluster {
        ClusterMethod::Kmeans => (
            kmeans_partition(&points, groups, config.restarts, &c, seed)?,
            true,
            ClusterDetail::None,
        ),
        ClusterMethod::Consensus => {
            let consensus = ConsensusConfig {
                restarts: config.restarts,
                seed,
                ..Default::default()
            };
            let r = consensus_cluster(&points, groups, &c, &consensus)?;
            let converged = r.state.converged;
            (r.partition, converged, ClusterDetail::Consensus(r.state))
        }
        ClusterMethod::Louvain => (louvain(&c, seed)?, true, ClusterDetail::None),
        ClusterMethod::Multiway => {
            let e = eigen::eig_symmetric(&c)?;
            let (r, scan) = multiway_unsupervised(&e, config.multiway_k_max, &c, seed)?;
            (r.partition, r.converged, ClusterDetail::Multiway(scan))
        }
    };
    let total = signal.signal_graph.weights().sum();
    let quality_normalized = partition.quality.filter(|_| total > 0.0).map(|q| q / total);
    Ok(Some(Clustering {
        method: config.cluster,
        partition,
        quality_normalized,
        converged,
        detail,
    }))
}

/// The full pipeline: giant component, null ensemble, bounds and dimensions;
/// with `d_pos > 0` node rejection, signal network and clustering; with
/// `d_neg > 0` k-partite extraction.
pub fn analyze(input: &WeightedGraph, config: &AnalysisConfig) -> Result<Analysis> {
    let (g, component, ensemble, estimate) = estimate_structure(input, config)?;
    let mut signal = None;
    let mut clustering = None;
    if estimate.d_pos > 0 {
        let s = decompose(&g, &estimate, &ensemble, config.weighting)?;
        clustering = cluster_signal(&g, &estimate, &s, &ensemble.expectation, config)?;
        signal = Some(s);
    }
    let kpartite = if estimate.d_neg > 0 {
        Some(kpartite_extract(&estimate, &ensemble, config.weighting)?)
    } else {
        None
    };
    Ok(Analysis {
        input_nodes: input.n(),
        graph: g,
        component,
        ensemble,
        estimate,
        signal,
        clustering,
        kpartite,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightDiagnosticRow {
    pub weight: u64,
    pub data_count: u64,
    pub data_cumulative: f64,
    pub model_mean_count: f64,
    pub model_cumulative: f64,
    /// `model_mean_count - data_count`.
    pub difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightDiagnostic {
    pub kind: NullKind,
    pub rows: Vec<WeightDiagnosticRow>,
    pub max_abs_difference: f64,
}

/// Integer weight distribution of the data against the mean distribution of
/// the ensemble's samples, both in `kappa`-scaled units.
pub fn weight_diagnostic(g: &WeightedGraph, ensemble: &NullEnsemble) -> Result<WeightDiagnostic> {
    let kappa = ensemble.spec.kappa;
    let data = graph::weight_distribution_scaled(g, kappa)?;
    let mut model: std::collections::BTreeMap<u64, f64> = std::collections::BTreeMap::new();
    for sample in &ensemble.samples {
        for &(_, _, w) in sample.links() {
            *model.entry((w * kappa).round() as u64).or_insert(0.0) += 1.0;
        }
    }
    let samples = ensemble.len().max(1) as f64;
    model.values_mut().for_each(|c| *c /= samples);
    for row in &data {
        model.entry(row.weight_value).or_insert(0.0);
    }
    let data_total: u64 = data.iter().map(|r| r.observed_count).sum();
    let model_total: f64 = model.values().sum();
    let data_counts: std::collections::HashMap<u64, u64> =
        data.iter().map(|r| (r.weight_value, r.observed_count)).collect();
    let (mut data_running, mut model_running) = (0u64, 0.0);
    let rows: Vec<WeightDiagnosticRow> = model
        .into_iter()
        .map(|(weight, model_mean_count)| {
            let data_count = data_counts.get(&weight).copied().unwrap_or(0);
            data_running += data_count;
            model_running += model_mean_count;
            WeightDiagnosticRow {
                weight,
                data_count,
                data_cumulative: if data_total > 0 {
                    data_running as f64 / data_total as f64
                } else {
                    0.0
                },
                model_mean_count,
                model_cumulative: if model_total > 0.0 {
                    model_running / model_total
                } else {
                    0.0
                },
                difference: model_mean_count - data_count as f64,
            }
        })
        .collect();
    let max_abs_difference = rows.iter().map(|r| r.difference.abs()).fold(0.0, f64::max);
    Ok(WeightDiagnostic {
        kind: ensemble.spec.kind,
        rows,
        max_abs_difference,
    })
}

/// One grid point of a detection sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub p_within: f64,
    pub p_between: f64,
    pub p_noise: f64,
    pub f_noise: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// Size, group count and strength parameter of every network; its
    /// probabilities and seed are replaced per cell and replicate.
    pub network: SyntheticSpec,
    pub cells: Vec<SweepCell>,
    pub replicates: usize,
    pub seed: u64,
    pub analysis: AnalysisConfig,
    /// Stop after counting dimensions.
    pub detection_only: bool,
    /// Record wall-clock time per replicate.
    pub timing: bool,
}

/// One replicate of one cell. Fields a failed or structureless run could not
/// fill are `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub p_within: f64,
    pub p_between: f64,
    pub p_noise: f64,
    pub f_noise: f64,
    pub replicate: usize,
    pub detected: Option<bool>,
    pub d_pos: Option<usize>,
    pub groups_found: Option<usize>,
    pub vi_own_group: Option<f64>,
    pub vi_single_group: Option<f64>,
    pub tpr: Option<f64>,
    pub tnr: Option<f64>,
    pub runtime_ms: Option<u64>,
    #[serde(skip)]
    pub error: Option<String>,
}

fn sweep_replicate(config: &SweepConfig, cell_index: usize, cell: &SweepCell, replicate: usize) -> SweepRow {
    let started = Instant::now();
    let key = ((cell_index as u64) << 32) | replicate as u64;
    let mut row = SweepRow {
        p_within: cell.p_within,
        p_between: cell.p_between,
        p_noise: cell.p_noise,
        f_noise: cell.f_noise,
        replicate,
        detected: None,
        d_pos: None,
        groups_found: None,
        vi_own_group: None,
        vi_single_group: None,
        tpr: None,
        tnr: None,
        runtime_ms: None,
        error: None,
    };
    let outcome = (|| -> Result<()> {
        let spec = SyntheticSpec {
            p_within: cell.p_within,
            p_between: cell.p_between,
            p_noise: cell.p_noise,
            f_noise: cell.f_noise,
            seed: rng::derive_seed(config.seed, Domain::Synthetic, key),
            ..config.network
        };
        let (g, truth) = generate_wsbm(&spec)?;
        let mut analysis_config = config.analysis;
        analysis_config.null.seed = rng::derive_seed(config.seed, Domain::Sweep, key);
        if config.detection_only {
            let (_, _, _, estimate) = estimate_structure(&g, &analysis_config)?;
            row.detected = Some(estimate.d_pos > 0);
            row.d_pos = Some(estimate.d_pos);
            return Ok(());
        }
        let analysis = analyze(&g, &analysis_config)?;
        let d_pos = analysis.estimate.d_pos;
        row.detected = Some(d_pos > 0);
        row.d_pos = Some(d_pos);
        let (own, shared) = metrics::ground_truth_variants(&truth);
        match (&analysis.signal, &analysis.clustering) {
            (Some(signal), Some(clustering)) => {
                let nodes: Vec<usize> = signal.signal_nodes.iter().map(|&i| analysis.component[i]).collect();
                row.groups_found = Some(clustering.partition.num_groups());
                row.vi_own_group = Some(metrics::vi_normalized(&clustering.partition, &own.restrict(&nodes))?);
                row.vi_single_group =
                    Some(metrics::vi_normalized(&clustering.partition, &shared.restrict(&nodes))?);
            }
            (None, _) => {
                let single = Partition::single(g.n());
                row.groups_found = Some(1);
                row.vi_own_group = Some(metrics::vi_normalized(&single, &own)?);
                row.vi_single_group = Some(metrics::vi_normalized(&single, &shared)?);
            }
            (Some(_), None) => {}
        }
        if let Some(rejected) = analysis.rejected_input_nodes() {
            let score = metrics::rejection_score(&rejected, &truth)?;
            row.tpr = score.tpr;
            row.tnr = score.tnr;
        }
        Ok(())
    })();
    if let Err(e) = outcome {
        row.error = Some(e.to_string());
    }
    if config.timing {
        row.runtime_ms = Some(started.elapsed().as_millis() as u64);
    }
    row
}

/// Runs every replicate of every cell. Rows come back in (cell, replicate)
/// order regardless of scheduling; `on_row` sees each row as it finishes.
pub fn sweep_detection(config: &SweepConfig, on_row: &(dyn Fn(&SweepRow) + Sync)) -> Vec<SweepRow> {
    let jobs: Vec<(usize, usize)> = (0..config.cells.len())
        .flat_map(|c| (0..config.replicates).map(move |r| (c, r)))
        .collect();
    jobs.par_iter()
        .map(|&(c, r)| {
            let row = sweep_replicate(config, c, &config.cells[c], r);
            on_row(&row);
            row
        })
        .collect()
}

/// Writes sweep rows as CSV; absent values become empty fields.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    writer.flush()?;
    Ok(())
}
