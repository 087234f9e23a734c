//! Serializable summary of an [`Analysis`]. Field order is fixed, so equal
//! analyses serialize to identical bytes.

use serde::Serialize;

use crate::graph::WeightGranularity;
use crate::partition::ConsensusState;
use crate::pipeline::{Analysis, AnalysisConfig, ClusterDetail, ClusterMethod};
use crate::stats::{BoundMethod, TestReport};

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct GraphSummary {
    pub input_nodes: usize,
    pub nodes: usize,
    pub links: usize,
    pub total_weight: f64,
    pub density: f64,
    pub granularity: WeightGranularity,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralSection {
    pub eigenvalues: Vec<f64>,
    pub complete: bool,
    pub upper_bound: f64,
    pub lower_bound: f64,
    pub sampled_maxima: Vec<f64>,
    pub sampled_minima: Vec<f64>,
    pub d_pos: usize,
    pub d_neg: usize,
    pub bound_method: BoundMethod,
    pub test: Option<TestReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NodeRejection {
    pub label: String,
    pub norm: f64,
    pub expected_norm: f64,
    pub retained: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RejectionSection {
    pub dimensions: usize,
    pub retained_count: usize,
    pub rejected_count: usize,
    pub nodes: Vec<NodeRejection>,
    pub signal_nodes: Vec<String>,
    pub signal_links: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Membership {
    pub label: String,
    pub group: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PartitionSection {
    pub method: ClusterMethod,
    pub num_groups: usize,
    pub quality: f64,
    pub quality_normalized: Option<f64>,
    pub converged: bool,
    pub consensus: Option<ConsensusState>,
    pub multiway_ks: Option<Vec<usize>>,
    pub multiway_qualities: Option<Vec<f64>>,
    pub groups: Vec<Membership>,
}

#[derive(Debug, Clone, Serialize)]
pub struct KPartiteSection {
    pub dimensions: usize,
    pub eigenvalues: Vec<f64>,
    pub retained_count: usize,
    pub retained: Vec<String>,
    pub groups: Option<Vec<Membership>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub version: u32,
    pub input: String,
    pub config: AnalysisConfig,
    pub graph: GraphSummary,
    /// `"detected"` or `"none"`.
    pub structure: &'static str,
    pub spectral: SpectralSection,
    pub rejection: Option<RejectionSection>,
    pub partition: Option<PartitionSection>,
    pub kpartite: Option<KPartiteSection>,
}

impl Report {
    pub fn new(input: &str, config: &AnalysisConfig, analysis: &Analysis) -> Self {
        let g = &analysis.graph;
        let est = &analysis.estimate;
        let label = |i: usize| g.label(i).to_string();
        let rejection = analysis.signal.as_ref().map(|s| RejectionSection {
            dimensions: s.projection.cols(),
            retained_count: s.retained.len(),
            rejected_count: s.rejected.len(),
            nodes: (0..g.n())
                .map(|j| NodeRejection {
                    label: label(j),
                    norm: s.data_norms[j],
                    expected_norm: s.expected_norms[j],
                    retained: s.data_norms[j] > s.expected_norms[j],
                })
                .collect(),
            signal_nodes: s.signal_nodes.iter().map(|&i| label(i)).collect(),
            signal_links: s.signal_graph.unique_links(),
        });
        let partition = analysis.clustering.as_ref().zip(analysis.signal.as_ref()).map(|(c, s)| {
            let (consensus, ks, qs) = match &c.detail {
                ClusterDetail::None => (None, None, None),
                ClusterDetail::Consensus(state) => (Some(state.clone()), None, None),
                ClusterDetail::Multiway(scan) => (None, Some(scan.ks.clone()), Some(scan.qualities.clone())),
            };
            PartitionSection {
                method: c.method,
                num_groups: c.partition.num_groups(),
                quality: c.partition.quality.unwrap_or(0.0),
                quality_normalized: c.quality_normalized,
                converged: c.converged,
                consensus,
                multiway_ks: ks,
                multiway_qualities: qs,
                groups: s
                    .signal_nodes
                    .iter()
                    .zip(c.partition.assignment())
                    .map(|(&i, &group)| Membership { label: label(i), group })
                    .collect(),
            }
        });
        let kpartite = analysis.kpartite.as_ref().map(|k| KPartiteSection {
            dimensions: k.negative_values.len(),
            eigenvalues: k.negative_values.clone(),
            retained_count: k.retained.len(),
            retained: k.retained.iter().map(|&i| label(i)).collect(),
            groups: k.groups.as_ref().map(|groups| {
                groups
                    .iter()
                    .enumerate()
                    .map(|(i, &group)| Membership { label: label(i), group })
                    .collect()
            }),
        });
        Report {
            version: REPORT_VERSION,
            input: input.to_string(),
            config: *config,
            graph: GraphSummary {
                input_nodes: analysis.input_nodes,
                nodes: g.n(),
                links: g.unique_links(),
                total_weight: g.total_weight(),
                density: g.density(),
                granularity: g.granularity(),
            },
            structure: if analysis.has_structure() { "detected" } else { "none" },
            spectral: SpectralSection {
                eigenvalues: est.data_eigenvalues().to_vec(),
                complete: est.decomposition.is_complete(),
                upper_bound: est.upper_bound(),
                lower_bound: est.lower_bound(),
                sampled_maxima: est.bounds.sampled_maxima.clone(),
                sampled_minima: est.bounds.sampled_minima.clone(),
                d_pos: est.d_pos,
                d_neg: est.d_neg,
                bound_method: est.method,
                test: est.test.clone(),
            },
            rejection,
            partition,
            kpartite,
        }
    }
}
