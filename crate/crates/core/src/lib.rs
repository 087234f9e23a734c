//! Spectral estimation of low-dimensional structure in weighted undirected
//! networks.
//!
//! A data network `W` is compared with a generative null model through the
//! comparison matrix `C = W - <P>`. Sampling the null model gives an estimate
//! of the eigenvalue range that `C` would have if the data were just another
//! draw from it; data eigenvalues outside that range are retained as
//! dimensions of structure. The retained eigenvectors then project the nodes,
//! nodes whose projection does not exceed the null expectation are rejected
//! as noise, and the surviving signal network is clustered.
//!
//! Module map:
//!
//! - [`graph`]: weighted graph type, edge-list I/O, components, leaf stripping
//! - [`null_model`]: full and sparse weighted configuration models
//! - [`spectral`]: comparison matrices, eigen-analysis, bound estimation
//! - [`stats`]: confidence-interval, t- and permutation tests on the bounds
//! - [`rejection`]: node projection, noise rejection, k-partite extraction
//! - [`partition`]: modularity, k-means, consensus, Louvain, multi-way
//! - [`synthetic`]: weighted stochastic block model with a noise halo
//! - [`metrics`]: variation of information and rejection accuracy
//! - [`pipeline`]: end-to-end analysis and detection sweeps
//! - [`report`]: serializable report documents

pub mod eigen;
pub mod error;
pub mod graph;
pub mod matrix;
pub mod metrics;
pub mod null_model;
pub mod partition;
pub mod pipeline;
pub mod rejection;
pub mod report;
pub mod rng;
pub mod spectral;
pub mod stats;
pub mod synthetic;

pub use error::{Error, Result};
pub use graph::{WeightGranularity, WeightedGraph};
pub use matrix::DenseMatrix;
pub use null_model::{NullEnsemble, NullKind, NullModelSpec, ResidualBudget, SamplerKind};
pub use partition::Partition;
pub use spectral::SpectralEstimate;
