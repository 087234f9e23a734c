use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use specest::graph::{self, WeightedGraph};
use specest::null_model::{build_ensemble, NullKind, NullModelSpec, SamplerKind};
use specest::pipeline::{
    analyze, sweep_detection, weight_diagnostic, write_sweep_csv, Analysis, AnalysisConfig, ClusterMethod,
    SweepCell, SweepConfig, WeightDiagnostic,
};
use specest::rejection::NormWeighting;
use specest::report::Report;
use specest::stats::BoundMethod;
use specest::synthetic::SyntheticSpec;

#[derive(Parser)]
#[command(name = "specest", version, about = "Spectral estimation of low-dimensional network structure")]
struct Cli {
    /// Worker threads; output does not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze one network and write the report files.
    Analyze(AnalyzeArgs),
    /// Run a detection sweep over synthetic networks.
    Synth(SynthArgs),
    /// Compare integer weight distributions of data and null models.
    Nulldiag(NulldiagArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum NullArg {
    Wcm,
    Sparse,
}

impl From<NullArg> for NullKind {
    fn from(a: NullArg) -> Self {
        match a {
            NullArg::Wcm => NullKind::FullWcm,
            NullArg::Sparse => NullKind::SparseWcm,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SamplerArg {
    Poisson,
    Stub,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundArg {
    Mean,
    Ci,
    Ttest,
    Perm,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClusterArg {
    Kmeans,
    Consensus,
    Louvain,
    Multiway,
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightingArg {
    Eigenvalue,
    Sqrt,
}

#[derive(Args, Clone)]
struct NullArgs {
    /// Number of null model samples.
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Weight scale applied before rounding to integers.
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    #[arg(long, value_enum, default_value_t = SamplerArg::Poisson)]
    sampler: SamplerArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl NullArgs {
    fn spec(&self, kind: NullKind) -> NullModelSpec {
        NullModelSpec::new(kind)
            .with_samples(self.samples)
            .with_kappa(self.kappa)
            .with_seed(self.seed)
            .with_sampler(match self.sampler {
                SamplerArg::Poisson => SamplerKind::Poisson,
                SamplerArg::Stub => SamplerKind::StubMatching,
            })
    }
}

#[derive(Args, Clone)]
struct PipelineArgs {
    #[arg(long = "null", value_enum, default_value_t = NullArg::Sparse)]
    null_kind: NullArg,
    #[command(flatten)]
    null: NullArgs,
    #[arg(long, value_enum, default_value_t = BoundArg::Mean)]
    bound: BoundArg,
    /// Confidence level of the ci, ttest and perm bounds.
    #[arg(long, default_value_t = 0.95)]
    alpha: f64,
    #[arg(long, value_enum, default_value_t = ClusterArg::Consensus)]
    cluster: ClusterArg,
    /// k-means restarts per cluster count.
    #[arg(long, default_value_t = 100)]
    restarts: usize,
    #[arg(long, value_enum, default_value_t = WeightingArg::Eigenvalue)]
    weighting: WeightingArg,
    /// Largest group count scanned by multi-way clustering.
    #[arg(long, default_value_t = 20)]
    k_max: usize,
}

impl PipelineArgs {
    fn config(&self) -> Result<AnalysisConfig> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            bail!("--alpha must lie in (0, 1), got {}", self.alpha);
        }
        if self.restarts == 0 {
            bail!("--restarts must be at least 1");
        }
        let spec = self.null.spec(self.null_kind.into());
        spec.validate()?;
        let mut config = AnalysisConfig::new(spec);
        config.bound = match self.bound {
            BoundArg::Mean => BoundMethod::Mean,
            BoundArg::Ci => BoundMethod::ConfidenceInterval,
            BoundArg::Ttest => BoundMethod::TTest,
            BoundArg::Perm => BoundMethod::Permutation,
        };
        config.alpha = self.alpha;
        config.cluster = match self.cluster {
            ClusterArg::Kmeans => ClusterMethod::Kmeans,
            ClusterArg::Consensus => ClusterMethod::Consensus,
            ClusterArg::Louvain => ClusterMethod::Louvain,
            ClusterArg::Multiway => ClusterMethod::Multiway,
        };
        config.restarts = self.restarts;
        config.weighting = match self.weighting {
            WeightingArg::Eigenvalue => NormWeighting::Eigenvalue,
            WeightingArg::Sqrt => NormWeighting::SqrtEigenvalue,
        };
        config.multiway_k_max = self.k_max;
        Ok(config)
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Edge list: `src dst weight` per line.
    #[arg(long)]
    input: PathBuf,
    /// Read arcs and symmetrize as (W + W^T) / 2.
    #[arg(long)]
    symmetrize: bool,
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    /// Nodes in modules.
    #[arg(long, default_value_t = 400)]
    n: usize,
    #[arg(long, default_value_t = 4)]
    groups: usize,
    /// Comma-separated values; cells are the product of all four lists.
    #[arg(long, value_delimiter = ',', default_value = "0.05")]
    p_within: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.05")]
    p_between: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    p_noise: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    f_noise: Vec<f64>,
    #[arg(long, default_value_t = 200.0)]
    lambda_s: f64,
    #[arg(long, default_value_t = 50)]
    replicates: usize,
    /// Stop each replicate after counting dimensions.
    #[arg(long)]
    detection_only: bool,
    /// Fill the runtime_ms column.
    #[arg(long)]
    timing: bool,
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Output CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct NulldiagArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    symmetrize: bool,
    /// One model; both when absent.
    #[arg(long = "null", value_enum)]
    null_kind: Option<NullArg>,
    #[command(flatten)]
    null: NullArgs,
    /// Output CSV.
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            bail!("--jobs must be at least 1");
        }
        pool = pool.num_threads(jobs);
    }
    let pool = pool.build().context("starting worker pool")?;
    pool.install(|| match cli.command {
        Command::Analyze(args) => cmd_analyze(&args),
        Command::Synth(args) => cmd_synth(&args),
        Command::Nulldiag(args) => cmd_nulldiag(&args),
    })
}

fn load(path: &Path, symmetrize: bool) -> Result<WeightedGraph> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    graph::load_edge_list(BufReader::new(file), symmetrize).with_context(|| format!("reading {}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<()> {
    let config = args.pipeline.config()?;
    let started = Instant::now();
    let g = load(&args.input, args.symmetrize)?;
    let analysis = analyze(&g, &config)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;

    let report = Report::new(&args.input.display().to_string(), &config, &analysis);
    let mut out = create(&args.out.join("report.json"))?;
    serde_json::to_writer_pretty(&mut out, &report)?;
    writeln!(out)?;
    out.flush()?;

    write_signal(&analysis, &args.out.join("signal.tsv"))?;
    write_partition(&analysis, &args.out.join("partition.tsv"))?;
    write_eigs(&analysis, &args.out.join("eigs.csv"))?;
    let diag = weight_diagnostic(&analysis.graph, &analysis.ensemble)?;
    write_diagnostics(&[diag], &args.out.join("weightdist.csv"))?;

    let mut log = create(&args.out.join("run.log"))?;
    writeln!(log, "elapsed_ms {}", started.elapsed().as_millis())?;
    log.flush()?;

    let est = &analysis.estimate;
    println!(
        "{}: {} nodes, d_pos = {}, d_neg = {}, structure {}",
        args.input.display(),
        analysis.graph.n(),
        est.d_pos,
        est.d_neg,
        report.structure
    );
    if let Some(s) = &analysis.signal {
        println!("retained {} nodes, rejected {}", s.retained.len(), s.rejected.len());
    }
    if let Some(c) = &analysis.clustering {
        println!("{} groups", c.partition.num_groups());
    }
    Ok(())
}

fn write_signal(analysis: &Analysis, path: &Path) -> Result<()> {
    let mut out = create(path)?;
    if let Some(s) = &analysis.signal {
        let labels = s.signal_nodes.iter().map(|&i| analysis.graph.label(i).to_string()).collect();
        let g = WeightedGraph::new(labels, s.signal_graph.weights().clone())?;
        graph::write_edge_list(&g, &mut out)?;
    }
    out.flush()?;
    Ok(())
}

fn write_partition(analysis: &Analysis, path: &Path) -> Result<()> {
    let mut out = create(path)?;
    writeln!(out, "node\tgroup")?;
    if let (Some(s), Some(c)) = (&analysis.signal, &analysis.clustering) {
        for (&i, &group) in s.signal_nodes.iter().zip(c.partition.assignment()) {
            writeln!(out, "{}\t{}", analysis.graph.label(i), group)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn write_eigs(analysis: &Analysis, path: &Path) -> Result<()> {
    let est = &analysis.estimate;
    let (upper, lower) = (est.upper_bound(), est.lower_bound());
    let eigs = est.data_eigenvalues();
    let mut out = create(path)?;
    writeln!(out, "index,eigenvalue,upper_bound,lower_bound,retained")?;
    for (k, &l) in eigs.iter().enumerate() {
        let retained = if k < est.d_pos {
            "positive"
        } else if k >= eigs.len() - est.d_neg {
            "negative"
        } else {
            "none"
        };
        writeln!(out, "{},{l},{upper},{lower},{retained}", k + 1)?;
    }
    out.flush()?;
    Ok(())
}

fn write_diagnostics(diags: &[WeightDiagnostic], path: &Path) -> Result<()> {
    let mut out = create(path)?;
    writeln!(out, "model,weight,data_count,data_cumulative,model_mean_count,model_cumulative,difference")?;
    for d in diags {
        let model = model_name(d.kind);
        for r in &d.rows {
            writeln!(
                out,
                "{model},{},{},{},{},{},{}",
                r.weight, r.data_count, r.data_cumulative, r.model_mean_count, r.model_cumulative, r.difference
            )?;
        }
    }
    out.flush()?;
    Ok(())
}

fn model_name(kind: NullKind) -> &'static str {
    match kind {
        NullKind::FullWcm => "wcm",
        NullKind::SparseWcm => "sparse",
    }
}

fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let analysis = args.pipeline.config()?;
    let network = SyntheticSpec {
        n: args.n,
        groups: args.groups,
        lambda_s: args.lambda_s,
        ..Default::default()
    };
    let mut cells = Vec::new();
    for &p_within in &args.p_within {
        for &p_between in &args.p_between {
            for &p_noise in &args.p_noise {
                for &f_noise in &args.f_noise {
                    let cell = SweepCell {
                        p_within,
                        p_between,
                        p_noise,
                        f_noise,
                    };
                    SyntheticSpec {
                        p_within,
                        p_between,
                        p_noise,
                        f_noise,
                        ..network
                    }
                    .validate()?;
                    cells.push(cell);
                }
            }
        }
    }
    let config = SweepConfig {
        network,
        cells,
        replicates: args.replicates,
        seed: args.pipeline.null.seed,
        analysis,
        detection_only: args.detection_only,
        timing: args.timing,
    };
    let total = config.cells.len() * config.replicates;
    let done = AtomicUsize::new(0);
    let rows = sweep_detection(&config, &|row| {
        let k = done.fetch_add(1, Ordering::Relaxed) + 1;
        match &row.error {
            Some(e) => eprintln!(
                "[{k}/{total}] p_within={} p_between={} p_noise={} f_noise={} replicate {}: failed: {e}",
                row.p_within, row.p_between, row.p_noise, row.f_noise, row.replicate
            ),
            None => eprintln!(
                "[{k}/{total}] p_within={} p_between={} p_noise={} f_noise={} replicate {}: d_pos={}",
                row.p_within, row.p_between, row.p_noise, row.f_noise, row.replicate, row.d_pos.unwrap_or(0)
            ),
        }
    });
    let out = create(&args.out)?;
    write_sweep_csv(&rows, out)?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    println!("{} rows written to {}, {failed} failed", rows.len(), args.out.display());
    Ok(())
}

fn cmd_nulldiag(args: &NulldiagArgs) -> Result<()> {
    let input = load(&args.input, args.symmetrize)?;
    let g = input.induced_subgraph(&graph::giant_component_nodes(&input));
    let kinds = match args.null_kind {
        Some(k) => vec![NullKind::from(k)],
        None => vec![NullKind::FullWcm, NullKind::SparseWcm],
    };
    let mut diags = Vec::new();
    for kind in kinds {
        let spec = args.null.spec(kind);
        let ensemble = build_ensemble(&g, &spec)?;
        let d = weight_diagnostic(&g, &ensemble)?;
        println!("{}: max |count difference| = {}", model_name(kind), d.max_abs_difference);
        diags.push(d);
    }
    write_diagnostics(&diags, &args.out)
}
