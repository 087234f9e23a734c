use specest::graph::load_edge_list;
use specest::null_model::{build_ensemble, NullKind, NullModelSpec};
use specest::pipeline::{analyze, weight_diagnostic, AnalysisConfig, ClusterMethod};
use specest::rejection::{project_nodes, NormWeighting};
use specest::spectral::spectral_estimate;
use specest::stats::BoundMethod;
use specest::synthetic::{generate_wsbm, SyntheticSpec};
use specest::WeightedGraph;

fn lesmis() -> WeightedGraph {
    load_edge_list(include_str!("../data/lesmis.tsv").as_bytes(), false).unwrap()
}

#[test]
fn lesmis_end_to_end() {
    let g = lesmis();
    let a = analyze(&g, &AnalysisConfig::new(NullModelSpec::new(NullKind::SparseWcm).with_seed(11))).unwrap();
    assert_eq!(a.estimate.d_pos, 2);
    let s = a.signal.as_ref().unwrap();
    assert!((25..=35).contains(&s.rejected.len()), "{} rejected", s.rejected.len());
    for name in ["Valjean", "Marius", "Fantine", "Javert"] {
        assert!(s.retained.contains(&a.graph.index_of(name).unwrap()), "{name}");
    }
    let c = a.clustering.as_ref().unwrap();
    assert_eq!(c.partition.num_groups(), 4);
    let group = |name: &str| {
        let i = a.graph.index_of(name).unwrap();
        let k = s.signal_nodes.iter().position(|&x| x == i).unwrap();
        c.partition.group_of(k)
    };
    assert_eq!(group("Enjolras"), group("Combeferre"));
    assert_eq!(group("Fantine"), group("Tholomyes"));
    assert_ne!(group("Enjolras"), group("Fantine"));
}

#[test]
fn lesmis_other_clusterings() {
    let g = lesmis();
    for method in [ClusterMethod::Kmeans, ClusterMethod::Louvain, ClusterMethod::Multiway] {
        let mut config = AnalysisConfig::new(NullModelSpec::new(NullKind::SparseWcm).with_seed(2));
        config.cluster = method;
        let a = analyze(&g, &config).unwrap();
        let c = a.clustering.unwrap();
        assert!(c.partition.num_groups() >= 2, "{method:?}");
        assert!(c.quality_normalized.unwrap() > 0.0, "{method:?}");
    }
}

#[test]
fn lesmis_tested_bounds_agree() {
    let g = lesmis();
    let spec = NullModelSpec::new(NullKind::SparseWcm).with_seed(1);
    let e = build_ensemble(&g, &spec).unwrap();
    for method in [BoundMethod::ConfidenceInterval, BoundMethod::TTest, BoundMethod::Permutation] {
        let est = spectral_estimate(&g, &e, method, 0.95).unwrap();
        assert_eq!(est.d_pos, 2, "{method:?}");
    }
}

#[test]
fn sparse_model_fits_lesmis_weights_better() {
    let g = lesmis();
    for seed in 0..3 {
        let full = build_ensemble(&g, &NullModelSpec::new(NullKind::FullWcm).with_seed(seed)).unwrap();
        let sparse = build_ensemble(&g, &NullModelSpec::new(NullKind::SparseWcm).with_seed(seed)).unwrap();
        let f = weight_diagnostic(&g, &full).unwrap().max_abs_difference;
        let s = weight_diagnostic(&g, &sparse).unwrap().max_abs_difference;
        assert!(s < f, "seed {seed}: sparse {s} vs full {f}");
    }
}

#[test]
fn planted_blocks_separate_in_projection() {
    let spec = SyntheticSpec {
        n: 200,
        p_within: 0.3,
        p_between: 0.05,
        seed: 5,
        ..Default::default()
    };
    let (g, truth) = generate_wsbm(&spec).unwrap();
    let e = build_ensemble(&g, &NullModelSpec::new(NullKind::SparseWcm).with_seed(5)).unwrap();
    let est = spectral_estimate(&g, &e, BoundMethod::Mean, 0.95).unwrap();
    assert_eq!(est.d_pos, 3);
    let p = project_nodes(&est, 3, NormWeighting::Eigenvalue).unwrap();
    let dist = |i: usize, j: usize| {
        p.row(i).iter().zip(p.row(j)).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
    };
    let silhouette = |labels: &[usize]| {
        let n = labels.len();
        let k = labels.iter().max().unwrap() + 1;
        (0..n)
            .map(|i| {
                let mut sums = vec![(0.0, 0usize); k];
                for j in 0..n {
                    if j != i {
                        sums[labels[j]].0 += dist(i, j);
                        sums[labels[j]].1 += 1;
                    }
                }
                let mean = |g: usize| sums[g].0 / sums[g].1.max(1) as f64;
                let a = mean(labels[i]);
                let b = (0..k).filter(|&g| g != labels[i]).map(mean).fold(f64::INFINITY, f64::min);
                (b - a) / a.max(b)
            })
            .sum::<f64>()
            / n as f64
    };
    let planted = silhouette(&truth.module_of);
    let scrambled: Vec<usize> = (0..200).map(|i| (i * 7 + i / 3) % 4).collect();
    assert!(planted > 0.2, "{planted}");
    assert!(planted > silhouette(&scrambled) + 0.2);
}

#[test]
fn structureless_synthetic_is_not_detected() {
    let mut detected = 0;
    for seed in 0..5 {
        let spec = SyntheticSpec {
            n: 200,
            seed,
            ..Default::default()
        };
        let (g, _) = generate_wsbm(&spec).unwrap();
        let config = AnalysisConfig::new(NullModelSpec::new(NullKind::SparseWcm).with_seed(seed));
        let a = analyze(&g, &config).unwrap();
        detected += usize::from(a.estimate.d_pos > 0);
    }
    assert!(detected <= 1, "{detected} of 5");
}

#[test]
fn analysis_is_deterministic() {
    let g = lesmis();
    let config = AnalysisConfig::new(NullModelSpec::new(NullKind::SparseWcm).with_seed(4));
    let a = analyze(&g, &config).unwrap();
    let b = analyze(&g, &config).unwrap();
    assert_eq!(a.estimate.data_eigenvalues(), b.estimate.data_eigenvalues());
    assert_eq!(a.estimate.bounds.sampled_maxima, b.estimate.bounds.sampled_maxima);
    assert_eq!(
        a.clustering.unwrap().partition.assignment(),
        b.clustering.unwrap().partition.assignment()
    );
}
