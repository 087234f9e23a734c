use std::collections::BTreeMap;

use specest::null_model::{
    build_ensemble, sample_full_wcm, sample_sparse_wcm, NullEnsemble, NullKind, NullModelSpec, SampledNetwork,
    SamplerKind,
};
use specest::WeightedGraph;

fn ten_nodes() -> WeightedGraph {
    let edges = [
        (0, 1, 3.0),
        (0, 2, 1.0),
        (1, 2, 2.0),
        (2, 3, 5.0),
        (3, 4, 1.0),
        (4, 5, 2.0),
        (5, 6, 4.0),
        (6, 7, 1.0),
        (7, 8, 2.0),
        (8, 9, 3.0),
        (9, 0, 1.0),
        (1, 6, 2.0),
        (3, 8, 1.0),
    ];
    WeightedGraph::from_edges(10, &edges).unwrap()
}

fn six_nodes() -> WeightedGraph {
    let edges = [
        (0, 1, 3.0),
        (1, 2, 2.0),
        (2, 3, 4.0),
        (3, 4, 1.0),
        (4, 5, 2.0),
        (5, 0, 3.0),
        (0, 3, 2.0),
        (1, 4, 1.0),
    ];
    WeightedGraph::from_edges(6, &edges).unwrap()
}

fn binary_graph() -> WeightedGraph {
    let edges: Vec<(usize, usize, f64)> = (0..12)
        .flat_map(|i| [(i, (i + 1) % 12, 1.0), (i, (i + 3) % 12, 1.0)])
        .chain([(0, 6, 1.0), (2, 8, 1.0)])
        .collect();
    WeightedGraph::from_edges(12, &edges).unwrap()
}

#[test]
fn full_wcm_total_weight_within_three_sigma() {
    let g = ten_nodes();
    let s = g.strengths();
    let half: f64 = s.iter().sum::<f64>() / 2.0;
    let spec = NullModelSpec::new(NullKind::FullWcm).with_seed(5);
    let m = 1000;
    let totals: Vec<f64> = (0..m).map(|k| sample_full_wcm(&g, &spec, k).unwrap().total_weight()).collect();
    let mean = totals.iter().sum::<f64>() / m as f64;
    // a sum of independent Poissons is Poisson with rate ½Σs
    let sigma = (half / m as f64).sqrt();
    assert!((mean - half).abs() < 3.0 * sigma, "mean {mean} vs {half}");
}

#[test]
fn full_wcm_strengths_within_three_sigma() {
    let g = ten_nodes();
    let s = g.strengths();
    let n = g.n();
    let total: f64 = s.iter().sum();
    let pair_norm: f64 = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).map(|(i, j)| s[i] * s[j]).sum();
    let spec = NullModelSpec::new(NullKind::FullWcm).with_seed(9);
    let m = 2000;
    let mut sums = vec![0.0; n];
    for k in 0..m {
        for (acc, x) in sums.iter_mut().zip(sample_full_wcm(&g, &spec, k).unwrap().strengths()) {
            *acc += x;
        }
    }
    for i in 0..n {
        // strength of i is Poisson with rate Σ_j≠i λ_ij
        let rate: f64 = (0..n).filter(|&j| j != i).map(|j| total / 2.0 * s[i] * s[j] / pair_norm).sum();
        let mean = sums[i] / m as f64;
        assert!((mean - rate).abs() < 3.0 * (rate / m as f64).sqrt(), "node {i}: {mean} vs {rate}");
    }
}

#[test]
fn sparse_link_count_within_three_sigma() {
    let g = ten_nodes();
    let k = g.degrees();
    let two_m: f64 = k.iter().sum::<usize>() as f64;
    let n = g.n();
    let probs: Vec<f64> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .map(|(i, j)| (k[i] as f64 * k[j] as f64 / two_m).min(1.0))
        .collect();
    let expected: f64 = probs.iter().sum();
    let var: f64 = probs.iter().map(|p| p * (1.0 - p)).sum();
    let spec = NullModelSpec::new(NullKind::SparseWcm).with_seed(2);
    let m = 1000;
    let mean = (0..m)
        .map(|s| sample_sparse_wcm(&g, &spec, s).unwrap().links().len() as f64)
        .sum::<f64>()
        / m as f64;
    assert!((mean - expected).abs() < 3.0 * (var / m as f64).sqrt(), "{mean} vs {expected}");
}

#[test]
fn sparse_binary_strengths_within_three_sigma() {
    let g = binary_graph();
    let n = g.n();
    let spec = NullModelSpec::new(NullKind::SparseWcm).with_seed(4);
    let m = 1000;
    let samples: Vec<Vec<f64>> = (0..m).map(|s| sample_sparse_wcm(&g, &spec, s).unwrap().strengths()).collect();
    let k = g.degrees();
    // given m* links the expected total weight is max(m*, ½Σs): base weight 1
    // per link plus a Poisson residual of mean max(0, ½Σs - m*)
    let half = k.iter().sum::<usize>() as f64 / 2.0;
    let excess: Vec<f64> = (0..m)
        .map(|s| {
            let sample = sample_sparse_wcm(&g, &spec, s).unwrap();
            sample.total_weight() - (sample.links().len() as f64).max(half)
        })
        .collect();
    let mean = excess.iter().sum::<f64>() / m as f64;
    let var = excess.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
    assert!(mean.abs() < 3.0 * (var / m as f64).sqrt() + 1e-12, "excess {mean}");
    for i in 0..n {
        let xs: Vec<f64> = samples.iter().map(|s| s[i]).collect();
        let mean = xs.iter().sum::<f64>() / m as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
        // capped link probabilities and the strength-weighted residual shift
        // individual nodes by a few percent
        assert!(
            (mean - k[i] as f64).abs() < 3.0 * (var / m as f64).sqrt() + 0.1 * k[i] as f64,
            "node {i}: {mean} vs {}",
            k[i]
        );
    }
}

#[test]
fn sparse_expectation_row_sums() {
    // node strengths are reproduced only approximately, and only when s_i / k_i
    // is uniform across nodes
    let binary = binary_graph();
    let doubled = WeightedGraph::from_edges(
        12,
        &binary.links().iter().map(|&(i, j, w)| (i, j, 2.0 * w)).collect::<Vec<_>>(),
    )
    .unwrap();
    for g in [binary, doubled] {
        let s = g.strengths();
        let spec = NullModelSpec::new(NullKind::SparseWcm).with_samples(400).with_seed(8);
        let e = build_ensemble(&g, &spec).unwrap();
        for i in 0..g.n() {
            let row: f64 = e.expectation.row(i).iter().sum();
            let xs: Vec<f64> = e.samples.iter().map(|p| p.strengths()[i]).collect();
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt();
            assert!((row - mean).abs() < 1e-9);
            assert!(
                (row - s[i]).abs() < 3.0 * sd / (xs.len() as f64).sqrt() + 0.1 * s[i],
                "node {i}: {row} vs {}",
                s[i]
            );
        }
    }
}

fn weight_distribution(e: &NullEnsemble) -> BTreeMap<u64, f64> {
    let n = e.n();
    let mut counts = BTreeMap::new();
    let mut total = 0.0;
    for sample in &e.samples {
        let mut dense = vec![0u64; n * n];
        for &(i, j, w) in sample.links() {
            dense[i as usize * n + j as usize] = w as u64;
        }
        for i in 0..n {
            for j in (i + 1)..n {
                *counts.entry(dense[i * n + j]).or_insert(0.0) += 1.0;
                total += 1.0;
            }
        }
    }
    counts.values_mut().for_each(|c| *c /= total);
    counts
}

fn total_variation(a: &BTreeMap<u64, f64>, b: &BTreeMap<u64, f64>) -> f64 {
    let keys: std::collections::BTreeSet<_> = a.keys().chain(b.keys()).collect();
    keys.into_iter()
        .map(|k| (a.get(k).unwrap_or(&0.0) - b.get(k).unwrap_or(&0.0)).abs())
        .sum::<f64>()
        / 2.0
}

#[test]
fn sparse_multinomial_placement_matches_poisson() {
    let g = six_nodes();
    let base = NullModelSpec::new(NullKind::SparseWcm).with_samples(5000);
    let poisson = build_ensemble(&g, &base.with_seed(1)).unwrap();
    let stubs = build_ensemble(&g, &base.with_seed(2).with_sampler(SamplerKind::StubMatching)).unwrap();
    let tv = total_variation(&weight_distribution(&poisson), &weight_distribution(&stubs));
    assert!(tv < 0.05, "tv {tv}");
}

#[test]
fn stub_matching_conserves_strength() {
    let g = six_nodes();
    let spec = NullModelSpec::new(NullKind::FullWcm).with_sampler(SamplerKind::StubMatching);
    for k in 0..200 {
        let sample: SampledNetwork = specest::null_model::sample_stub_matching(&g, &spec, k).unwrap();
        let got = sample.strengths();
        let dropped: f64 = g.strengths().iter().zip(&got).map(|(a, b)| a - b).sum();
        assert!(dropped <= 1.0);
        for (a, b) in g.strengths().iter().zip(&got) {
            assert!(a - b >= 0.0 && a - b <= 1.0);
        }
    }
}

#[test]
fn kappa_round_trip_grid() {
    let edges = [(0, 1, 0.5), (1, 2, 1.5), (2, 0, 2.0), (2, 3, 0.5)];
    let g = WeightedGraph::from_edges(4, &edges).unwrap();
    let spec = NullModelSpec::new(NullKind::FullWcm).with_kappa(2.0).with_seed(3);
    for k in 0..50 {
        for &(_, _, w) in sample_full_wcm(&g, &spec, k).unwrap().links() {
            assert_eq!((w * 2.0).fract(), 0.0);
        }
    }
}
