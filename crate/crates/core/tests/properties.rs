use proptest::prelude::*;
use specest::eigen::{eig_symmetric, SymmetricEigen};
use specest::metrics::{variation_of_information, vi_normalized};
use specest::partition::{kmeans_partition, modularity};
use specest::rejection::{node_norms, project_eigenpairs, reject_nodes, NormWeighting};
use specest::{DenseMatrix, Partition};

fn labels(n: usize, k: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0..k, n)
}

fn symmetric(n: usize) -> impl Strategy<Value = DenseMatrix> {
    prop::collection::vec(-5.0f64..5.0, n * n).prop_map(move |v| {
        DenseMatrix::from_fn(n, n, |i, j| if i <= j { v[i * n + j] } else { v[j * n + i] })
    })
}

fn same_partition(a: &[usize], b: &[usize]) -> bool {
    (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (b[i] == b[j])))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn vi_is_a_metric(a in labels(10, 4), b in labels(10, 4), c in labels(10, 4)) {
        let (pa, pb, pc) = (Partition::from_labels(&a), Partition::from_labels(&b), Partition::from_labels(&c));
        let ab = variation_of_information(&pa, &pb).unwrap();
        let ba = variation_of_information(&pb, &pa).unwrap();
        let ac = variation_of_information(&pa, &pc).unwrap();
        let cb = variation_of_information(&pc, &pb).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!(ab <= ac + cb + 1e-12);
        prop_assert_eq!(ab < 1e-12, same_partition(&a, &b));
        let norm = vi_normalized(&pa, &pb).unwrap();
        prop_assert!((0.0..=1.0).contains(&norm));
    }

    #[test]
    fn vi_ignores_label_names(a in labels(10, 4), b in labels(10, 4), shift in 1usize..7) {
        let renamed: Vec<usize> = a.iter().map(|x| (x + shift) * 3).collect();
        let pa = Partition::from_labels(&a);
        let pr = Partition::from_labels(&renamed);
        let pb = Partition::from_labels(&b);
        prop_assert_eq!(variation_of_information(&pa, &pr).unwrap(), 0.0);
        let d1 = variation_of_information(&pa, &pb).unwrap();
        let d2 = variation_of_information(&pr, &pb).unwrap();
        prop_assert!((d1 - d2).abs() < 1e-12);
    }

    #[test]
    fn modularity_is_relabel_invariant(c in symmetric(8), a in labels(8, 3)) {
        let renamed: Vec<usize> = a.iter().map(|x| 2 - x).collect();
        let q1 = modularity(&c, &Partition::from_labels(&a)).unwrap();
        let q2 = modularity(&c, &Partition::from_labels(&renamed)).unwrap();
        prop_assert!((q1 - q2).abs() < 1e-9);
    }

    #[test]
    fn modularity_equals_trace_form(c in symmetric(7), a in labels(7, 3)) {
        // Q = Tr(S^T C S) with S the 0/1 indicator matrix
        let p = Partition::from_labels(&a);
        let k = p.num_groups();
        let mut trace = 0.0;
        for g in 0..k {
            for i in 0..7 {
                for j in 0..7 {
                    let si = (p.group_of(i) == g) as u8 as f64;
                    let sj = (p.group_of(j) == g) as u8 as f64;
                    trace += si * c[(i, j)] * sj;
                }
            }
        }
        prop_assert!((modularity(&c, &p).unwrap() - trace).abs() < 1e-9);
    }

    #[test]
    fn rejection_ignores_eigenvector_signs(c in symmetric(9), d in 1usize..4, flips in prop::collection::vec(any::<bool>(), 3)) {
        let e = eig_symmetric(&c).unwrap().top(d);
        let mut flipped = e.clone();
        for k in 0..d {
            if flips[k] {
                for i in 0..9 {
                    flipped.vectors[(i, k)] = -flipped.vectors[(i, k)];
                }
            }
        }
        let a = node_norms(&project_eigenpairs(&e, NormWeighting::Eigenvalue));
        let b = node_norms(&project_eigenpairs(&flipped, NormWeighting::Eigenvalue));
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        let expected = vec![a.iter().sum::<f64>() / 9.0; 9];
        prop_assert_eq!(reject_nodes(&a, &expected), reject_nodes(&b, &expected));
    }

    #[test]
    fn rejection_is_relabel_equivariant(
        c in symmetric(8),
        expected in prop::collection::vec(0.0f64..5.0, 8),
        perm in Just((0..8usize).collect::<Vec<_>>()).prop_shuffle(),
    ) {
        let e = eig_symmetric(&c).unwrap().top(2);
        let norms = node_norms(&project_eigenpairs(&e, NormWeighting::Eigenvalue));
        let pc = DenseMatrix::from_fn(8, 8, |i, j| c[(perm[i], perm[j])]);
        let pe = eig_symmetric(&pc).unwrap().top(2);
        let pnorms = node_norms(&project_eigenpairs(&pe, NormWeighting::Eigenvalue));
        let full = eig_symmetric(&c).unwrap();
        prop_assume!((full.values[1] - full.values[2]).abs() > 1e-6);
        for i in 0..8 {
            prop_assert!((pnorms[i] - norms[perm[i]]).abs() < 1e-8);
        }
        let pexpected: Vec<f64> = perm.iter().map(|&i| expected[i]).collect();
        let (kept, _) = reject_nodes(&norms, &expected);
        let (pkept, _) = reject_nodes(&pnorms, &pexpected);
        let mut mapped: Vec<usize> = pkept.iter().map(|&i| perm[i]).collect();
        mapped.sort();
        prop_assert_eq!(mapped, kept);
    }

    #[test]
    fn projection_columns_have_eigenvalue_norm(c in symmetric(6)) {
        let e: SymmetricEigen = eig_symmetric(&c).unwrap().top(3);
        let p = project_eigenpairs(&e, NormWeighting::Eigenvalue);
        for k in 0..3 {
            let norm: f64 = p.column(k).iter().map(|x| x * x).sum::<f64>().sqrt();
            prop_assert!((norm - e.values[k].abs()).abs() < 1e-9);
        }
    }

    #[test]
    fn kmeans_is_reproducible(points in prop::collection::vec(-3.0f64..3.0, 24), seed in any::<u64>()) {
        let pts = DenseMatrix::from_fn(12, 2, |i, j| points[2 * i + j]);
        let c = DenseMatrix::from_fn(12, 12, |i, j| pts.row(i).iter().zip(pts.row(j)).map(|(a, b)| a * b).sum());
        let a = kmeans_partition(&pts, 3, 10, &c, seed).unwrap();
        let b = kmeans_partition(&pts, 3, 10, &c, seed).unwrap();
        prop_assert_eq!(a.assignment(), b.assignment());
        prop_assert_eq!(a.quality, b.quality);
    }
}
