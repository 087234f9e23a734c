use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use specest::eigen::{eig_symmetric, extremal_eigenpairs};
use specest::DenseMatrix;

fn random_symmetric(n: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let x: f64 = rng.random_range(-1.0..1.0);
            m[(i, j)] = x;
            m[(j, i)] = x;
        }
    }
    m
}

/// det(M - xI) by Gaussian elimination with partial pivoting.
fn char_poly(m: &DenseMatrix, x: f64) -> f64 {
    let n = m.rows();
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| m[(i, j)] - if i == j { x } else { 0.0 }).collect())
        .collect();
    let mut det = 1.0;
    for k in 0..n {
        let p = (k..n).max_by(|&r, &s| a[r][k].abs().total_cmp(&a[s][k].abs())).unwrap();
        if a[p][k] == 0.0 {
            return 0.0;
        }
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        det *= a[k][k];
        for r in (k + 1)..n {
            let f = a[r][k] / a[k][k];
            for c in k..n {
                a[r][c] -= f * a[k][c];
            }
        }
    }
    det
}

/// Roots of the characteristic polynomial, by grid scan and bisection.
fn brute_force_eigenvalues(m: &DenseMatrix) -> Vec<f64> {
    let n = m.rows();
    let radius = (0..n)
        .map(|i| m.row(i).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        + 1.0;
    let steps = 200_000;
    let h = 2.0 * radius / steps as f64;
    let mut roots = Vec::new();
    let mut x0 = -radius;
    let mut f0 = char_poly(m, x0);
    for k in 1..=steps {
        let x1 = -radius + k as f64 * h;
        let f1 = char_poly(m, x1);
        if f0 == 0.0 {
            roots.push(x0);
        } else if f0.signum() != f1.signum() && f1 != 0.0 {
            let (mut lo, mut hi, mut flo) = (x0, x1, f0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let fm = char_poly(m, mid);
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        x0 = x1;
        f0 = f1;
    }
    roots.sort_by(|a, b| b.total_cmp(a));
    roots
}

#[test]
fn eigenvalues_match_characteristic_polynomial_roots() {
    for seed in 0..10 {
        let m = random_symmetric(8, seed);
        let expected = brute_force_eigenvalues(&m);
        assert_eq!(expected.len(), 8, "seed {seed}: close eigenvalues, grid too coarse");
        let e = eig_symmetric(&m).unwrap();
        for (a, b) in e.values.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-8, "seed {seed}: {a} vs {b}");
        }
    }
}

#[test]
fn extremal_pairs_match_full_decomposition() {
    let m = random_symmetric(60, 3);
    let full = eig_symmetric(&m).unwrap();
    let part = extremal_eigenpairs(&m, 3, 2).unwrap();
    assert_eq!(part.values.len(), 5);
    let expected = [full.values[0], full.values[1], full.values[2], full.values[58], full.values[59]];
    for (a, b) in part.values.iter().zip(expected) {
        assert!((a - b).abs() < 1e-9 * m.norm());
    }
}

fn reconstruction_error(m: &DenseMatrix) -> (f64, f64, f64) {
    let n = m.rows();
    let e = eig_symmetric(m).unwrap();
    let v = &e.vectors;
    let mut recon = 0.0f64;
    let mut ortho = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let r: f64 = (0..n).map(|k| v[(i, k)] * e.values[k] * v[(j, k)]).sum();
            recon = recon.max((r - m[(i, j)]).abs());
            let g: f64 = (0..n).map(|k| v[(k, i)] * v[(k, j)]).sum();
            ortho = ortho.max((g - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    let trace = (e.values.iter().sum::<f64>() - m.trace()).abs();
    (recon, ortho, trace)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reconstruction_and_trace(n in 2usize..24, seed in any::<u64>(), scale in 0.01f64..100.0) {
        let mut m = random_symmetric(n, seed);
        m.scale(scale);
        let norm = m.norm();
        let (recon, ortho, trace) = reconstruction_error(&m);
        prop_assert!(recon <= 1e-8 * norm.max(1.0));
        prop_assert!(ortho <= 1e-10);
        prop_assert!(trace <= 1e-9 * norm.max(1.0) * n as f64);
    }

    #[test]
    fn sign_convention_is_deterministic(n in 2usize..16, seed in any::<u64>()) {
        let m = random_symmetric(n, seed);
        let a = eig_symmetric(&m).unwrap();
        let b = eig_symmetric(&m).unwrap();
        prop_assert_eq!(a.vectors.as_slice(), b.vectors.as_slice());
        for k in 0..n {
            let v = a.vector(k);
            let big = v.iter().copied().max_by(|x, y| x.abs().total_cmp(&y.abs())).unwrap();
            prop_assert!(big > 0.0);
        }
    }
}
