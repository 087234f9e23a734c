//! Symmetric eigensolvers.
//!
//! Dense problems up to [`FULL_DECOMPOSITION_LIMIT`] nodes go through faer's
//! self-adjoint eigendecomposition. Larger problems only ever need a few
//! extremal eigenpairs, which a Lanczos iteration with full
//! reorthogonalization provides.

use faer::{Mat, Side};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Matrices up to this order are fully decomposed.
pub const FULL_DECOMPOSITION_LIMIT: usize = 2000;

/// Relative symmetry tolerance on input matrices.
const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// Relative residual required of Lanczos Ritz pairs.
const RESIDUAL_TOLERANCE: f64 = 1e-8;

/// Eigenpairs sorted by descending eigenvalue; column `k` of `vectors` pairs
/// with `values[k]`. A partial decomposition holds the top block followed by
/// the bottom block, still in descending order.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

impl SymmetricEigen {
    pub fn is_complete(&self) -> bool {
        self.values.len() == self.vectors.rows()
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k)
    }

    /// Eigenpairs `k` for the given positions, as a new decomposition.
    pub fn select(&self, positions: &[usize]) -> SymmetricEigen {
        SymmetricEigen {
            values: positions.iter().map(|&k| self.values[k]).collect(),
            vectors: DenseMatrix::from_fn(self.vectors.rows(), positions.len(), |i, c| {
                self.vectors[(i, positions[c])]
            }),
        }
    }

    /// The `d` largest eigenpairs.
    pub fn top(&self, d: usize) -> SymmetricEigen {
        let d = d.min(self.values.len());
        self.select(&(0..d).collect::<Vec<_>>())
    }

    /// The `d` smallest eigenpairs, most negative first.
    pub fn bottom(&self, d: usize) -> SymmetricEigen {
        let len = self.values.len();
        let d = d.min(len);
        self.select(&(0..d).map(|k| len - 1 - k).collect::<Vec<_>>())
    }
}

fn check_symmetric(m: &DenseMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            found: m.cols(),
        });
    }
    let asym = m.max_asymmetry();
    if asym > SYMMETRY_TOLERANCE * m.norm() {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(())
}

fn to_faer(m: &DenseMatrix) -> Mat<f64> {
    Mat::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

/// Flips `v` so its largest-magnitude entry is positive. Entries within a
/// relative 1e-12 of the maximum count as tied and the first one decides.
fn orient(v: &mut [f64]) {
    let max = v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if max == 0.0 {
        return;
    }
    let lead = v
        .iter()
        .position(|x| x.abs() >= max * (1.0 - 1e-12))
        .unwrap_or(0);
    if v[lead] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// Full eigendecomposition of a symmetric matrix, eigenvalues descending,
/// each eigenvector oriented so its largest-magnitude entry is positive.
pub fn eig_symmetric(m: &DenseMatrix) -> Result<SymmetricEigen> {
    check_symmetric(m)?;
    let n = m.rows();
    if n == 0 {
        return Ok(SymmetricEigen {
            values: Vec::new(),
            vectors: DenseMatrix::zeros(0, 0),
        });
    }
    let evd = to_faer(m)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::NoConvergence)?;
    let s = evd.S().column_vector();
    let u = evd.U();
    // faer returns ascending order
    let mut values = Vec::with_capacity(n);
    let mut vectors = DenseMatrix::zeros(n, n);
    for (col, k) in (0..n).rev().enumerate() {
        values.push(s[k]);
        let mut v: Vec<f64> = (0..n).map(|i| u[(i, k)]).collect();
        orient(&mut v);
        for (i, x) in v.into_iter().enumerate() {
            vectors[(i, col)] = x;
        }
    }
    Ok(SymmetricEigen { values, vectors })
}

/// Eigenvalues only, descending.
pub fn eigenvalues_symmetric(m: &DenseMatrix) -> Result<Vec<f64>> {
    check_symmetric(m)?;
    if m.rows() == 0 {
        return Ok(Vec::new());
    }
    let mut values = to_faer(m)
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::NoConvergence)?;
    values.reverse();
    Ok(values)
}

/// Largest and smallest eigenvalue.
pub fn extremal_eigenvalues(m: &DenseMatrix) -> Result<(f64, f64)> {
    extremal_eigenvalues_with_limit(m, FULL_DECOMPOSITION_LIMIT)
}

pub(crate) fn extremal_eigenvalues_with_limit(m: &DenseMatrix, limit: usize) -> Result<(f64, f64)> {
    if m.rows() == 0 {
        return Err(Error::EmptyGraph);
    }
    if m.rows() <= limit {
        let values = eigenvalues_symmetric(m)?;
        return Ok((values[0], values[values.len() - 1]));
    }
    let e = lanczos(m, 1, 1)?;
    Ok((e.values[0], e.values[e.values.len() - 1]))
}

/// The `top` largest and `bottom` smallest eigenpairs.
pub fn extremal_eigenpairs(m: &DenseMatrix, top: usize, bottom: usize) -> Result<SymmetricEigen> {
    extremal_eigenpairs_with_limit(m, top, bottom, FULL_DECOMPOSITION_LIMIT)
}

pub(crate) fn extremal_eigenpairs_with_limit(
    m: &DenseMatrix,
    top: usize,
    bottom: usize,
    limit: usize,
) -> Result<SymmetricEigen> {
    let n = m.rows();
    if n <= limit || top + bottom >= n {
        let full = eig_symmetric(m)?;
        if top + bottom >= n {
            return Ok(full);
        }
        let mut positions: Vec<usize> = (0..top).collect();
        positions.extend((n - bottom)..n);
        return Ok(full.select(&positions));
    }
    lanczos(m, top, bottom)
}

/// Deterministic, well-spread start vector.
fn start_vector(n: usize, salt: u64) -> Vec<f64> {
    let mut state = 0x2545_F491_4F6C_DD1Du64 ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    (0..n)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    norm
}

fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    // two passes of classical Gram-Schmidt
    for _ in 0..2 {
        for q in basis {
            let c = dot(v, q);
            for (x, y) in v.iter_mut().zip(q) {
                *x -= c * y;
            }
        }
    }
}

/// Lanczos with full reorthogonalization, growing the Krylov space until the
/// requested Ritz pairs meet the residual tolerance.
fn lanczos(m: &DenseMatrix, top: usize, bottom: usize) -> Result<SymmetricEigen> {
    check_symmetric(m)?;
    let n = m.rows();
    let scale = m.norm().max(f64::MIN_POSITIVE);
    let wanted = top + bottom;
    let mut dim = (2 * wanted + 20).max(40).min(n);
    loop {
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(dim);
        let mut alpha = Vec::with_capacity(dim);
        let mut beta: Vec<f64> = Vec::with_capacity(dim);
        let mut q = start_vector(n, 0);
        normalize(&mut q);
        let mut restarts = 0u64;
        while basis.len() < dim {
            let mut w = m.mul_vec(&q);
            let a = dot(&w, &q);
            alpha.push(a);
            basis.push(q.clone());
            orthogonalize(&mut w, &basis);
            let b = normalize(&mut w);
            if basis.len() == dim {
                break;
            }
            if b <= 1e-12 * scale {
                // invariant subspace: continue from a fresh orthogonal direction
                restarts += 1;
                let mut fresh = start_vector(n, restarts);
                orthogonalize(&mut fresh, &basis);
                if normalize(&mut fresh) <= 1e-12 {
                    break;
                }
                beta.push(0.0);
                q = fresh;
            } else {
                beta.push(b);
                q = w;
            }
        }
        let k = basis.len();
        let t = DenseMatrix::from_fn(k, k, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let ritz = eig_symmetric(&t)?;
        let mut positions: Vec<usize> = (0..top.min(k)).collect();
        positions.extend((k - bottom.min(k))..k);
        positions.dedup();
        let mut values = Vec::with_capacity(positions.len());
        let mut vectors = DenseMatrix::zeros(n, positions.len());
        let mut converged = true;
        for (c, &p) in positions.iter().enumerate() {
            let theta = ritz.values[p];
            let mut x = vec![0.0; n];
            for (j, qj) in basis.iter().enumerate() {
                let y = ritz.vectors[(j, p)];
                for (xi, qi) in x.iter_mut().zip(qj) {
                    *xi += y * qi;
                }
            }
            normalize(&mut x);
            orient(&mut x);
            let mx = m.mul_vec(&x);
            let residual = mx
                .iter()
                .zip(&x)
                .map(|(a, b)| (a - theta * b).powi(2))
                .sum::<f64>()
                .sqrt();
            if residual > RESIDUAL_TOLERANCE * scale {
                converged = false;
            }
            values.push(theta);
            for (i, xi) in x.into_iter().enumerate() {
                vectors[(i, c)] = xi;
            }
        }
        if converged {
            return Ok(SymmetricEigen { values, vectors });
        }
        if dim == n {
            return Err(Error::NoConvergence);
        }
        dim = (dim * 2).min(n);
    }
}
