//! Statistical tests of data eigenvalues against sampled null maxima.
//!
//! Each test compares a data eigenvalue `λ_j` with the `N` sampled maxima
//! `λ*_max(i)`. `alpha` is the one-sided confidence level: the CI test uses
//! the `alpha` quantile of Student's t, and the t- and permutation tests call
//! `λ_j` significant when `p < 1 - alpha`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::rng::{self, Domain};

/// Sign patterns are enumerated exactly up to this many samples.
pub const EXACT_PERMUTATION_LIMIT: usize = 12;

pub const DEFAULT_PERMUTATIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    Mean,
    ConfidenceInterval,
    TTest,
    Permutation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestEntry {
    pub eigenvalue: f64,
    pub statistic: f64,
    /// p-value, or the upper limit for the CI test.
    pub value: f64,
    pub exceeds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub method: BoundMethod,
    pub alpha: f64,
    pub per_eigenvalue: Vec<TestEntry>,
}

impl TestReport {
    pub fn exceeding(&self) -> usize {
        self.per_eigenvalue.iter().filter(|e| e.exceeds).count()
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation with `N - 1` in the denominator.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

pub fn median(xs: &[f64]) -> Option<f64> {
    let mut v: Vec<f64> = xs.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

fn students_t(df: usize) -> StudentsT {
    StudentsT::new(0.0, 1.0, df as f64).expect("positive degrees of freedom")
}

/// `alpha` quantile of Student's t with `df` degrees of freedom.
pub fn t_quantile(alpha: f64, df: usize) -> Result<f64> {
    check_alpha(alpha)?;
    if df == 0 {
        return Err(Error::InvalidParameter("t quantile needs df >= 1".into()));
    }
    Ok(students_t(df).inverse_cdf(alpha))
}

/// Upper confidence limit `mean + t(alpha, N-1) * S / sqrt(N)`.
pub fn ci_limit(maxima: &[f64], alpha: f64) -> Result<f64> {
    let n = maxima.len();
    if n < 2 {
        return Err(Error::InvalidParameter("confidence interval needs N >= 2".into()));
    }
    let s = sample_std(maxima);
    Ok(mean(maxima) + t_quantile(alpha, n - 1)? * s / (n as f64).sqrt())
}

pub fn ci_test(maxima: &[f64], eigenvalues: &[f64], alpha: f64) -> Result<TestReport> {
    let limit = ci_limit(maxima, alpha)?;
    let m = mean(maxima);
    let se = sample_std(maxima) / (maxima.len() as f64).sqrt();
    let per_eigenvalue = eigenvalues
        .iter()
        .map(|&l| TestEntry {
            eigenvalue: l,
            statistic: if se > 0.0 { (l - m) / se } else { 0.0 },
            value: limit,
            exceeds: l > limit,
        })
        .collect();
    Ok(TestReport {
        method: BoundMethod::ConfidenceInterval,
        alpha,
        per_eigenvalue,
    })
}

/// One-sample left-tailed t-test: `t = (mean - λ) / (S / sqrt(N))`, p-value
/// from `N - 1` degrees of freedom. Returns `(t, p)`.
pub fn t_test_eig(maxima: &[f64], eigenvalue: f64) -> Result<(f64, f64)> {
    let n = maxima.len();
    if n < 2 {
        return Err(Error::InvalidParameter("t-test needs N >= 2".into()));
    }
    let s = sample_std(maxima);
    if s == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let t = (mean(maxima) - eigenvalue) / (s / (n as f64).sqrt());
    Ok((t, students_t(n - 1).cdf(t)))
}

pub fn t_test(maxima: &[f64], eigenvalues: &[f64], alpha: f64) -> Result<TestReport> {
    check_alpha(alpha)?;
    let per_eigenvalue = eigenvalues
        .iter()
        .map(|&l| {
            let (t, p) = t_test_eig(maxima, l)?;
            Ok(TestEntry {
                eigenvalue: l,
                statistic: t,
                value: p,
                exceeds: p < 1.0 - alpha,
            })
        })
        .collect::<Result<_>>()?;
    Ok(TestReport {
        method: BoundMethod::TTest,
        alpha,
        per_eigenvalue,
    })
}

/// Sign-flip permutation test of `d = Σ_i (λ*_max(i) - λ)`. The p-value is
/// the fraction of sign patterns whose sum is at most the observed `d`;
/// patterns are enumerated for `N <=` [`EXACT_PERMUTATION_LIMIT`] and drawn
/// at random otherwise. Returns `(d, p)`.
pub fn permutation_test_eig(
    maxima: &[f64],
    eigenvalue: f64,
    n_permutations: usize,
    seed: u64,
    stream_index: u64,
) -> Result<(f64, f64)> {
    let deviations: Vec<f64> = maxima.iter().map(|m| m - eigenvalue).collect();
    let observed: f64 = deviations.iter().sum();
    let scale: f64 = deviations.iter().map(|d| d.abs()).sum();
    if scale == 0.0 {
        return Ok((observed, 1.0));
    }
    let tolerance = 1e-12 * scale;
    let signed_sum = |pattern: u64| -> f64 {
        deviations
            .iter()
            .enumerate()
            .map(|(i, &d)| if pattern >> i & 1 == 1 { -d } else { d })
            .sum()
    };
    let n = deviations.len();
    if n <= EXACT_PERMUTATION_LIMIT {
        let total = 1u64 << n;
        let hits = (0..total).filter(|&p| signed_sum(p) <= observed + tolerance).count();
        return Ok((observed, hits as f64 / total as f64));
    }
    if n_permutations == 0 {
        return Err(Error::InvalidParameter("n_permutations must be >= 1".into()));
    }
    let mut rng = rng::stream(seed, Domain::Permutation, stream_index);
    let mut hits = 0usize;
    for _ in 0..n_permutations {
        let s: f64 = deviations
            .iter()
            .map(|&d| if rng.random::<bool>() { -d } else { d })
            .sum();
        if s <= observed + tolerance {
            hits += 1;
        }
    }
    Ok((observed, hits as f64 / n_permutations as f64))
}

pub fn permutation_test(
    maxima: &[f64],
    eigenvalues: &[f64],
    alpha: f64,
    n_permutations: usize,
    seed: u64,
) -> Result<TestReport> {
    check_alpha(alpha)?;
    let per_eigenvalue = eigenvalues
        .iter()
        .enumerate()
        .map(|(j, &l)| {
            let (d, p) = permutation_test_eig(maxima, l, n_permutations, seed, j as u64)?;
            Ok(TestEntry {
                eigenvalue: l,
                statistic: d,
                value: p,
                exceeds: p < 1.0 - alpha,
            })
        })
        .collect::<Result<_>>()?;
    Ok(TestReport {
        method: BoundMethod::Permutation,
        alpha,
        per_eigenvalue,
    })
}
