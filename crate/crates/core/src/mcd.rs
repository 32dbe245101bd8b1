//! Minimum covariance determinant location estimator.
//!
//! `T(X)` is the mean of the `h` points whose covariance matrix minimizes the
//! cost (the determinant, classically). The search is exhaustive over all
//! `h`-subsets in lexicographic order. Because `det(AΣAᵀ) = det(A)²·det(Σ)`
//! rescales every subset's cost by the same factor, the winning subset does
//! not move under `x ↦ Ax + b` and the estimator is affine equivariant.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use thiserror::Error;

use crate::cost::{Cost, CostValue, DEFAULT_REL_TOL};
use crate::linalg::{InvertibleMatrix, LinalgError, Matrix, SymPosDefMatrix, MAX_DIM};
use crate::rng::rng_for;

/// Upper bound on `C(k, h)` for the exhaustive search.
pub const MAX_SUBSETS: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum McdError {
    #[error("dataset must contain at least one point")]
    EmptyDataset,
    #[error("point {index} has dimension {found}, expected {expected}")]
    RaggedPoint {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("point dimension {0} outside 1..={MAX_DIM}")]
    Dimension(usize),
    #[error("point {0} has non-finite coordinates")]
    NonFinite(usize),
    #[error("subset is empty")]
    EmptySubset,
    #[error("index {index} out of range for {k} points")]
    IndexOutOfRange { index: usize, k: usize },
    #[error("subset of {size} points in dimension {n} has a singular covariance (need >= n + 1)")]
    TooFewPoints { size: usize, n: usize },
    #[error("subset covariance is degenerate: {0}")]
    Degenerate(LinalgError),
    #[error("h = {h} outside [{min}, {k}]")]
    SubsetSize { h: usize, min: usize, k: usize },
    #[error("C({k}, {h}) = {count} subsets exceeds the exhaustive-search limit {MAX_SUBSETS}")]
    TooManySubsets { k: usize, h: usize, count: u128 },
    #[error("every {h}-subset has a degenerate covariance")]
    AllDegenerate { h: usize },
    #[error("dimension mismatch: dataset has n = {dataset}, transform has {transform}")]
    TransformMismatch { dataset: usize, transform: usize },
}

/// `k` points in `ℝⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    n: usize,
    points: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self, McdError> {
        let n = points.first().ok_or(McdError::EmptyDataset)?.len();
        if n == 0 || n > MAX_DIM {
            return Err(McdError::Dimension(n));
        }
        for (index, p) in points.iter().enumerate() {
            if p.len() != n {
                return Err(McdError::RaggedPoint {
                    index,
                    expected: n,
                    found: p.len(),
                });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(McdError::NonFinite(index));
            }
        }
        Ok(Self { n, points })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn centroid(&self) -> Vec<f64> {
        let all: Vec<usize> = (0..self.len()).collect();
        subset_mean(self, &all).expect("dataset is nonempty")
    }
}

/// How the scatter matrix is normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Normalization {
    /// `1/h`.
    #[default]
    Population,
    /// `1/(h − 1)`.
    Sample,
}

fn check_indices(x: &Dataset, subset: &[usize]) -> Result<(), McdError> {
    if subset.is_empty() {
        return Err(McdError::EmptySubset);
    }
    match subset.iter().find(|&&i| i >= x.len()) {
        Some(&index) => Err(McdError::IndexOutOfRange { index, k: x.len() }),
        None => Ok(()),
    }
}

pub fn subset_mean(x: &Dataset, subset: &[usize]) -> Result<Vec<f64>, McdError> {
    check_indices(x, subset)?;
    let mut mean = vec![0.0; x.n];
    for &i in subset {
        for (m, v) in mean.iter_mut().zip(&x.points[i]) {
            *m += v;
        }
    }
    let h = subset.len() as f64;
    mean.iter_mut().for_each(|m| *m /= h);
    Ok(mean)
}

/// `(1/h)·Σ (xᵢ − m)(xᵢ − m)ᵀ` over the subset, gated as positive definite.
pub fn subset_covariance(x: &Dataset, subset: &[usize]) -> Result<SymPosDefMatrix, McdError> {
    subset_covariance_with(x, subset, Normalization::Population)
}

pub fn subset_covariance_with(
    x: &Dataset,
    subset: &[usize],
    norm: Normalization,
) -> Result<SymPosDefMatrix, McdError> {
    let mean = subset_mean(x, subset)?;
    let n = x.n;
    if subset.len() <= n {
        return Err(McdError::TooFewPoints {
            size: subset.len(),
            n,
        });
    }
    let mut scatter = Matrix::zeros(n, n);
    for &i in subset {
        let d: Vec<f64> = x.points[i].iter().zip(&mean).map(|(v, m)| v - m).collect();
        for r in 0..n {
            for c in 0..n {
                scatter[(r, c)] += d[r] * d[c];
            }
        }
    }
    let denom = match norm {
        Normalization::Population => subset.len() as f64,
        Normalization::Sample => (subset.len() - 1) as f64,
    };
    SymPosDefMatrix::new(scatter / denom).map_err(McdError::Degenerate)
}

#[derive(Debug, Clone)]
pub struct EstimateResult {
    pub mean: Vec<f64>,
    /// Strictly increasing indices of the winning subset.
    pub subset: Vec<usize>,
    pub cost_value: CostValue,
    pub subsets_examined: usize,
    /// Subsets skipped because their covariance failed the PD gate.
    pub degenerate_skipped: usize,
    /// Canonical cost of the best subset that is not tied with the winner.
    pub runner_up_cost: Option<f64>,
}

fn binomial(k: usize, h: usize) -> u128 {
    let h = h.min(k - h) as u128;
    let mut acc: u128 = 1;
    for i in 0..h {
        acc = acc * (k as u128 - i) / (i + 1);
        if acc > MAX_SUBSETS * 1000 {
            return acc;
        }
    }
    acc
}

/// Advances `idx` to the next `h`-subset of `0..k` in lexicographic order.
fn next_combination(idx: &mut [usize], k: usize) -> bool {
    let h = idx.len();
    let Some(pos) = (0..h).rev().find(|&p| idx[p] < k - h + p) else {
        return false;
    };
    idx[pos] += 1;
    for p in pos + 1..h {
        idx[p] = idx[p - 1] + 1;
    }
    true
}

pub fn mcd_estimate<C: Cost + ?Sized>(
    x: &Dataset,
    h: usize,
    f: &C,
) -> Result<EstimateResult, McdError> {
    mcd_estimate_with(x, h, f, Normalization::Population)
}

/// Exhaustive search for the `h`-subset minimizing the canonical cost of its
/// covariance. Costs within `ε_S` of the incumbent count as ties and keep the
/// lexicographically smaller subset.
pub fn mcd_estimate_with<C: Cost + ?Sized>(
    x: &Dataset,
    h: usize,
    f: &C,
    norm: Normalization,
) -> Result<EstimateResult, McdError> {
    let k = x.len();
    let min = x.n + 1;
    if h < min || h > k {
        return Err(McdError::SubsetSize { h, min, k });
    }
    let count = binomial(k, h);
    if count > MAX_SUBSETS {
        return Err(McdError::TooManySubsets { k, h, count });
    }

    let mut idx: Vec<usize> = (0..h).collect();
    let mut best: Option<(CostValue, Vec<usize>)> = None;
    let mut runner_up: Option<f64> = None;
    let mut examined = 0;
    let mut degenerate = 0;
    loop {
        examined += 1;
        match subset_covariance_with(x, &idx, norm) {
            Ok(cov) => {
                let value = f.evaluate(&cov);
                match &best {
                    None => best = Some((value, idx.clone())),
                    Some((incumbent, _)) => {
                        let tied = value.agrees(incumbent, DEFAULT_REL_TOL);
                        let (v, b) = (value.canonical(), incumbent.canonical());
                        if !tied && v < b {
                            runner_up = Some(b);
                            best = Some((value, idx.clone()));
                        } else if !tied && runner_up.is_none_or(|r| v < r) {
                            runner_up = Some(v);
                        }
                    }
                }
            }
            Err(McdError::Degenerate(_)) => degenerate += 1,
            Err(e) => return Err(e),
        }
        if !next_combination(&mut idx, k) {
            break;
        }
    }

    let (cost_value, subset) = best.ok_or(McdError::AllDegenerate { h })?;
    Ok(EstimateResult {
        mean: subset_mean(x, &subset)?,
        subset,
        cost_value,
        subsets_examined: examined,
        degenerate_skipped: degenerate,
        runner_up_cost: runner_up,
    })
}

/// `xᵢ ↦ A·xᵢ + b`.
pub fn affine_transform_dataset(
    x: &Dataset,
    a: &InvertibleMatrix,
    b: &[f64],
) -> Result<Dataset, McdError> {
    if a.dim() != x.n || b.len() != x.n {
        return Err(McdError::TransformMismatch {
            dataset: x.n,
            transform: if a.dim() != x.n { a.dim() } else { b.len() },
        });
    }
    let points = x.points.iter().map(|p| apply_affine(a, b, p)).collect();
    Dataset::new(points)
}

fn apply_affine(a: &InvertibleMatrix, b: &[f64], p: &[f64]) -> Vec<f64> {
    let m = a.as_matrix();
    (0..b.len())
        .map(|r| b[r] + (0..p.len()).map(|c| m[(r, c)] * p[c]).sum::<f64>())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivarianceCheck {
    pub equivariant: bool,
    /// `T(AX + b)`.
    pub lhs: Vec<f64>,
    /// `A·T(X) + b`.
    pub rhs: Vec<f64>,
    pub subsets_agree: bool,
}

/// Compares `T(AX + b)` with `A·T(X) + b` at relative tolerance `1e-8`.
pub fn check_equivariance<C: Cost + ?Sized>(
    x: &Dataset,
    h: usize,
    a: &InvertibleMatrix,
    b: &[f64],
    f: &C,
) -> Result<EquivarianceCheck, McdError> {
    let base = mcd_estimate(x, h, f)?;
    let moved = mcd_estimate(&affine_transform_dataset(x, a, b)?, h, f)?;
    let rhs = apply_affine(a, b, &base.mean);
    let lhs = moved.mean;
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = lhs.iter().zip(&rhs).map(|(l, r)| l - r).collect();
    let equivariant = norm(&diff) <= DEFAULT_REL_TOL * 1f64.max(norm(&rhs));
    Ok(EquivarianceCheck {
        equivariant,
        lhs,
        rhs,
        subsets_agree: base.subset == moved.subset,
    })
}

/// `k` standard normal points in `ℝⁿ`, deterministic in `seed`.
pub fn random_dataset(n: usize, k: usize, seed: u64) -> Result<Dataset, McdError> {
    let mut rng = rng_for(seed, 0x004D_4344);
    let points = (0..k)
        .map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    Dataset::new(points)
}
