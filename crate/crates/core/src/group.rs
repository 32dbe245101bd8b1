//! Constructive group theory on GL(n, ℝ).
//!
//! * Elementary matrices `E_ij(λ)` (identity plus one off-diagonal entry)
//!   generate SL(n); [`decompose_sl`] produces such a factorization using row
//!   additions only.
//! * Every elementary matrix is a commutator ([`elementary_as_commutator`]),
//!   so the derived subgroup of GL(n, ℝ) contains SL(n).
//! * [`kernel_membership`] tests `f(AᵀA) = f(I)`, the defining condition of
//!   the cost kernel subgroup `𝒦`.
//!
//! Row and column indices of elementary matrices are 1-based, matching the
//! usual `E_ij` notation and the CLI.

use serde::Serialize;
use thiserror::Error;

use crate::cost::{Cost, DEFAULT_REL_TOL};
use crate::linalg::{
    congruence, rel_frobenius, InvertibleMatrix, LinalgError, Matrix, SymPosDefMatrix,
};

/// Tolerance on `|det − 1|` accepted by [`decompose_sl`].
pub const SL_DET_TOL: f64 = 1e-8;
/// Pivots at or below this magnitude (relative to the column) count as zero.
pub const PIVOT_TOL: f64 = 1e-10;
/// A pivot smaller than this fraction of the largest entry below it is
/// reinforced before elimination, which bounds the multipliers.
const REINFORCE_RATIO: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GroupError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("indices ({i}, {j}) out of range for dimension {n} (1-based)")]
    IndexOutOfRange { n: usize, i: usize, j: usize },
    #[error("elementary matrices need distinct indices, got i = j = {0}")]
    DiagonalIndex(usize),
    #[error("construction needs n >= 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("determinant {det} is not within {SL_DET_TOL:e} of 1")]
    NotSpecialLinear { det: f64 },
    #[error("no usable pivot in column {column}; input is numerically singular")]
    PivotUnreachable { column: usize },
}

/// `E_ij(λ)`: the identity with entry `(i, j)` set to `λ`, 1-based, `i ≠ j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ElementaryMatrix {
    pub n: usize,
    pub i: usize,
    pub j: usize,
    pub lambda: f64,
}

impl ElementaryMatrix {
    pub fn new(n: usize, i: usize, j: usize, lambda: f64) -> Result<Self, GroupError> {
        crate::linalg::check_dim(n)?;
        if i == 0 || j == 0 || i > n || j > n {
            return Err(GroupError::IndexOutOfRange { n, i, j });
        }
        if i == j {
            return Err(GroupError::DiagonalIndex(i));
        }
        if !lambda.is_finite() {
            return Err(LinalgError::NonFinite.into());
        }
        Ok(Self { n, i, j, lambda })
    }

    pub fn to_matrix(&self) -> Matrix {
        let mut m = Matrix::identity(self.n, self.n);
        m[(self.i - 1, self.j - 1)] = self.lambda;
        m
    }

    pub fn inverse(&self) -> Self {
        Self {
            lambda: -self.lambda,
            ..*self
        }
    }

    /// Left-multiplies `m` in place: row `i` += λ · row `j`.
    fn apply_left(&self, m: &mut Matrix) {
        let (i, j) = (self.i - 1, self.j - 1);
        for c in 0..m.ncols() {
            let v = m[(j, c)];
            m[(i, c)] += self.lambda * v;
        }
    }
}

/// The elementary matrix `E_ij(λ)` as a member of GL(n). Its determinant is
/// exactly 1: the matrix is unit triangular.
pub fn elementary(
    n: usize,
    i: usize,
    j: usize,
    lambda: f64,
) -> Result<InvertibleMatrix, GroupError> {
    let e = ElementaryMatrix::new(n, i, j, lambda)?;
    Ok(InvertibleMatrix::new(e.to_matrix())?)
}

fn same_dim(a: &InvertibleMatrix, b: &InvertibleMatrix) -> Result<(), GroupError> {
    if a.dim() != b.dim() {
        return Err(LinalgError::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        }
        .into());
    }
    Ok(())
}

/// `A·B·A⁻¹·B⁻¹`.
pub fn commutator(
    a: &InvertibleMatrix,
    b: &InvertibleMatrix,
) -> Result<InvertibleMatrix, GroupError> {
    same_dim(a, b)?;
    let a_inv = a.inverse()?;
    let b_inv = b.inverse()?;
    let prod = a.as_matrix() * b.as_matrix() * a_inv.as_matrix() * b_inv.as_matrix();
    Ok(InvertibleMatrix::new(prod)?)
}

/// `BᵀAᵀB⁻¹A⁻¹`, a member of `𝒦` for every affine-invariant cost. It equals
/// the commutator `[Bᵀ, Aᵀ]` when both factors are symmetric.
pub fn kernel_element(
    a: &InvertibleMatrix,
    b: &InvertibleMatrix,
) -> Result<InvertibleMatrix, GroupError> {
    same_dim(a, b)?;
    let a_inv = a.inverse()?;
    let b_inv = b.inverse()?;
    let prod = b.as_matrix().transpose()
        * a.as_matrix().transpose()
        * b_inv.as_matrix()
        * a_inv.as_matrix();
    Ok(InvertibleMatrix::new(prod)?)
}

/// Factors whose commutator realizes a given elementary matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutatorPair {
    pub a_factor: InvertibleMatrix,
    pub b_factor: InvertibleMatrix,
}

impl CommutatorPair {
    pub fn realize(&self) -> Result<InvertibleMatrix, GroupError> {
        commutator(&self.a_factor, &self.b_factor)
    }
}

/// Writes `E_ij(λ)` as a commutator `[A, B] = A·B·A⁻¹·B⁻¹`.
///
/// For `n >= 3` an auxiliary index `k ∉ {i, j}` gives
/// `[E_ik(λ), E_kj(1)] = E_ij(λ)`. For `n = 2` a diagonal `D` with
/// `d_i / d_j = 4` conjugates `E_ij(μ)` to `E_ij(4μ)`, so
/// `[D, E_ij(λ/3)] = E_ij(λ)`.
pub fn elementary_as_commutator(
    n: usize,
    i: usize,
    j: usize,
    lambda: f64,
) -> Result<CommutatorPair, GroupError> {
    if n < 2 {
        return Err(GroupError::DimensionTooSmall(n));
    }
    ElementaryMatrix::new(n, i, j, lambda)?;
    if n >= 3 {
        let k = (1..=n).find(|&k| k != i && k != j).expect("n >= 3");
        return Ok(CommutatorPair {
            a_factor: elementary(n, i, k, lambda)?,
            b_factor: elementary(n, k, j, 1.0)?,
        });
    }
    let mut d = [0.5, 0.5];
    d[i - 1] = 2.0;
    Ok(CommutatorPair {
        a_factor: InvertibleMatrix::from_diagonal(&d)?,
        b_factor: elementary(n, i, j, lambda / 3.0)?,
    })
}

/// Multiplies a factor list left to right.
pub fn product(factors: &[ElementaryMatrix], n: usize) -> Matrix {
    let mut acc = Matrix::identity(n, n);
    // Right-multiplying by E_ij(λ) adds λ · column i to column j.
    for e in factors {
        let (i, j) = (e.i - 1, e.j - 1);
        for r in 0..n {
            let v = acc[(r, i)];
            acc[(r, j)] += e.lambda * v;
        }
    }
    acc
}

/// Factors a determinant-one matrix into elementary matrices.
///
/// Row additions reduce `A` to the identity: forward elimination (a zero or
/// very small pivot is first reinforced by adding the row holding the
/// largest entry below it, since swaps would leave SL(n)), back substitution
/// to a diagonal, then 2×2 row-addition moves that push each diagonal entry
/// down into the last one. The final entry equals `det A ≈ 1` and is absorbed. Returns
/// the inverses of the applied row operations in application order, so the
/// left-to-right product reconstructs `A`.
pub fn decompose_sl(a: &InvertibleMatrix) -> Result<Vec<ElementaryMatrix>, GroupError> {
    let det = a.det();
    if !((det - 1.0).abs() <= SL_DET_TOL) {
        return Err(GroupError::NotSpecialLinear { det });
    }
    let n = a.dim();
    let mut w = a.as_matrix().clone();
    let mut ops: Vec<ElementaryMatrix> = Vec::new();
    let mut apply = |w: &mut Matrix, i: usize, j: usize, lambda: f64| {
        if lambda != 0.0 {
            let e = ElementaryMatrix {
                n,
                i: i + 1,
                j: j + 1,
                lambda,
            };
            e.apply_left(w);
            ops.push(e);
        }
    };

    for c in 0..n {
        let (best_row, best) = (c + 1..n)
            .map(|r| (r, w[(r, c)].abs()))
            .fold((c, 0.0f64), |acc, x| if x.1 > acc.1 { x } else { acc });
        let pivot = w[(c, c)];
        let col_scale = (c..n).map(|r| w[(r, c)].abs()).fold(0.0, f64::max);
        if pivot.abs() < REINFORCE_RATIO * best {
            // Choose the sign so the magnitudes add.
            let sign = if pivot * w[(best_row, c)] >= 0.0 {
                1.0
            } else {
                -1.0
            };
            apply(&mut w, c, best_row, sign);
        }
        let pivot = w[(c, c)];
        if !(pivot.abs() > PIVOT_TOL * col_scale) || col_scale == 0.0 {
            return Err(GroupError::PivotUnreachable { column: c + 1 });
        }
        for r in c + 1..n {
            let lambda = -w[(r, c)] / pivot;
            apply(&mut w, r, c, lambda);
            w[(r, c)] = 0.0;
        }
    }

    for c in (0..n).rev() {
        let pivot = w[(c, c)];
        for r in 0..c {
            let lambda = -w[(r, c)] / pivot;
            apply(&mut w, r, c, lambda);
            w[(r, c)] = 0.0;
        }
    }

    // diag(d, e) -> diag(1, d·e) on rows (c, c+1).
    for c in 0..n.saturating_sub(1) {
        let d = w[(c, c)];
        if d == 1.0 {
            continue;
        }
        apply(&mut w, c + 1, c, 1.0 / d);
        let lambda = (1.0 - d) / w[(c + 1, c)];
        apply(&mut w, c, c + 1, lambda);
        let lambda = -w[(c + 1, c)] / w[(c, c)];
        apply(&mut w, c + 1, c, lambda);
        let tail = w[(c, c + 1)] / w[(c + 1, c + 1)];
        apply(&mut w, c, c + 1, -tail);
        w[(c + 1, c)] = 0.0;
        w[(c, c + 1)] = 0.0;
    }

    Ok(ops.iter().map(ElementaryMatrix::inverse).collect())
}

/// Relative Frobenius error of a decomposition.
pub fn reconstruction_error(a: &InvertibleMatrix, factors: &[ElementaryMatrix]) -> f64 {
    rel_frobenius(&product(factors, a.dim()), a.as_matrix())
}

/// `f(AᵀA) = f(I)` at the default tolerance.
pub fn kernel_membership<F: Cost + ?Sized>(
    a: &InvertibleMatrix,
    f: &F,
) -> Result<bool, GroupError> {
    kernel_membership_tol(a, f, DEFAULT_REL_TOL)
}

pub fn kernel_membership_tol<F: Cost + ?Sized>(
    a: &InvertibleMatrix,
    f: &F,
    rel_tol: f64,
) -> Result<bool, GroupError> {
    let id = SymPosDefMatrix::identity(a.dim())?;
    let gram = congruence(&id, a)?;
    Ok(f.evaluate(&gram).agrees(&f.evaluate(&id), rel_tol))
}
