//! Dense linear algebra over small real matrices.
//!
//! The three matrix wrappers ([`SymPosDefMatrix`], [`InvertibleMatrix`],
//! [`OrthogonalMatrix`]) validate their numerical invariants at
//! construction, so every downstream routine can assume its inputs are
//! genuinely positive definite, invertible or orthogonal to working
//! precision. Decompositions are delegated to `nalgebra`.

mod decompose;
mod matrix;
mod sample;
pub mod text;

use thiserror::Error;

pub use decompose::{congruence, sqrt_pd, svd_decompose, SvdTriple};
pub use matrix::{InvertibleMatrix, OrthogonalMatrix, SymPosDefMatrix};
pub use sample::{random_gl, random_orthogonal, random_pd, random_sl, MAX_SAMPLER_ATTEMPTS};

/// Re-exported storage type.
pub type Matrix = nalgebra::DMatrix<f64>;

/// Largest supported dimension.
pub const MAX_DIM: usize = 64;
/// Relative asymmetry tolerated by [`SymPosDefMatrix`].
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Minimum ratio of smallest to largest eigenvalue accepted as positive definite.
pub const PD_EIGEN_RATIO: f64 = 1e-10;
/// `|det| >= INVERTIBILITY_TOL * sigma_max^n` gate for [`InvertibleMatrix`].
pub const INVERTIBILITY_TOL: f64 = 1e-8;
/// Max-entry tolerance on `QᵀQ − I` for [`OrthogonalMatrix`].
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension {0} outside the supported range 1..={MAX_DIM}")]
    Dimension(usize),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("matrix is not symmetric (relative asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is not positive definite ({0})")]
    NotPositiveDefinite(String),
    #[error("matrix fails the invertibility gate: |det| = {det:e} < {bound:e}")]
    NotInvertible { det: f64, bound: f64 },
    #[error("matrix is not orthogonal: max |QᵀQ − I| = {0:e}")]
    NotOrthogonal(f64),
    #[error("decomposition failed: {0}")]
    Decomposition(&'static str),
    #[error("sampler gave up after {0} attempts")]
    SamplerExhausted(usize),
    #[error("non-positive scalar {0}")]
    NonPositiveScalar(f64),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub(crate) fn check_square(m: &Matrix) -> Result<usize, LinalgError> {
    if m.nrows() != m.ncols() {
        return Err(LinalgError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    check_dim(m.nrows())?;
    if m.iter().any(|v| !v.is_finite()) {
        return Err(LinalgError::NonFinite);
    }
    Ok(m.nrows())
}

pub(crate) fn check_dim(n: usize) -> Result<(), LinalgError> {
    if n == 0 || n > MAX_DIM {
        Err(LinalgError::Dimension(n))
    } else {
        Ok(())
    }
}

/// Largest absolute entry of `a − b`.
pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// `‖a − b‖_F / ‖b‖_F`, falling back to the absolute norm when `b` is zero.
pub fn rel_frobenius(a: &Matrix, b: &Matrix) -> f64 {
    let diff = (a - b).norm();
    let scale = b.norm();
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}
