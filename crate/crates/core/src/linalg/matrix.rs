use nalgebra::{Cholesky, SymmetricEigen};

use super::{
    check_dim, check_square, max_abs_diff, LinalgError, Matrix, INVERTIBILITY_TOL,
    ORTHOGONALITY_TOL, PD_EIGEN_RATIO, SYMMETRY_TOL,
};

/// A dense symmetric positive definite matrix.
///
/// Construction symmetrizes the input, attempts a Cholesky factorization and
/// rejects matrices whose eigenvalue ratio falls below [`PD_EIGEN_RATIO`].
/// The log-determinant is computed once from the Cholesky factor and cached.
#[derive(Debug, Clone, PartialEq)]
pub struct SymPosDefMatrix {
    entries: Matrix,
    log_det: f64,
}

impl SymPosDefMatrix {
    pub fn new(entries: Matrix) -> Result<Self, LinalgError> {
        let n = check_square(&entries)?;
        let scale = entries.amax().max(1.0);
        let mut asym = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                asym = asym.max((entries[(i, j)] - entries[(j, i)]).abs());
            }
        }
        if asym > SYMMETRY_TOL * scale {
            return Err(LinalgError::NotSymmetric(asym / scale));
        }
        let sym = (&entries + entries.transpose()) * 0.5;

        let chol = Cholesky::new(sym.clone()).ok_or_else(|| {
            LinalgError::NotPositiveDefinite("Cholesky factorization failed".into())
        })?;
        let log_det = 2.0
            * chol
                .l_dirty()
                .diagonal()
                .iter()
                .map(|d| d.ln())
                .sum::<f64>();

        let eig = SymmetricEigen::new(sym.clone());
        let (lo, hi) = eig
            .eigenvalues
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        if !(lo > PD_EIGEN_RATIO * hi) {
            return Err(LinalgError::NotPositiveDefinite(format!(
                "eigenvalue ratio {:e} below {PD_EIGEN_RATIO:e}",
                lo / hi
            )));
        }
        Ok(Self {
            entries: sym,
            log_det,
        })
    }

    pub fn identity(n: usize) -> Result<Self, LinalgError> {
        Self::scalar(n, 1.0)
    }

    /// The scalar matrix `s·I`.
    pub fn scalar(n: usize, s: f64) -> Result<Self, LinalgError> {
        check_dim(n)?;
        if !(s > 0.0) || !s.is_finite() {
            return Err(LinalgError::NonPositiveScalar(s));
        }
        Self::new(Matrix::from_diagonal_element(n, n, s))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self, LinalgError> {
        check_dim(diag.len())?;
        Self::new(Matrix::from_diagonal(
            &nalgebra::DVector::from_column_slice(diag),
        ))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.entries
    }

    pub fn into_matrix(self) -> Matrix {
        self.entries
    }

    /// Natural log of the determinant, as twice the sum of log Cholesky pivots.
    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    pub fn det(&self) -> f64 {
        self.log_det.exp()
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    /// True when every off-diagonal entry is within `tol` of zero and the
    /// diagonal entries agree to `tol` relative.
    pub fn is_scalar(&self, tol: f64) -> bool {
        let n = self.dim();
        let d0 = self.entries[(0, 0)];
        let scale = self.entries.amax().max(1.0);
        (0..n).all(|i| {
            (0..n).all(|j| {
                let target = if i == j { d0 } else { 0.0 };
                (self.entries[(i, j)] - target).abs() <= tol * scale
            })
        })
    }
}

/// A well-conditioned invertible matrix (member of GL(n)).
///
/// The gate `|det| >= 1e-8 · sigma_max^n` rejects matrices that are
/// singular to working precision.
#[derive(Debug, Clone, PartialEq)]
pub struct InvertibleMatrix {
    entries: Matrix,
    det: f64,
}

impl InvertibleMatrix {
    pub fn new(entries: Matrix) -> Result<Self, LinalgError> {
        let n = check_square(&entries)?;
        let det = entries.determinant();
        let sigma_max = entries
            .singular_values()
            .iter()
            .copied()
            .fold(0.0, f64::max);
        let bound = INVERTIBILITY_TOL * sigma_max.powi(n as i32);
        if !(det.abs() >= bound) || det == 0.0 {
            return Err(LinalgError::NotInvertible { det, bound });
        }
        Ok(Self { entries, det })
    }

    pub fn identity(n: usize) -> Result<Self, LinalgError> {
        check_dim(n)?;
        Self::new(Matrix::identity(n, n))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self, LinalgError> {
        check_dim(diag.len())?;
        Self::new(Matrix::from_diagonal(
            &nalgebra::DVector::from_column_slice(diag),
        ))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.entries
    }

    pub fn into_matrix(self) -> Matrix {
        self.entries
    }

    /// Determinant from the LU factorization.
    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn transpose(&self) -> Result<Self, LinalgError> {
        Self::new(self.entries.transpose())
    }

    pub fn inverse(&self) -> Result<Self, LinalgError> {
        let inv = self
            .entries
            .clone()
            .try_inverse()
            .ok_or(LinalgError::Decomposition("LU inverse of singular matrix"))?;
        Self::new(inv)
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self, LinalgError> {
        if self.dim() != rhs.dim() {
            return Err(LinalgError::DimensionMismatch {
                left: self.dim(),
                right: rhs.dim(),
            });
        }
        Self::new(&self.entries * &rhs.entries)
    }

    pub fn scale(&self, s: f64) -> Result<Self, LinalgError> {
        Self::new(&self.entries * s)
    }

    /// Ratio of the extreme singular values.
    pub fn condition_number(&self) -> f64 {
        let sv = self.entries.singular_values();
        let (lo, hi) = sv.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
        hi / lo
    }
}

impl From<OrthogonalMatrix> for InvertibleMatrix {
    fn from(q: OrthogonalMatrix) -> Self {
        let det = q.entries.determinant();
        Self {
            entries: q.entries,
            det,
        }
    }
}

/// A real orthogonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalMatrix {
    entries: Matrix,
}

impl OrthogonalMatrix {
    pub fn new(entries: Matrix) -> Result<Self, LinalgError> {
        let n = check_square(&entries)?;
        let err = max_abs_diff(&(entries.transpose() * &entries), &Matrix::identity(n, n));
        if err > ORTHOGONALITY_TOL {
            return Err(LinalgError::NotOrthogonal(err));
        }
        Ok(Self { entries })
    }

    pub fn identity(n: usize) -> Result<Self, LinalgError> {
        check_dim(n)?;
        Ok(Self {
            entries: Matrix::identity(n, n),
        })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.entries
    }

    pub fn into_matrix(self) -> Matrix {
        self.entries
    }
}
