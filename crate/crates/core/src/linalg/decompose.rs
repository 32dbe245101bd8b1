use nalgebra::{SymmetricEigen, SVD};

use super::{InvertibleMatrix, LinalgError, Matrix, OrthogonalMatrix, SymPosDefMatrix};

/// The congruence transform `AᵀMA`.
///
/// The result is exactly symmetric: each upper-triangle entry is computed
/// once and mirrored.
///
/// Fails if the dimensions differ or if round-off has pushed the result out
/// of the positive definite gate.
pub fn congruence(
    m: &SymPosDefMatrix,
    a: &InvertibleMatrix,
) -> Result<SymPosDefMatrix, LinalgError> {
    if m.dim() != a.dim() {
        return Err(LinalgError::DimensionMismatch {
            left: m.dim(),
            right: a.dim(),
        });
    }
    let (a, m) = (a.as_matrix(), m.as_matrix());
    let n = a.nrows();
    let mut r = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = compensated_sum(
                (0..n).flat_map(|k| (0..n).map(move |l| (a[(k, i)], m[(k, l)], a[(l, j)]))),
            );
            r[(i, j)] = v;
            r[(j, i)] = v;
        }
    }
    SymPosDefMatrix::new(r)
}

/// `Σ x·y·z` accumulated with error-free transformations (FMA products and
/// two-sum), so the result is close to the correctly rounded sum. Plain
/// evaluation loses up to `cond(A)²` digits in `AᵀMA`, which the
/// determinant then inherits.
fn compensated_sum(terms: impl Iterator<Item = (f64, f64, f64)>) -> f64 {
    let (mut sum, mut err) = (0.0f64, 0.0f64);
    for (x, y, z) in terms {
        let p1 = x * y;
        let e1 = x.mul_add(y, -p1);
        let p2 = p1 * z;
        let e2 = p1.mul_add(z, -p2);
        let t = sum + p2;
        let bp = t - sum;
        err += (sum - (t - bp)) + (p2 - bp) + e2 + e1 * z;
        sum = t;
    }
    sum + err
}

/// The unique positive definite square root, via symmetric eigendecomposition.
pub fn sqrt_pd(m: &SymPosDefMatrix) -> Result<SymPosDefMatrix, LinalgError> {
    let eig = SymmetricEigen::new(m.as_matrix().clone());
    if eig.eigenvalues.iter().any(|&v| !(v > 0.0)) {
        return Err(LinalgError::Decomposition(
            "non-positive eigenvalue in sqrt_pd",
        ));
    }
    let v = &eig.eigenvectors;
    let root = v * Matrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt)) * v.transpose();
    SymPosDefMatrix::new((&root + root.transpose()) * 0.5)
}

/// `A = left · diag(singular) · right`, singular values nonincreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdTriple {
    pub left: OrthogonalMatrix,
    pub singular: Vec<f64>,
    pub right: OrthogonalMatrix,
}

impl SvdTriple {
    pub fn reconstruct(&self) -> Matrix {
        let sigma = Matrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.singular));
        self.left.as_matrix() * sigma * self.right.as_matrix()
    }

    /// `diag(singular)` as a matrix.
    pub fn lambda(&self) -> Matrix {
        Matrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.singular))
    }
}

pub fn svd_decompose(a: &InvertibleMatrix) -> Result<SvdTriple, LinalgError> {
    let n = a.dim();
    let svd = SVD::try_new(a.as_matrix().clone(), true, true, f64::EPSILON, 0)
        .ok_or(LinalgError::Decomposition("SVD did not converge"))?;
    let u = svd.u.ok_or(LinalgError::Decomposition("SVD missing U"))?;
    let v_t = svd
        .v_t
        .ok_or(LinalgError::Decomposition("SVD missing Vᵀ"))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));

    let mut left = Matrix::zeros(n, n);
    let mut right = Matrix::zeros(n, n);
    let mut singular = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        left.set_column(dst, &u.column(src));
        right.set_row(dst, &v_t.row(src));
        singular.push(svd.singular_values[src]);
    }
    Ok(SvdTriple {
        left: OrthogonalMatrix::new(left)?,
        singular,
        right: OrthogonalMatrix::new(right)?,
    })
}
