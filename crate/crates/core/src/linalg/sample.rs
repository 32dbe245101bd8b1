//! Seeded samplers for PD(n), GL(n), SL(n) and O(n).
//!
//! Each sampler draws from its own stream derived from `seed`, so calling two
//! different samplers with the same seed yields independent matrices.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{check_dim, InvertibleMatrix, LinalgError, Matrix, OrthogonalMatrix, SymPosDefMatrix};
use crate::rng::rng_for;

/// Resampling budget for the GL/SL samplers.
pub const MAX_SAMPLER_ATTEMPTS: usize = 100;

const PD_STREAM: u64 = 0x5044;
const GL_STREAM: u64 = 0x474C;
const ORTHO_STREAM: u64 = 0x4F52;
const SL_STREAM: u64 = 0x534C;

/// Relative diagonal shift keeping `random_pd` samples well conditioned.
const PD_SHIFT: f64 = 1e-3;

fn normal_matrix<R: Rng>(n: usize, rng: &mut R) -> Matrix {
    Matrix::from_fn(n, n, |_, _| rng.sample(StandardNormal))
}

/// `GᵀG + 1e-3·tr(GᵀG)/n · I` with standard normal `G`.
///
/// The shift bounds the eigenvalue ratio by `1000·n + 1`.
pub fn random_pd(n: usize, seed: u64) -> Result<SymPosDefMatrix, LinalgError> {
    check_dim(n)?;
    let mut rng = rng_for(seed, PD_STREAM);
    let g = normal_matrix(n, &mut rng);
    let gram = g.transpose() * &g;
    let shift = PD_SHIFT * gram.trace() / n as f64;
    SymPosDefMatrix::new(gram + Matrix::from_diagonal_element(n, n, shift))
}

fn gl_from_stream(n: usize, seed: u64, stream: u64) -> Result<InvertibleMatrix, LinalgError> {
    check_dim(n)?;
    let mut rng = rng_for(seed, stream);
    for _ in 0..MAX_SAMPLER_ATTEMPTS {
        if let Ok(a) = InvertibleMatrix::new(normal_matrix(n, &mut rng)) {
            return Ok(a);
        }
    }
    Err(LinalgError::SamplerExhausted(MAX_SAMPLER_ATTEMPTS))
}

/// Standard normal entries, resampled until the invertibility gate passes.
pub fn random_gl(n: usize, seed: u64) -> Result<InvertibleMatrix, LinalgError> {
    gl_from_stream(n, seed, GL_STREAM)
}

/// Haar-distributed orthogonal matrix: the Q factor of a normal matrix with
/// the signs of R's diagonal folded into its columns.
pub fn random_orthogonal(n: usize, seed: u64) -> Result<OrthogonalMatrix, LinalgError> {
    check_dim(n)?;
    let mut rng = rng_for(seed, ORTHO_STREAM);
    let qr = normal_matrix(n, &mut rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    OrthogonalMatrix::new(q)
}

/// A determinant-one sample: a GL draw rescaled by `|det|^(-1/n)`, with the
/// first column negated when the determinant was negative.
pub fn random_sl(n: usize, seed: u64) -> Result<InvertibleMatrix, LinalgError> {
    let a = gl_from_stream(n, seed, SL_STREAM)?;
    let det = a.det();
    let mut m = a.into_matrix() * det.abs().powf(-1.0 / n as f64);
    if det < 0.0 {
        m.column_mut(0).neg_mut();
    }
    InvertibleMatrix::new(m)
}
