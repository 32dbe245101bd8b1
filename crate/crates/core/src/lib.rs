//! Affine-invariant cost functions on positive definite matrices.
//!
//! A map `f` on PD(n) is affine invariant when `f(M) = f(N)` implies
//! `f(AᵀMA) = f(AᵀNA)` for every invertible `A`. If in addition every value
//! of `f` is attained on some scalar matrix `sI`, then `f` factors through
//! the determinant: `f = b ∘ H ∘ det` with `H` a homomorphism of the
//! multiplicative group `(0, ∞)`.
//!
//! The crate provides:
//!
//! * [`linalg`]: validated PD / GL / orthogonal matrix types, congruence,
//!   PD square roots, SVD and seeded samplers.
//! * [`cost`]: the det-factoring cost family and two non-factoring controls.
//! * [`group`]: elementary matrices, commutator witnesses, SL(n)
//!   decomposition and cost-kernel membership.
//! * [`harness`]: randomized checks of every identity the factorization
//!   relies on, a scalar-surjectivity probe and kernel estimation.
//! * [`mcd`]: the exhaustive minimum covariance determinant estimator and an
//!   affine-equivariance check.

// Gates are written `!(x > bound)` so that NaN is rejected with the rest.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cost;
pub mod group;
pub mod harness;
pub mod linalg;
pub mod mcd;
pub mod rng;

pub use cost::{Cost, CostFunction, CostValue, KernelSpec};
pub use linalg::{InvertibleMatrix, OrthogonalMatrix, SymPosDefMatrix};
