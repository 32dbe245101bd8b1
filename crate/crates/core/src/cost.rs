//! Cost functions on positive definite matrices.
//!
//! Every affine-invariant cost whose scalar restriction is surjective factors
//! through the determinant as `f = b ∘ H ∘ det`, where `H` is the quotient map
//! of the multiplicative group `(0, ∞)` by a kernel subgroup. This module
//! realizes the two kernels that can be represented in floating point:
//!
//! * [`KernelSpec::Trivial`]: `H` is the identity and `f = det`.
//! * [`KernelSpec::Lattice`]: `ker H = {2^(a·j) : j ∈ ℤ}` and `f` reduces the
//!   determinant into the fundamental interval `[1, 2^a)`.
//!
//! Two non-factoring controls are provided as well: the trace (not affine
//! invariant) and the identity map (affine invariant, yet its scalar
//! restriction is far from surjective, so it does not factor).
//!
//! A [`CostValue`] stores a real representative of the element of the
//! codomain. Values from different cost functions never compare equal.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{max_abs_diff, Matrix, SymPosDefMatrix};
use crate::rng::splitmix64;

/// Default relative tolerance `ε_S` for comparing cost values.
pub const DEFAULT_REL_TOL: f64 = 1e-8;
/// Entrywise tolerance for comparing identity-cost values.
pub const IDENTITY_TOL: f64 = 1e-10;
/// Quantization ratios this close to an integer snap to it.
pub const QUANTIZATION_SNAP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CostError {
    #[error("lattice constant must be a positive finite real, got {0}")]
    InvalidLattice(f64),
    #[error(
        "dense kernel subgroups such as the rationals cannot be represented: \
         membership is undecidable in floating point"
    )]
    DenseKernel,
    #[error("invalid cost selector {0:?}: expected det | qdet:<a> | trace | identity")]
    Selector(String),
}

/// A subgroup of the multiplicative group `(0, ∞)`, given in log2 scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "variant")]
pub enum KernelSpec {
    /// `ker H = {1}`.
    Trivial,
    /// `ker H = {2^(a·j) : j ∈ ℤ}` with `a > 0`.
    Lattice { a: f64 },
}

impl KernelSpec {
    pub fn lattice(a: f64) -> Result<Self, CostError> {
        if a > 0.0 && a.is_finite() {
            Ok(Self::Lattice { a })
        } else {
            Err(CostError::InvalidLattice(a))
        }
    }

    /// The rationals are a subgroup of `(ℝ, +)`, but not one we can test for.
    pub fn rationals() -> Result<Self, CostError> {
        Err(CostError::DenseKernel)
    }

    /// The log2 lattice constant; zero for the trivial kernel.
    pub fn log_constant(&self) -> f64 {
        match *self {
            Self::Trivial => 0.0,
            Self::Lattice { a } => a,
        }
    }
}

/// Which cost function produced a value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostClass {
    Det,
    QuantizedDet { a: f64 },
    Trace,
    Identity,
}

impl CostClass {
    pub fn tag(&self) -> String {
        match self {
            Self::Det => "det".into(),
            Self::QuantizedDet { a } => format!("qdet:{a}"),
            Self::Trace => "trace".into(),
            Self::Identity => "identity".into(),
        }
    }
}

/// An element of a cost function's codomain.
#[derive(Debug, Clone)]
pub struct CostValue {
    canonical: f64,
    class: CostClass,
    // Only the identity cost carries the full matrix.
    entries: Option<Matrix>,
}

impl CostValue {
    pub fn canonical(&self) -> f64 {
        self.canonical
    }

    pub fn class(&self) -> CostClass {
        self.class
    }

    pub fn class_tag(&self) -> String {
        self.class.tag()
    }

    /// Scaled distance to `other`, or `None` when the classes differ.
    ///
    /// For real-valued classes this is `|u − v| / max(1, |u|, |v|)`. Lattice
    /// representatives live on a circle (`2^a ≡ 1`), so the distance is also
    /// taken across the wrap. Identity values compare their matrices
    /// entrywise, scaled by `max(1, max|m_ij|)`.
    pub fn discrepancy(&self, other: &CostValue) -> Option<f64> {
        if self.class.tag() != other.class.tag() {
            return None;
        }
        let rel = |u: f64, v: f64| (u - v).abs() / 1f64.max(u.abs()).max(v.abs());
        let (u, v) = (self.canonical, other.canonical);
        Some(match self.class {
            CostClass::Det | CostClass::Trace => rel(u, v),
            CostClass::QuantizedDet { a } => {
                let period = a.exp2();
                rel(u, v).min(rel(u * period, v)).min(rel(u, v * period))
            }
            CostClass::Identity => match (&self.entries, &other.entries) {
                (Some(x), Some(y)) if x.shape() == y.shape() => {
                    max_abs_diff(x, y) / 1f64.max(x.amax()).max(y.amax())
                }
                _ => f64::INFINITY,
            },
        })
    }

    /// Tolerance-aware equality; identity values always use [`IDENTITY_TOL`].
    pub fn agrees(&self, other: &CostValue, rel_tol: f64) -> bool {
        let tol = match self.class {
            CostClass::Identity => IDENTITY_TOL,
            _ => rel_tol,
        };
        self.discrepancy(other).is_some_and(|d| d <= tol)
    }

    pub fn approx_eq(&self, other: &CostValue) -> bool {
        self.agrees(other, DEFAULT_REL_TOL)
    }
}

/// A map from PD(n) to some codomain, defined for every dimension.
pub trait Cost: Send + Sync {
    fn name(&self) -> String;
    /// The kernel of `H` when the function is known to factor through det.
    fn kernel(&self) -> Option<KernelSpec>;
    fn evaluate(&self, m: &SymPosDefMatrix) -> CostValue;
}

/// `f(M) = det(M)`.
pub fn det_cost(m: &SymPosDefMatrix) -> CostValue {
    CostValue {
        canonical: m.log_det().exp(),
        class: CostClass::Det,
        entries: None,
    }
}

/// Splits `log2 det` into the quantization index `k` and the representative
/// `2^(a·k) · det ∈ [1, 2^a)`.
///
/// Ratios within [`QUANTIZATION_SNAP`] of an integer are rounded first, so the
/// boundary `det = 2^(a·j)` maps to the lower edge 1.
pub fn quantize(log2_det: f64, a: f64) -> (i64, f64) {
    let r = log2_det / a;
    let nearest = r.round();
    if (r - nearest).abs() <= QUANTIZATION_SNAP * 1f64.max(r.abs()) {
        return (-(nearest as i64), 1.0);
    }
    let floor = r.floor();
    let canonical = (a * (r - floor)).exp2();
    (-(floor as i64), canonical.max(1.0))
}

/// `f(M) = 2^(a·k) · det(M)` with `k` the unique integer placing it in `[1, 2^a)`.
pub fn quantized_det_cost(m: &SymPosDefMatrix, a: f64) -> Result<CostValue, CostError> {
    KernelSpec::lattice(a)?;
    Ok(quantized_unchecked(m, a))
}

fn quantized_unchecked(m: &SymPosDefMatrix, a: f64) -> CostValue {
    let (_, canonical) = quantize(m.log_det() / std::f64::consts::LN_2, a);
    CostValue {
        canonical,
        class: CostClass::QuantizedDet { a },
        entries: None,
    }
}

/// `f(M) = tr(M)`. Not affine invariant; used as a negative control.
pub fn trace_cost(m: &SymPosDefMatrix) -> CostValue {
    CostValue {
        canonical: m.trace(),
        class: CostClass::Trace,
        entries: None,
    }
}

/// `f(M) = M`. Equality compares the matrices; the canonical real is only a
/// fingerprint of the raw entries.
pub fn identity_cost(m: &SymPosDefMatrix) -> CostValue {
    let h = m
        .as_matrix()
        .iter()
        .fold(splitmix64(m.dim() as u64), |acc, v| {
            splitmix64(acc ^ v.to_bits())
        });
    CostValue {
        canonical: (h >> 11) as f64 / (1u64 << 53) as f64,
        class: CostClass::Identity,
        entries: Some(m.as_matrix().clone()),
    }
}

/// The built-in cost functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostFunction {
    Det,
    QuantizedDet { a: f64 },
    Trace,
    Identity,
}

/// `f = b ∘ H ∘ det` for the given kernel of `H`.
pub fn factored_cost(kernel: KernelSpec) -> CostFunction {
    match kernel {
        KernelSpec::Trivial => CostFunction::Det,
        KernelSpec::Lattice { a } => CostFunction::QuantizedDet { a },
    }
}

impl CostFunction {
    /// Every factored cost exercised by the default verification suites.
    pub fn factored_family() -> Vec<CostFunction> {
        vec![
            CostFunction::Det,
            CostFunction::QuantizedDet { a: 0.5 },
            CostFunction::QuantizedDet { a: 1.0 },
            CostFunction::QuantizedDet { a: 2.0 },
        ]
    }
}

impl Cost for CostFunction {
    fn name(&self) -> String {
        self.to_string()
    }

    fn kernel(&self) -> Option<KernelSpec> {
        match *self {
            Self::Det => Some(KernelSpec::Trivial),
            Self::QuantizedDet { a } => Some(KernelSpec::Lattice { a }),
            Self::Trace | Self::Identity => None,
        }
    }

    fn evaluate(&self, m: &SymPosDefMatrix) -> CostValue {
        match *self {
            Self::Det => det_cost(m),
            Self::QuantizedDet { a } => quantized_unchecked(m, a),
            Self::Trace => trace_cost(m),
            Self::Identity => identity_cost(m),
        }
    }
}

impl fmt::Display for CostFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Det => f.write_str("det"),
            Self::QuantizedDet { a } => write!(f, "qdet:{a}"),
            Self::Trace => f.write_str("trace"),
            Self::Identity => f.write_str("identity"),
        }
    }
}

impl FromStr for CostFunction {
    type Err = CostError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "det" => Ok(Self::Det),
            "trace" => Ok(Self::Trace),
            "identity" => Ok(Self::Identity),
            _ => {
                let a = s
                    .strip_prefix("qdet:")
                    .and_then(|a| a.parse::<f64>().ok())
                    .ok_or_else(|| CostError::Selector(s.to_string()))?;
                let kernel = KernelSpec::lattice(a).map_err(|_| CostError::Selector(s.into()))?;
                Ok(factored_cost(kernel))
            }
        }
    }
}
