//! Recovering `ker H` from a cost function by probing scalar matrices.
//!
//! A factoring cost satisfies `f(t^(1/n)·I) = f(I)` exactly when `t ∈ ker H`.
//! Writing `x = log2 t`, a lattice kernel `{2^(a·j)}` shows up as isolated
//! zeros of the discrepancy `d(x)` at `x = a, 2a, …`, and the trivial kernel
//! shows no zero at all in `(0, log2 t_max]`.

use serde::Serialize;

use super::{check_det_factorization, probe_scalar_surjectivity, HarnessError, TrialConfig};
use crate::cost::Cost;
use crate::linalg::SymPosDefMatrix;

/// Upper end of the scanned range of `t`.
pub const KERNEL_T_MAX: f64 = 16.0;
/// Log-spaced grid points in `(1, t_max]`.
pub const KERNEL_GRID_POINTS: usize = 2048;
/// Absolute accuracy of the refined lattice constant.
pub const KERNEL_A_TOL: f64 = 1e-6;
/// Trials used by the precondition checks.
const PRECHECK_TRIALS: usize = 32;
const REFINE_WIDTH: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KernelGuess {
    Trivial,
    Lattice,
    /// The flags do not fit a lattice, or the cost does not factor through det.
    Unrecognized,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelEstimate {
    pub variant_guess: KernelGuess,
    /// log2 of the smallest nontrivial kernel element; present iff `Lattice`.
    pub a_estimate: Option<f64>,
    /// Kernel elements found, summed over the scanned dimensions.
    pub matched_grid_points: usize,
    pub reason: Option<String>,
}

impl KernelEstimate {
    fn unrecognized(reason: impl Into<String>, matched: usize) -> Self {
        Self {
            variant_guess: KernelGuess::Unrecognized,
            a_estimate: None,
            matched_grid_points: matched,
            reason: Some(reason.into()),
        }
    }

    /// Summary line, e.g. `Trivial` or `Lattice a=0.500000`.
    pub fn summary(&self) -> String {
        match (self.variant_guess, self.a_estimate) {
            (KernelGuess::Lattice, Some(a)) => format!("Lattice a={a:.6}"),
            (KernelGuess::Trivial, _) => "Trivial".into(),
            _ => format!(
                "Unrecognized: {}",
                self.reason.as_deref().unwrap_or("no lattice pattern")
            ),
        }
    }
}

/// Scans `t = 2^x` over `(1, t_max]` for kernel elements of `H`.
///
/// The cost must pass the scalar-surjectivity probe and the det-factorization
/// check first (run here with a reduced trial count); otherwise `H` is not
/// defined and the outcome is `Unrecognized`.
pub fn estimate_kernel<C: Cost + ?Sized>(
    f: &C,
    cfg: &TrialConfig,
) -> Result<KernelEstimate, HarnessError> {
    cfg.validate()?;
    let pre_cfg = TrialConfig {
        trials: cfg.trials.min(PRECHECK_TRIALS),
        ..cfg.clone()
    };
    if !probe_scalar_surjectivity(f, &pre_cfg)?.verdict.is_pass() {
        return Ok(KernelEstimate::unrecognized(
            "cost fails the scalar-surjectivity probe, so it does not factor through det",
            0,
        ));
    }
    if !check_det_factorization(f, &pre_cfg)?.verdict.is_pass() {
        return Ok(KernelEstimate::unrecognized(
            "cost fails the det-factorization check",
            0,
        ));
    }

    let mut matched = 0;
    let mut per_dim: Vec<Option<f64>> = Vec::with_capacity(cfg.dims.len());
    for &n in &cfg.dims {
        match scan_dim(f, n, cfg.rel_tol)? {
            Ok(zeros) => {
                matched += zeros.len();
                match lattice_constant(&zeros) {
                    Ok(a) => per_dim.push(a),
                    Err(reason) => return Ok(KernelEstimate::unrecognized(reason, matched)),
                }
            }
            Err(reason) => return Ok(KernelEstimate::unrecognized(reason, matched)),
        }
    }

    let first = per_dim[0];
    let consistent = per_dim.iter().all(|a| match (a, first) {
        (None, None) => true,
        (Some(x), Some(y)) => (x - y).abs() <= KERNEL_A_TOL,
        _ => false,
    });
    if !consistent {
        return Ok(KernelEstimate::unrecognized(
            "kernel differs between dimensions",
            matched,
        ));
    }
    Ok(match first {
        None => KernelEstimate {
            variant_guess: KernelGuess::Trivial,
            a_estimate: None,
            matched_grid_points: matched,
            reason: None,
        },
        Some(a) => KernelEstimate {
            variant_guess: KernelGuess::Lattice,
            a_estimate: Some(a),
            matched_grid_points: matched,
            reason: None,
        },
    })
}

/// Refined zeros of the discrepancy `d(x)` in `(0, log2 t_max]` at dimension `n`.
fn scan_dim<C: Cost + ?Sized>(
    f: &C,
    n: usize,
    rel_tol: f64,
) -> Result<Result<Vec<f64>, String>, HarnessError> {
    let reference = f.evaluate(&SymPosDefMatrix::identity(n)?);
    let d = |x: f64| -> Result<f64, HarnessError> {
        let m = SymPosDefMatrix::scalar(n, (x / n as f64).exp2())?;
        Ok(f.evaluate(&m)
            .discrepancy(&reference)
            .unwrap_or(f64::INFINITY))
    };

    let x_max = KERNEL_T_MAX.log2();
    let xs: Vec<f64> = (0..=KERNEL_GRID_POINTS)
        .map(|i| x_max * i as f64 / KERNEL_GRID_POINTS as f64)
        .collect();
    let ds = xs.iter().map(|&x| d(x)).collect::<Result<Vec<_>, _>>()?;

    // Adjacent grid points both inside the tolerance indicate a dense kernel.
    if ds[1..]
        .windows(2)
        .any(|w| w[0] <= rel_tol && w[1] <= rel_tol)
    {
        return Ok(Err("kernel appears dense on the scan grid".into()));
    }

    let mut zeros = Vec::new();
    for i in 1..=KERNEL_GRID_POINTS {
        let left = ds[i - 1];
        let right = ds.get(i + 1).copied().unwrap_or(f64::INFINITY);
        if !(ds[i] <= left && ds[i] <= right) {
            continue;
        }
        let hi = xs.get(i + 1).copied().unwrap_or(x_max);
        let (x, dx) = golden_min(&d, xs[i - 1], hi)?;
        let duplicate = zeros
            .last()
            .is_some_and(|&z: &f64| (x - z).abs() <= KERNEL_A_TOL);
        if dx <= rel_tol && !duplicate {
            zeros.push(x);
        }
    }
    Ok(Ok(zeros))
}

/// Golden-section minimization of `d` on `[lo, hi]`.
fn golden_min(
    d: &impl Fn(f64) -> Result<f64, HarnessError>,
    mut lo: f64,
    mut hi: f64,
) -> Result<(f64, f64), HarnessError> {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut d1, mut d2) = (d(x1)?, d(x2)?);
    while hi - lo > REFINE_WIDTH {
        if d1 <= d2 {
            hi = x2;
            x2 = x1;
            d2 = d1;
            x1 = hi - ratio * (hi - lo);
            d1 = d(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            d1 = d2;
            x2 = lo + ratio * (hi - lo);
            d2 = d(x2)?;
        }
    }
    // The bracket ends are candidates too; a zero may sit on the scan boundary.
    let mid = 0.5 * (lo + hi);
    [(mid, d(mid)?), (lo, d(lo)?), (hi, d(hi)?)]
        .into_iter()
        .try_fold((mid, f64::INFINITY), |best, cand| {
            Ok(if cand.1 < best.1 { cand } else { best })
        })
}

/// Checks that the zeros are `a, 2a, …, ⌊x_max / a⌋·a` and returns `a`.
fn lattice_constant(zeros: &[f64]) -> Result<Option<f64>, String> {
    let Some(&a) = zeros.first() else {
        return Ok(None);
    };
    let x_max = KERNEL_T_MAX.log2();
    let expected = ((x_max + KERNEL_A_TOL) / a).floor() as usize;
    let on_lattice = zeros
        .iter()
        .enumerate()
        .all(|(j, &x)| (x - a * (j + 1) as f64).abs() <= KERNEL_A_TOL * (j + 1) as f64);
    if zeros.len() != expected || !on_lattice {
        return Err(format!(
            "kernel elements at log2 t = {zeros:?} do not form a lattice"
        ));
    }
    Ok(Some(a))
}
