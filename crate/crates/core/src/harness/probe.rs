use rayon::prelude::*;
use serde::Serialize;

use super::{finite_or_max, Counterexample, HarnessError, NamedMatrix, TrialConfig, Verdict};
use crate::cost::Cost;
use crate::linalg::{random_pd, text::write_matrix, SymPosDefMatrix};
use crate::rng::{derive_seed, label_stream};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimCoverage {
    pub dim: usize,
    pub samples: usize,
    pub covered: usize,
    pub non_scalar_samples: usize,
    pub non_scalar_covered: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurjectivityReport {
    pub cost_name: String,
    pub per_dim: Vec<DimCoverage>,
    pub covered_fraction: f64,
    /// Coverage restricted to non-scalar samples; `None` when there were none.
    pub non_scalar_covered_fraction: Option<f64>,
    pub uncovered_samples: Vec<Counterexample>,
    pub verdict: Verdict,
}

/// Asks whether every sampled value `f(M)` is attained on a scalar matrix.
///
/// Candidates are the grid scalars plus the solved scalar `s = det(M)^(1/n)`,
/// which refines the grid exactly where a det-factoring cost needs it.
pub fn probe_scalar_surjectivity<C: Cost + ?Sized>(
    f: &C,
    cfg: &TrialConfig,
) -> Result<SurjectivityReport, HarnessError> {
    cfg.validate()?;
    let grid = cfg.s_grid.values();
    let stream = label_stream("scalar_surjectivity");
    let mut per_dim = Vec::with_capacity(cfg.dims.len());
    let mut uncovered_samples = Vec::new();

    for &n in &cfg.dims {
        let scalar_values = grid
            .iter()
            .map(|&s| SymPosDefMatrix::scalar(n, s).map(|m| f.evaluate(&m)))
            .collect::<Result<Vec<_>, _>>()?;

        let outcomes = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let m = random_pd(
                    n,
                    derive_seed(cfg.master_seed, &[stream, n as u64, t as u64]),
                )?;
                let value = f.evaluate(&m);
                let solved = (m.log_det() / n as f64).exp();
                let mut best = f64::INFINITY;
                let mut covered = scalar_values.iter().any(|v| {
                    best = best.min(value.discrepancy(v).unwrap_or(f64::INFINITY));
                    value.agrees(v, cfg.rel_tol)
                });
                if !covered {
                    let v = f.evaluate(&SymPosDefMatrix::scalar(n, solved)?);
                    best = best.min(value.discrepancy(&v).unwrap_or(f64::INFINITY));
                    covered = value.agrees(&v, cfg.rel_tol);
                }
                Ok((m, covered, best))
            })
            .collect::<Result<Vec<_>, HarnessError>>()?;

        let mut cov = DimCoverage {
            dim: n,
            samples: 0,
            covered: 0,
            non_scalar_samples: 0,
            non_scalar_covered: 0,
        };
        for (t, (m, covered, best)) in outcomes.into_iter().enumerate() {
            let is_scalar = m.is_scalar(1e-12);
            cov.samples += 1;
            cov.covered += usize::from(covered);
            if !is_scalar {
                cov.non_scalar_samples += 1;
                cov.non_scalar_covered += usize::from(covered);
            }
            if !covered && uncovered_samples.len() < cfg.max_counterexamples {
                uncovered_samples.push(Counterexample {
                    check_name: "scalar_surjectivity".into(),
                    dim: n,
                    trial: t,
                    discrepancy: finite_or_max(best),
                    inputs: vec![NamedMatrix {
                        label: "M".into(),
                        matrix: write_matrix(m.as_matrix()),
                    }],
                });
            }
        }
        per_dim.push(cov);
    }

    let total: usize = per_dim.iter().map(|d| d.samples).sum();
    let covered: usize = per_dim.iter().map(|d| d.covered).sum();
    let ns_total: usize = per_dim.iter().map(|d| d.non_scalar_samples).sum();
    let ns_covered: usize = per_dim.iter().map(|d| d.non_scalar_covered).sum();
    let covered_fraction = covered as f64 / total as f64;
    Ok(SurjectivityReport {
        cost_name: f.name(),
        per_dim,
        covered_fraction,
        non_scalar_covered_fraction: (ns_total > 0).then(|| ns_covered as f64 / ns_total as f64),
        uncovered_samples,
        verdict: Verdict::from_pass(covered == total),
    })
}
