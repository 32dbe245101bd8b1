//! Randomized verification of affine-invariance identities.
//!
//! Each check draws seeded random matrices, evaluates a cost function on both
//! sides of an identity that every affine-invariant, det-factoring cost must
//! satisfy, and aggregates the outcomes into an [`InvarianceReport`]. A
//! failure is data, not an error: it is recorded together with the inputs
//! that produced it, in the matrix text format.
//!
//! Trial `t` at dimension `n` of check `c` is seeded by
//! `derive_seed(master_seed, [c, n, t, attempt])`, so reports depend on the
//! [`TrialConfig`] alone and not on how trials are scheduled across threads.

mod checks;
mod kernel;
mod probe;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::cost::{Cost, CostValue, DEFAULT_REL_TOL};
use crate::linalg::{
    random_gl, random_orthogonal, random_pd, random_sl, text::write_matrix, InvertibleMatrix,
    LinalgError, Matrix, OrthogonalMatrix, SymPosDefMatrix, MAX_DIM,
};
use crate::rng::{derive_seed, label_stream};

pub use checks::{
    check_commutator_property, check_det_factorization, check_implication,
    check_orthogonal_property, check_svd_collapse,
};
pub use kernel::{estimate_kernel, KernelEstimate, KernelGuess, KERNEL_GRID_POINTS, KERNEL_T_MAX};
pub use probe::{probe_scalar_surjectivity, DimCoverage, SurjectivityReport};

/// Condition-number cap applied to GL/SL samples drawn by the harness.
pub const DEFAULT_MAX_COND: f64 = 20.0;
/// Attempts per trial before it is recorded as skipped.
pub const MAX_TRIAL_ATTEMPTS: u64 = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error("invalid trial configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Geometric grid of scalars `s` used to probe `f(sI)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl ScalarGrid {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.lo];
        }
        let (l, h) = (self.lo.ln(), self.hi.ln());
        let step = (h - l) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| (l + step * i as f64).exp())
            .collect()
    }
}

impl Default for ScalarGrid {
    fn default() -> Self {
        Self {
            lo: 1e-3,
            hi: 1e3,
            points: 512,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialConfig {
    pub dims: Vec<usize>,
    /// Trials per check and per dimension.
    pub trials: usize,
    pub master_seed: u64,
    pub rel_tol: f64,
    pub s_grid: ScalarGrid,
    /// GL and SL samples with a larger condition number are redrawn.
    pub max_cond: f64,
    /// Counterexamples kept per check.
    pub max_counterexamples: usize,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self {
            dims: (1..=6).collect(),
            trials: 1000,
            master_seed: 0,
            rel_tol: DEFAULT_REL_TOL,
            s_grid: ScalarGrid::default(),
            max_cond: DEFAULT_MAX_COND,
            max_counterexamples: 3,
        }
    }
}

impl TrialConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::InvalidConfig(msg));
        if self.dims.is_empty() {
            return bad("dims must not be empty".into());
        }
        if let Some(&n) = self.dims.iter().find(|&&n| n == 0 || n > MAX_DIM) {
            return bad(format!("dimension {n} outside 1..={MAX_DIM}"));
        }
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if !(self.rel_tol > 0.0) {
            return bad(format!("rel_tol must be positive, got {}", self.rel_tol));
        }
        let g = &self.s_grid;
        if !(g.lo > 0.0 && g.lo < g.hi && g.hi.is_finite()) || g.points < 2 {
            return bad(format!(
                "scalar grid needs 0 < lo < hi and >= 2 points, got ({}, {}, {})",
                g.lo, g.hi, g.points
            ));
        }
        if !(self.max_cond >= 1.0) {
            return bad(format!("max_cond must be >= 1, got {}", self.max_cond));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Self::Pass
        } else {
            Self::Fail
        }
    }

    pub fn is_pass(self) -> bool {
        self == Self::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSummary {
    pub check_name: String,
    pub trials_run: usize,
    pub failures: usize,
    /// Trials that could not draw admissible inputs.
    pub skipped: usize,
    /// Trials where the compared inputs were identical by construction.
    pub vacuous: usize,
    pub worst_discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedMatrix {
    pub label: String,
    /// Matrix text format.
    pub matrix: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub check_name: String,
    pub dim: usize,
    pub trial: usize,
    pub discrepancy: f64,
    pub inputs: Vec<NamedMatrix>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub cost_name: String,
    pub checks: Vec<CheckSummary>,
    pub counterexamples: Vec<Counterexample>,
    pub verdict: Verdict,
}

impl InvarianceReport {
    pub fn check(&self, name: &str) -> Option<&CheckSummary> {
        self.checks.iter().find(|c| c.check_name == name)
    }

    pub fn counterexamples_for<'a>(
        &'a self,
        name: &'a str,
    ) -> impl Iterator<Item = &'a Counterexample> + 'a {
        self.counterexamples
            .iter()
            .filter(move |c| c.check_name == name)
    }
}

/// Everything `check` runs for one cost function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub cost_name: String,
    pub config: TrialConfig,
    pub reports: Vec<InvarianceReport>,
    pub surjectivity: SurjectivityReport,
    pub verdict: Verdict,
}

/// The five identity checks followed by the scalar-surjectivity probe.
pub fn run_suite<C: Cost + ?Sized>(f: &C, cfg: &TrialConfig) -> Result<SuiteReport, HarnessError> {
    let reports = vec![
        check_implication(f, cfg)?,
        check_orthogonal_property(f, cfg)?,
        check_commutator_property(f, cfg)?,
        check_svd_collapse(f, cfg)?,
        check_det_factorization(f, cfg)?,
    ];
    let surjectivity = probe_scalar_surjectivity(f, cfg)?;
    let pass = reports.iter().all(|r| r.verdict.is_pass()) && surjectivity.verdict.is_pass();
    Ok(SuiteReport {
        cost_name: f.name(),
        config: cfg.clone(),
        reports,
        surjectivity,
        verdict: Verdict::from_pass(pass),
    })
}

/// Seeded sampler handed to each trial; every draw uses a fresh sub-seed.
pub(crate) struct TrialSampler {
    n: usize,
    seed: u64,
    counter: u64,
    max_cond: f64,
}

impl TrialSampler {
    fn new(n: usize, seed: u64, max_cond: f64) -> Self {
        Self {
            n,
            seed,
            counter: 0,
            max_cond,
        }
    }

    fn next_seed(&mut self) -> u64 {
        self.counter += 1;
        derive_seed(self.seed, &[self.counter])
    }

    pub(crate) fn dim(&self) -> usize {
        self.n
    }

    pub(crate) fn pd(&mut self) -> Result<SymPosDefMatrix, LinalgError> {
        let s = self.next_seed();
        random_pd(self.n, s)
    }

    pub(crate) fn orthogonal(&mut self) -> Result<OrthogonalMatrix, LinalgError> {
        let s = self.next_seed();
        random_orthogonal(self.n, s)
    }

    fn capped(
        &mut self,
        draw: fn(usize, u64) -> Result<InvertibleMatrix, LinalgError>,
    ) -> Result<InvertibleMatrix, LinalgError> {
        for _ in 0..crate::linalg::MAX_SAMPLER_ATTEMPTS {
            let s = self.next_seed();
            let a = draw(self.n, s)?;
            if a.condition_number() <= self.max_cond {
                return Ok(a);
            }
        }
        Err(LinalgError::SamplerExhausted(
            crate::linalg::MAX_SAMPLER_ATTEMPTS,
        ))
    }

    pub(crate) fn gl(&mut self) -> Result<InvertibleMatrix, LinalgError> {
        self.capped(random_gl)
    }

    pub(crate) fn sl(&mut self) -> Result<InvertibleMatrix, LinalgError> {
        self.capped(random_sl)
    }
}

pub(crate) struct Comparison {
    pub label: &'static str,
    pub lhs: CostValue,
    pub rhs: CostValue,
    pub vacuous: bool,
}

impl Comparison {
    pub fn new(label: &'static str, lhs: CostValue, rhs: CostValue) -> Self {
        Self {
            label,
            lhs,
            rhs,
            vacuous: false,
        }
    }
}

pub(crate) struct TrialRecord {
    pub comparisons: Vec<Comparison>,
    pub inputs: Vec<(&'static str, Matrix)>,
}

fn serialize_inputs(inputs: &[(&'static str, Matrix)]) -> Vec<NamedMatrix> {
    inputs
        .iter()
        .map(|(label, m)| NamedMatrix {
            label: (*label).to_string(),
            matrix: write_matrix(m),
        })
        .collect()
}

pub(crate) fn finite_or_max(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        f64::MAX
    }
}

/// Runs `body` for every (dimension, trial) pair and aggregates the
/// comparisons it returns under the given sub-check labels.
pub(crate) fn run_trials<C, B>(
    f: &C,
    cfg: &TrialConfig,
    check: &str,
    labels: &[&'static str],
    body: B,
) -> Result<InvarianceReport, HarnessError>
where
    C: Cost + ?Sized,
    B: Fn(&C, &mut TrialSampler) -> Result<TrialRecord, LinalgError> + Sync,
{
    cfg.validate()?;
    let stream = label_stream(check);
    let jobs: Vec<(usize, usize)> = cfg
        .dims
        .iter()
        .flat_map(|&n| (0..cfg.trials).map(move |t| (n, t)))
        .collect();

    let outcomes: Vec<Option<TrialRecord>> = jobs
        .par_iter()
        .map(|&(n, t)| {
            (0..MAX_TRIAL_ATTEMPTS).find_map(|attempt| {
                let seed = derive_seed(cfg.master_seed, &[stream, n as u64, t as u64, attempt]);
                body(f, &mut TrialSampler::new(n, seed, cfg.max_cond)).ok()
            })
        })
        .collect();

    let mut checks: Vec<CheckSummary> = labels
        .iter()
        .map(|l| CheckSummary {
            check_name: (*l).to_string(),
            trials_run: 0,
            failures: 0,
            skipped: 0,
            vacuous: 0,
            worst_discrepancy: 0.0,
        })
        .collect();
    let mut counterexamples = Vec::new();

    for (&(n, t), outcome) in jobs.iter().zip(&outcomes) {
        let Some(record) = outcome else {
            checks.iter_mut().for_each(|c| c.skipped += 1);
            continue;
        };
        for (summary, cmp) in checks.iter_mut().zip(&record.comparisons) {
            debug_assert_eq!(summary.check_name, cmp.label);
            let disc = finite_or_max(cmp.lhs.discrepancy(&cmp.rhs).unwrap_or(f64::INFINITY));
            summary.trials_run += 1;
            summary.vacuous += usize::from(cmp.vacuous);
            summary.worst_discrepancy = summary.worst_discrepancy.max(disc);
            if !cmp.lhs.agrees(&cmp.rhs, cfg.rel_tol) {
                summary.failures += 1;
                let kept = counterexamples
                    .iter()
                    .filter(|c: &&Counterexample| c.check_name == cmp.label)
                    .count();
                if kept < cfg.max_counterexamples {
                    counterexamples.push(Counterexample {
                        check_name: cmp.label.to_string(),
                        dim: n,
                        trial: t,
                        discrepancy: disc,
                        inputs: serialize_inputs(&record.inputs),
                    });
                }
            }
        }
    }

    let pass = checks.iter().all(|c| c.failures == 0 && c.skipped == 0);
    Ok(InvarianceReport {
        cost_name: f.name(),
        checks,
        counterexamples,
        verdict: Verdict::from_pass(pass),
    })
}
