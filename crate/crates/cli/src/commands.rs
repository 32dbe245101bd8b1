use std::fmt::Write;

use affinv_core::group::{
    decompose_sl, elementary, elementary_as_commutator, reconstruction_error, GroupError,
};
use affinv_core::harness::{
    estimate_kernel, run_suite, HarnessError, KernelEstimate, KernelGuess, TrialConfig,
    DEFAULT_MAX_COND,
};
use affinv_core::linalg::{max_abs_diff, text::format_f64, InvertibleMatrix};
use affinv_core::mcd::{mcd_estimate, McdError};
use affinv_core::Cost;
use serde::Serialize;

use crate::args::{
    CheckArgs, CommutatorArgs, DecomposeArgs, Format, KernelArgs, McdArgs, OutputArgs, TrialArgs,
};
use crate::error::CliError;
use crate::{input, render};

/// Bumped whenever a JSON report changes shape.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    PropertyFailure,
    UnrecognizedKernel,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::PropertyFailure => 1,
            Status::UnrecognizedKernel => 2,
        }
    }
}

/// A finished run: the report body for the output sink, plus diagnostics
/// that always go to stderr.
pub struct Outcome {
    pub body: String,
    pub diagnostics: String,
    pub status: Status,
}

impl Outcome {
    fn new(body: String, status: Status) -> Self {
        Self {
            body,
            diagnostics: String::new(),
            status,
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    command: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    report: T,
}

fn json<T: Serialize>(command: &str, seed: Option<u64>, report: T) -> String {
    let envelope = Envelope {
        schema_version: SCHEMA_VERSION,
        command,
        seed,
        report,
    };
    let mut s = serde_json::to_string_pretty(&envelope).expect("reports serialize");
    s.push('\n');
    s
}

fn format_or(out: &OutputArgs, default: Format) -> Format {
    out.format.unwrap_or(default)
}

fn trial_config(t: &TrialArgs, trials: usize, max_cond: f64) -> Result<TrialConfig, CliError> {
    let cfg = TrialConfig {
        dims: t.dims.0.clone(),
        trials,
        master_seed: t.seed,
        rel_tol: t.tol,
        max_cond,
        ..TrialConfig::default()
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

fn harness_error(e: HarnessError) -> CliError {
    match e {
        HarnessError::InvalidConfig(msg) => CliError::Usage(msg),
        other => CliError::Input(other.to_string()),
    }
}

pub fn check(args: &CheckArgs) -> Result<Outcome, CliError> {
    let cfg = trial_config(&args.trial, args.trials, args.max_cond)?;
    let report = run_suite(&args.trial.cost, &cfg).map_err(harness_error)?;
    let status = if report.verdict.is_pass() {
        Status::Pass
    } else {
        Status::PropertyFailure
    };
    let body = match format_or(&args.out, Format::Json) {
        Format::Json => json("check", Some(cfg.master_seed), &report),
        Format::Text => render::suite(&report),
    };
    Ok(Outcome::new(body, status))
}

#[derive(Serialize)]
struct KernelReport<'a> {
    cost_name: String,
    dims: &'a [usize],
    #[serde(flatten)]
    estimate: &'a KernelEstimate,
}

pub fn kernel(args: &KernelArgs) -> Result<Outcome, CliError> {
    let cfg = trial_config(&args.trial, args.trials, DEFAULT_MAX_COND)?;
    let estimate = estimate_kernel(&args.trial.cost, &cfg).map_err(harness_error)?;
    let status = match estimate.variant_guess {
        KernelGuess::Unrecognized => Status::UnrecognizedKernel,
        _ => Status::Pass,
    };
    let body = match format_or(&args.out, Format::Text) {
        Format::Json => json(
            "kernel",
            Some(cfg.master_seed),
            KernelReport {
                cost_name: args.trial.cost.name(),
                dims: &cfg.dims,
                estimate: &estimate,
            },
        ),
        Format::Text => format!("{}\n", estimate.summary()),
    };
    Ok(Outcome::new(body, status))
}

#[derive(Serialize)]
struct McdReport<'a> {
    cost_name: String,
    h: usize,
    mean: &'a [f64],
    subset: &'a [usize],
    cost: f64,
    examined: usize,
    degenerate_skipped: usize,
}

pub fn mcd(args: &McdArgs) -> Result<Outcome, CliError> {
    let data = input::parse_dataset(&input::read_to_string(&args.input)?)?;
    let result = mcd_estimate(&data, args.h, &args.cost)
        .map_err(|e: McdError| CliError::Input(e.to_string()))?;
    let body = match format_or(&args.out, Format::Json) {
        Format::Json => json(
            "mcd",
            None,
            McdReport {
                cost_name: args.cost.name(),
                h: args.h,
                mean: &result.mean,
                subset: &result.subset,
                cost: result.cost_value.canonical(),
                examined: result.subsets_examined,
                degenerate_skipped: result.degenerate_skipped,
            },
        ),
        Format::Text => {
            let subset: Vec<String> = result.subset.iter().map(usize::to_string).collect();
            format!(
                "mean {}\nsubset {}\ncost {}\nexamined {}\ndegenerate_skipped {}\n",
                render::vector(&result.mean),
                subset.join(" "),
                format_f64(result.cost_value.canonical()),
                result.subsets_examined,
                result.degenerate_skipped
            )
        }
    };
    Ok(Outcome::new(body, Status::Pass))
}

#[derive(Serialize)]
struct Factor {
    i: usize,
    j: usize,
    lambda: f64,
}

#[derive(Serialize)]
struct DecomposeReport {
    n: usize,
    factors: Vec<Factor>,
    residual: f64,
}

pub fn decompose(args: &DecomposeArgs) -> Result<Outcome, CliError> {
    let input_error = |e: String| CliError::Input(format!("{}: {e}", args.input.display()));
    let matrix = input::read_matrix(&args.input)?;
    let a = InvertibleMatrix::new(matrix).map_err(|e| input_error(e.to_string()))?;
    let factors = decompose_sl(&a).map_err(|e| input_error(e.to_string()))?;
    let residual = reconstruction_error(&a, &factors);
    let body = match format_or(&args.out, Format::Text) {
        Format::Json => json(
            "decompose",
            None,
            DecomposeReport {
                n: a.dim(),
                factors: factors
                    .iter()
                    .map(|e| Factor {
                        i: e.i,
                        j: e.j,
                        lambda: e.lambda,
                    })
                    .collect(),
                residual,
            },
        ),
        Format::Text => factors.iter().fold(String::new(), |mut out, e| {
            let _ = writeln!(out, "E {} {} {}", e.i, e.j, format_f64(e.lambda));
            out
        }),
    };
    Ok(Outcome {
        body,
        diagnostics: format!(
            "elementary factors: {}, relative Frobenius residual: {residual:e}\n",
            factors.len()
        ),
        status: Status::Pass,
    })
}

#[derive(Serialize)]
struct CommutatorReport {
    n: usize,
    i: usize,
    j: usize,
    lambda: f64,
    a: String,
    b: String,
    residual: f64,
}

pub fn commutator(args: &CommutatorArgs) -> Result<Outcome, CliError> {
    let usage = |e: GroupError| CliError::Usage(e.to_string());
    let pair = elementary_as_commutator(args.n, args.i, args.j, args.lambda).map_err(usage)?;
    let target = elementary(args.n, args.i, args.j, args.lambda).map_err(usage)?;
    let realized = pair.realize().map_err(|e| CliError::Input(e.to_string()))?;
    let residual = max_abs_diff(realized.as_matrix(), target.as_matrix());
    let body = match format_or(&args.out, Format::Text) {
        Format::Json => json(
            "commutator",
            None,
            CommutatorReport {
                n: args.n,
                i: args.i,
                j: args.j,
                lambda: args.lambda,
                a: affinv_core::linalg::text::write_matrix(pair.a_factor.as_matrix()),
                b: affinv_core::linalg::text::write_matrix(pair.b_factor.as_matrix()),
                residual,
            },
        ),
        Format::Text => {
            let mut out = String::new();
            render::labelled_matrix(&mut out, "A", pair.a_factor.as_matrix());
            render::labelled_matrix(&mut out, "B", pair.b_factor.as_matrix());
            let _ = writeln!(out, "residual {residual:e}");
            out
        }
    };
    Ok(Outcome::new(body, Status::Pass))
}
