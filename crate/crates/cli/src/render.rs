//! Text renderings of reports. JSON renderings come straight from serde.

use std::fmt::Write;

use affinv_core::harness::{Counterexample, SuiteReport};
use affinv_core::linalg::text::{format_f64, write_matrix};
use affinv_core::linalg::Matrix;

pub fn suite(report: &SuiteReport) -> String {
    let cfg = &report.config;
    let dims: Vec<String> = cfg.dims.iter().map(usize::to_string).collect();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "cost {}  dims {}  trials {}  seed {}  rel_tol {:e}  max_cond {}",
        report.cost_name,
        dims.join(","),
        cfg.trials,
        cfg.master_seed,
        cfg.rel_tol,
        cfg.max_cond
    );
    for check in report.reports.iter().flat_map(|r| &r.checks) {
        let _ = writeln!(
            out,
            "{:<26} trials {:>6}  failures {:>6}  skipped {:>3}  vacuous {:>6}  worst {:.3e}",
            check.check_name,
            check.trials_run,
            check.failures,
            check.skipped,
            check.vacuous,
            check.worst_discrepancy
        );
    }
    let s = &report.surjectivity;
    let _ = write!(
        out,
        "{:<26} covered {:.6}",
        "scalar_surjectivity", s.covered_fraction
    );
    match s.non_scalar_covered_fraction {
        Some(ns) => {
            let _ = writeln!(out, "  non-scalar covered {ns:.6}");
        }
        None => out.push('\n'),
    }
    let examples = report
        .reports
        .iter()
        .flat_map(|r| &r.counterexamples)
        .chain(&s.uncovered_samples);
    for cx in examples {
        counterexample(&mut out, cx);
    }
    let _ = writeln!(
        out,
        "verdict {}",
        if report.verdict.is_pass() {
            "pass"
        } else {
            "fail"
        }
    );
    out
}

fn counterexample(out: &mut String, cx: &Counterexample) {
    let _ = writeln!(
        out,
        "counterexample {} dim {} trial {} discrepancy {:e}",
        cx.check_name, cx.dim, cx.trial, cx.discrepancy
    );
    for m in &cx.inputs {
        let _ = writeln!(out, "{}:", m.label);
        out.push_str(&m.matrix);
    }
}

pub fn labelled_matrix(out: &mut String, label: &str, m: &Matrix) {
    let _ = writeln!(out, "{label}:");
    out.push_str(&write_matrix(m));
}

pub fn vector(v: &[f64]) -> String {
    v.iter()
        .map(|x| format_f64(*x))
        .collect::<Vec<_>>()
        .join(" ")
}
