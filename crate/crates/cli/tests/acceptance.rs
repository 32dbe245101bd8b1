//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any failed. Expected values come from closed forms and
//! hand-built matrices, not from the library under test.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use affinv_core::cost::CostFunction;
use affinv_core::group::{decompose_sl, elementary_as_commutator, kernel_membership};
use affinv_core::harness::{
    check_commutator_property, check_det_factorization, estimate_kernel, probe_scalar_surjectivity,
    run_suite, KernelGuess, TrialConfig,
};
use affinv_core::linalg::text::parse_matrix;
use affinv_core::linalg::{random_gl, random_sl, Matrix, PD_EIGEN_RATIO};
use affinv_core::mcd::{
    check_equivariance, mcd_estimate, random_dataset, subset_covariance, Dataset, EstimateResult,
};
use affinv_core::{InvertibleMatrix, SymPosDefMatrix};

const SEED: u64 = 0;
const REL_TOL: f64 = 1e-8;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($msg)+));
        }
    };
}

fn factored() -> Vec<CostFunction> {
    CostFunction::factored_family()
}

/// `I + λ·e_i·e_jᵀ`, 1-based.
fn hand_elementary(n: usize, i: usize, j: usize, lambda: f64) -> Matrix {
    Matrix::from_fn(n, n, |r, c| {
        if r == c {
            1.0
        } else if (r, c) == (i - 1, j - 1) {
            lambda
        } else {
            0.0
        }
    })
}

fn loop_mul(x: &Matrix, y: &Matrix) -> Matrix {
    let n = x.nrows();
    Matrix::from_fn(n, n, |i, j| (0..n).map(|k| x[(i, k)] * y[(k, j)]).sum())
}

fn max_entry_diff(x: &Matrix, y: &Matrix) -> f64 {
    x.iter()
        .zip(y.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

fn frobenius(x: &Matrix) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn invariance_suite() -> Outcome {
    let cfg = TrialConfig {
        dims: (1..=6).collect(),
        trials: 1000,
        master_seed: SEED,
        rel_tol: REL_TOL,
        ..TrialConfig::default()
    };
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for f in factored() {
        let suite = run_suite(&f, &cfg).map_err(|e| e.to_string())?;
        for report in &suite.reports {
            for c in &report.checks {
                ensure!(
                    c.failures == 0 && c.skipped == 0 && c.trials_run == 6000,
                    "{f}: {} had {} failures, {} skipped of {} (worst {:e})",
                    c.check_name,
                    c.failures,
                    c.skipped,
                    c.trials_run,
                    c.worst_discrepancy
                );
                worst = worst.max(c.worst_discrepancy);
            }
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:.1?}");
    Ok(format!(
        "4 costs x 5 checks x 6000 trials, 0 failures, worst discrepancy {worst:.1e}, {elapsed:.1?}"
    ))
}

fn counterexample_power() -> Outcome {
    let trace_cfg = TrialConfig {
        dims: (2..=6).collect(),
        trials: 100,
        master_seed: SEED,
        max_counterexamples: usize::MAX,
        ..TrialConfig::default()
    };
    let commute =
        check_commutator_property(&CostFunction::Trace, &trace_cfg).map_err(|e| e.to_string())?;
    for n in 2..=6 {
        ensure!(
            commute.counterexamples.iter().any(|c| c.dim == n),
            "trace: no commutator counterexample at n = {n} in 100 trials"
        );
    }
    let first = &commute.counterexamples[0];

    let cfg = TrialConfig {
        master_seed: SEED,
        ..TrialConfig::default()
    };
    let id = CostFunction::Identity;
    let fact = check_det_factorization(&id, &cfg).map_err(|e| e.to_string())?;
    let scalar = fact
        .check("det_factorization_scalar")
        .ok_or("missing sub-check")?;
    // 1×1 matrices are scalar, so only dims 2..=6 can fail, and all of them must.
    ensure!(
        scalar.failures == 5 * cfg.trials,
        "identity: {} scalar-collapse failures, expected {}",
        scalar.failures,
        5 * cfg.trials
    );
    let ce = fact
        .counterexamples_for("det_factorization_scalar")
        .next()
        .ok_or("identity: no scalar-collapse counterexample")?;
    ensure!(
        (ce.dim, ce.trial) == (2, 0),
        "first failure at {:?}",
        (ce.dim, ce.trial)
    );
    let m = ce
        .inputs
        .iter()
        .find(|m| m.label == "M")
        .ok_or("no M recorded")?;
    let m = SymPosDefMatrix::new(parse_matrix(&m.matrix).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    ensure!(!m.is_scalar(1e-12), "recorded M is scalar");

    let probe = probe_scalar_surjectivity(&id, &cfg).map_err(|e| e.to_string())?;
    ensure!(
        probe.non_scalar_covered_fraction == Some(0.0) && !probe.verdict.is_pass(),
        "identity probe covered {:?} of non-scalar samples",
        probe.non_scalar_covered_fraction
    );
    Ok(format!(
        "trace fails commutation at every n in 2..=6 (first: n = {}, trial {}); identity fails \
         scalar collapse from n = 2 trial 0 and covers 0 of its non-scalar samples",
        first.dim, first.trial
    ))
}

fn kernel_recovery() -> Outcome {
    let cfg = TrialConfig {
        master_seed: SEED,
        ..TrialConfig::default()
    };
    let det = estimate_kernel(&CostFunction::Det, &cfg).map_err(|e| e.to_string())?;
    ensure!(
        det.variant_guess == KernelGuess::Trivial,
        "det: {}",
        det.summary()
    );
    let mut found = Vec::new();
    for a in [0.5, 1.0, 2.0] {
        let k =
            estimate_kernel(&CostFunction::QuantizedDet { a }, &cfg).map_err(|e| e.to_string())?;
        let est = k.a_estimate.unwrap_or(f64::NAN);
        ensure!(
            k.variant_guess == KernelGuess::Lattice && (est - a).abs() <= 1e-6,
            "qdet:{a}: {}",
            k.summary()
        );
        found.push(format!("{est:.9}"));
    }
    Ok(format!("det Trivial; lattice a = {}", found.join(", ")))
}

fn commutator_witnesses() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for n in 2..=4 {
        for i in 1..=n {
            for j in (1..=n).filter(|&j| j != i) {
                for lambda in [-2.0, -1.0, 0.5, 1.0, 3.0] {
                    let pair =
                        elementary_as_commutator(n, i, j, lambda).map_err(|e| e.to_string())?;
                    let realized = pair.realize().map_err(|e| e.to_string())?;
                    let expected = hand_elementary(n, i, j, lambda);
                    let err = max_entry_diff(realized.as_matrix(), &expected);
                    // ABA⁻¹B⁻¹ = E ⇔ AB = EBA, which needs no inverse.
                    let (a, b) = (pair.a_factor.as_matrix(), pair.b_factor.as_matrix());
                    let free =
                        max_entry_diff(&loop_mul(a, b), &loop_mul(&loop_mul(&expected, b), a));
                    ensure!(
                        err <= 1e-12 && free <= 1e-12,
                        "n={n} ({i},{j}) λ={lambda}: error {err:e}, AB − EBA {free:e}"
                    );
                    worst = worst.max(err).max(free);
                    count += 1;
                }
            }
        }
    }
    Ok(format!("{count} witnesses, max entry error {worst:.1e}"))
}

fn sl_generation() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut factors = 0;
    for n in 1..=5 {
        for seed in 0..40u64 {
            let a = random_sl(n, seed).map_err(|e| e.to_string())?;
            let list = decompose_sl(&a).map_err(|e| format!("n={n} seed={seed}: {e}"))?;
            let mut acc = Matrix::identity(n, n);
            for e in &list {
                ensure!(
                    e.n == n && e.i != e.j && (1..=n).contains(&e.i) && (1..=n).contains(&e.j),
                    "n={n} seed={seed}: factor {e:?} is not unit triangular"
                );
                acc = loop_mul(&acc, &hand_elementary(n, e.i, e.j, e.lambda));
            }
            let err = frobenius(&(&acc - a.as_matrix())) / frobenius(a.as_matrix());
            ensure!(err <= 1e-8, "n={n} seed={seed}: relative error {err:e}");
            worst = worst.max(err);
            factors += list.len();
        }
    }
    Ok(format!(
        "200 matrices, {factors} elementary factors, worst relative Frobenius error {worst:.1e}"
    ))
}

fn kernel_subgroup() -> Outcome {
    let mut checked = 0;
    for n in 1..=5 {
        let mut twist = Matrix::identity(n, n);
        twist[(0, 0)] = -1.0;
        for seed in 0..100u64 {
            let a = random_sl(n, seed).map_err(|e| e.to_string())?;
            let twisted = InvertibleMatrix::new(loop_mul(&twist, a.as_matrix()))
                .map_err(|e| e.to_string())?;
            ensure!(
                (twisted.det() + 1.0).abs() <= 1e-9,
                "twisted det {}",
                twisted.det()
            );
            for f in factored() {
                for (label, m) in [("A", &a), ("diag(-1,1,..)·A", &twisted)] {
                    let member = kernel_membership(m, &f)
                        .map_err(|e| format!("{f} n={n} seed={seed} {label}: {e}"))?;
                    ensure!(member, "{f} n={n} seed={seed}: {label} not in the kernel");
                    checked += 1;
                }
            }
        }
    }
    Ok(format!(
        "500 SL samples and their twists, {checked} memberships confirmed"
    ))
}

fn mcd_fixtures() -> Outcome {
    let one_d = Dataset::new(vec![vec![0.0], vec![0.1], vec![0.2], vec![10.0]])
        .map_err(|e| e.to_string())?;
    let r = mcd_estimate(&one_d, 3, &CostFunction::Det).map_err(|e| e.to_string())?;
    ensure!(r.subset == [0, 1, 2], "1-D subset {:?}", r.subset);
    ensure!((r.mean[0] - 0.1).abs() <= 1e-12, "1-D mean {:?}", r.mean);

    let two_d = Dataset::new(vec![
        vec![0.0, 0.0],
        vec![0.1, 0.0],
        vec![0.0, 0.1],
        vec![5.0, 5.0],
        vec![5.1, 5.0],
    ])
    .map_err(|e| e.to_string())?;
    let r = mcd_estimate(&two_d, 3, &CostFunction::Det).map_err(|e| e.to_string())?;
    ensure!(r.subset == [0, 1, 2], "2-D subset {:?}", r.subset);
    ensure!(
        r.mean.iter().all(|m| (m - 0.1 / 3.0).abs() <= 1e-12),
        "2-D mean {:?}",
        r.mean
    );
    Ok("1-D mean 0.1 over {0,1,2}; 2-D inlier triple {0,1,2}".into())
}

/// Whether `T(X)` is decided with a margin that survives `x ↦ Ax + b`.
///
/// Costs within `ε_S·max(1, |u|, |v|)` tie, so the runner-up gap must clear
/// `10·ε_S` both before and after every cost is scaled by `det(A)²`. The PD
/// gate is a bound on the eigenvalue ratio, which congruence by `A` can
/// shrink by `cond(A)²`, so no subset may be gated and the winner's ratio
/// must clear the gate by that factor (and 10 more).
fn decisive(x: &Dataset, base: &EstimateResult, a: &InvertibleMatrix) -> bool {
    let clear = |w: f64, r: f64| r - w > 10.0 * REL_TOL * 1f64.max(w).max(r);
    let det2 = a.det() * a.det();
    let w = base.cost_value.canonical();
    let gap = base
        .runner_up_cost
        .is_some_and(|r| clear(w, r) && clear(det2 * w, det2 * r));
    let eig = subset_covariance(x, &base.subset)
        .expect("winner passed the gate")
        .as_matrix()
        .symmetric_eigenvalues();
    let margin = eig.min() / eig.max() >= 10.0 * PD_EIGEN_RATIO * a.condition_number().powi(2);
    gap && margin && base.degenerate_skipped == 0
}

fn affine_equivariance() -> Outcome {
    let mut redrawn = 0;
    for trial in 0..200u64 {
        let mut attempt = 0;
        loop {
            ensure!(attempt < 500, "trial {trial}: no decisive draw");
            let seed = trial * 1_000 + attempt;
            attempt += 1;
            let n = 1 + (trial % 3) as usize;
            let k = n + 3 + (seed % (8 - n as u64)) as usize;
            let h = n + 1 + (seed % (k - n - 1) as u64) as usize;
            let x = random_dataset(n, k, seed).map_err(|e| e.to_string())?;
            let a = random_gl(n, seed ^ 0xE0).map_err(|e| e.to_string())?;
            let base = mcd_estimate(&x, h, &CostFunction::Det).map_err(|e| e.to_string())?;
            if !decisive(&x, &base, &a) {
                redrawn += 1;
                continue;
            }
            let b = random_dataset(n, 1, seed ^ 0xB0)
                .map_err(|e| e.to_string())?
                .points()[0]
                .iter()
                .map(|v| 3.0 * v)
                .collect::<Vec<_>>();
            let c =
                check_equivariance(&x, h, &a, &b, &CostFunction::Det).map_err(|e| e.to_string())?;
            ensure!(
                c.equivariant && c.subsets_agree,
                "trial {trial} (n={n}, k={k}, h={h}): T(AX+b) = {:?}, A·T(X)+b = {:?}, subsets agree: {}",
                c.lhs,
                c.rhs,
                c.subsets_agree
            );
            break;
        }
    }

    let x = Dataset::new(vec![
        vec![0.45, -1.02],
        vec![1.13, 0.38],
        vec![0.44, -0.26],
        vec![0.26, 0.82],
        vec![-1.02, -0.73],
        vec![-0.33, 0.11],
    ])
    .map_err(|e| e.to_string())?;
    let a = InvertibleMatrix::new(Matrix::from_row_slice(2, 2, &[1.29, -0.95, -1.0, 1.5]))
        .map_err(|e| e.to_string())?;
    let trace = check_equivariance(&x, 3, &a, &[0.0, 0.0], &CostFunction::Trace)
        .map_err(|e| e.to_string())?;
    ensure!(
        !trace.equivariant && !trace.subsets_agree,
        "trace fixture was equivariant"
    );
    Ok(format!(
        "200 det trials equivariant with identical subsets ({redrawn} indecisive draws skipped); \
         trace fixture moves the subset"
    ))
}

fn run_cli(args: &[&str], dir: &Path) -> Result<Output, String> {
    Command::new(env!("CARGO_BIN_EXE_affinv"))
        .args(args)
        .current_dir(dir)
        .output()
        .map_err(|e| format!("spawning affinv: {e}"))
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    std::fs::write(
        dir.path().join("points.csv"),
        "x,y\n0,0\n0.1,0\n0,0.1\n5,5\n5.1,5\n",
    )
    .map_err(|e| e.to_string())?;
    std::fs::write(dir.path().join("sl.txt"), "3\n2 1 0\n1 1 0\n0 0 1\n")
        .map_err(|e| e.to_string())?;

    let base: [&[&str]; 7] = [
        &[
            "check", "--cost", "qdet:1", "--dims", "1..4", "--trials", "50", "--seed", "9",
        ],
        &[
            "check", "--cost", "trace", "--dims", "2,3", "--trials", "20",
        ],
        &["kernel", "--cost", "qdet:0.5"],
        &["kernel", "--cost", "identity"],
        &["mcd", "--input", "points.csv", "--h", "3"],
        &["decompose", "--input", "sl.txt"],
        &[
            "commutator",
            "--n",
            "2",
            "--i",
            "1",
            "--j",
            "2",
            "--lambda",
            "-2",
        ],
    ];
    let mut runs = 0;
    for args in base {
        for format in [None, Some("json"), Some("text")] {
            let mut full: Vec<&str> = args.to_vec();
            if let Some(f) = format {
                full.extend(["--format", f]);
            }
            let first = run_cli(&full, dir.path())?;
            let second = run_cli(&full, dir.path())?;
            ensure!(
                first.status.code().is_some_and(|c| c <= 2),
                "{full:?} exited with {:?}: {}",
                first.status.code(),
                String::from_utf8_lossy(&first.stderr)
            );
            ensure!(!first.stdout.is_empty(), "{full:?} printed nothing");
            ensure!(
                first.stdout == second.stdout && first.status.code() == second.status.code(),
                "{full:?} differs between runs"
            );
            runs += 1;
        }
    }

    let to_file = |name: &str| -> Result<Vec<u8>, String> {
        run_cli(&["kernel", "--cost", "det", "-o", name], dir.path())?;
        std::fs::read(dir.path().join(name)).map_err(|e| e.to_string())
    };
    ensure!(
        to_file("a.txt")? == to_file("b.txt")?,
        "report files differ"
    );
    Ok(format!(
        "{runs} subcommand/format combinations byte-identical across two runs"
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("invariance suite", invariance_suite),
        ("counterexample power", counterexample_power),
        ("kernel recovery", kernel_recovery),
        ("commutator witnesses", commutator_witnesses),
        ("SL generation", sl_generation),
        ("kernel subgroup", kernel_subgroup),
        ("MCD fixtures", mcd_fixtures),
        ("affine equivariance", affine_equivariance),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (idx, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|p| Err(format!("panicked: {:?}", p.downcast_ref::<String>())));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {}. {name} ({secs:.1}s): {detail}", idx + 1),
            Err(reason) => {
                failed += 1;
                println!("FAIL  {}. {name} ({secs:.1}s): {reason}", idx + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
