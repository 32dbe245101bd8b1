//! The five identity checks.

use super::{run_trials, Comparison, HarnessError, InvarianceReport, TrialConfig, TrialRecord};
use crate::cost::Cost;
use crate::linalg::{congruence, svd_decompose, InvertibleMatrix, Matrix, SymPosDefMatrix};

/// `f(AᵀA) = f(QᵀAᵀAQ)` for GL samples `A` and Haar orthogonal `Q`.
pub fn check_orthogonal_property<C: Cost + ?Sized>(
    f: &C,
    cfg: &TrialConfig,
) -> Result<InvarianceReport, HarnessError> {
    run_trials(
        f,
        cfg,
        "orthogonal_property",
        &["orthogonal_property"],
        |f, s| {
            let a = s.gl()?;
            let q: InvertibleMatrix = s.orthogonal()?.into();
            let gram = congruence(&SymPosDefMatrix::identity(s.dim())?, &a)?;
            let rotated = congruence(&gram, &q)?;
            Ok(TrialRecord {
                comparisons: vec![Comparison::new(
                    "orthogonal_property",
                    f.evaluate(&gram),
                    f.evaluate(&rotated),
                )],
                inputs: vec![("A", a.into_matrix()), ("Q", q.into_matrix())],
            })
        },
    )
}

/// `f(AᵀBᵀBA) = f(BᵀAᵀAB)`.
pub fn check_commutator_property<C: Cost + ?Sized>(
    f: &C,
    cfg: &TrialConfig,
) -> Result<InvarianceReport, HarnessError> {
    run_trials(
        f,
        cfg,
        "commutator_property",
        &["commutator_property"],
        |f, s| {
            let a = s.gl()?;
            let b = s.gl()?;
            let id = SymPosDefMatrix::identity(s.dim())?;
            let ab = congruence(&congruence(&id, &b)?, &a)?;
            let ba = congruence(&congruence(&id, &a)?, &b)?;
            Ok(TrialRecord {
                comparisons: vec![Comparison::new(
                    "commutator_property",
                    f.evaluate(&ab),
                    f.evaluate(&ba),
                )],
                inputs: vec![("A", a.into_matrix()), ("B", b.into_matrix())],
            })
        },
    )
}

/// Collapses `f(AᵀBᵀBA)` through the SVDs `A = P₁Λ₁Q₁`, `B = P₂Λ₂Q₂`:
/// first to `f((Λ₂Q₂P₁Λ₁)ᵀ(Λ₂Q₂P₁Λ₁))` (orthogonal factors on the outside
/// dropped), then to `f((Λ₂Λ₁)ᵀΛ₂Λ₁)`.
pub fn check_svd_collapse<C: Cost + ?Sized>(
    f: &C,
    cfg: &TrialConfig,
) -> Result<InvarianceReport, HarnessError> {
    run_trials(
        f,
        cfg,
        "svd_collapse",
        &["svd_collapse_inner", "svd_collapse_diagonal"],
        |f, s| {
            let a = s.gl()?;
            let b = s.gl()?;
            let n = s.dim();
            let svd_a = svd_decompose(&a)?;
            let svd_b = svd_decompose(&b)?;

            let id = SymPosDefMatrix::identity(n)?;
            let full = congruence(&congruence(&id, &b)?, &a)?;

            let core: Matrix =
                svd_b.lambda() * svd_b.right.as_matrix() * svd_a.left.as_matrix() * svd_a.lambda();
            let inner = congruence(&id, &InvertibleMatrix::new(core)?)?;

            let diag: Vec<f64> = svd_a
                .singular
                .iter()
                .zip(&svd_b.singular)
                .map(|(x, y)| (x * y).powi(2))
                .collect();
            let collapsed = SymPosDefMatrix::from_diagonal(&diag)?;

            let lhs = f.evaluate(&full);
            Ok(TrialRecord {
                comparisons: vec![
                    Comparison::new("svd_collapse_inner", lhs.clone(), f.evaluate(&inner)),
                    Comparison::new("svd_collapse_diagonal", lhs, f.evaluate(&collapsed)),
                ],
                inputs: vec![("A", a.into_matrix()), ("B", b.into_matrix())],
            })
        },
    )
}

/// `f(M) = f(N) ⇒ f(AᵀMA) = f(AᵀNA)`.
///
/// Equal-valued pairs are constructed as `N = SᵀMS` with `S ∈ SL(n)`; when
/// the cost separates that pair, `N = M` is used instead and the trial is
/// counted as vacuous.
pub fn check_implication<C: Cost + ?Sized>(
    f: &C,
    cfg: &TrialConfig,
) -> Result<InvarianceReport, HarnessError> {
    run_trials(f, cfg, "implication", &["implication"], |f, s| {
        let m = s.pd()?;
        let sl = s.sl()?;
        let moved = congruence(&m, &sl)?;
        let (n_mat, vacuous) = if f.evaluate(&moved).agrees(&f.evaluate(&m), cfg.rel_tol) {
            (moved, false)
        } else {
            (m.clone(), true)
        };
        let a = s.gl()?;
        let lhs = f.evaluate(&congruence(&m, &a)?);
        let rhs = f.evaluate(&congruence(&n_mat, &a)?);
        Ok(TrialRecord {
            comparisons: vec![Comparison {
                label: "implication",
                lhs,
                rhs,
                vacuous,
            }],
            inputs: vec![
                ("M", m.into_matrix()),
                ("N", n_mat.into_matrix()),
                ("A", a.into_matrix()),
            ],
        })
    })
}

/// Two consequences of `f = b ∘ H ∘ det`:
/// SL congruence leaves `f` fixed, and `f(M) = f(sI)` for `s = det(M)^(1/n)`.
pub fn check_det_factorization<C: Cost + ?Sized>(
    f: &C,
    cfg: &TrialConfig,
) -> Result<InvarianceReport, HarnessError> {
    run_trials(
        f,
        cfg,
        "det_factorization",
        &["det_factorization_sl", "det_factorization_scalar"],
        |f, s| {
            let m = s.pd()?;
            let sl = s.sl()?;
            let n = s.dim();
            let moved = congruence(&m, &sl)?;
            let scalar = SymPosDefMatrix::scalar(n, (m.log_det() / n as f64).exp())?;
            let fm = f.evaluate(&m);
            Ok(TrialRecord {
                comparisons: vec![
                    Comparison::new("det_factorization_sl", f.evaluate(&moved), fm.clone()),
                    Comparison::new("det_factorization_scalar", fm, f.evaluate(&scalar)),
                ],
                inputs: vec![("M", m.into_matrix()), ("S", sl.into_matrix())],
            })
        },
    )
}
