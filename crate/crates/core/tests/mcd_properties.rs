//! MCD estimator checked against a brute-force oracle that enumerates
//! subsets by bitmask and computes determinants in closed form.

use affinv_core::cost::CostFunction;
use affinv_core::linalg::{random_gl, Matrix, PD_EIGEN_RATIO};
use affinv_core::mcd::{
    affine_transform_dataset, check_equivariance, mcd_estimate, mcd_estimate_with, random_dataset,
    subset_covariance, subset_mean, Dataset, EstimateResult, Normalization,
};
use affinv_core::InvertibleMatrix;

/// Population covariance of a 2-D subset by the textbook formulas.
fn cov_2d(points: &[Vec<f64>], subset: &[usize]) -> [f64; 3] {
    let h = subset.len() as f64;
    let mx = subset.iter().map(|&i| points[i][0]).sum::<f64>() / h;
    let my = subset.iter().map(|&i| points[i][1]).sum::<f64>() / h;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &i in subset {
        let (dx, dy) = (points[i][0] - mx, points[i][1] - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    [sxx / h, sxy / h, syy / h]
}

/// Returns the argmin subset and the relative gap to the runner-up.
fn brute_force_2d(points: &[Vec<f64>], h: usize) -> (Vec<usize>, f64) {
    let k = points.len();
    let mut scored: Vec<(f64, Vec<usize>)> = (0u32..1 << k)
        .filter(|m| m.count_ones() as usize == h)
        .map(|m| {
            let subset: Vec<usize> = (0..k).filter(|&i| m >> i & 1 == 1).collect();
            let [a, b, c] = cov_2d(points, &subset);
            (a * c - b * b, subset)
        })
        .collect();
    scored.sort_by(|x, y| x.0.total_cmp(&y.0));
    let gap = (scored[1].0 - scored[0].0) / scored[1].0;
    (scored.swap_remove(0).1, gap)
}

#[test]
fn matches_brute_force_in_two_dimensions() {
    let mut compared = 0;
    for seed in 0..60u64 {
        let x = random_dataset(2, 9, seed).unwrap();
        let (expected, gap) = brute_force_2d(x.points(), 5);
        if gap < 1e-6 {
            continue;
        }
        let r = mcd_estimate(&x, 5, &CostFunction::Det).unwrap();
        assert_eq!(r.subset, expected, "seed {seed}");
        assert_eq!(r.subsets_examined, 126);
        compared += 1;
    }
    assert!(compared >= 50);
}

#[test]
fn mean_is_recomputable_from_the_subset() {
    for seed in 0..20u64 {
        let x = random_dataset(3, 8, seed).unwrap();
        let r = mcd_estimate(&x, 5, &CostFunction::Det).unwrap();
        assert!(r.subset.windows(2).all(|w| w[0] < w[1]));
        for d in 0..3 {
            let m = r.subset.iter().map(|&i| x.points()[i][d]).sum::<f64>() / 5.0;
            assert!((r.mean[d] - m).abs() <= 1e-14);
        }
    }
}

#[test]
fn covariance_transforms_by_congruence() {
    for seed in 0..50u64 {
        let n = 1 + (seed % 4) as usize;
        let x = random_dataset(n, 2 * n + 3, seed).unwrap();
        let a = random_gl(n, seed + 900).unwrap();
        let b: Vec<f64> = (0..n).map(|i| i as f64 - 1.5).collect();
        let moved = affine_transform_dataset(&x, &a, &b).unwrap();
        let all: Vec<usize> = (0..x.len()).collect();
        let c = subset_covariance(&x, &all).unwrap();
        let cm = subset_covariance(&moved, &all).unwrap();
        let expected = a.as_matrix() * c.as_matrix() * a.as_matrix().transpose();
        let err = (cm.as_matrix() - &expected).amax() / expected.amax();
        assert!(err <= 1e-9, "seed {seed}: {err:e}");
    }
}

#[test]
fn normalization_choice_never_moves_the_winner() {
    for seed in 0..20u64 {
        let x = random_dataset(3, 8, seed).unwrap();
        let pop = mcd_estimate_with(&x, 6, &CostFunction::Det, Normalization::Population).unwrap();
        let smp = mcd_estimate_with(&x, 6, &CostFunction::Det, Normalization::Sample).unwrap();
        assert_eq!(pop.subset, smp.subset);
        assert_eq!(pop.mean, smp.mean);
    }
}

/// Whether `T(X)` is decided with a margin that survives `x ↦ Ax + b`.
///
/// Costs within `ε_S·max(1, |u|, |v|)` tie, so the runner-up gap must clear
/// `10·ε_S` both before and after every cost is scaled by `det(A)²`. The PD
/// gate is a bound on the eigenvalue ratio, which congruence by `A` can
/// shrink by `cond(A)²`, so no subset may be gated and the winner's ratio
/// must clear the gate by that factor (and 10 more).
fn decisive(x: &Dataset, base: &EstimateResult, a: &InvertibleMatrix) -> bool {
    let clear = |w: f64, r: f64| r - w > 1e-7 * 1f64.max(w).max(r);
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

#[test]
fn det_estimator_is_affine_equivariant() {
    let mut checked = 0;
    for seed in 0..200u64 {
        let n = 1 + (seed % 3) as usize;
        let k = n + 4 + (seed % 4) as usize;
        let h = n + 2;
        let x = random_dataset(n, k, seed).unwrap();
        let a = random_gl(n, seed + 77).unwrap();
        let base = mcd_estimate(&x, h, &CostFunction::Det).unwrap();
        if !decisive(&x, &base, &a) {
            continue;
        }
        let b: Vec<f64> = (0..n).map(|i| 0.5 * i as f64 - 1.0).collect();
        let c = check_equivariance(&x, h, &a, &b, &CostFunction::Det).unwrap();
        assert!(c.equivariant && c.subsets_agree, "seed {seed}: {c:?}");
        checked += 1;
    }
    assert!(checked >= 60, "only {checked} admissible trials");
}

#[test]
fn absolute_tie_floor_can_merge_scaled_costs() {
    // Below 1 the tie tolerance is absolute. Shrinking the data by 1e-3 in
    // 3-D scales every cost by 1e-18, so all subsets tie and the
    // lexicographically first one is returned.
    let x = random_dataset(3, 7, 5).unwrap();
    let base = mcd_estimate(&x, 5, &CostFunction::Det).unwrap();
    let tiny = InvertibleMatrix::new(Matrix::identity(3, 3) * 1e-3).unwrap();
    let moved = affine_transform_dataset(&x, &tiny, &[0.0; 3]).unwrap();
    let r = mcd_estimate(&moved, 5, &CostFunction::Det).unwrap();
    assert_eq!(r.subset, vec![0, 1, 2, 3, 4]);
    assert_ne!(base.subset, r.subset);
}

#[test]
fn trace_estimator_is_not_equivariant() {
    let x = Dataset::new(vec![
        vec![0.45, -1.02],
        vec![1.13, 0.38],
        vec![0.44, -0.26],
        vec![0.26, 0.82],
        vec![-1.02, -0.73],
        vec![-0.33, 0.11],
    ])
    .unwrap();
    let a = InvertibleMatrix::new(Matrix::from_row_slice(2, 2, &[1.29, -0.95, -1.0, 1.5])).unwrap();
    let trace = check_equivariance(&x, 3, &a, &[0.0, 0.0], &CostFunction::Trace).unwrap();
    assert!(!trace.subsets_agree && !trace.equivariant);
    let det = check_equivariance(&x, 3, &a, &[0.0, 0.0], &CostFunction::Det).unwrap();
    assert!(det.subsets_agree && det.equivariant);
}

#[test]
fn two_dimensional_outliers_are_excluded() {
    // A tight square plus two far points; the square is the only h = 4
    // subset whose covariance is not stretched by an outlier.
    let x = Dataset::new(vec![
        vec![0.0, 0.0],
        vec![50.0, 50.0],
        vec![1.0, 0.0],
        vec![0.0, 1.0],
        vec![-40.0, 30.0],
        vec![1.0, 1.0],
    ])
    .unwrap();
    let r = mcd_estimate(&x, 4, &CostFunction::Det).unwrap();
    assert_eq!(r.subset, vec![0, 2, 3, 5]);
    assert_eq!(r.mean, subset_mean(&x, &[0, 2, 3, 5]).unwrap());
    assert_eq!(r.mean, vec![0.5, 0.5]);
}
