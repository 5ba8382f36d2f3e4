//! Executable verification of the eigenvalue-counting rank bound for
//! normal matrices: for normal A, B and every disk S(lambda, eps), the
//! dimension of the span of eigenvectors with eigenvalue in the disk moves
//! by at most rank(A - B). This module provides the dimension query, a
//! falsification harness over randomized commuting pairs, and the
//! projection lower bound for almost-eigenvectors.

use crate::linalg::{self, CMat, ZERO};
use crate::mats::{numeric_rank, ComplexMatrix};
use crate::multiset::{dc_distance, ComplexMultiset};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NormalCheckError {
    #[error("matrix is not normal (residual {residual:e})")]
    NotNormal { residual: f64 },
    #[error("matrix must be square, got {0}x{1}")]
    NotSquare(usize, usize),
    #[error("matrices must have matching sizes ({0} vs {1})")]
    SizeMismatch(usize, usize),
    #[error("supplied vector violates the epsilon bound (got {got:e}, allowed {allowed:e})")]
    HypothesisViolated { got: f64, allowed: f64 },
}

/// Disk query for the span of eigenvectors with |lambda - alpha| <= eps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionDimQuery {
    pub lambda: Complex64,
    pub epsilon: f64,
}

fn ensure_normal(a: &ComplexMatrix, tol: f64) -> Result<(), NormalCheckError> {
    if !a.is_square() {
        return Err(NormalCheckError::NotSquare(a.rows(), a.cols()));
    }
    if !a.is_normal(tol) {
        let scale = a.max_abs().max(1.0);
        let comm = a.raw() * a.raw().adjoint() - a.raw().adjoint() * a.raw();
        return Err(NormalCheckError::NotNormal {
            residual: linalg::max_abs(&comm) / (scale * scale),
        });
    }
    Ok(())
}

fn disk_count(eigs: &[Complex64], center: Complex64, radius: f64) -> usize {
    let slack = 1.0e-12 * radius.max(1.0);
    eigs.iter()
        .filter(|e| (*e - center).norm() <= radius + slack)
        .count()
}

/// dim R(A, lambda, eps) for normal A: the number of eigenvalues (with
/// multiplicity) in the closed disk.
pub fn region_dim(
    a: &ComplexMatrix,
    query: &RegionDimQuery,
    tol: f64,
) -> Result<usize, NormalCheckError> {
    assert!(query.epsilon >= 0.0, "epsilon must be nonnegative");
    ensure_normal(a, tol)?;
    let (eigs, _, _) = linalg::normal_eigen(a.raw());
    Ok(disk_count(&eigs, query.lambda, query.epsilon))
}

/// Outcome of the dimension-gap scan for one pair of normal matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Th4Report {
    pub rank: usize,
    pub queries: usize,
    pub max_gap: usize,
    /// Smallest rank - gap over all queries; nonnegative iff no violation.
    pub worst_slack: i64,
    pub violations: usize,
}

/// For each eigenvalue of either matrix as a disk center, the count gap
/// |dim R(A, c, eps) - dim R(B, c, eps)| is maximized exactly over all
/// radii by sweeping the merged sorted distance lists; the report compares
/// the worst gap against rank(A - B).
pub fn th4_check(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    tol: f64,
) -> Result<Th4Report, NormalCheckError> {
    ensure_normal(a, tol)?;
    ensure_normal(b, tol)?;
    if a.rows() != b.rows() {
        return Err(NormalCheckError::SizeMismatch(a.rows(), b.rows()));
    }
    let (eigs_a, _, _) = linalg::normal_eigen(a.raw());
    let (eigs_b, _, _) = linalg::normal_eigen(b.raw());
    let rank = numeric_rank(&(a - b), tol);
    Ok(gap_scan(&eigs_a, &eigs_b, rank))
}

/// Same scan on known spectra, shared by `th4_check` and the randomized
/// harness (whose generator knows the diagonals exactly).
fn gap_scan(eigs_a: &[Complex64], eigs_b: &[Complex64], rank: usize) -> Th4Report {
    let mut queries = 0usize;
    let mut max_gap = 0usize;
    for center in eigs_a.iter().chain(eigs_b.iter()) {
        let mut da: Vec<f64> = eigs_a.iter().map(|e| (e - center).norm()).collect();
        let mut db: Vec<f64> = eigs_b.iter().map(|e| (e - center).norm()).collect();
        da.sort_by(|x, y| x.total_cmp(y));
        db.sort_by(|x, y| x.total_cmp(y));
        // Walk all radii at once: between consecutive distance events the
        // counts are constant, so the extreme gap shows up at an event.
        let mut ia = 0usize;
        let mut ib = 0usize;
        let merge_eps = 1.0e-12;
        while ia < da.len() || ib < db.len() {
            let next_a = da.get(ia).copied().unwrap_or(f64::INFINITY);
            let next_b = db.get(ib).copied().unwrap_or(f64::INFINITY);
            let r = next_a.min(next_b);
            while ia < da.len() && da[ia] <= r + merge_eps {
                ia += 1;
            }
            while ib < db.len() && db[ib] <= r + merge_eps {
                ib += 1;
            }
            queries += 1;
            max_gap = max_gap.max(ia.abs_diff(ib));
        }
    }
    Th4Report {
        rank,
        queries,
        max_gap,
        worst_slack: rank as i64 - max_gap as i64,
        violations: if max_gap > rank { 1 } else { 0 },
    }
}

/// Margin report for the projection lower bound
/// ||P_{R(lambda, a*eps)} x|| >= sqrt(1 - 1/a^2) ||x||.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionReport {
    pub samples: usize,
    pub min_margin: f64,
    pub violations: usize,
}

/// Verifies the projection bound for each supplied basis vector and for
/// seeded random unit vectors of their span. Basis vectors must satisfy
/// ||(N - lambda) x|| <= eps ||x||; random span samples are only tested
/// against the conclusion when they also satisfy the hypothesis.
pub fn projection_bound_check(
    normal: &ComplexMatrix,
    x_basis: &ComplexMatrix,
    lambda: Complex64,
    epsilon: f64,
    amplify: f64,
    tol: f64,
    seed: u64,
    samples: usize,
) -> Result<ProjectionReport, NormalCheckError> {
    assert!(amplify > 1.0, "the amplification factor must exceed 1");
    ensure_normal(normal, tol)?;
    let n = normal.rows();
    let d = x_basis.cols();
    let (eigs, vecs, _) = linalg::normal_eigen(normal.raw());

    // Projector columns: eigenvectors within the inflated disk.
    let keep: Vec<usize> = (0..n)
        .filter(|&i| (eigs[i] - lambda).norm() <= amplify * epsilon * (1.0 + 1.0e-12))
        .collect();
    let mut proj_basis = CMat::zeros(n, keep.len());
    for (pos, &i) in keep.iter().enumerate() {
        proj_basis.set_column(pos, &vecs.column(i));
    }

    let residual_norm = |v: &CMat| -> f64 {
        let shifted = normal.raw() * v - v * lambda;
        shifted.column(0).norm()
    };
    let floor = (1.0 - 1.0 / (amplify * amplify)).sqrt();
    let mut min_margin = f64::INFINITY;
    let mut violations = 0usize;
    let mut samples_run = 0usize;

    let mut check_vector = |v: &CMat, required: bool| -> Result<(), NormalCheckError> {
        let norm = v.column(0).norm();
        if norm == 0.0 {
            return Ok(());
        }
        let defect = residual_norm(v);
        let allowed = epsilon * norm * (1.0 + 1.0e-9);
        if defect > allowed {
            if required {
                return Err(NormalCheckError::HypothesisViolated {
                    got: defect / norm,
                    allowed: epsilon,
                });
            }
            return Ok(());
        }
        let projected = &proj_basis * (proj_basis.adjoint() * v);
        let margin = projected.column(0).norm() / norm - floor;
        min_margin = min_margin.min(margin);
        if margin < -1.0e-9 {
            violations += 1;
        }
        samples_run += 1;
        Ok(())
    };

    for j in 0..d {
        let v = x_basis.raw().columns(j, 1).into_owned();
        check_vector(&v, true)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let coeffs: Vec<Complex64> = (0..d)
            .map(|_| {
                Complex64::new(
                    StandardNormal.sample(&mut rng),
                    StandardNormal.sample(&mut rng),
                )
            })
            .collect();
        let mut v = CMat::zeros(n, 1);
        for (j, &cj) in coeffs.iter().enumerate() {
            let col = x_basis.raw().columns(j, 1).into_owned();
            v += col * cj;
        }
        check_vector(&v, false)?;
    }
    Ok(ProjectionReport {
        samples: samples_run,
        min_margin,
        violations,
    })
}

// ---------------------------------------------------------------------------
// Randomized commuting-pair harness.
// ---------------------------------------------------------------------------

/// Haar-ish random unitary: QR of a complex Gaussian matrix with the
/// phases of R's diagonal folded in.
pub fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let g = CMat::from_fn(n, n, |_, _| {
        Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    });
    let qr = g.qr();
    let q = qr.q();
    let r = qr.unpack_r();
    let mut out = q;
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            d / d.norm()
        };
        for i in 0..n {
            out[(i, j)] *= phase;
        }
    }
    ComplexMatrix::from_raw(out)
}

/// Commuting normal pair U D1 U*, U D2 U* whose diagonals differ in
/// exactly k entries, so rank(A - B) <= k by construction. Returns the
/// matrices and the exact diagonals.
pub fn random_commuting_normal_pair(
    n: usize,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> (ComplexMatrix, ComplexMatrix, Vec<Complex64>, Vec<Complex64>) {
    assert!(k <= n);
    let u = random_unitary(n, rng);
    let d1: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(4.0 * (rng.random::<f64>() - 0.5), 4.0 * (rng.random::<f64>() - 0.5)))
        .collect();
    let mut d2 = d1.clone();
    let mut changed = std::collections::BTreeSet::new();
    while changed.len() < k {
        changed.insert(rng.random_range(0..n));
    }
    for &i in &changed {
        d2[i] = Complex64::new(
            4.0 * (rng.random::<f64>() - 0.5),
            4.0 * (rng.random::<f64>() - 0.5),
        );
    }
    let a = &(&u * &ComplexMatrix::from_diagonal(&d1)) * &u.adjoint();
    let b = &(&u * &ComplexMatrix::from_diagonal(&d2)) * &u.adjoint();
    (a, b, d1, d2)
}

/// Summary of the randomized falsification run.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalBoundReport {
    pub trials: usize,
    pub seed: u64,
    pub dim_violations: usize,
    pub dc_violations: usize,
    pub worst_dim_slack: i64,
    pub worst_dc_slack: i64,
}

/// Runs `trials` randomized commuting-normal-pair trials with sizes up to
/// `n_max` and rank budgets up to `k_max`, checking both the dimension gap
/// bound and dc(sp A, sp B) <= rank(A - B). The dc side is computed after
/// stripping the common spectrum, which the generator makes exact.
pub fn verify_normal_bound(
    n_max: usize,
    trials: usize,
    k_max: usize,
    seed: u64,
    tol: f64,
    merge_rel: f64,
) -> NormalBoundReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = NormalBoundReport {
        trials,
        seed,
        dim_violations: 0,
        dc_violations: 0,
        worst_dim_slack: i64::MAX,
        worst_dc_slack: i64::MAX,
    };
    for _ in 0..trials {
        let n = rng.random_range(2..=n_max.max(2));
        let k = rng.random_range(1..=k_max.min(n).max(1));
        let (a, b, d1, d2) = random_commuting_normal_pair(n, k, &mut rng);
        let rank = numeric_rank(&(&a - &b), tol);

        let scan = gap_scan(&d1, &d2, rank);
        report.dim_violations += scan.violations;
        report.worst_dim_slack = report.worst_dim_slack.min(scan.worst_slack);

        let scale = d1
            .iter()
            .chain(d2.iter())
            .fold(1.0f64, |m, v| m.max(v.norm()));
        let merge_tol = merge_rel * scale;
        let sp_a = ComplexMultiset::from_values(&d1, merge_tol);
        let sp_b = ComplexMultiset::from_values(&d2, merge_tol);
        let dc = dc_distance(&sp_a, &sp_b);
        let slack = rank as i64 - dc as i64;
        if slack < 0 {
            report.dc_violations += 1;
        }
        report.worst_dc_slack = report.worst_dc_slack.min(slack);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1.0e-9;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn region_dim_counts_disk_eigenvalues() {
        let a = ComplexMatrix::from_real_diagonal(&[0.0, 1.0, 2.0]);
        let dim = |lambda: f64, eps: f64| {
            region_dim(
                &a,
                &RegionDimQuery {
                    lambda: c(lambda, 0.0),
                    epsilon: eps,
                },
                TOL,
            )
            .unwrap()
        };
        assert_eq!(dim(0.0, 0.0), 1);
        assert_eq!(dim(1.0, 1.0), 3);
        assert_eq!(dim(0.4, 0.0), 0);
    }

    #[test]
    fn region_dim_is_monotone_in_epsilon() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let (a, _, _, _) = random_commuting_normal_pair(7, 2, &mut rng);
        let mut last = 0;
        for step in 0..10 {
            let eps = step as f64 * 0.4;
            let dim = region_dim(
                &a,
                &RegionDimQuery {
                    lambda: c(0.2, -0.1),
                    epsilon: eps,
                },
                TOL,
            )
            .unwrap();
            assert!(dim >= last);
            last = dim;
        }
    }

    #[test]
    fn region_dim_rejects_non_normal() {
        let a = ComplexMatrix::from_row_major(
            2,
            2,
            &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        );
        assert!(matches!(
            region_dim(&a, &RegionDimQuery { lambda: c(0.0, 0.0), epsilon: 1.0 }, TOL),
            Err(NormalCheckError::NotNormal { .. })
        ));
    }

    #[test]
    fn th4_identical_matrices_have_zero_gap() {
        let a = ComplexMatrix::from_real_diagonal(&[0.0, 1.0, 5.0]);
        let report = th4_check(&a, &a, TOL).unwrap();
        assert_eq!(report.max_gap, 0);
        assert_eq!(report.violations, 0);
    }

    #[test]
    fn th4_commuting_rank_one_pair() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let u = random_unitary(3, &mut rng);
        let a = &(&u * &ComplexMatrix::from_real_diagonal(&[0.0, 1.0, 2.0])) * &u.adjoint();
        let b = &(&u * &ComplexMatrix::from_real_diagonal(&[0.0, 1.0, 9.0])) * &u.adjoint();
        let report = th4_check(&a, &b, TOL).unwrap();
        assert_eq!(report.rank, 1);
        assert_eq!(report.max_gap, 1);
        assert_eq!(report.violations, 0);
    }

    #[test]
    fn projection_bound_for_exact_eigenvector() {
        let a = ComplexMatrix::from_real_diagonal(&[0.0, 1.0]);
        let basis = ComplexMatrix::from_row_major(2, 1, &[c(1.0, 0.0), c(0.0, 0.0)]);
        let report =
            projection_bound_check(&a, &basis, c(0.0, 0.0), 0.1, 2.0, TOL, 1, 16).unwrap();
        assert_eq!(report.violations, 0);
        // An exact eigenvector projects with norm 1, well above the floor.
        assert!(report.min_margin > 0.1);
    }

    #[test]
    fn projection_bound_near_tightness() {
        // x = (sqrt(1 - t^2), t) against N = diag(0, mu) with mu just
        // outside the inflated disk makes the bound nearly sharp.
        let amplify = 2.0;
        let eps = 0.1;
        let mu = amplify * eps * (1.0 + 1.0e-12) * (1.0 + 1.0e-10);
        let n = ComplexMatrix::from_real_diagonal(&[0.0, mu]);
        let t = eps / mu;
        let basis =
            ComplexMatrix::from_row_major(2, 1, &[c((1.0 - t * t).sqrt(), 0.0), c(t, 0.0)]);
        let report = projection_bound_check(&n, &basis, c(0.0, 0.0), eps, amplify, TOL, 2, 0)
            .unwrap();
        assert_eq!(report.violations, 0);
        assert!(report.min_margin >= 0.0);
        assert!(report.min_margin < 1.0e-9, "margin {}", report.min_margin);
    }

    #[test]
    fn projection_bound_rejects_bad_hypothesis() {
        let a = ComplexMatrix::from_real_diagonal(&[0.0, 5.0]);
        let basis = ComplexMatrix::from_row_major(2, 1, &[c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(
            projection_bound_check(&a, &basis, c(0.0, 0.0), 0.1, 2.0, TOL, 3, 4),
            Err(NormalCheckError::HypothesisViolated { .. })
        ));
    }

    #[test]
    fn harness_finds_no_violations() {
        let report = verify_normal_bound(8, 200, 3, 42, TOL, 1.0e-8);
        assert_eq!(report.dim_violations, 0);
        assert_eq!(report.dc_violations, 0);
        assert!(report.worst_dim_slack >= 0);
        assert!(report.worst_dc_slack >= 0);
    }

    #[test]
    fn harness_is_deterministic_under_seed() {
        let a = verify_normal_bound(6, 50, 2, 7, TOL, 1.0e-8);
        let b = verify_normal_bound(6, 50, 2, 7, TOL, 1.0e-8);
        assert_eq!(a, b);
    }
}
