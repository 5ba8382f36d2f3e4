//! Nearest self-adjoint and unitary matrices under the normalized rank
//! distance, and the almost-commuting witness with its Cauchy-matrix
//! certificate.
//!
//! The witness for a simple-spectrum diagonal A = diag(lambda) is the
//! matrix X with x_ij = c_ij / (lambda_i - lambda_j) off the diagonal,
//! where c_ij = (i + j) mod 2 with 1-based indices. Its commutator with A
//! is the checkerboard matrix, which has rank exactly 2, while deleting
//! the odd columns and even rows of X - B for any diagonal B leaves a
//! Cauchy matrix whose nonzero determinant certifies
//! rank(X - B) >= floor(n/2). Determinants are tracked as
//! mantissa * 2^exp because Cauchy determinants underflow f64 well before
//! n = 64.

use crate::linalg::{self, CMat, ScaledComplex, ONE, ZERO};
use crate::mats::{normalized_distance, numeric_rank, ComplexMatrix, MatError, RankRatio};
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AlmostError {
    #[error("matrix must be square, got {0}x{1}")]
    NotSquare(usize, usize),
    #[error("eigenvalues must be pairwise distinct")]
    DuplicateEigenvalue,
    #[error("witness needs n >= 4, got {0}")]
    TooSmall(usize),
    #[error("node sets must be disjoint")]
    NodeCollision,
    #[error("node sets must have equal length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("restriction to the near-isometric subspace failed (residual {residual:e})")]
    IsometryCheckFailed { residual: f64 },
    #[error(transparent)]
    Matrix(#[from] MatError),
}

/// d_r(A, A*): how far the matrix is from being self-adjoint.
pub fn selfadjoint_defect(a: &ComplexMatrix, tol: f64) -> Result<RankRatio, AlmostError> {
    if !a.is_square() {
        return Err(AlmostError::NotSquare(a.rows(), a.cols()));
    }
    Ok(normalized_distance(a, &a.adjoint(), tol)?)
}

/// S = (A + A*)/2; satisfies d_r(A, S) <= d_r(A, A*).
pub fn nearest_selfadjoint(a: &ComplexMatrix) -> Result<ComplexMatrix, AlmostError> {
    if !a.is_square() {
        return Err(AlmostError::NotSquare(a.rows(), a.cols()));
    }
    Ok((a + &a.adjoint()).scale(Complex64::new(0.5, 0.0)))
}

/// d_r(A*A, E): how far the matrix is from being unitary.
pub fn unitary_defect(a: &ComplexMatrix, tol: f64) -> Result<RankRatio, AlmostError> {
    if !a.is_square() {
        return Err(AlmostError::NotSquare(a.rows(), a.cols()));
    }
    let gram = &a.adjoint() * a;
    Ok(normalized_distance(&gram, &ComplexMatrix::identity(a.rows()), tol)?)
}

/// Unitary U with rank(A - U) <= rank(A*A - E): A is kept on the subspace
/// where A*A acts as the identity and completed by a unitary map between
/// the orthogonal complements, aligning ordered orthonormal bases.
pub fn nearest_unitary_rank(a: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix, AlmostError> {
    if !a.is_square() {
        return Err(AlmostError::NotSquare(a.rows(), a.cols()));
    }
    let n = a.rows();
    let gram = a.raw().adjoint() * a.raw();
    let (d, v) = linalg::hermitian_eigen(&gram);
    let opnorm_sq = linalg::singular_values(a.raw()).first().copied().unwrap_or(0.0).powi(2);
    let band = tol * opnorm_sq.max(1.0);

    let iso: Vec<usize> = (0..n).filter(|&i| (d[i] - 1.0).abs() <= band).collect();
    let rest: Vec<usize> = (0..n).filter(|&i| (d[i] - 1.0).abs() > band).collect();

    let mut x_basis = CMat::zeros(n, iso.len());
    for (pos, &i) in iso.iter().enumerate() {
        x_basis.set_column(pos, &v.column(i));
    }
    let mut xp_basis = CMat::zeros(n, rest.len());
    for (pos, &i) in rest.iter().enumerate() {
        xp_basis.set_column(pos, &v.column(i));
    }

    let image = a.raw() * &x_basis;
    if !iso.is_empty() {
        let residual = linalg::identity_residual(&(image.adjoint() * &image));
        if residual > 10.0 * band.max(tol) {
            return Err(AlmostError::IsometryCheckFailed { residual });
        }
    }
    let q_y = if iso.is_empty() {
        CMat::zeros(n, 0)
    } else {
        linalg::orthonormalize(&image)
    };
    let full = linalg::complete_unitary(&q_y);

    // U maps the isometric subspace exactly as A and pairs the leftover
    // bases in index order.
    let mut source = CMat::zeros(n, n);
    let mut dest = CMat::zeros(n, n);
    for j in 0..iso.len() {
        source.set_column(j, &x_basis.column(j));
        dest.set_column(j, &q_y.column(j));
    }
    for j in 0..rest.len() {
        source.set_column(iso.len() + j, &xp_basis.column(j));
        dest.set_column(iso.len() + j, &full.column(iso.len() + j));
    }
    Ok(ComplexMatrix::from_raw(&dest * source.adjoint()))
}

/// Rank certificate for the witness: the Cauchy submatrix left after
/// deleting odd columns and even rows (1-based) of X - B, independent of
/// the diagonal B.
#[derive(Debug, Clone)]
pub struct CauchyCertificate {
    pub row_indices: Vec<usize>,
    pub col_indices: Vec<usize>,
    pub determinant: ScaledComplex,
    pub lower_bound: usize,
}

/// The almost-commuting witness: d_r(AX, XA) = 2/n while every matrix
/// commuting with A stays at normalized distance >= floor(n/2)/n from X.
#[derive(Debug, Clone)]
pub struct CommutingWitness {
    pub lambdas: Vec<Complex64>,
    pub x: ComplexMatrix,
    pub commutator: ComplexMatrix,
    pub commutator_rank: usize,
    pub certificate: CauchyCertificate,
}

/// Builds the checkerboard witness for A = diag(lambdas), n >= 4 and
/// pairwise distinct entries.
pub fn checkerboard_witness(
    lambdas: &[Complex64],
    tol: f64,
) -> Result<CommutingWitness, AlmostError> {
    let n = lambdas.len();
    if n < 4 {
        return Err(AlmostError::TooSmall(n));
    }
    let scale = lambdas.iter().fold(1.0f64, |m, l| m.max(l.norm()));
    for i in 0..n {
        for j in (i + 1)..n {
            if (lambdas[i] - lambdas[j]).norm() <= 1.0e-12 * scale {
                return Err(AlmostError::DuplicateEigenvalue);
            }
        }
    }

    // 1-based checkerboard: c_ij = (i + j) mod 2, zero on the diagonal.
    let x = ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j || (i + j) % 2 == 0 {
            ZERO
        } else {
            ONE / (lambdas[i] - lambdas[j])
        }
    });
    let a = ComplexMatrix::from_diagonal(lambdas);
    let commutator = &(&a * &x) - &(&x * &a);
    let commutator_rank = numeric_rank(&commutator, tol);
    debug_assert_eq!(commutator_rank, 2);

    let half = n / 2;
    let row_indices: Vec<usize> = (0..half).map(|i| 2 * i + 1).collect();
    let col_indices: Vec<usize> = (0..half).map(|j| 2 * j + 2).collect();
    let a_nodes: Vec<Complex64> = row_indices.iter().map(|&r| lambdas[r - 1]).collect();
    let b_nodes: Vec<Complex64> = col_indices.iter().map(|&c| lambdas[c - 1]).collect();
    let determinant = cauchy_product_determinant(&a_nodes, &b_nodes);

    Ok(CommutingWitness {
        lambdas: lambdas.to_vec(),
        x,
        commutator,
        commutator_rank,
        certificate: CauchyCertificate {
            row_indices,
            col_indices,
            determinant,
            lower_bound: half,
        },
    })
}

// ---------------------------------------------------------------------------
// Cauchy matrices: closed-form determinant and interpolation solve.
// ---------------------------------------------------------------------------

/// prod_{i<j} (a_j - a_i)(b_i - b_j) / prod_{i,j} (a_i - b_j), tracked in
/// scaled form.
fn cauchy_product_determinant(a: &[Complex64], b: &[Complex64]) -> ScaledComplex {
    let k = a.len();
    let mut det = ScaledComplex::one();
    for i in 0..k {
        for j in (i + 1)..k {
            det = det.mul_complex(a[j] - a[i]);
            det = det.mul_complex(b[i] - b[j]);
        }
    }
    for &ai in a {
        for &bj in b {
            det = det.div_complex(ai - bj);
        }
    }
    det
}

/// Result of the two determinant routes for the Cauchy matrix
/// [1/(a_i - b_j)].
#[derive(Debug, Clone)]
pub struct CauchyCheck {
    pub determinant: ScaledComplex,
    pub elimination: ScaledComplex,
    pub rel_diff: f64,
    pub nonsingular: bool,
}

fn check_cauchy_nodes(a: &[Complex64], b: &[Complex64]) -> Result<(), AlmostError> {
    if a.len() != b.len() {
        return Err(AlmostError::LengthMismatch(a.len(), b.len()));
    }
    let scale = a
        .iter()
        .chain(b.iter())
        .fold(1.0f64, |m, z| m.max(z.norm()));
    for &ai in a {
        for &bj in b {
            if (ai - bj).norm() <= 1.0e-12 * scale {
                return Err(AlmostError::NodeCollision);
            }
        }
    }
    Ok(())
}

/// Determinant of the Cauchy matrix by the closed product formula,
/// cross-checked against scale-tracked elimination.
pub fn cauchy_nonsingular(a: &[Complex64], b: &[Complex64]) -> Result<CauchyCheck, AlmostError> {
    check_cauchy_nodes(a, b)?;
    let k = a.len();
    let m = CMat::from_fn(k, k, |i, j| ONE / (a[i] - b[j]));
    let elimination = linalg::det_scaled(&m);
    let determinant = cauchy_product_determinant(a, b);
    let rel_diff = determinant.rel_diff(&elimination);
    Ok(CauchyCheck {
        nonsingular: !determinant.is_zero(),
        determinant,
        elimination,
        rel_diff,
    })
}

/// Solves [1/(a_i - b_j)] y = rhs through Lagrange interpolation: the
/// polynomial Phi of degree < k with Phi(a_i) = rhs_i * P(a_i) for
/// P = prod (x - b_j) recovers y_j = Phi(b_j) / prod_{m != j} (b_j - b_m).
pub fn cauchy_solve(
    a: &[Complex64],
    b: &[Complex64],
    rhs: &[Complex64],
) -> Result<Vec<Complex64>, AlmostError> {
    check_cauchy_nodes(a, b)?;
    let k = a.len();
    if rhs.len() != k {
        return Err(AlmostError::LengthMismatch(rhs.len(), k));
    }
    let scale = a
        .iter()
        .chain(b.iter())
        .fold(1.0f64, |m, z| m.max(z.norm()));
    for i in 0..k {
        for j in (i + 1)..k {
            if (a[i] - a[j]).norm() <= 1.0e-12 * scale {
                return Err(AlmostError::NodeCollision);
            }
        }
    }

    let p_eval = |x: Complex64| -> Complex64 { b.iter().fold(ONE, |acc, &bj| acc * (x - bj)) };
    // Phi(x) = sum_i rhs_i P(a_i) L_i(x) evaluated at the b nodes.
    let mut y = Vec::with_capacity(k);
    for (j, &bj) in b.iter().enumerate() {
        let mut phi = ZERO;
        for (i, &ai) in a.iter().enumerate() {
            let mut lagrange = ONE;
            for (m, &am) in a.iter().enumerate() {
                if m != i {
                    lagrange *= (bj - am) / (ai - am);
                }
            }
            phi += rhs[i] * p_eval(ai) * lagrange;
        }
        let mut pj = ONE;
        for (m, &bm) in b.iter().enumerate() {
            if m != j {
                pj *= bj - bm;
            }
        }
        y.push(phi / pj);
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mats::arithmetic_distance;
    use rand::{Rng, SeedableRng};

    const TOL: f64 = 1.0e-9;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn lower_shift(n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |i, j| if i == j + 1 { ONE } else { ZERO })
    }

    #[test]
    fn selfadjoint_defect_of_hermitian_is_zero() {
        let a = ComplexMatrix::from_row_major(
            2,
            2,
            &[c(1.0, 0.0), c(0.0, -2.0), c(0.0, 2.0), c(3.0, 0.0)],
        );
        assert!(selfadjoint_defect(&a, TOL).unwrap().is_zero());
        let s = nearest_selfadjoint(&a).unwrap();
        assert!((&s - &a).max_abs() < 1.0e-15);
    }

    #[test]
    fn selfadjoint_defect_of_nilpotent_cell() {
        let a = ComplexMatrix::from_row_major(
            2,
            2,
            &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        );
        assert_eq!(selfadjoint_defect(&a, TOL).unwrap(), RankRatio::new(1, 1));
        let s = nearest_selfadjoint(&a).unwrap();
        assert!((s.get(0, 1) - c(0.5, 0.0)).norm() < 1.0e-15);
        assert!(normalized_distance(&a, &s, TOL).unwrap() <= selfadjoint_defect(&a, TOL).unwrap());
    }

    #[test]
    fn selfadjoint_bound_on_random_matrices() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let a = ComplexMatrix::from_fn(6, 6, |_, _| {
                c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            });
            let s = nearest_selfadjoint(&a).unwrap();
            assert!(
                normalized_distance(&a, &s, TOL).unwrap() <= selfadjoint_defect(&a, TOL).unwrap()
            );
        }
    }

    #[test]
    fn unitary_defect_examples() {
        assert!(unitary_defect(&ComplexMatrix::identity(3), TOL).unwrap().is_zero());
        for n in [3usize, 4, 6] {
            assert_eq!(
                unitary_defect(&lower_shift(n), TOL).unwrap(),
                RankRatio::new(1, n as u64)
            );
        }
        let a = ComplexMatrix::from_real_diagonal(&[2.0, 1.0]);
        assert_eq!(unitary_defect(&a, TOL).unwrap(), RankRatio::new(1, 2));
    }

    #[test]
    fn nearest_unitary_keeps_unitary_input() {
        let u = ComplexMatrix::from_diagonal(&[c(0.0, 1.0), c(1.0, 0.0)]);
        let v = nearest_unitary_rank(&u, TOL).unwrap();
        assert!(v.is_unitary(1.0e-9));
        assert_eq!(arithmetic_distance(&u, &v, TOL).unwrap(), 0);
    }

    #[test]
    fn nearest_unitary_completes_shift_cell_to_cyclic_permutation() {
        let n = 5;
        let a = lower_shift(n);
        let u = nearest_unitary_rank(&a, TOL).unwrap();
        assert!(u.is_unitary(1.0e-9));
        assert!(arithmetic_distance(&a, &u, TOL).unwrap() <= 1);
        // The completion sends e_n back to e_1.
        assert!((u.get(0, n - 1) - ONE).norm() < 1.0e-9);
    }

    #[test]
    fn nearest_unitary_on_diagonal_example() {
        let a = ComplexMatrix::from_real_diagonal(&[2.0, 1.0]);
        let u = nearest_unitary_rank(&a, TOL).unwrap();
        assert!(u.is_unitary(1.0e-9));
        assert!(arithmetic_distance(&a, &u, TOL).unwrap() <= 1);
    }

    #[test]
    fn witness_small_example_certificate() {
        let lambdas = [c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)];
        let w = checkerboard_witness(&lambdas, TOL).unwrap();
        assert_eq!(w.commutator_rank, 2);
        assert_eq!(w.certificate.lower_bound, 2);
        assert_eq!(w.certificate.row_indices, vec![1, 3]);
        assert_eq!(w.certificate.col_indices, vec![2, 4]);
        // Submatrix [[-1, -1/3], [1, -1]] has determinant 4/3.
        let det = w.certificate.determinant;
        assert!((det.to_complex() - c(4.0 / 3.0, 0.0)).norm() < 1.0e-12);

        // Commutator equals the checkerboard exactly.
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j || (i + j) % 2 == 0 { ZERO } else { ONE };
                assert!((w.commutator.get(i, j) - want).norm() < 1.0e-12);
            }
        }
    }

    #[test]
    fn witness_rejects_bad_inputs() {
        let l3 = [c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)];
        assert!(matches!(checkerboard_witness(&l3, TOL), Err(AlmostError::TooSmall(3))));
        let dup = [c(1.0, 0.0), c(2.0, 0.0), c(1.0, 0.0), c(4.0, 0.0)];
        assert!(matches!(
            checkerboard_witness(&dup, TOL),
            Err(AlmostError::DuplicateEigenvalue)
        ));
    }

    #[test]
    fn witness_certificate_ignores_diagonal_perturbations() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 6;
        let lambdas: Vec<Complex64> = (0..n).map(|i| c(i as f64 + 0.1, 0.0)).collect();
        let w = checkerboard_witness(&lambdas, TOL).unwrap();
        let diag = ComplexMatrix::from_fn(n, n, |i, j| {
            if i == j {
                c(rng.random::<f64>(), rng.random::<f64>())
            } else {
                ZERO
            }
        });
        let perturbed = &w.x - &diag;
        for (ri, &r) in w.certificate.row_indices.iter().enumerate() {
            for (ci, &cc) in w.certificate.col_indices.iter().enumerate() {
                let got = perturbed.get(r - 1, cc - 1);
                let want = ONE / (lambdas[w.certificate.row_indices[ri] - 1]
                    - lambdas[w.certificate.col_indices[ci] - 1]);
                assert!((got - want).norm() < 1.0e-15);
            }
        }
        // The certified bound holds for the actual rank.
        assert!(numeric_rank(&perturbed, TOL) >= w.certificate.lower_bound);
    }

    #[test]
    fn cauchy_one_by_one() {
        let check = cauchy_nonsingular(&[c(0.0, 0.0)], &[c(1.0, 0.0)]).unwrap();
        assert!(check.nonsingular);
        assert!((check.determinant.to_complex() - c(-1.0, 0.0)).norm() < 1.0e-14);
        assert!(check.rel_diff < 1.0e-14);
    }

    #[test]
    fn cauchy_two_by_two_agrees_with_elimination() {
        let check = cauchy_nonsingular(&[c(1.0, 0.0), c(3.0, 0.0)], &[c(2.0, 0.0), c(4.0, 0.0)])
            .unwrap();
        assert!(check.nonsingular);
        assert!((check.determinant.to_complex() - c(4.0 / 3.0, 0.0)).norm() < 1.0e-12);
        assert!(check.rel_diff < 1.0e-12);
    }

    #[test]
    fn cauchy_rejects_collisions() {
        assert!(matches!(
            cauchy_nonsingular(&[c(0.0, 0.0)], &[c(0.0, 0.0)]),
            Err(AlmostError::NodeCollision)
        ));
    }

    #[test]
    fn cauchy_survives_large_sizes() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let k = 32;
        let a: Vec<Complex64> = (0..k).map(|_| c(rng.random::<f64>(), 0.0)).collect();
        let b: Vec<Complex64> = (0..k).map(|_| c(rng.random::<f64>() + 1.5, 0.0)).collect();
        let check = cauchy_nonsingular(&a, &b).unwrap();
        assert!(check.nonsingular);
        assert!(check.rel_diff < 1.0e-10, "rel diff {}", check.rel_diff);
    }

    #[test]
    fn cauchy_solve_matches_direct_multiplication() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        let k = 6;
        let a: Vec<Complex64> = (0..k).map(|i| c(i as f64, 0.3)).collect();
        let b: Vec<Complex64> = (0..k).map(|i| c(i as f64 + 0.5, -0.2)).collect();
        let rhs: Vec<Complex64> = (0..k)
            .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let y = cauchy_solve(&a, &b, &rhs).unwrap();
        for i in 0..k {
            let mut acc = ZERO;
            for j in 0..k {
                acc += y[j] / (a[i] - b[j]);
            }
            assert!((acc - rhs[i]).norm() < 1.0e-9);
        }
    }
}
