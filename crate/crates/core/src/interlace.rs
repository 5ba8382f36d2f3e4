//! Rank-k spectral assignment for self-adjoint, unitary and normal-on-curve
//! matrices.
//!
//! The elementary move is the rank-1 Hermitian update: for strictly
//! interlacing real tuples alpha, beta it solves
//! `diag(alpha) X - X diag(beta) = y z^T` for a unitary X, so
//! `B = X diag(beta) X*` has spectrum beta and differs from diag(alpha) by
//! a rank-1 matrix. The weights come from polynomial interpolation:
//! `|y_i|^2 = P_B(alpha_i) / (c P_{A \ {alpha_i}}(alpha_i))` with the sign
//! c chosen so every weight is positive, and `|z_j|^2` from the diagonal
//! normalization of the unitarity conditions. Longer moves are chained
//! along a multiset geodesic, and a Möbius change of variable carries the
//! real-line construction to any circle or line.

use crate::linalg::{self, CMat, ONE, ZERO};
use crate::mats::{self, ComplexMatrix, MatError, MobiusMap};
use crate::multiset::{
    geodesic_chain_on_curve, interval_dc, mobius_apply_multiset, ComplexMultiset, Curve,
    MultisetError,
};
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InterlaceError {
    #[error("interpolation nodes must be pairwise distinct")]
    DuplicateNode,
    #[error("a coefficient vanished: a target value coincides with a node")]
    ZeroCoefficient,
    #[error("tuples do not strictly interlace")]
    NotInterlacing,
    #[error("constructed X lost unitarity: residual {residual:e}")]
    NumericalLossOfUnitarity { residual: f64 },
    #[error("matrix is not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },
    #[error("matrix is not normal (residual {residual:e})")]
    NotNormal { residual: f64 },
    #[error("matrix is not unitary (residual {residual:e})")]
    NotUnitary { residual: f64 },
    #[error("target spectrum must be real within tolerance")]
    TargetNotReal,
    #[error("target multiset has {target} values for a {matrix}x{matrix} matrix")]
    TargetSizeMismatch { matrix: usize, target: usize },
    #[error("spectrum value {0} does not lie on the curve")]
    NotOnCurve(Complex64),
    #[error("no admissible Möbius pole away from the support")]
    PoleOnSpectrum,
    #[error(transparent)]
    Multiset(#[from] MultisetError),
    #[error(transparent)]
    Matrix(#[from] MatError),
}

// ---------------------------------------------------------------------------
// Interpolation coefficients and sign uniformity.
// ---------------------------------------------------------------------------

/// Coefficients x_alpha of P_B = P_A - sum_alpha x_alpha P_{A \ {alpha}},
/// with the residual of that polynomial identity for diagnostics.
#[derive(Debug, Clone)]
pub struct InterpolationCoeffs {
    pub alphas: Vec<f64>,
    pub x: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignUniformity {
    Positive,
    Negative,
    Mixed,
}

/// Coefficients of prod (x - root), ascending degree.
fn poly_from_roots(roots: &[f64]) -> Vec<f64> {
    let mut coeffs = vec![1.0];
    for &r in roots {
        coeffs.push(0.0);
        for i in (1..coeffs.len()).rev() {
            let shifted = coeffs[i - 1] * (-r);
            coeffs[i] += shifted;
        }
    }
    coeffs.reverse();
    coeffs
}

fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn check_distinct(values: &[f64]) -> Result<(), InterlaceError> {
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for i in 0..values.len() {
        for j in (i + 1)..values.len() {
            if (values[i] - values[j]).abs() <= 1.0e-12 * scale {
                return Err(InterlaceError::DuplicateNode);
            }
        }
    }
    Ok(())
}

/// x_alpha = -P_B(alpha) / P_{A \ {alpha}}(alpha). Evaluating the identity
/// at alpha forces this sign; the returned residual certifies the
/// identity coefficientwise.
pub fn interpolation_coeffs(
    a_set: &[f64],
    b_set: &[f64],
) -> Result<InterpolationCoeffs, InterlaceError> {
    if a_set.len() != b_set.len() {
        return Err(InterlaceError::TargetSizeMismatch {
            matrix: a_set.len(),
            target: b_set.len(),
        });
    }
    let all: Vec<f64> = a_set.iter().chain(b_set.iter()).copied().collect();
    check_distinct(&all)?;

    let pb = poly_from_roots(b_set);
    let mut x = Vec::with_capacity(a_set.len());
    for (i, &alpha) in a_set.iter().enumerate() {
        let others: Vec<f64> = a_set
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &v)| v)
            .collect();
        let denom = poly_eval(&poly_from_roots(&others), alpha);
        x.push(-poly_eval(&pb, alpha) / denom);
    }

    // Residual of (P_A - sum x_alpha P_{A \ {alpha}}) - P_B.
    let mut lhs = poly_from_roots(a_set);
    for (i, _) in a_set.iter().enumerate() {
        let others: Vec<f64> = a_set
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &v)| v)
            .collect();
        let p = poly_from_roots(&others);
        for (k, &c) in p.iter().enumerate() {
            lhs[k] -= x[i] * c;
        }
    }
    let scale = pb.iter().fold(0.0f64, |m, c| m.max(c.abs())).max(1.0);
    let residual = lhs
        .iter()
        .zip(pb.iter())
        .fold(0.0f64, |m, (&l, &r)| m.max((l - r).abs()))
        / scale;

    Ok(InterpolationCoeffs {
        alphas: a_set.to_vec(),
        x,
        residual,
    })
}

/// Strict sign classification of the coefficients. Interlacing inputs are
/// never mixed.
pub fn sign_uniform(coeffs: &InterpolationCoeffs) -> Result<SignUniformity, InterlaceError> {
    let scale = coeffs.x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if coeffs.x.iter().any(|&v| v == 0.0 || v.abs() <= 1.0e-14 * scale) {
        return Err(InterlaceError::ZeroCoefficient);
    }
    let pos = coeffs.x.iter().filter(|&&v| v > 0.0).count();
    if pos == coeffs.x.len() {
        Ok(SignUniformity::Positive)
    } else if pos == 0 {
        Ok(SignUniformity::Negative)
    } else {
        Ok(SignUniformity::Mixed)
    }
}

// ---------------------------------------------------------------------------
// The rank-1 Hermitian spectral update.
// ---------------------------------------------------------------------------

/// Solution bundle of the rank-1 update `diag(alpha) X - X diag(beta) = R`:
/// the unitary X, the realized Hermitian B = X diag(beta) X*, the rank-1
/// right-hand side R = y z^T, and the numerical certificates.
#[derive(Debug, Clone)]
pub struct Rank1Update {
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub c: f64,
    pub x: ComplexMatrix,
    pub b: ComplexMatrix,
    pub r: ComplexMatrix,
    pub gram_residual: f64,
    pub spectrum_error: f64,
    pub rank_gap: f64,
}

const UNITARITY_LIMIT: f64 = 1.0e-7;

fn strictly_increasing(v: &[f64], min_gap: f64) -> bool {
    v.windows(2).all(|w| w[1] - w[0] > min_gap)
}

fn strictly_interlacing(alphas: &[f64], betas: &[f64], min_gap: f64) -> bool {
    if alphas.len() != betas.len() || alphas.is_empty() {
        return false;
    }
    if !strictly_increasing(alphas, min_gap) || !strictly_increasing(betas, min_gap) {
        return false;
    }
    let mut merged: Vec<(f64, bool)> = alphas
        .iter()
        .map(|&a| (a, true))
        .chain(betas.iter().map(|&b| (b, false)))
        .collect();
    merged.sort_by(|x, y| x.0.total_cmp(&y.0));
    merged
        .windows(2)
        .all(|w| w[0].1 != w[1].1 && w[1].0 - w[0].0 > min_gap)
}

/// Builds the unitary rank-1 spectral update for strictly interlacing
/// sorted real tuples.
pub fn hermitian_rank1_update(alphas: &[f64], betas: &[f64]) -> Result<Rank1Update, InterlaceError> {
    let n = alphas.len();
    if n == 0 || n != betas.len() {
        return Err(InterlaceError::NotInterlacing);
    }
    let scale = alphas
        .iter()
        .chain(betas.iter())
        .fold(1.0f64, |m, v| m.max(v.abs()));
    if !strictly_interlacing(alphas, betas, 1.0e-10 * scale) {
        return Err(InterlaceError::NotInterlacing);
    }

    let pb = poly_from_roots(betas);
    let mut weights = Vec::with_capacity(n);
    for (i, &alpha) in alphas.iter().enumerate() {
        let others: Vec<f64> = alphas
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &v)| v)
            .collect();
        weights.push(poly_eval(&pb, alpha) / poly_eval(&poly_from_roots(&others), alpha));
    }
    let c = if weights[0] >= 0.0 { 1.0 } else { -1.0 };
    let ysq: Vec<f64> = weights.iter().map(|&w| w / c).collect();
    if ysq.iter().any(|&v| v <= 0.0) {
        return Err(InterlaceError::NotInterlacing);
    }
    let y: Vec<f64> = ysq.iter().map(|&v| v.sqrt()).collect();

    let mut z = Vec::with_capacity(n);
    for &beta in betas {
        let s: f64 = alphas
            .iter()
            .zip(&ysq)
            .map(|(&a, &y2)| y2 / ((a - beta) * (a - beta)))
            .sum();
        z.push((1.0 / s).sqrt());
    }

    let x = CMat::from_fn(n, n, |i, j| {
        Complex64::new(y[i] * z[j] / (alphas[i] - betas[j]), 0.0)
    });
    let gram_residual = linalg::identity_residual(&(x.adjoint() * &x));
    if gram_residual > UNITARITY_LIMIT {
        return Err(InterlaceError::NumericalLossOfUnitarity {
            residual: gram_residual,
        });
    }

    let beta_diag = CMat::from_fn(n, n, |i, j| if i == j { Complex64::new(betas[i], 0.0) } else { ZERO });
    let alpha_diag = CMat::from_fn(n, n, |i, j| if i == j { Complex64::new(alphas[i], 0.0) } else { ZERO });
    let b_raw = &x * &beta_diag * x.adjoint();
    let b_raw = (&b_raw + b_raw.adjoint()).scale(0.5);
    let r = &alpha_diag * &x - &x * &beta_diag;

    let (b_eigs, _) = linalg::hermitian_eigen(&b_raw);
    let spectrum_error = b_eigs
        .iter()
        .zip(betas.iter())
        .fold(0.0f64, |m, (&have, &want)| m.max((have - want).abs()));

    let gap = &alpha_diag - &b_raw;
    let sv = linalg::singular_values(&gap);
    let rank_gap = if n <= 1 || sv.is_empty() || sv[0] == 0.0 {
        0.0
    } else {
        sv[1] / sv[0]
    };

    Ok(Rank1Update {
        y,
        z,
        c,
        x: ComplexMatrix::from_raw(x),
        b: ComplexMatrix::from_raw(b_raw),
        r: ComplexMatrix::from_raw(r),
        gram_residual,
        spectrum_error,
        rank_gap,
    })
}

// ---------------------------------------------------------------------------
// Rank-k assignment for Hermitian matrices.
// ---------------------------------------------------------------------------

/// Hermitian B with sp(B) = target and rank(A - B) = dc(sp(A), target):
/// walks the multiset geodesic from sp(A) to the target on the real line
/// and applies one rank-1 update per step in the current eigenbasis.
pub fn hermitian_assign_spectrum(
    a: &ComplexMatrix,
    target: &ComplexMultiset,
    tol: f64,
) -> Result<ComplexMatrix, InterlaceError> {
    let n = a.rows();
    if target.len() != n {
        return Err(InterlaceError::TargetSizeMismatch {
            matrix: n,
            target: target.len(),
        });
    }
    let herm_residual = linalg::max_abs(&(a.raw() - a.raw().adjoint()));
    if herm_residual > tol * a.max_abs().max(1.0) {
        return Err(InterlaceError::NotHermitian {
            residual: herm_residual,
        });
    }
    let target_scale = target.iter().fold(1.0f64, |m, &(v, _)| m.max(v.norm()));
    if target.iter().any(|&(v, _)| v.im.abs() > tol * target_scale) {
        return Err(InterlaceError::TargetNotReal);
    }
    let target_pairs: Vec<(Complex64, usize)> = target
        .iter()
        .map(|&(v, c)| (Complex64::new(v.re, 0.0), c))
        .collect();
    let target_real = ComplexMultiset::from_pairs(&target_pairs, target.merge_tol())?;

    let line = Curve::real_line();
    let (eigs, _) = linalg::hermitian_eigen(a.raw());
    let sp_values: Vec<Complex64> = eigs.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let sp_a = ComplexMultiset::from_values(&sp_values, target.merge_tol());
    let chain = geodesic_chain_on_curve(&sp_a, &target_real, &line)?;

    let mut current = a.raw().clone();
    for pair in chain.windows(2) {
        let leave = crate::multiset::ms_difference(&pair[0], &pair[1])?;
        let enter = crate::multiset::ms_difference(&pair[1], &pair[0])?;
        if leave.is_empty() {
            continue;
        }
        let alphas: Vec<f64> = leave.expanded().iter().map(|v| v.re).collect();
        let betas: Vec<f64> = enter.expanded().iter().map(|v| v.re).collect();

        let (vals, basis) = linalg::hermitian_eigen(&current);
        let match_tol = target.merge_tol().max(1.0e-9 * target_scale.max(1.0));
        let mut used = vec![false; n];
        let mut active_cols = Vec::with_capacity(alphas.len());
        for &alpha in &alphas {
            let mut found = None;
            let mut best = f64::INFINITY;
            for (i, &v) in vals.iter().enumerate() {
                if !used[i] && (v - alpha).abs() < best {
                    best = (v - alpha).abs();
                    found = Some(i);
                }
            }
            let idx = found
                .filter(|_| best <= match_tol)
                .unwrap_or_else(|| panic!("chain value {alpha} missing from the current spectrum"));
            used[idx] = true;
            active_cols.push(idx);
        }

        let update = hermitian_rank1_update(&alphas, &betas)?;
        let s = alphas.len();
        let mut q_act = CMat::zeros(n, s);
        for (pos, &idx) in active_cols.iter().enumerate() {
            q_act.set_column(pos, &basis.column(idx));
        }
        // B_sub - diag(alpha) = -(y z^T) X^H, so the full move is the
        // rank-1 outer product -(Q y)(Q X z)^H.
        let yv = CMat::from_fn(s, 1, |i, _| Complex64::new(update.y[i], 0.0));
        let zv = CMat::from_fn(s, 1, |i, _| Complex64::new(update.z[i], 0.0));
        let u = &q_act * &yv;
        let v = &q_act * (update.x.raw() * &zv);
        current -= &u * v.adjoint();
        current = (&current + current.adjoint()).scale(0.5);
    }
    Ok(ComplexMatrix::from_raw(current))
}

// ---------------------------------------------------------------------------
// Carrying the construction to a circle or line.
// ---------------------------------------------------------------------------

/// A curve together with the Möbius map carrying it to the real line; the
/// map's pole lies on the curve away from every relevant support point.
#[derive(Debug, Clone)]
pub struct CurveSpec {
    pub curve: Curve,
    pub map: MobiusMap,
}

impl CurveSpec {
    /// Picks the pole as the curve point maximizing the minimum distance
    /// to the support (the midpoint of the largest support gap) and
    /// assembles the map to the real line.
    pub fn for_support(curve: Curve, support: &[Complex64]) -> Result<Self, InterlaceError> {
        match curve {
            Curve::Line { point, direction } => {
                let u = direction / Complex64::new(direction.norm(), 0.0);
                let map =
                    MobiusMap::new(ZERO, ONE, ONE / u, -point / u).map_err(InterlaceError::Matrix)?;
                Ok(CurveSpec { curve, map })
            }
            Curve::Circle { center, radius } => {
                let mut angles: Vec<f64> = support.iter().map(|&p| (p - center).arg()).collect();
                angles.sort_by(|a, b| a.total_cmp(b));
                angles.dedup();
                let tau = 2.0 * std::f64::consts::PI;
                let pole_angle = if angles.is_empty() {
                    std::f64::consts::PI
                } else if angles.len() == 1 {
                    angles[0] + std::f64::consts::PI
                } else {
                    let mut best = (0.0f64, 0.0f64);
                    for i in 0..angles.len() {
                        let next = if i + 1 == angles.len() {
                            angles[0] + tau
                        } else {
                            angles[i + 1]
                        };
                        let gap = next - angles[i];
                        if gap > best.0 {
                            best = (gap, angles[i] + gap / 2.0);
                        }
                    }
                    best.1
                };
                let pole = center + Complex64::from_polar(radius, pole_angle);
                let min_dist = support
                    .iter()
                    .fold(f64::INFINITY, |m, &p| m.min((p - pole).norm()));
                if !support.is_empty() && min_dist <= 1.0e-9 * radius {
                    return Err(InterlaceError::PoleOnSpectrum);
                }
                let t1 = center + Complex64::from_polar(radius, pole_angle + tau / 3.0);
                let t2 = center + Complex64::from_polar(radius, pole_angle - tau / 3.0);
                // phi maps (t1, t2, pole) to (0, 1, infinity), so the curve
                // goes to the real line.
                let map = MobiusMap::new(t2 - t1, -pole * (t2 - t1), t2 - pole, -t1 * (t2 - pole))
                    .map_err(InterlaceError::Matrix)?;
                Ok(CurveSpec { curve, map })
            }
        }
    }
}

/// Normal B with sp(B) = target on the same curve as sp(A), with
/// rank(A - B) = dc(sp(A), target): conjugates the data to the real line,
/// runs the Hermitian assignment, and maps back.
pub fn normal_on_curve_assign_spectrum(
    a: &ComplexMatrix,
    target: &ComplexMultiset,
    spec: &CurveSpec,
    tol: f64,
) -> Result<ComplexMatrix, InterlaceError> {
    let n = a.rows();
    if target.len() != n {
        return Err(InterlaceError::TargetSizeMismatch {
            matrix: n,
            target: target.len(),
        });
    }
    let scale = a.max_abs().max(1.0);
    if !a.is_normal(tol) {
        let comm = a.raw() * a.raw().adjoint() - a.raw().adjoint() * a.raw();
        return Err(InterlaceError::NotNormal {
            residual: linalg::max_abs(&comm) / (scale * scale),
        });
    }
    let (sp_a, _, _) = linalg::normal_eigen(a.raw());
    let on_tol = target.merge_tol().max(10.0 * tol * scale);
    for &v in &sp_a {
        if spec.curve.distance(v) > on_tol {
            return Err(InterlaceError::NotOnCurve(v));
        }
    }
    for &(v, _) in target.iter() {
        if spec.curve.distance(v) > on_tol {
            return Err(InterlaceError::NotOnCurve(v));
        }
    }
    if let Some(pole) = spec.map.pole() {
        for v in sp_a.iter().copied().chain(target.iter().map(|&(v, _)| v)) {
            if (v - pole).norm() <= on_tol {
                return Err(InterlaceError::PoleOnSpectrum);
            }
        }
    }

    // A distance-0 target is answered by A itself; round-tripping through
    // the map would smear an exactly-zero difference into noise.
    let sp_ms = ComplexMultiset::from_values(&sp_a, target.merge_tol());
    if interval_dc(&sp_ms, target, &spec.curve)? == 0 {
        return Ok(a.clone());
    }

    let mapped = mats::mobius_apply_matrix(&spec.map, a, tol)?;
    let h = (mapped.raw() + mapped.raw().adjoint()).scale(0.5);
    let skew_residual = linalg::max_abs(&(mapped.raw() - &h));
    if skew_residual > 1.0e-6 * linalg::max_abs(&h).max(1.0) {
        return Err(InterlaceError::NotOnCurve(sp_a[0]));
    }

    let mapped_target_raw = mobius_apply_multiset(&spec.map, target).map_err(|e| match e {
        MultisetError::PoleOnSupport(_) => InterlaceError::PoleOnSpectrum,
        other => InterlaceError::Multiset(other),
    })?;
    let in_scale = target.iter().fold(1.0f64, |m, &(v, _)| m.max(v.norm()));
    let out_scale = mapped_target_raw
        .iter()
        .fold(1.0f64, |m, &(v, _)| m.max(v.norm()));
    let mapped_tol = (target.merge_tol() * out_scale / in_scale).max(1.0e-13 * out_scale);
    let mapped_pairs: Vec<(Complex64, usize)> = mapped_target_raw
        .iter()
        .map(|&(v, c)| (Complex64::new(v.re, 0.0), c))
        .collect();
    let mapped_target = ComplexMultiset::from_pairs(&mapped_pairs, mapped_tol)?;

    let assigned =
        hermitian_assign_spectrum(&ComplexMatrix::from_raw(h), &mapped_target, tol.max(1.0e-12))?;
    let back = mats::mobius_apply_matrix(&spec.map.inverse(), &assigned, tol)?;
    Ok(back)
}

/// Unitary B with the prescribed unit-circle spectrum at minimal rank
/// distance from U.
pub fn unitary_assign_spectrum(
    u: &ComplexMatrix,
    target: &ComplexMultiset,
    tol: f64,
) -> Result<ComplexMatrix, InterlaceError> {
    let residual = u.unitarity_residual();
    if residual > tol {
        return Err(InterlaceError::NotUnitary { residual });
    }
    let circle = Curve::unit_circle();
    let on_tol = target.merge_tol().max(10.0 * tol);
    for &(v, _) in target.iter() {
        if (v.norm() - 1.0).abs() > on_tol {
            return Err(InterlaceError::NotOnCurve(v));
        }
    }
    let (sp_u, _, _) = linalg::normal_eigen(u.raw());
    let support: Vec<Complex64> = sp_u
        .iter()
        .copied()
        .chain(target.iter().map(|&(v, _)| v))
        .collect();
    let spec = CurveSpec::for_support(circle, &support)?;
    normal_on_curve_assign_spectrum(u, target, &spec, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mats::arithmetic_distance;

    const TOL: f64 = 1.0e-9;
    const MT: f64 = 1.0e-8;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ms(values: &[f64]) -> ComplexMultiset {
        let v: Vec<Complex64> = values.iter().map(|&x| c(x, 0.0)).collect();
        ComplexMultiset::from_values(&v, MT)
    }

    #[test]
    fn interpolation_single_node() {
        let coeffs = interpolation_coeffs(&[0.0], &[1.0]).unwrap();
        assert!((coeffs.x[0] - 1.0).abs() < 1.0e-14);
        assert!(coeffs.residual < 1.0e-14);
    }

    #[test]
    fn interpolation_two_nodes() {
        let coeffs = interpolation_coeffs(&[0.0, 2.0], &[1.0, 3.0]).unwrap();
        assert!((coeffs.x[0] - 1.5).abs() < 1.0e-13);
        assert!((coeffs.x[1] - 0.5).abs() < 1.0e-13);
        assert!(coeffs.residual < 1.0e-13);
        assert_eq!(sign_uniform(&coeffs).unwrap(), SignUniformity::Positive);
    }

    #[test]
    fn interpolation_exists_without_interlacing() {
        let coeffs = interpolation_coeffs(&[0.0, 2.0], &[-1.0, 1.0]).unwrap();
        assert!(coeffs.residual < 1.0e-12);
    }

    #[test]
    fn interpolation_rejects_duplicates() {
        assert!(matches!(
            interpolation_coeffs(&[0.0, 1.0], &[1.0, 2.0]),
            Err(InterlaceError::DuplicateNode)
        ));
    }

    #[test]
    fn sign_uniformity_classification() {
        let coeffs = interpolation_coeffs(&[1.0, 3.0], &[0.0, 2.0]).unwrap();
        let s = sign_uniform(&coeffs).unwrap();
        assert_ne!(s, SignUniformity::Mixed);

        let coeffs = interpolation_coeffs(&[0.0, 3.0], &[1.0, 2.0]).unwrap();
        assert_eq!(sign_uniform(&coeffs).unwrap(), SignUniformity::Mixed);
    }

    #[test]
    fn rank1_update_scalar_case() {
        let up = hermitian_rank1_update(&[0.0], &[1.0]).unwrap();
        assert!((up.y[0] - 1.0).abs() < 1.0e-14);
        assert!((up.z[0] - 1.0).abs() < 1.0e-14);
        assert!((up.c + 1.0).abs() < 1.0e-14);
        assert!((up.x.get(0, 0) - c(-1.0, 0.0)).norm() < 1.0e-14);
        assert!((up.b.get(0, 0) - c(1.0, 0.0)).norm() < 1.0e-14);
    }

    #[test]
    fn rank1_update_certificates() {
        let up = hermitian_rank1_update(&[0.0, 2.0], &[1.0, 3.0]).unwrap();
        assert!(up.gram_residual < 1.0e-12);
        assert!(up.spectrum_error < 1.0e-12);
        assert!(up.rank_gap < 1.0e-12);
        // R really is y z^T.
        for i in 0..2 {
            for j in 0..2 {
                let want = c(up.y[i] * up.z[j], 0.0);
                assert!((up.r.get(i, j) - want).norm() < 1.0e-12);
            }
        }
    }

    #[test]
    fn rank1_update_rejects_non_interlacing() {
        assert!(matches!(
            hermitian_rank1_update(&[0.0, 2.0], &[0.5, 1.0]),
            Err(InterlaceError::NotInterlacing)
        ));
    }

    #[test]
    fn hermitian_assignment_identity_target() {
        let a = ComplexMatrix::from_real_diagonal(&[0.0, 2.0]);
        let b = hermitian_assign_spectrum(&a, &ms(&[0.0, 2.0]), TOL).unwrap();
        assert_eq!(arithmetic_distance(&a, &b, TOL).unwrap(), 0);
    }

    #[test]
    fn hermitian_assignment_single_step() {
        let a = ComplexMatrix::from_real_diagonal(&[0.0, 2.0]);
        let b = hermitian_assign_spectrum(&a, &ms(&[1.0, 3.0]), TOL).unwrap();
        assert!(b.is_hermitian(1.0e-8));
        assert_eq!(arithmetic_distance(&a, &b, TOL).unwrap(), 1);
        let (vals, _) = crate::linalg::hermitian_eigen(b.raw());
        assert!((vals[0] - 1.0).abs() < 1.0e-9);
        assert!((vals[1] - 3.0).abs() < 1.0e-9);
    }

    #[test]
    fn hermitian_assignment_full_distance() {
        let a = ComplexMatrix::from_real_diagonal(&[0.0, 1.0, 2.0]);
        let target = ms(&[5.0, 6.0, 7.0]);
        let b = hermitian_assign_spectrum(&a, &target, TOL).unwrap();
        assert_eq!(arithmetic_distance(&a, &b, TOL).unwrap(), 3);
        let k = interval_dc(&ms(&[0.0, 1.0, 2.0]), &target, &Curve::real_line()).unwrap();
        assert_eq!(k, 3);
        let (vals, _) = crate::linalg::hermitian_eigen(b.raw());
        for (have, want) in vals.iter().zip([5.0, 6.0, 7.0]) {
            assert!((have - want).abs() < 1.0e-8);
        }
    }

    #[test]
    fn hermitian_assignment_rejects_bad_inputs() {
        let a = ComplexMatrix::from_row_major(
            2,
            2,
            &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        );
        assert!(matches!(
            hermitian_assign_spectrum(&a, &ms(&[0.0, 1.0]), TOL),
            Err(InterlaceError::NotHermitian { .. })
        ));

        let a = ComplexMatrix::from_real_diagonal(&[0.0, 2.0]);
        let bad = ComplexMultiset::from_values(&[c(0.0, 1.0), c(1.0, 0.0)], MT);
        assert!(matches!(
            hermitian_assign_spectrum(&a, &bad, TOL),
            Err(InterlaceError::TargetNotReal)
        ));
        assert!(matches!(
            hermitian_assign_spectrum(&a, &ms(&[1.0]), TOL),
            Err(InterlaceError::TargetSizeMismatch { .. })
        ));
    }

    #[test]
    fn normal_assignment_on_unit_circle() {
        let a = ComplexMatrix::from_diagonal(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        let target = ComplexMultiset::from_values(&[c(0.0, 1.0), c(0.0, -1.0)], MT);
        let spec = CurveSpec::for_support(
            Curve::unit_circle(),
            &[c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0)],
        )
        .unwrap();
        let b = normal_on_curve_assign_spectrum(&a, &target, &spec, TOL).unwrap();
        assert!(b.is_unitary(1.0e-7), "residual {}", b.unitarity_residual());
        let k = arithmetic_distance(&a, &b, TOL).unwrap();
        let sp_a = ComplexMultiset::from_values(&[c(1.0, 0.0), c(-1.0, 0.0)], MT);
        let dc = interval_dc(&sp_a, &target, &Curve::unit_circle()).unwrap();
        assert_eq!(k, dc);
        assert_eq!(k, 1);
        let (mut eigs, _, _) = crate::linalg::normal_eigen(b.raw());
        eigs.sort_by(|x, y| x.im.total_cmp(&y.im));
        assert!((eigs[0] - c(0.0, -1.0)).norm() < 1.0e-7);
        assert!((eigs[1] - c(0.0, 1.0)).norm() < 1.0e-7);
    }

    #[test]
    fn unitary_assignment_rotation_of_spectrum() {
        let vals = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        let u = ComplexMatrix::from_diagonal(&vals);
        let rot = Complex64::from_polar(1.0, std::f64::consts::PI / 4.0);
        let target_vals: Vec<Complex64> = vals.iter().map(|&v| v * rot).collect();
        let target = ComplexMultiset::from_values(&target_vals, MT);
        let b = unitary_assign_spectrum(&u, &target, TOL).unwrap();
        assert!(b.is_unitary(1.0e-7));
        let k = arithmetic_distance(&u, &b, TOL).unwrap();
        let sp_u = ComplexMultiset::from_values(&vals.to_vec(), MT);
        let dc = interval_dc(&sp_u, &target, &Curve::unit_circle()).unwrap();
        assert_eq!(k, dc);
    }

    #[test]
    fn unitary_assignment_trivial_target() {
        let u = ComplexMatrix::from_diagonal(&[c(0.0, 1.0), c(1.0, 0.0)]);
        let target = ComplexMultiset::from_values(&[c(0.0, 1.0), c(1.0, 0.0)], MT);
        let b = unitary_assign_spectrum(&u, &target, TOL).unwrap();
        assert_eq!(arithmetic_distance(&u, &b, TOL).unwrap(), 0);
    }

    #[test]
    fn unitary_identity_needs_rank_two_for_double_flip() {
        let u = ComplexMatrix::identity(2);
        let target = ComplexMultiset::from_values(&[c(-1.0, 0.0), c(-1.0, 0.0)], MT);
        let b = unitary_assign_spectrum(&u, &target, TOL).unwrap();
        assert_eq!(arithmetic_distance(&u, &b, TOL).unwrap(), 2);
        assert!(b.is_unitary(1.0e-7));
    }

    #[test]
    fn curve_spec_picks_pole_away_from_support() {
        let support = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)];
        let spec = CurveSpec::for_support(Curve::unit_circle(), &support).unwrap();
        let pole = spec.map.pole().expect("circle map has a finite pole");
        assert!((pole.norm() - 1.0).abs() < 1.0e-12);
        for &s in &support {
            assert!((s - pole).norm() > 0.5);
        }
        // The map really sends the circle to the real line.
        for k in 0..12 {
            let z = Complex64::from_polar(1.0, 0.37 + k as f64 / 2.0);
            if (z - pole).norm() < 1.0e-6 {
                continue;
            }
            assert!(spec.map.apply_scalar(z).im.abs() < 1.0e-9);
        }
    }
}
