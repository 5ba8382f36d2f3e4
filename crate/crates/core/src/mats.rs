//! Dense complex matrices, numeric rank, arithmetic (rank) distances,
//! rank-1 geodesic chains and the Möbius action on matrices.

use crate::linalg::{self, CMat, ONE, ZERO};
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MatError {
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("matrix must be square, got {0}x{1}")]
    NotSquare(usize, usize),
    #[error("möbius map has a pole on the spectrum: a*A + b*E is singular")]
    PoleOnSpectrum,
    #[error("matrix is not unitary (residual {residual:e} > tolerance {tol:e})")]
    NotUnitary { residual: f64, tol: f64 },
    #[error("möbius map is degenerate: a*d - b*c = 0")]
    DegenerateMobius,
    #[error("eigenvalue iteration failed to converge")]
    EigenConvergence,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}: expected {expected}")]
    Malformed { line: usize, expected: &'static str },
    #[error("line {line}: value is not finite")]
    NonFinite { line: usize },
    #[error("expected {expected} entry lines, found {found}")]
    WrongCount { expected: usize, found: usize },
    #[error("matrix dimensions must be positive")]
    BadDims,
}

/// Dense complex matrix in row-major contract; the carrier for every
/// construction in the toolkit. Values are immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    data: CMat,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            data: CMat::zeros(rows, cols),
        }
    }

    pub fn identity(n: usize) -> Self {
        ComplexMatrix {
            data: CMat::identity(n, n),
        }
    }

    /// Builds from entries listed row by row; panics if the count is wrong.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[Complex64]) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count must be rows*cols");
        ComplexMatrix {
            data: CMat::from_row_slice(rows, cols, entries),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        ComplexMatrix {
            data: CMat::from_fn(rows, cols, f),
        }
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        ComplexMatrix {
            data: CMat::from_fn(n, n, |i, j| if i == j { diag[i] } else { ZERO }),
        }
    }

    /// Real diagonal convenience, used all over the tests.
    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let entries: Vec<Complex64> = diag.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_diagonal(&entries)
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        ComplexMatrix {
            data: self.data.adjoint(),
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        ComplexMatrix {
            data: &self.data * factor,
        }
    }

    /// Entrywise max modulus.
    pub fn max_abs(&self) -> f64 {
        linalg::max_abs(&self.data)
    }

    /// Singular values, descending.
    pub fn singular_values(&self) -> Vec<f64> {
        linalg::singular_values(&self.data)
    }

    /// Eigenvalues of a general square matrix, unordered.
    pub fn eigenvalues(&self) -> Result<Vec<Complex64>, MatError> {
        if !self.is_square() {
            return Err(MatError::NotSquare(self.rows(), self.cols()));
        }
        linalg::general_eigenvalues(&self.data).map_err(|_| MatError::EigenConvergence)
    }

    /// max|A - A*| <= tol * max|A|.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let diff = &self.data - self.data.adjoint();
        linalg::max_abs(&diff) <= tol * self.max_abs()
    }

    /// max|A*A - E| <= tol.
    pub fn is_unitary(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        self.unitarity_residual() <= tol
    }

    /// max|A*A - E|.
    pub fn unitarity_residual(&self) -> f64 {
        linalg::identity_residual(&(self.data.adjoint() * &self.data))
    }

    /// max|AA* - A*A| <= tol * max|A|^2.
    pub fn is_normal(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let comm = &self.data * self.data.adjoint() - self.data.adjoint() * &self.data;
        let scale = self.max_abs();
        linalg::max_abs(&comm) <= tol * scale * scale
    }

    pub(crate) fn raw(&self) -> &CMat {
        &self.data
    }

    pub(crate) fn from_raw(data: CMat) -> Self {
        ComplexMatrix { data }
    }
}

impl std::ops::Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            data: &self.data + &rhs.data,
        }
    }
}

impl std::ops::Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            data: &self.data - &rhs.data,
        }
    }
}

impl std::ops::Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            data: &self.data * &rhs.data,
        }
    }
}

/// Exact rational rank(A-B)/n, kept reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RankRatio {
    numer: u64,
    denom: u64,
}

impl RankRatio {
    pub fn new(numer: u64, denom: u64) -> Self {
        assert!(denom > 0, "denominator must be positive");
        let g = gcd(numer.max(1), denom);
        let g = if numer == 0 { denom } else { g };
        RankRatio {
            numer: numer / g,
            denom: denom / g,
        }
    }

    pub fn numer(&self) -> u64 {
        self.numer
    }

    pub fn denom(&self) -> u64 {
        self.denom
    }

    pub fn as_f64(&self) -> f64 {
        self.numer as f64 / self.denom as f64
    }

    pub fn is_zero(&self) -> bool {
        self.numer == 0
    }
}

impl PartialOrd for RankRatio {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RankRatio {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let lhs = self.numer as u128 * other.denom as u128;
        let rhs = other.numer as u128 * self.denom as u128;
        lhs.cmp(&rhs)
    }
}

impl std::fmt::Display for RankRatio {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.numer, self.denom)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

/// Möbius transformation phi(x) = (a x + b)^(-1) (c x + d), acting on
/// scalars, multisets and matrices. Nondegenerate: a d - b c != 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusMap {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl MobiusMap {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self, MatError> {
        let det = a * d - b * c;
        let scale = a.norm().max(b.norm()).max(c.norm()).max(d.norm());
        if det.norm() <= 1.0e-14 * scale * scale {
            return Err(MatError::DegenerateMobius);
        }
        Ok(MobiusMap { a, b, c, d })
    }

    pub fn identity() -> Self {
        MobiusMap {
            a: ZERO,
            b: ONE,
            c: ONE,
            d: ZERO,
        }
    }

    /// Finite pole, if any: the zero of a x + b.
    pub fn pole(&self) -> Option<Complex64> {
        if self.a.norm() == 0.0 {
            None
        } else {
            Some(-self.b / self.a)
        }
    }

    pub fn apply_scalar(&self, x: Complex64) -> Complex64 {
        (self.c * x + self.d) / (self.a * x + self.b)
    }

    /// Inverse transformation; satisfies inv.apply(self.apply(x)) = x.
    pub fn inverse(&self) -> MobiusMap {
        MobiusMap {
            a: self.a,
            b: -self.c,
            c: -self.b,
            d: self.d,
        }
    }
}

/// Count of singular values above tol * sigma_max; 0 for the zero matrix.
pub fn numeric_rank(a: &ComplexMatrix, tol: f64) -> usize {
    assert!(tol >= 0.0, "tolerance must be nonnegative");
    let sv = a.singular_values();
    let top = sv.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * top).count()
}

/// Nullity at the same tolerance as `numeric_rank`.
pub fn nullity(a: &ComplexMatrix, tol: f64) -> usize {
    a.cols() - numeric_rank(a, tol)
}

/// d(A, B) = rank(A - B).
pub fn arithmetic_distance(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> Result<usize, MatError> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(MatError::DimensionMismatch(a.rows(), a.cols(), b.rows(), b.cols()));
    }
    Ok(numeric_rank(&(a - b), tol))
}

/// d_r(A, B) = rank(A - B) / n as an exact rational.
pub fn normalized_distance(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> Result<RankRatio, MatError> {
    if !a.is_square() {
        return Err(MatError::NotSquare(a.rows(), a.cols()));
    }
    let rank = arithmetic_distance(a, b, tol)?;
    Ok(RankRatio::new(rank as u64, a.rows() as u64))
}

/// phi(A) = (a A + b E)^(-1) (c A + d E); the spectrum maps pointwise by
/// the scalar Möbius map.
pub fn mobius_apply_matrix(
    map: &MobiusMap,
    a: &ComplexMatrix,
    tol: f64,
) -> Result<ComplexMatrix, MatError> {
    if !a.is_square() {
        return Err(MatError::NotSquare(a.rows(), a.cols()));
    }
    let n = a.rows();
    let eye = linalg::identity(n);
    let denom = a.raw() * map.a + &eye * map.b;
    let numer = a.raw() * map.c + &eye * map.d;
    let denom_mat = ComplexMatrix::from_raw(denom.clone());
    if numeric_rank(&denom_mat, tol) < n {
        return Err(MatError::PoleOnSpectrum);
    }
    let solved = linalg::lu_solve(&denom, &numer).ok_or(MatError::PoleOnSpectrum)?;
    Ok(ComplexMatrix::from_raw(solved))
}

/// Geodesic chain C_0 = A, ..., C_k = B with rank(C_{i+1} - C_i) = 1,
/// built from the rank-1 terms of B - A in descending magnitude. When both
/// endpoints are Hermitian the terms come from the Hermitian
/// eigendecomposition so every intermediate stays Hermitian.
pub fn rank1_chain(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    tol: f64,
) -> Result<Vec<ComplexMatrix>, MatError> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(MatError::DimensionMismatch(a.rows(), a.cols(), b.rows(), b.cols()));
    }
    let diff = b - a;
    let hermitian_route = a.is_square() && a.is_hermitian(tol) && b.is_hermitian(tol);

    // (weight magnitude, rank-1 term) pairs, descending.
    let mut terms: Vec<(f64, CMat)> = Vec::new();
    if hermitian_route {
        let herm = (diff.raw() + diff.raw().adjoint()).scale(0.5);
        let (vals, vecs) = linalg::hermitian_eigen(&herm);
        let top = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (i, &lam) in vals.iter().enumerate() {
            if top > 0.0 && lam.abs() > tol * top {
                let v = vecs.column(i);
                let term = &v * v.adjoint() * Complex64::new(lam, 0.0);
                terms.push((lam.abs(), term));
            }
        }
    } else {
        let (u, sv, vt) = linalg::svd_full(diff.raw()).map_err(|_| MatError::EigenConvergence)?;
        let top = sv.first().copied().unwrap_or(0.0);
        for (i, &s) in sv.iter().enumerate() {
            if top > 0.0 && s > tol * top {
                let term = u.column(i) * vt.row(i) * Complex64::new(s, 0.0);
                terms.push((s, term));
            }
        }
    }
    terms.sort_by(|x, y| y.0.total_cmp(&x.0));

    let mut chain = vec![a.clone()];
    let mut current = a.raw().clone();
    for (_, term) in &terms {
        current += term;
        chain.push(ComplexMatrix::from_raw(current.clone()));
    }
    Ok(chain)
}

/// Geodesic chain of unitary matrices from U1 to U2: diagonalize
/// U1^(-1) U2 = V diag(lambda) V* and switch the non-unit eigenvalues on
/// one at a time, largest deviation |lambda - 1| first.
pub fn unitary_chain(
    u1: &ComplexMatrix,
    u2: &ComplexMatrix,
    tol: f64,
) -> Result<Vec<ComplexMatrix>, MatError> {
    if u1.rows() != u2.rows() || u1.cols() != u2.cols() {
        return Err(MatError::DimensionMismatch(u1.rows(), u1.cols(), u2.rows(), u2.cols()));
    }
    for u in [u1, u2] {
        let residual = u.unitarity_residual();
        if residual > tol {
            return Err(MatError::NotUnitary { residual, tol });
        }
    }
    let w = u1.raw().adjoint() * u2.raw();
    let (lambdas, vecs, _residual) = linalg::normal_eigen(&w);

    let mut order: Vec<usize> = (0..lambdas.len()).collect();
    order.sort_by(|&i, &j| {
        (lambdas[j] - ONE)
            .norm()
            .total_cmp(&(lambdas[i] - ONE).norm())
            .then(lambdas[i].re.total_cmp(&lambdas[j].re))
            .then(lambdas[i].im.total_cmp(&lambdas[j].im))
    });
    let active: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&i| (lambdas[i] - ONE).norm() > tol)
        .collect();

    let n = u1.rows();
    let mut chain = vec![u1.clone()];
    let mut switched: Vec<Complex64> = vec![ONE; n];
    for (step, &idx) in active.iter().enumerate() {
        switched[idx] = lambdas[idx];
        if step + 1 == active.len() {
            // Final member carries the near-unit eigenvalues too, so the
            // chain lands on U2 itself.
            for i in 0..n {
                if !active.contains(&i) {
                    switched[i] = lambdas[i];
                }
            }
        }
        let diag = CMat::from_fn(n, n, |i, j| if i == j { switched[i] } else { ZERO });
        let member = u1.raw() * &vecs * diag * vecs.adjoint();
        chain.push(ComplexMatrix::from_raw(member));
    }
    Ok(chain)
}

// ---------------------------------------------------------------------------
// Shared text format: line 1 "rows cols", then rows*cols lines "re im".
// ---------------------------------------------------------------------------

pub fn parse_matrix(text: &str) -> Result<ComplexMatrix, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (line_no, header) = lines.next().ok_or(ParseError::Malformed {
        line: 1,
        expected: "header line `rows cols`",
    })?;
    let mut parts = header.split_whitespace();
    let rows: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or(ParseError::Malformed { line: line_no, expected: "header line `rows cols`" })?;
    let cols: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or(ParseError::Malformed { line: line_no, expected: "header line `rows cols`" })?;
    if parts.next().is_some() {
        return Err(ParseError::Malformed { line: line_no, expected: "header line `rows cols`" });
    }
    if rows == 0 || cols == 0 {
        return Err(ParseError::BadDims);
    }

    let mut entries = Vec::with_capacity(rows * cols);
    for (line_no, line) in lines {
        let (re, im) = parse_complex_pair(line, line_no)?;
        entries.push(Complex64::new(re, im));
    }
    if entries.len() != rows * cols {
        return Err(ParseError::WrongCount {
            expected: rows * cols,
            found: entries.len(),
        });
    }
    Ok(ComplexMatrix::from_row_major(rows, cols, &entries))
}

pub(crate) fn parse_complex_pair(line: &str, line_no: usize) -> Result<(f64, f64), ParseError> {
    let mut parts = line.split_whitespace();
    let re: f64 = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or(ParseError::Malformed { line: line_no, expected: "entry line `re im`" })?;
    let im: f64 = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or(ParseError::Malformed { line: line_no, expected: "entry line `re im`" })?;
    if parts.next().is_some() {
        return Err(ParseError::Malformed { line: line_no, expected: "entry line `re im`" });
    }
    if !re.is_finite() || !im.is_finite() {
        return Err(ParseError::NonFinite { line: line_no });
    }
    Ok((re, im))
}

pub fn format_matrix(m: &ComplexMatrix) -> String {
    let mut out = format!("{} {}\n", m.rows(), m.cols());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let z = m.get(i, j);
            out.push_str(&format!("{} {}\n", z.re, z.im));
        }
    }
    out
}
