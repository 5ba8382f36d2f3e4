//! Dense decomposition layer shared by all modules.
//!
//! Singular values, Hermitian eigendecompositions and LU solves are
//! delegated to `nalgebra`. General (possibly defective) complex
//! eigenvalues use a local Hessenberg + shifted-QR iteration because the
//! delegated Schur form does not converge on exact nilpotent Jordan
//! blocks, which this toolkit must handle.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub(crate) type CMat = DMatrix<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub(crate) enum LinalgError {
    #[error("singular value iteration failed to converge")]
    SvdConvergence,
    #[error("eigenvalue iteration failed to converge")]
    EigenConvergence,
}

pub(crate) fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Entrywise max modulus; 0 for empty matrices.
pub(crate) fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

pub(crate) fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// max |m - E|.
pub(crate) fn identity_residual(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((m[(i, j)] - target).norm());
        }
    }
    worst
}

/// Singular values in descending order. Falls back to the Gram-matrix
/// eigenvalues if the bidiagonal iteration stalls.
pub(crate) fn singular_values(m: &CMat) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    if let Some(svd) = m.clone().try_svd(false, false, f64::EPSILON, 10_000) {
        return svd.singular_values.iter().copied().collect();
    }
    let gram = if m.nrows() <= m.ncols() {
        m * m.adjoint()
    } else {
        m.adjoint() * m
    };
    let (vals, _) = hermitian_eigen(&gram);
    let mut sv: Vec<f64> = vals.iter().map(|v| v.max(0.0).sqrt()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Full SVD (U, sigma descending, V^H).
pub(crate) fn svd_full(m: &CMat) -> Result<(CMat, Vec<f64>, CMat), LinalgError> {
    let svd = m
        .clone()
        .try_svd(true, true, f64::EPSILON, 10_000)
        .ok_or(LinalgError::SvdConvergence)?;
    let u = svd.u.ok_or(LinalgError::SvdConvergence)?;
    let vt = svd.v_t.ok_or(LinalgError::SvdConvergence)?;
    let s = svd.singular_values.iter().copied().collect();
    Ok((u, s, vt))
}

/// Eigendecomposition of a Hermitian matrix: eigenvalues ascending with
/// the matching unitary column basis.
pub(crate) fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let eig = m
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 50_000)
        .unwrap_or_else(|| m.clone().symmetric_eigen());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (vals, vecs)
}

// ---------------------------------------------------------------------------
// General complex eigenvalues: Hessenberg reduction + single-shift QR with
// Wilkinson and exceptional shifts.
// ---------------------------------------------------------------------------

struct Givens {
    c: Complex64,
    s: Complex64,
    trivial: bool,
}

impl Givens {
    /// Unitary G with G [x; y] = [r; 0].
    fn make(x: Complex64, y: Complex64) -> Self {
        let scale = x.norm() + y.norm();
        if scale == 0.0 || y.norm() == 0.0 {
            return Givens {
                c: ONE,
                s: ZERO,
                trivial: true,
            };
        }
        let xs = x / scale;
        let ys = y / scale;
        let r = (xs.norm_sqr() + ys.norm_sqr()).sqrt();
        Givens {
            c: xs / r,
            s: ys / r,
            trivial: false,
        }
    }

    /// Rows p and q of h <- G * h.
    fn rotate_rows(&self, h: &mut CMat, p: usize, q: usize) {
        if self.trivial {
            return;
        }
        let n = h.ncols();
        for j in 0..n {
            let a = h[(p, j)];
            let b = h[(q, j)];
            h[(p, j)] = self.c.conj() * a + self.s.conj() * b;
            h[(q, j)] = -self.s * a + self.c * b;
        }
    }

    /// Columns p and q of h <- h * G^H.
    fn rotate_cols(&self, h: &mut CMat, p: usize, q: usize) {
        if self.trivial {
            return;
        }
        let n = h.nrows();
        for i in 0..n {
            let a = h[(i, p)];
            let b = h[(i, q)];
            h[(i, p)] = self.c * a + self.s * b;
            h[(i, q)] = -self.s.conj() * a + self.c.conj() * b;
        }
    }
}

fn eig_2x2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let mid = (a + d) * 0.5;
    let disc = ((a - d) * 0.5).powu(2) + b * c;
    let root = disc.sqrt();
    (mid + root, mid - root)
}

fn qr_step(h: &mut CMat, lo: usize, hi: usize, shift: Complex64) {
    let mut x = h[(lo, lo)] - shift;
    let mut y = h[(lo + 1, lo)];
    for k in lo..hi {
        let g = Givens::make(x, y);
        g.rotate_rows(h, k, k + 1);
        g.rotate_cols(h, k, k + 1);
        if k + 2 <= hi {
            x = h[(k + 1, k)];
            y = h[(k + 2, k)];
        }
    }
}

/// Eigenvalues of a general complex square matrix, unordered.
pub(crate) fn general_eigenvalues(a: &CMat) -> Result<Vec<Complex64>, LinalgError> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "eigenvalues need a square matrix");
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![a[(0, 0)]]);
    }
    let anorm = max_abs(a);
    if anorm == 0.0 {
        return Ok(vec![ZERO; n]);
    }

    let mut h = a.clone().hessenberg().unpack_h();
    let mut eigs = vec![ZERO; n];
    let eps = f64::EPSILON;
    let mut hi = n - 1;
    let mut block_its = 0usize;
    let mut total_its = 0usize;
    let budget = 60 * n;

    loop {
        for i in 1..=hi {
            let mut tst = h[(i - 1, i - 1)].norm() + h[(i, i)].norm();
            if tst == 0.0 {
                tst = anorm;
            }
            if h[(i, i - 1)].norm() <= eps * tst {
                h[(i, i - 1)] = ZERO;
            }
        }

        // Deflate converged eigenvalues at the bottom of the window.
        if hi == 0 || h[(hi, hi - 1)] == ZERO {
            eigs[hi] = h[(hi, hi)];
            if hi == 0 {
                return Ok(eigs);
            }
            hi -= 1;
            block_its = 0;
            continue;
        }
        if hi == 1 || h[(hi - 1, hi - 2)] == ZERO {
            let (l1, l2) = eig_2x2(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            );
            eigs[hi - 1] = l1;
            eigs[hi] = l2;
            if hi == 1 {
                return Ok(eigs);
            }
            hi -= 2;
            block_its = 0;
            continue;
        }

        let mut lo = hi - 1;
        while lo > 0 && h[(lo, lo - 1)] != ZERO {
            lo -= 1;
        }

        let shift = if block_its > 0 && block_its % 10 == 0 {
            // Exceptional shift breaks the symmetric cycles that stall the
            // Wilkinson shift (nilpotent blocks, permutations).
            h[(hi, hi)] + cx(0.75 * h[(hi, hi - 1)].norm(), 0.0)
        } else {
            let (l1, l2) = eig_2x2(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            );
            let target = h[(hi, hi)];
            if (l1 - target).norm() <= (l2 - target).norm() {
                l1
            } else {
                l2
            }
        };

        qr_step(&mut h, lo, hi, shift);
        block_its += 1;
        total_its += 1;
        if total_its > budget {
            return Err(LinalgError::EigenConvergence);
        }
    }
}

// ---------------------------------------------------------------------------
// Normal matrices: unitary diagonalization through the commuting Hermitian
// pair H = (A + A*)/2, K = (A - A*)/(2i).
// ---------------------------------------------------------------------------

/// Unitary eigendecomposition of a normal matrix. Returns eigenvalues, the
/// unitary eigenvector basis and the residual max|AV - V diag(lambda)|.
pub(crate) fn normal_eigen(a: &CMat) -> (Vec<Complex64>, CMat, f64) {
    let n = a.nrows();
    let scale = max_abs(a);
    if n == 0 || scale == 0.0 {
        return (vec![ZERO; n], identity(n), 0.0);
    }
    let adj = a.adjoint();
    let herm = (a + &adj).scale(0.5);
    let skew = (a - &adj) * cx(0.0, -0.5);

    let (hvals, q) = hermitian_eigen(&herm);
    let gap = 1.0e-12 * scale;

    let mut lambdas = vec![ZERO; n];
    let mut vecs = CMat::zeros(n, n);
    let mut start = 0usize;
    while start < n {
        let mut end = start + 1;
        while end < n && hvals[end] - hvals[end - 1] <= gap {
            end += 1;
        }
        let cols = q.columns(start, end - start).into_owned();
        if end - start == 1 {
            vecs.set_column(start, &cols.column(0));
        } else {
            let compressed = cols.adjoint() * &skew * &cols;
            let compressed = (&compressed + compressed.adjoint()).scale(0.5);
            let (_, w) = hermitian_eigen(&compressed);
            let refined = &cols * &w;
            for j in 0..(end - start) {
                vecs.set_column(start + j, &refined.column(j));
            }
        }
        for j in start..end {
            let v = vecs.column(j);
            let av = a * &v;
            let mut rayleigh = ZERO;
            for i in 0..n {
                rayleigh += v[i].conj() * av[i];
            }
            lambdas[j] = rayleigh;
        }
        start = end;
    }

    let mut residual = 0.0f64;
    let av = a * &vecs;
    for j in 0..n {
        for i in 0..n {
            residual = residual.max((av[(i, j)] - vecs[(i, j)] * lambdas[j]).norm());
        }
    }
    (lambdas, vecs, residual)
}

// ---------------------------------------------------------------------------
// Scale-tracked determinants (Cauchy certificates underflow f64 at n = 64).
// ---------------------------------------------------------------------------

/// Complex value stored as mantissa * 2^exp2 with |mantissa| in [1, 2),
/// so products of many small or large factors never under- or overflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledComplex {
    pub mantissa: Complex64,
    pub exp2: i64,
}

impl ScaledComplex {
    pub fn zero() -> Self {
        ScaledComplex {
            mantissa: ZERO,
            exp2: 0,
        }
    }

    pub fn one() -> Self {
        ScaledComplex {
            mantissa: ONE,
            exp2: 0,
        }
    }

    pub fn from_complex(z: Complex64) -> Self {
        ScaledComplex {
            mantissa: z,
            exp2: 0,
        }
        .normalized()
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == ZERO
    }

    fn normalized(mut self) -> Self {
        let norm = self.mantissa.norm();
        if norm == 0.0 {
            self.exp2 = 0;
            return self;
        }
        let shift = norm.log2().floor() as i64;
        if shift != 0 {
            self.mantissa *= 2.0f64.powi(-shift as i32);
            self.exp2 += shift;
        }
        self
    }

    pub fn mul_complex(self, z: Complex64) -> Self {
        ScaledComplex {
            mantissa: self.mantissa * z,
            exp2: self.exp2,
        }
        .normalized()
    }

    pub fn div_complex(self, z: Complex64) -> Self {
        ScaledComplex {
            mantissa: self.mantissa / z,
            exp2: self.exp2,
        }
        .normalized()
    }

    pub fn negate(self) -> Self {
        ScaledComplex {
            mantissa: -self.mantissa,
            exp2: self.exp2,
        }
    }

    /// Best-effort plain f64 value; may under- or overflow.
    pub fn to_complex(&self) -> Complex64 {
        self.mantissa * 2.0f64.powi(self.exp2.clamp(-1400, 1400) as i32)
    }

    /// Relative difference |self - other| / max(|self|, |other|).
    pub fn rel_diff(&self, other: &ScaledComplex) -> f64 {
        if self.is_zero() && other.is_zero() {
            return 0.0;
        }
        if self.is_zero() || other.is_zero() {
            return 1.0;
        }
        let shift = other.exp2 - self.exp2;
        if shift.abs() > 64 {
            return 1.0;
        }
        let other_m = other.mantissa * 2.0f64.powi(shift as i32);
        (self.mantissa - other_m).norm() / self.mantissa.norm().max(other_m.norm())
    }
}

impl std::fmt::Display for ScaledComplex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "({}{:+}i)*2^{}",
            self.mantissa.re, self.mantissa.im, self.exp2
        )
    }
}

// Double-double ("compensated") arithmetic: an f64 pair carrying ~32
// significant digits. The Cauchy determinants certified by this crate
// cancel far past f64 precision during elimination, so the pivots are
// computed in this extended precision and only their product is rounded.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let v = s - a;
        let e = (a - (s - v)) + (b - v);
        Dd { hi: s, lo: e }
    }

    fn two_prod(a: f64, b: f64) -> Dd {
        let p = a * b;
        let e = a.mul_add(b, -p);
        Dd { hi: p, lo: e }
    }

    fn add(self, other: Dd) -> Dd {
        let s = Dd::two_sum(self.hi, other.hi);
        let lo = s.lo + self.lo + other.lo;
        let r = Dd::two_sum(s.hi, lo);
        Dd { hi: r.hi, lo: r.lo }
    }

    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    fn sub(self, other: Dd) -> Dd {
        self.add(other.neg())
    }

    fn mul(self, other: Dd) -> Dd {
        let p = Dd::two_prod(self.hi, other.hi);
        let lo = p.lo + self.hi * other.lo + self.lo * other.hi;
        let r = Dd::two_sum(p.hi, lo);
        Dd { hi: r.hi, lo: r.lo }
    }

    fn div(self, other: Dd) -> Dd {
        let q1 = self.hi / other.hi;
        let r = self.sub(other.mul(Dd::from_f64(q1)));
        let q2 = (r.hi + r.lo) / (other.hi + other.lo);
        let s = Dd::two_sum(q1, q2);
        Dd { hi: s.hi, lo: s.lo }
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct CDd {
    re: Dd,
    im: Dd,
}

impl CDd {
    fn from_complex(z: Complex64) -> CDd {
        CDd {
            re: Dd::from_f64(z.re),
            im: Dd::from_f64(z.im),
        }
    }

    fn to_complex(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    fn sub(self, other: CDd) -> CDd {
        CDd {
            re: self.re.sub(other.re),
            im: self.im.sub(other.im),
        }
    }

    fn mul(self, other: CDd) -> CDd {
        CDd {
            re: self.re.mul(other.re).sub(self.im.mul(other.im)),
            im: self.re.mul(other.im).add(self.im.mul(other.re)),
        }
    }

    fn div(self, other: CDd) -> CDd {
        let denom = other.re.mul(other.re).add(other.im.mul(other.im));
        let conj = CDd {
            re: other.re,
            im: other.im.neg(),
        };
        let num = self.mul(conj);
        CDd {
            re: num.re.div(denom),
            im: num.im.div(denom),
        }
    }

    fn norm_estimate(self) -> f64 {
        self.re.hi.hypot(self.im.hi)
    }
}

/// Determinant by partial-pivot elimination carried out in double-double
/// arithmetic, with the pivot product tracked in scaled form.
pub(crate) fn det_scaled(a: &CMat) -> ScaledComplex {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    if n == 0 {
        return ScaledComplex::one();
    }
    let mut m: Vec<Vec<CDd>> = (0..n)
        .map(|i| (0..n).map(|j| CDd::from_complex(a[(i, j)])).collect())
        .collect();
    let mut det = ScaledComplex::one();
    for col in 0..n {
        let mut piv = col;
        let mut best = m[col][col].norm_estimate();
        for row in (col + 1)..n {
            let v = m[row][col].norm_estimate();
            if v > best {
                best = v;
                piv = row;
            }
        }
        if best == 0.0 {
            return ScaledComplex::zero();
        }
        if piv != col {
            m.swap(piv, col);
            det = det.negate();
        }
        let pivot = m[col][col];
        det = det.mul_complex(pivot.to_complex());
        for row in (col + 1)..n {
            let factor = m[row][col].div(pivot);
            for j in (col + 1)..n {
                let upd = m[col][j].mul(factor);
                m[row][j] = m[row][j].sub(upd);
            }
            m[row][col] = CDd {
                re: Dd::ZERO,
                im: Dd::ZERO,
            };
        }
    }
    det
}

/// Solve a X = b for square a via LU; None when numerically singular.
pub(crate) fn lu_solve(a: &CMat, b: &CMat) -> Option<CMat> {
    a.clone().lu().solve(b)
}

// ---------------------------------------------------------------------------
// Orthonormal bases.
// ---------------------------------------------------------------------------

/// Twice-iterated Gram-Schmidt of `v` against the columns of `basis`.
fn project_out(basis: &CMat, used: usize, v: &mut nalgebra::DVector<Complex64>) {
    for _ in 0..2 {
        for j in 0..used {
            let col = basis.column(j);
            let mut coef = ZERO;
            for i in 0..v.len() {
                coef += col[i].conj() * v[i];
            }
            for i in 0..v.len() {
                let upd = col[i] * coef;
                v[i] -= upd;
            }
        }
    }
}

/// Extends `cols` orthonormal columns (n x k) to a full n x n unitary by
/// greedily appending the best-conditioned coordinate directions.
pub(crate) fn complete_unitary(cols: &CMat) -> CMat {
    let n = cols.nrows();
    let k = cols.ncols();
    let mut out = CMat::zeros(n, n);
    for j in 0..k {
        out.set_column(j, &cols.column(j));
    }
    let mut used = k;
    while used < n {
        let mut best: Option<(f64, nalgebra::DVector<Complex64>)> = None;
        for cand in 0..n {
            let mut v = nalgebra::DVector::from_fn(n, |i, _| if i == cand { ONE } else { ZERO });
            project_out(&out, used, &mut v);
            let norm = v.norm();
            if best.as_ref().is_none_or(|(b, _)| norm > *b) {
                best = Some((norm, v));
            }
        }
        let (norm, v) = best.expect("candidate set is never empty");
        assert!(
            norm > 1.0e-6,
            "unitary completion failed: input columns were not orthonormal"
        );
        out.set_column(used, &(v / cx(norm, 0.0)));
        used += 1;
    }
    out
}

/// Orthonormalizes nearly orthonormal columns in place (two MGS sweeps).
pub(crate) fn orthonormalize(cols: &CMat) -> CMat {
    let n = cols.nrows();
    let k = cols.ncols();
    let mut out = CMat::zeros(n, k);
    for j in 0..k {
        let mut v = cols.column(j).into_owned();
        project_out(&out, j, &mut v);
        let norm = v.norm();
        assert!(norm > 1.0e-8, "orthonormalize: column collapsed");
        out.set_column(j, &(v / cx(norm, 0.0)));
    }
    out
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    fn shift_matrix(n: usize) -> CMat {
        let mut j = CMat::zeros(n, n);
        for i in 1..n {
            j[(i, i - 1)] = ONE;
        }
        j
    }

    #[test]
    fn eigenvalues_of_exact_nilpotent_blocks_stay_near_zero() {
        for n in [2usize, 3, 4, 6, 8] {
            let j = shift_matrix(n);
            let eigs = general_eigenvalues(&j).expect("convergence");
            assert_eq!(eigs.len(), n);
            for e in &eigs {
                // Backward-stable accuracy for a defective eigenvalue is
                // eps^(1/n); allow a generous multiple of that.
                let bound = 50.0 * f64::EPSILON.powf(1.0 / n as f64);
                assert!(e.norm() < bound, "n={n}: |eig|={} bound={bound}", e.norm());
            }
        }
    }

    #[test]
    fn eigenvalues_of_cyclic_permutation_are_roots_of_unity() {
        for n in [3usize, 5, 8] {
            let mut p = shift_matrix(n);
            p[(0, n - 1)] = ONE;
            let mut eigs = general_eigenvalues(&p).expect("convergence");
            eigs.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
            for e in &eigs {
                assert!((e.norm() - 1.0).abs() < 1.0e-10);
            }
            let mut expected: Vec<Complex64> = (0..n)
                .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64))
                .collect();
            expected.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
            for (a, b) in eigs.iter().zip(&expected) {
                assert!((a - b).norm() < 1.0e-10, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn eigenvalue_sum_matches_trace_on_random_matrices() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in [2usize, 5, 13, 32, 64] {
            let m = CMat::from_fn(n, n, |_, _| {
                cx(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            });
            let eigs = general_eigenvalues(&m).expect("convergence");
            let sum: Complex64 = eigs.iter().sum();
            let trace: Complex64 = (0..n).map(|i| m[(i, i)]).sum();
            assert!((sum - trace).norm() < 1.0e-10 * n as f64, "n={n}");
        }
    }

    #[test]
    fn eigenvalues_of_triangular_matrix_match_diagonal() {
        let t = CMat::from_row_slice(
            3,
            3,
            &[
                cx(1.0, 1.0),
                cx(4.0, 0.0),
                cx(-2.0, 3.0),
                ZERO,
                cx(-2.0, 0.5),
                cx(9.0, 9.0),
                ZERO,
                ZERO,
                cx(0.25, -4.0),
            ],
        );
        let mut eigs = general_eigenvalues(&t).expect("convergence");
        eigs.sort_by(|a, b| a.re.total_cmp(&b.re));
        let mut expected = vec![cx(1.0, 1.0), cx(-2.0, 0.5), cx(0.25, -4.0)];
        expected.sort_by(|a, b| a.re.total_cmp(&b.re));
        for (a, b) in eigs.iter().zip(&expected) {
            assert!((a - b).norm() < 1.0e-12);
        }
    }

    #[test]
    fn normal_eigen_recovers_unitary_spectrum() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = 8;
        let u = random_unitary_for_test(n, &mut rng);
        let (lambdas, vecs, residual) = normal_eigen(&u);
        assert!(residual < 1.0e-12, "residual {residual}");
        assert!(identity_residual(&(vecs.adjoint() * &vecs)) < 1.0e-12);
        for l in &lambdas {
            assert!((l.norm() - 1.0).abs() < 1.0e-12);
        }
    }

    #[test]
    fn normal_eigen_separates_conjugate_pairs() {
        // diag(i, -i, 2): Hermitian part has a double eigenvalue at 0.
        let d = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
            cx(0.0, 1.0),
            cx(0.0, -1.0),
            cx(2.0, 0.0),
        ]));
        let (lambdas, _, residual) = normal_eigen(&d);
        assert!(residual < 1.0e-14);
        let mut sorted = lambdas.clone();
        sorted.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((sorted[0] - cx(0.0, -1.0)).norm() < 1.0e-14);
        assert!((sorted[1] - cx(2.0, 0.0)).norm() < 1.0e-14);
        assert!((sorted[2] - cx(0.0, 1.0)).norm() < 1.0e-14);
    }

    #[test]
    fn scaled_determinant_survives_extreme_magnitudes() {
        let n = 40;
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = cx(1.0e-12, 0.0);
        }
        let det = det_scaled(&m);
        // det = 1e-480, far below f64 range.
        assert!(!det.is_zero());
        let log10 = det.exp2 as f64 * 2.0f64.log10() + det.mantissa.norm().log10();
        assert!((log10 + 480.0).abs() < 1.0e-6, "log10 {log10}");
    }

    #[test]
    fn complete_unitary_extends_partial_basis() {
        let mut cols = CMat::zeros(4, 2);
        cols[(0, 0)] = ONE;
        cols[(2, 1)] = cx(0.0, 1.0);
        let u = complete_unitary(&cols);
        assert!(identity_residual(&(u.adjoint() * &u)) < 1.0e-12);
        assert_eq!(u.column(0)[0], ONE);
    }

    pub(crate) fn random_unitary_for_test(n: usize, rng: &mut rand_chacha::ChaCha8Rng) -> CMat {
        use rand::Rng;
        let g = CMat::from_fn(n, n, |_, _| {
            cx(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let qr = g.qr();
        let q = qr.q();
        let r = qr.unpack_r();
        // Fix column phases so the factor is unique.
        let mut out = q.clone();
        for j in 0..n {
            let d = r[(j, j)];
            let phase = if d.norm() == 0.0 { ONE } else { d / d.norm() };
            for i in 0..n {
                out[(i, j)] *= phase;
            }
        }
        out
    }
}
