//! Weyr and Segre characteristics, the max metric on characteristic tables
//! with its geodesic step, the rank-k reachability predicate, and rank-1
//! spectrum assignment for nonderogatory matrices.
//!
//! Extraction from a matrix runs a staircase iteration per eigenvalue
//! cluster: kernel dimensions of the shifted matrix are read off one SVD at
//! a time while deflating onto the complement of the kernel, which avoids
//! powering the matrix. Clusters come from a single-linkage dendrogram cut
//! top down: a candidate cluster is accepted exactly when the staircase
//! total at its center reproduces its eigenvalue count. That recovers the
//! Jordan structure of defective matrices whose computed eigenvalues
//! scatter far beyond merge_tol (an exact nilpotent block of size q
//! scatters them at machine-epsilon^(1/q)).

use crate::linalg::{self, CMat, ONE, ZERO};
use crate::mats::{ComplexMatrix, ParseError};
use crate::multiset::ComplexMultiset;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WeyrError {
    #[error("matrix must be square, got {0}x{1}")]
    NotSquare(usize, usize),
    #[error("eigenvalue clusters are ill-conditioned: separation {separation:e} below {threshold:e}")]
    IllConditioned { separation: f64, threshold: f64 },
    #[error("kernel staircase is inconsistent with the spectrum: table size {got} for a {expected}x{expected} matrix")]
    InconsistentTable { expected: usize, got: usize },
    #[error("characteristic row must be nonincreasing and positive")]
    InvalidRow,
    #[error("eigenvalues closer than merge_tol cannot share a table")]
    DuplicateEigenvalue,
    #[error("geodesic step needs distance >= 2, got {0}")]
    DistanceTooSmall(usize),
    #[error("matrix is derogatory: an eigenvalue has geometric multiplicity > 1")]
    Derogatory,
    #[error("no numerically cyclic vector found in {0} attempts")]
    CyclicVectorFailure(usize),
    #[error("target multiset has {target} values for a {matrix}x{matrix} matrix")]
    TargetSizeMismatch { matrix: usize, target: usize },
    #[error("eigenvalue iteration failed to converge")]
    EigenConvergence,
}

fn key_order(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// The function (i, lambda) -> eta_i(lambda): eta_i counts the
/// lambda-Jordan blocks of size >= i. Rows are nonincreasing and the table
/// total is the matrix size.
#[derive(Debug, Clone, PartialEq)]
pub struct WeyrChar {
    rows: Vec<(Complex64, Vec<usize>)>,
    merge_tol: f64,
}

/// Per eigenvalue, the nonincreasing list of Jordan block sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct SegreChar {
    rows: Vec<(Complex64, Vec<usize>)>,
    merge_tol: f64,
}

fn validate_rows(rows: &[(Complex64, Vec<usize>)], merge_tol: f64) -> Result<(), WeyrError> {
    for (_, row) in rows {
        if row.is_empty() || row.iter().any(|&e| e == 0) {
            return Err(WeyrError::InvalidRow);
        }
        if row.windows(2).any(|w| w[0] < w[1]) {
            return Err(WeyrError::InvalidRow);
        }
    }
    for i in 0..rows.len() {
        for j in (i + 1)..rows.len() {
            if (rows[i].0 - rows[j].0).norm() <= merge_tol {
                return Err(WeyrError::DuplicateEigenvalue);
            }
        }
    }
    Ok(())
}

impl WeyrChar {
    pub fn from_rows(rows: &[(Complex64, Vec<usize>)], merge_tol: f64) -> Result<Self, WeyrError> {
        validate_rows(rows, merge_tol)?;
        let mut rows = rows.to_vec();
        rows.sort_by(|a, b| key_order(&a.0, &b.0));
        Ok(WeyrChar { rows, merge_tol })
    }

    /// Table with a single real eigenvalue, for tests and hand-built
    /// instances.
    pub fn single(lambda: f64, row: &[usize], merge_tol: f64) -> Self {
        Self::from_rows(&[(Complex64::new(lambda, 0.0), row.to_vec())], merge_tol)
            .expect("single row must be valid")
    }

    /// Sum of all table entries; the size of the underlying matrix.
    pub fn size(&self) -> usize {
        self.rows.iter().map(|(_, r)| r.iter().sum::<usize>()).sum()
    }

    pub fn rows(&self) -> &[(Complex64, Vec<usize>)] {
        &self.rows
    }

    pub fn merge_tol(&self) -> f64 {
        self.merge_tol
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.rows.iter().map(|&(l, _)| l).collect()
    }

    /// eta_i(lambda) with lambda matched within merge_tol; 0 when absent.
    pub fn eta(&self, lambda: Complex64, i: usize) -> usize {
        assert!(i >= 1, "weyr indices start at 1");
        self.rows
            .iter()
            .find(|(l, _)| (l - lambda).norm() <= self.merge_tol)
            .and_then(|(_, row)| row.get(i - 1).copied())
            .unwrap_or(0)
    }
}

impl SegreChar {
    pub fn from_rows(rows: &[(Complex64, Vec<usize>)], merge_tol: f64) -> Result<Self, WeyrError> {
        validate_rows(rows, merge_tol)?;
        let mut rows = rows.to_vec();
        rows.sort_by(|a, b| key_order(&a.0, &b.0));
        Ok(SegreChar { rows, merge_tol })
    }

    pub fn size(&self) -> usize {
        self.rows.iter().map(|(_, r)| r.iter().sum::<usize>()).sum()
    }

    pub fn rows(&self) -> &[(Complex64, Vec<usize>)] {
        &self.rows
    }

    pub fn merge_tol(&self) -> f64 {
        self.merge_tol
    }
}

/// Conjugate (Ferrers transpose) of a nonincreasing partition.
fn conjugate_partition(row: &[usize]) -> Vec<usize> {
    let max = row.first().copied().unwrap_or(0);
    (1..=max)
        .map(|j| row.iter().filter(|&&q| q >= j).count())
        .collect()
}

pub fn weyr_to_segre(w: &WeyrChar) -> SegreChar {
    let rows: Vec<(Complex64, Vec<usize>)> = w
        .rows
        .iter()
        .map(|(l, row)| (*l, conjugate_partition(row)))
        .collect();
    SegreChar {
        rows,
        merge_tol: w.merge_tol,
    }
}

pub fn segre_to_weyr(s: &SegreChar) -> WeyrChar {
    let rows: Vec<(Complex64, Vec<usize>)> = s
        .rows
        .iter()
        .map(|(l, row)| (*l, conjugate_partition(row)))
        .collect();
    WeyrChar {
        rows,
        merge_tol: s.merge_tol,
    }
}

// ---------------------------------------------------------------------------
// Extraction from a matrix.
// ---------------------------------------------------------------------------

/// Kernel staircase of A - center*E: returns the Weyr row
/// [eta_1, eta_2, ...] at `center`, where eta_m = dim Ker(A - center E)^m
/// - dim Ker(A - center E)^(m-1), computed by deflating onto the
/// complement of the kernel instead of powering the matrix.
fn staircase_row(a: &CMat, center: Complex64, tol: f64) -> Vec<usize> {
    let n = a.nrows();
    let mut current = a - CMat::identity(n, n) * center;
    let sigma_max = linalg::singular_values(&current).first().copied().unwrap_or(0.0);
    if sigma_max == 0.0 {
        return if n == 0 { Vec::new() } else { vec![n] };
    }
    let threshold = tol * sigma_max;
    let mut row = Vec::new();
    loop {
        let size = current.nrows();
        if size == 0 {
            break;
        }
        let Ok((_, sv, vt)) = linalg::svd_full(&current) else {
            break;
        };
        let kernel_dim = sv.iter().filter(|&&s| s <= threshold).count();
        if kernel_dim == 0 {
            break;
        }
        row.push(kernel_dim);
        if kernel_dim == size || row.len() >= n {
            break;
        }
        // Compression onto the complement of the kernel: right singular
        // vectors with large sigma.
        let keep = size - kernel_dim;
        let v = vt.adjoint();
        let basis = v.columns(0, keep).into_owned();
        current = basis.adjoint() * &current * &basis;
    }
    row
}

struct DendroNode {
    members: Vec<usize>,
    height: f64,
    children: Option<(usize, usize)>,
}

fn single_linkage_tree(points: &[Complex64]) -> (Vec<DendroNode>, usize) {
    let n = points.len();
    let mut nodes: Vec<DendroNode> = (0..n)
        .map(|i| DendroNode {
            members: vec![i],
            height: 0.0,
            children: None,
        })
        .collect();
    let mut active: Vec<usize> = (0..n).collect();
    while active.len() > 1 {
        let mut best = (f64::INFINITY, 0usize, 1usize);
        for ai in 0..active.len() {
            for bi in (ai + 1)..active.len() {
                let mut dist = f64::INFINITY;
                for &p in &nodes[active[ai]].members {
                    for &q in &nodes[active[bi]].members {
                        dist = dist.min((points[p] - points[q]).norm());
                    }
                }
                if dist < best.0 {
                    best = (dist, ai, bi);
                }
            }
        }
        let (height, ai, bi) = best;
        let right = active.remove(bi);
        let left = active.remove(ai);
        let mut members = nodes[left].members.clone();
        members.extend(nodes[right].members.iter().copied());
        members.sort_unstable();
        nodes.push(DendroNode {
            members,
            height,
            children: Some((left, right)),
        });
        active.push(nodes.len() - 1);
    }
    let root = active[0];
    (nodes, root)
}

fn cluster_center(points: &[Complex64], members: &[usize]) -> Complex64 {
    let sum: Complex64 = members.iter().map(|&i| points[i]).sum();
    sum / Complex64::new(members.len() as f64, 0.0)
}

fn cut_dendrogram(
    a: &CMat,
    points: &[Complex64],
    nodes: &[DendroNode],
    node: usize,
    merge_tol: f64,
    tol: f64,
    out: &mut Vec<(Complex64, Vec<usize>)>,
) {
    let center = cluster_center(points, &nodes[node].members);
    let count = nodes[node].members.len();
    if nodes[node].height <= merge_tol || nodes[node].children.is_none() {
        out.push((center, staircase_row(a, center, tol)));
        return;
    }
    let row = staircase_row(a, center, tol);
    if row.iter().sum::<usize>() == count {
        out.push((center, row));
        return;
    }
    let (left, right) = nodes[node].children.expect("checked above");
    cut_dendrogram(a, points, nodes, left, merge_tol, tol, out);
    cut_dendrogram(a, points, nodes, right, merge_tol, tol, out);
}

/// Weyr characteristic of a matrix. Eigenvalues are clustered by single
/// linkage at `merge_rel * max|lambda|`, coarsened wherever the kernel
/// staircase confirms a shared Jordan structure.
pub fn weyr_from_matrix(a: &ComplexMatrix, tol: f64, merge_rel: f64) -> Result<WeyrChar, WeyrError> {
    if !a.is_square() {
        return Err(WeyrError::NotSquare(a.rows(), a.cols()));
    }
    let n = a.rows();
    let eigs = linalg::general_eigenvalues(a.raw()).map_err(|_| WeyrError::EigenConvergence)?;
    let eig_scale = eigs.iter().fold(0.0f64, |m, e| m.max(e.norm()));
    let merge_tol = merge_rel * eig_scale;

    if eig_scale == 0.0 {
        let row = staircase_row(a.raw(), ZERO, tol);
        let total: usize = row.iter().sum();
        if total != n {
            return Err(WeyrError::InconsistentTable { expected: n, got: total });
        }
        return Ok(WeyrChar {
            rows: vec![(ZERO, row)],
            merge_tol,
        });
    }

    let (nodes, root) = single_linkage_tree(&eigs);
    let mut clusters: Vec<(Complex64, Vec<usize>)> = Vec::new();
    cut_dendrogram(a.raw(), &eigs, &nodes, root, merge_tol, tol, &mut clusters);

    let total: usize = clusters.iter().map(|(_, r)| r.iter().sum::<usize>()).sum();
    if total != n {
        return Err(WeyrError::InconsistentTable { expected: n, got: total });
    }
    for i in 0..clusters.len() {
        for j in (i + 1)..clusters.len() {
            let separation = (clusters[i].0 - clusters[j].0).norm();
            if separation < 10.0 * merge_tol {
                return Err(WeyrError::IllConditioned {
                    separation,
                    threshold: 10.0 * merge_tol,
                });
            }
        }
    }
    clusters.sort_by(|a, b| key_order(&a.0, &b.0));
    for (_, row) in &clusters {
        if row.is_empty() || row.windows(2).any(|w| w[0] < w[1]) {
            return Err(WeyrError::InvalidRow);
        }
    }
    Ok(WeyrChar {
        rows: clusters,
        merge_tol,
    })
}

// ---------------------------------------------------------------------------
// The max metric and its geodesics.
// ---------------------------------------------------------------------------

/// Eigenvalue rows of two tables aligned within their merge tolerances;
/// missing rows are empty.
fn aligned_rows(x: &WeyrChar, y: &WeyrChar) -> Vec<(Complex64, Vec<usize>, Vec<usize>)> {
    let tol = x.merge_tol.max(y.merge_tol);
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, (lx, _)) in x.rows.iter().enumerate() {
        for (j, (ly, _)) in y.rows.iter().enumerate() {
            let d = (lx - ly).norm();
            if d <= tol {
                pairs.push((d, i, j));
            }
        }
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)).then(p.2.cmp(&q.2)));
    let mut used_x = vec![false; x.rows.len()];
    let mut used_y = vec![false; y.rows.len()];
    let mut out = Vec::new();
    for (_, i, j) in pairs {
        if used_x[i] || used_y[j] {
            continue;
        }
        used_x[i] = true;
        used_y[j] = true;
        out.push((x.rows[i].0, x.rows[i].1.clone(), y.rows[j].1.clone()));
    }
    for (i, (l, row)) in x.rows.iter().enumerate() {
        if !used_x[i] {
            out.push((*l, row.clone(), Vec::new()));
        }
    }
    for (j, (l, row)) in y.rows.iter().enumerate() {
        if !used_y[j] {
            out.push((*l, Vec::new(), row.clone()));
        }
    }
    out.sort_by(|a, b| key_order(&a.0, &b.0));
    out
}

/// d(eta, mu) = max over (i, lambda) of |eta_i(lambda) - mu_i(lambda)|.
/// Well defined across different table sizes.
pub fn weyr_distance(x: &WeyrChar, y: &WeyrChar) -> usize {
    let mut best = 0i64;
    for (_, rx, ry) in aligned_rows(x, y) {
        let len = rx.len().max(ry.len());
        for i in 0..len {
            let ex = rx.get(i).copied().unwrap_or(0) as i64;
            let ey = ry.get(i).copied().unwrap_or(0) as i64;
            best = best.max((ex - ey).abs());
        }
    }
    best as usize
}

/// One geodesic step between tables at distance k >= 2: subtract 1 on the
/// (i, lambda) positions where the difference is +k and add 1 where it is
/// -k, after swapping roles so the subtracted set is the larger one. The
/// result is adjacent to one endpoint and at distance k-1 from the other.
pub fn weyr_geodesic_step(x: &WeyrChar, y: &WeyrChar) -> Result<WeyrChar, WeyrError> {
    let k = weyr_distance(x, y) as i64;
    if k < 2 {
        return Err(WeyrError::DistanceTooSmall(k as usize));
    }
    let aligned = aligned_rows(x, y);
    let mut plus = 0usize;
    let mut minus = 0usize;
    for (_, rx, ry) in &aligned {
        let len = rx.len().max(ry.len());
        for i in 0..len {
            let d = rx.get(i).copied().unwrap_or(0) as i64 - ry.get(i).copied().unwrap_or(0) as i64;
            if d == k {
                plus += 1;
            } else if d == -k {
                minus += 1;
            }
        }
    }
    let from_x = plus >= minus;

    let mut rows: Vec<(Complex64, Vec<usize>)> = Vec::new();
    for (l, rx, ry) in &aligned {
        let (ra, rb) = if from_x { (rx, ry) } else { (ry, rx) };
        let len = ra.len().max(rb.len());
        let mut row: Vec<usize> = Vec::with_capacity(len);
        for i in 0..len {
            let ea = ra.get(i).copied().unwrap_or(0) as i64;
            let eb = rb.get(i).copied().unwrap_or(0) as i64;
            let v = if ea - eb == k {
                ea - 1
            } else if ea - eb == -k {
                ea + 1
            } else {
                ea
            };
            row.push(v as usize);
        }
        while row.last() == Some(&0) {
            row.pop();
        }
        if !row.is_empty() {
            rows.push((*l, row.clone()));
        }
    }
    let merge_tol = x.merge_tol.max(y.merge_tol);
    let nu = WeyrChar::from_rows(&rows, merge_tol)?;
    let da = weyr_distance(if from_x { x } else { y }, &nu);
    let db = weyr_distance(&nu, if from_x { y } else { x });
    debug_assert_eq!(da, 1, "geodesic step must be adjacent to one endpoint");
    debug_assert_eq!(db as i64, k - 1, "geodesic step must reduce the distance by 1");
    Ok(nu)
}

/// Geodesic chain x = C_0, ..., C_k = y with successive distance 1.
pub fn weyr_geodesic_chain(x: &WeyrChar, y: &WeyrChar) -> Result<Vec<WeyrChar>, WeyrError> {
    let mut left: Vec<WeyrChar> = vec![x.clone()];
    let mut right: Vec<WeyrChar> = vec![y.clone()];
    loop {
        let l = left.last().expect("nonempty");
        let r = right.last().expect("nonempty");
        match weyr_distance(l, r) {
            0 => {
                right.pop();
                break;
            }
            1 => break,
            _ => {
                let nu = weyr_geodesic_step(l, r)?;
                if weyr_distance(l, &nu) == 1 {
                    left.push(nu);
                } else {
                    right.push(nu);
                }
            }
        }
    }
    right.reverse();
    left.extend(right);
    Ok(left)
}

/// Embedding of a size-m table into size n > m that is never farther from
/// any size-n table than the original: a tail of 1's is appended below the
/// last nonzero row of the eigenvalue with maximal eta_1 (ties broken by
/// lexicographic (re, im)).
pub fn weyr_pad(x: &WeyrChar, n: usize) -> WeyrChar {
    let m = x.size();
    assert!(n >= m, "padding cannot shrink a table");
    if n == m {
        return x.clone();
    }
    let mut rows = x.rows.clone();
    if rows.is_empty() {
        return WeyrChar {
            rows: vec![(ZERO, vec![1; n])],
            merge_tol: x.merge_tol,
        };
    }
    let mut best = 0usize;
    for i in 1..rows.len() {
        if rows[i].1[0] > rows[best].1[0] {
            best = i;
        }
    }
    rows[best].1.extend(std::iter::repeat(1).take(n - m));
    WeyrChar {
        rows,
        merge_tol: x.merge_tol,
    }
}

/// Rank-k reachability of a Weyr characteristic: true iff the target table
/// has the same total size and every entry moves by at most k.
pub fn thompson_reachable(source: &WeyrChar, target: &WeyrChar, k: usize) -> bool {
    source.size() == target.size() && weyr_distance(source, target) <= k
}

/// The paired divisibility chains on Segre characteristics:
/// q_1(B) >= q_2(A) >= q_3(B) >= ... and q_1(A) >= q_2(B) >= q_3(A) >= ...
/// per eigenvalue. Equivalent to the Weyr tables being at distance <= 1.
pub fn segre_interlace_check(sa: &SegreChar, sb: &SegreChar) -> bool {
    assert_eq!(sa.size(), sb.size(), "tables must have equal size");
    let wa = segre_to_weyr(sa);
    let wb = segre_to_weyr(sb);
    for (_, ra, rb) in aligned_rows(&wa, &wb) {
        let qa = conjugate_partition(&ra);
        let qb = conjugate_partition(&rb);
        let len = qa.len().max(qb.len()) + 1;
        let get = |row: &[usize], i: usize| row.get(i).copied().unwrap_or(0);
        for i in 0..len {
            // Chain 1 alternates B, A, B, ...; chain 2 alternates A, B, A, ...
            let c1_here = if i % 2 == 0 { get(&qb, i) } else { get(&qa, i) };
            let c1_next = if (i + 1) % 2 == 0 { get(&qb, i + 1) } else { get(&qa, i + 1) };
            if c1_here < c1_next {
                return false;
            }
            let c2_here = if i % 2 == 0 { get(&qa, i) } else { get(&qb, i) };
            let c2_next = if (i + 1) % 2 == 0 { get(&qa, i + 1) } else { get(&qb, i + 1) };
            if c2_here < c2_next {
                return false;
            }
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Rank-1 spectrum assignment for nonderogatory matrices.
// ---------------------------------------------------------------------------

/// Result of `rank1_assign_spectrum`: the perturbed matrix plus the
/// condition estimate of the Krylov similarity used to build it.
#[derive(Debug, Clone)]
pub struct SpectrumAssignment {
    pub matrix: ComplexMatrix,
    pub krylov_condition: f64,
    pub ill_conditioned: bool,
}

const CYCLIC_ATTEMPTS: usize = 8;
const CYCLIC_SEED: u64 = 0x72616e6b;
const KRYLOV_CONDITION_LIMIT: f64 = 1.0e12;

/// Monic coefficients [c_0, ..., c_{n-1}] of prod (x - root); the leading
/// coefficient 1 is implicit.
fn monic_from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    // coeffs[i] is the degree-(len-1-i) coefficient while building.
    let mut coeffs = vec![ONE];
    for &r in roots {
        coeffs.push(ZERO);
        for i in (1..coeffs.len()).rev() {
            let shifted = coeffs[i - 1] * (-r);
            coeffs[i] = coeffs[i] + shifted;
        }
    }
    coeffs.reverse();
    coeffs.pop();
    coeffs
}

/// A rank-1 perturbation of a nonderogatory matrix realizing an arbitrary
/// target spectrum: conjugate to companion form through a Krylov basis and
/// swap the characteristic-polynomial column.
pub fn rank1_assign_spectrum(
    a: &ComplexMatrix,
    target: &ComplexMultiset,
    tol: f64,
) -> Result<SpectrumAssignment, WeyrError> {
    if !a.is_square() {
        return Err(WeyrError::NotSquare(a.rows(), a.cols()));
    }
    let n = a.rows();
    if target.len() != n {
        return Err(WeyrError::TargetSizeMismatch {
            matrix: n,
            target: target.len(),
        });
    }
    let table = weyr_from_matrix(a, tol, crate::DEFAULT_MERGE_REL)?;
    if table.rows().iter().any(|(_, row)| row[0] != 1) {
        return Err(WeyrError::Derogatory);
    }

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(CYCLIC_SEED);
    let mut best: Option<(f64, CMat)> = None;
    for _ in 0..CYCLIC_ATTEMPTS {
        let mut v = nalgebra::DVector::from_fn(n, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let norm = v.norm();
        v /= Complex64::new(norm, 0.0);
        let mut krylov = CMat::zeros(n, n);
        let mut col = v.clone();
        for j in 0..n {
            krylov.set_column(j, &col);
            if j + 1 < n {
                col = a.raw() * &col;
            }
        }
        let sv = linalg::singular_values(&krylov);
        let (top, bottom) = (sv[0], sv[n - 1]);
        if bottom <= f64::EPSILON * top * n as f64 {
            continue;
        }
        let cond = top / bottom;
        if best.as_ref().is_none_or(|(c, _)| cond < *c) {
            best = Some((cond, krylov));
        }
    }
    let (cond, krylov) = best.ok_or(WeyrError::CyclicVectorFailure(CYCLIC_ATTEMPTS))?;

    // Companion last column of A in the Krylov basis: solve T w = A^n v.
    let v0 = krylov.column(0).into_owned();
    let mut an_v = v0;
    for _ in 0..n {
        an_v = a.raw() * an_v;
    }
    let rhs = CMat::from_fn(n, 1, |i, _| an_v[i]);
    let w = linalg::lu_solve(&krylov, &rhs).ok_or(WeyrError::CyclicVectorFailure(CYCLIC_ATTEMPTS))?;

    let target_coeffs = monic_from_roots(&target.expanded());
    let w_new = CMat::from_fn(n, 1, |i, _| -target_coeffs[i]);

    let delta = &w_new - &w;
    let delta_scale = linalg::max_abs(&delta);
    let w_scale = linalg::max_abs(&w).max(1.0);
    if delta_scale <= 1.0e-13 * w_scale {
        // Matching characteristic polynomial: the rank-0 answer is A itself.
        return Ok(SpectrumAssignment {
            matrix: a.clone(),
            krylov_condition: cond,
            ill_conditioned: cond > KRYLOV_CONDITION_LIMIT,
        });
    }

    // A' = A + (T delta) (last row of T^{-1}); the perturbation is exactly
    // rank 1.
    let u = &krylov * &delta;
    let e_last = CMat::from_fn(n, 1, |i, _| if i == n - 1 { ONE } else { ZERO });
    let r = linalg::lu_solve(&krylov.transpose(), &e_last)
        .ok_or(WeyrError::CyclicVectorFailure(CYCLIC_ATTEMPTS))?;
    let perturbed = a.raw() + &u * r.transpose();
    Ok(SpectrumAssignment {
        matrix: ComplexMatrix::from_raw(perturbed),
        krylov_condition: cond,
        ill_conditioned: cond > KRYLOV_CONDITION_LIMIT,
    })
}

// ---------------------------------------------------------------------------
// Text format: one line per table entry, "re im i eta".
// ---------------------------------------------------------------------------

pub fn parse_weyr(text: &str, merge_tol: f64) -> Result<WeyrChar, ParseError> {
    let mut raw: Vec<(Complex64, usize, usize)> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let line_no = idx + 1;
        let malformed = ParseError::Malformed { line: line_no, expected: "line `re im i eta`" };
        let mut parts = line.split_whitespace();
        let re: f64 = parts.next().and_then(|s| s.parse().ok()).ok_or(malformed.clone())?;
        let im: f64 = parts.next().and_then(|s| s.parse().ok()).ok_or(malformed.clone())?;
        let i: usize = parts.next().and_then(|s| s.parse().ok()).ok_or(malformed.clone())?;
        let eta: usize = parts.next().and_then(|s| s.parse().ok()).ok_or(malformed.clone())?;
        if parts.next().is_some() || i == 0 || eta == 0 {
            return Err(malformed);
        }
        if !re.is_finite() || !im.is_finite() {
            return Err(ParseError::NonFinite { line: line_no });
        }
        raw.push((Complex64::new(re, im), i, eta));
    }
    let mut grouped: Vec<(Complex64, Vec<(usize, usize)>)> = Vec::new();
    for (l, i, eta) in raw {
        match grouped.iter_mut().find(|(g, _)| (*g - l).norm() == 0.0) {
            Some((_, list)) => list.push((i, eta)),
            None => grouped.push((l, vec![(i, eta)])),
        }
    }
    let mut rows: Vec<(Complex64, Vec<usize>)> = Vec::new();
    for (l, mut list) in grouped {
        list.sort_by_key(|&(i, _)| i);
        let mut row = Vec::with_capacity(list.len());
        for (pos, &(i, eta)) in list.iter().enumerate() {
            if i != pos + 1 {
                return Err(ParseError::Malformed { line: 1, expected: "indices 1..k per eigenvalue" });
            }
            row.push(eta);
        }
        rows.push((l, row));
    }
    WeyrChar::from_rows(&rows, merge_tol)
        .map_err(|_| ParseError::Malformed { line: 1, expected: "nonincreasing rows and separated eigenvalues" })
}

pub fn format_weyr(w: &WeyrChar) -> String {
    let mut out = String::new();
    for (l, row) in w.rows() {
        for (i, &eta) in row.iter().enumerate() {
            out.push_str(&format!("{} {} {} {}\n", l.re, l.im, i + 1, eta));
        }
    }
    out
}

/// Ferrers diagram of one eigenvalue's Jordan structure, one row of dots
/// per Segre entry (so the columns count the Weyr numbers).
pub fn ferrers_lines(segre_row: &[usize]) -> Vec<String> {
    segre_row
        .iter()
        .map(|&q| {
            let mut line = String::new();
            for i in 0..q {
                if i > 0 {
                    line.push(' ');
                }
                line.push('*');
            }
            line
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mats::{arithmetic_distance, numeric_rank};

    const TOL: f64 = 1.0e-9;
    const MERGE_REL: f64 = 1.0e-8;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn jordan_block(n: usize, lambda: f64) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |i, j| {
            if i == j {
                c(lambda, 0.0)
            } else if i == j + 1 {
                c(1.0, 0.0)
            } else {
                c(0.0, 0.0)
            }
        })
    }

    fn nilpotent_sum(blocks: &[usize]) -> ComplexMatrix {
        let n: usize = blocks.iter().sum();
        let mut entries = vec![c(0.0, 0.0); n * n];
        let mut offset = 0;
        for &b in blocks {
            for i in 1..b {
                entries[(offset + i) * n + (offset + i - 1)] = c(1.0, 0.0);
            }
            offset += b;
        }
        ComplexMatrix::from_row_major(n, n, &entries)
    }

    #[test]
    fn weyr_of_zero_matrix() {
        let w = weyr_from_matrix(&ComplexMatrix::zeros(3, 3), TOL, MERGE_REL).unwrap();
        assert_eq!(w.rows().len(), 1);
        assert_eq!(w.rows()[0].1, vec![3]);
        assert_eq!(w.size(), 3);
    }

    #[test]
    fn weyr_of_exact_jordan_blocks() {
        let w = weyr_from_matrix(&jordan_block(3, 0.0), TOL, MERGE_REL).unwrap();
        assert_eq!(w.rows().len(), 1);
        assert!(w.rows()[0].0.norm() < 1.0e-6);
        assert_eq!(w.rows()[0].1, vec![1, 1, 1]);

        let w = weyr_from_matrix(&nilpotent_sum(&[2, 1]), TOL, MERGE_REL).unwrap();
        assert_eq!(w.rows()[0].1, vec![2, 1]);

        let w = weyr_from_matrix(&jordan_block(4, 2.5), TOL, MERGE_REL).unwrap();
        assert_eq!(w.rows().len(), 1);
        assert!((w.rows()[0].0 - c(2.5, 0.0)).norm() < 1.0e-4);
        assert_eq!(w.rows()[0].1, vec![1, 1, 1, 1]);
    }

    #[test]
    fn weyr_of_distinct_diagonal() {
        let a = ComplexMatrix::from_real_diagonal(&[1.0, 2.0, 3.0]);
        let w = weyr_from_matrix(&a, TOL, MERGE_REL).unwrap();
        assert_eq!(w.rows().len(), 3);
        for (_, row) in w.rows() {
            assert_eq!(row, &vec![1]);
        }
    }

    #[test]
    fn weyr_is_similarity_invariant() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let a = nilpotent_sum(&[2, 2]);
        let n = a.rows();
        let u = ComplexMatrix::from_raw(crate::linalg::tests::random_unitary_for_test(n, &mut rng));
        let sim = &(&u * &a) * &u.adjoint();
        let w = weyr_from_matrix(&sim, TOL, MERGE_REL).unwrap();
        assert_eq!(w.rows().len(), 1);
        assert_eq!(w.rows()[0].1, vec![2, 2]);
    }

    #[test]
    fn conjugation_round_trips() {
        let w = WeyrChar::single(0.0, &[3], 1.0e-8);
        let s = weyr_to_segre(&w);
        assert_eq!(s.rows()[0].1, vec![1, 1, 1]);
        assert_eq!(segre_to_weyr(&s), w);

        let w = WeyrChar::single(0.0, &[1, 1, 1], 1.0e-8);
        assert_eq!(weyr_to_segre(&w).rows()[0].1, vec![3]);

        let w = WeyrChar::single(0.0, &[2, 1], 1.0e-8);
        assert_eq!(weyr_to_segre(&w).rows()[0].1, vec![2, 1]);
    }

    #[test]
    fn distance_examples() {
        let w = WeyrChar::single(0.0, &[2, 1], 1.0e-8);
        assert_eq!(weyr_distance(&w, &w), 0);

        for n in [2usize, 4, 7] {
            let block = WeyrChar::single(0.0, &vec![1; n], 1.0e-8);
            let zero = WeyrChar::single(0.0, &[n], 1.0e-8);
            assert_eq!(weyr_distance(&block, &zero), n - 1);
        }

        let x = WeyrChar::single(0.0, &[2, 1], 1.0e-8);
        let y = WeyrChar::single(1.0, &[3], 1.0e-8);
        assert_eq!(weyr_distance(&x, &y), 3);
    }

    #[test]
    fn geodesic_step_between_partition_extremes() {
        let x = WeyrChar::single(0.0, &[1, 1, 1], 1.0e-8);
        let y = WeyrChar::single(0.0, &[3], 1.0e-8);
        assert_eq!(weyr_distance(&x, &y), 2);
        let nu = weyr_geodesic_step(&x, &y).unwrap();
        assert_eq!(weyr_distance(&x, &nu), 1);
        assert_eq!(weyr_distance(&nu, &y), 1);

        let adjacent = WeyrChar::single(0.0, &[2, 1], 1.0e-8);
        assert!(matches!(
            weyr_geodesic_step(&x, &adjacent),
            Err(WeyrError::DistanceTooSmall(1))
        ));
    }

    #[test]
    fn geodesic_chain_has_unit_steps() {
        let x = WeyrChar::single(0.0, &[1, 1, 1, 1, 1], 1.0e-8);
        let y = WeyrChar::single(2.0, &[4, 1], 1.0e-8);
        let k = weyr_distance(&x, &y);
        let chain = weyr_geodesic_chain(&x, &y).unwrap();
        assert_eq!(chain.len(), k + 1);
        for pair in chain.windows(2) {
            assert_eq!(weyr_distance(&pair[0], &pair[1]), 1);
        }
        assert_eq!(chain[0], x);
        assert_eq!(chain[chain.len() - 1], y);
    }

    #[test]
    fn padding_examples() {
        let mu = WeyrChar::single(0.0, &[1], 1.0e-8);
        assert_eq!(weyr_pad(&mu, 3).rows()[0].1, vec![1, 1, 1]);
        assert_eq!(weyr_pad(&mu, 1), mu);

        let mu = WeyrChar::single(0.0, &[2], 1.0e-8);
        assert_eq!(weyr_pad(&mu, 3).rows()[0].1, vec![2, 1]);
    }

    #[test]
    fn thompson_examples() {
        let a = WeyrChar::single(0.0, &[1, 1], 1.0e-8);
        assert!(thompson_reachable(&a, &a, 0));

        let b = WeyrChar::from_rows(&[(c(1.0, 0.0), vec![1]), (c(2.0, 0.0), vec![1])], 1.0e-8).unwrap();
        assert!(thompson_reachable(&a, &b, 1));

        let zero3 = WeyrChar::single(0.0, &[3], 1.0e-8);
        let j3 = WeyrChar::single(0.0, &[1, 1, 1], 1.0e-8);
        assert!(!thompson_reachable(&zero3, &j3, 1));
        // Different sizes are never reachable.
        let small = WeyrChar::single(0.0, &[1], 1.0e-8);
        assert!(!thompson_reachable(&a, &small, 5));
    }

    #[test]
    fn segre_interlace_examples() {
        let s = |rows: &[(f64, Vec<usize>)]| {
            let rows: Vec<(Complex64, Vec<usize>)> =
                rows.iter().map(|(l, r)| (c(*l, 0.0), r.clone())).collect();
            SegreChar::from_rows(&rows, 1.0e-8).unwrap()
        };
        let sa = s(&[(0.0, vec![2])]);
        assert!(segre_interlace_check(&sa, &sa));

        let sb = s(&[(1.0, vec![1]), (2.0, vec![1])]);
        assert!(segre_interlace_check(&sa, &sb));

        let sa = s(&[(0.0, vec![1, 1, 1])]);
        let sb = s(&[(0.0, vec![3])]);
        assert!(!segre_interlace_check(&sa, &sb));
    }

    #[test]
    fn rank1_assignment_keeps_matching_spectrum() {
        let a = ComplexMatrix::from_real_diagonal(&[1.0, 2.0, 3.0]);
        let target =
            ComplexMultiset::from_values(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)], 1.0e-8);
        let out = rank1_assign_spectrum(&a, &target, TOL).unwrap();
        assert_eq!(arithmetic_distance(&a, &out.matrix, TOL).unwrap(), 0);
    }

    #[test]
    fn rank1_assignment_on_jordan_block() {
        let a = jordan_block(2, 0.0);
        let target = ComplexMultiset::from_values(&[c(1.0, 0.0), c(2.0, 0.0)], 1.0e-8);
        let out = rank1_assign_spectrum(&a, &target, TOL).unwrap();
        assert_eq!(arithmetic_distance(&a, &out.matrix, TOL).unwrap(), 1);
        let mut eigs = out.matrix.eigenvalues().unwrap();
        eigs.sort_by(|x, y| x.re.total_cmp(&y.re));
        assert!((eigs[0] - c(1.0, 0.0)).norm() < 1.0e-8);
        assert!((eigs[1] - c(2.0, 0.0)).norm() < 1.0e-8);
    }

    #[test]
    fn rank1_assignment_rejects_derogatory_input() {
        let a = ComplexMatrix::from_real_diagonal(&[1.0, 1.0]);
        let target = ComplexMultiset::from_values(&[c(0.0, 0.0), c(2.0, 0.0)], 1.0e-8);
        assert!(matches!(
            rank1_assign_spectrum(&a, &target, TOL),
            Err(WeyrError::Derogatory)
        ));
    }

    #[test]
    fn rank1_assignment_random_case() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let n = 6;
        let a = ComplexMatrix::from_fn(n, n, |_, _| {
            c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let target_vals: Vec<Complex64> = (0..n)
            .map(|_| c(3.0 * (rng.random::<f64>() - 0.5), 3.0 * (rng.random::<f64>() - 0.5)))
            .collect();
        let target = ComplexMultiset::from_values(&target_vals, 1.0e-8);
        let out = rank1_assign_spectrum(&a, &target, TOL).unwrap();
        assert_eq!(arithmetic_distance(&a, &out.matrix, TOL).unwrap(), 1);
        assert_eq!(numeric_rank(&(&out.matrix - &a), TOL), 1);

        let mut eigs = out.matrix.eigenvalues().unwrap();
        let mut want = target.expanded();
        eigs.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
        want.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
        let scale = want.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        for (have, want) in eigs.iter().zip(&want) {
            assert!((have - want).norm() < 1.0e-6 * scale.max(1.0));
        }
    }

    #[test]
    fn weyr_text_round_trip() {
        let w =
            WeyrChar::from_rows(&[(c(0.0, 0.0), vec![2, 1]), (c(1.0, -2.0), vec![1])], 1.0e-8)
                .unwrap();
        let text = format_weyr(&w);
        let back = parse_weyr(&text, 1.0e-8).unwrap();
        assert_eq!(w, back);
    }

    #[test]
    fn ferrers_renders_rows_of_dots() {
        assert_eq!(ferrers_lines(&[3, 1]), vec!["* * *".to_string(), "*".to_string()]);
    }
}
