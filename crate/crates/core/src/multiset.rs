//! Finite complex multisets, the disk-counting metrics `dc` and `tilde dc`,
//! the Möbius action, and the geodesic-step construction on a circle or
//! straight line.
//!
//! `dc(A, B)` maximizes the count discrepancy `||A ∩ S| - |B ∩ S||` over
//! all closed disks S; the tilde variant extends the region family with
//! closed disk complements and closed half-planes. Over finite supports
//! the optimum is attained at a disk determined by at most three support
//! points, so both metrics are computed exactly by candidate enumeration:
//! radius-0 disks, diametral disks of pairs, and circumscribed disks of
//! non-collinear triples. Support points that fall on a candidate circle
//! are resolved by maximizing over the boundary patterns reachable from
//! nearby disks, which are exactly the contiguous arcs of the boundary
//! points (intervals, for points on a candidate line).

use crate::linalg::cx;
use crate::mats::{MobiusMap, ParseError};
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MultisetError {
    #[error("multisets carry different merge tolerances ({0:e} vs {1:e})")]
    IncompatibleTolerance(f64, f64),
    #[error("möbius map has a pole on the support near {0}")]
    PoleOnSupport(Complex64),
    #[error("support point {0} does not lie on the curve")]
    NotOnCurve(Complex64),
    #[error("geodesic step needs distance >= 2, got {0}")]
    DistanceTooSmall(usize),
    #[error("multisets must have equal cardinality ({0} vs {1})")]
    SizeMismatch(usize, usize),
    #[error("support multiplicities must all be 1")]
    MultiplicityNotOne,
    #[error("supports must be disjoint, found coincident values near {0}")]
    CoincidentSupport(Complex64),
    #[error("cyclic order is ambiguous: values from the two supports coincide within merge_tol near {0}")]
    AmbiguousOrder(Complex64),
    #[error("multiset counts must be positive")]
    ZeroCount,
}

/// Finite multiset of complex values. Distinct stored values differ by
/// more than `merge_tol`; values closer than that are identified when the
/// multiset is built (single linkage, count-weighted representatives).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMultiset {
    entries: Vec<(Complex64, usize)>,
    merge_tol: f64,
}

fn key_order(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

impl ComplexMultiset {
    pub fn from_values(values: &[Complex64], merge_tol: f64) -> Self {
        let pairs: Vec<(Complex64, usize)> = values.iter().map(|&v| (v, 1)).collect();
        Self::from_pairs(&pairs, merge_tol).expect("unit counts are always valid")
    }

    pub fn from_pairs(pairs: &[(Complex64, usize)], merge_tol: f64) -> Result<Self, MultisetError> {
        assert!(merge_tol >= 0.0, "merge tolerance must be nonnegative");
        if pairs.iter().any(|&(_, c)| c == 0) {
            return Err(MultisetError::ZeroCount);
        }
        let m = pairs.len();
        let mut parent: Vec<usize> = (0..m).collect();
        fn find(parent: &mut Vec<usize>, i: usize) -> usize {
            if parent[i] != i {
                let root = find(parent, parent[i]);
                parent[i] = root;
            }
            parent[i]
        }
        for i in 0..m {
            for j in (i + 1)..m {
                if (pairs[i].0 - pairs[j].0).norm() <= merge_tol {
                    let ri = find(&mut parent, i);
                    let rj = find(&mut parent, j);
                    if ri != rj {
                        parent[ri] = rj;
                    }
                }
            }
        }
        let mut clusters: std::collections::BTreeMap<usize, (Complex64, usize)> =
            std::collections::BTreeMap::new();
        for i in 0..m {
            let root = find(&mut parent, i);
            let entry = clusters.entry(root).or_insert((Complex64::new(0.0, 0.0), 0));
            entry.0 += pairs[i].0 * cx(pairs[i].1 as f64, 0.0);
            entry.1 += pairs[i].1;
        }
        let mut entries: Vec<(Complex64, usize)> = clusters
            .into_values()
            .map(|(sum, count)| (sum / cx(count as f64, 0.0), count))
            .collect();
        entries.sort_by(|a, b| key_order(&a.0, &b.0));
        Ok(ComplexMultiset { entries, merge_tol })
    }

    pub fn empty(merge_tol: f64) -> Self {
        ComplexMultiset {
            entries: Vec::new(),
            merge_tol,
        }
    }

    /// Total cardinality |A| (with multiplicity).
    pub fn len(&self) -> usize {
        self.entries.iter().map(|&(_, c)| c).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn merge_tol(&self) -> f64 {
        self.merge_tol
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Complex64, usize)> {
        self.entries.iter()
    }

    /// Values expanded with multiplicity, sorted by (re, im).
    pub fn expanded(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.len());
        for &(v, c) in &self.entries {
            out.extend(std::iter::repeat(v).take(c));
        }
        out
    }

    /// Multiplicity of the value nearest to `v` within merge_tol.
    pub fn count_near(&self, v: Complex64) -> usize {
        self.entries
            .iter()
            .filter(|(w, _)| (w - v).norm() <= self.merge_tol)
            .map(|&(_, c)| c)
            .sum()
    }

    fn check_compatible(&self, other: &Self) -> Result<(), MultisetError> {
        if self.merge_tol != other.merge_tol {
            return Err(MultisetError::IncompatibleTolerance(self.merge_tol, other.merge_tol));
        }
        Ok(())
    }
}

/// Closed regions of the extended family: disks, disk complements and
/// half-planes Im((x - b)/a) >= 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Disk { center: Complex64, radius: f64 },
    DiskComplement { center: Complex64, radius: f64 },
    HalfPlane { a: Complex64, b: Complex64 },
}

impl Region {
    pub fn contains(&self, z: Complex64) -> bool {
        match *self {
            Region::Disk { center, radius } => (z - center).norm() <= radius,
            Region::DiskComplement { center, radius } => (z - center).norm() >= radius,
            Region::HalfPlane { a, b } => {
                assert!(a.norm() > 0.0, "half-plane requires a != 0");
                ((z - b) / a).im >= 0.0
            }
        }
    }
}

/// A circle or a straight line in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Curve {
    Line { point: Complex64, direction: Complex64 },
    Circle { center: Complex64, radius: f64 },
}

impl Curve {
    pub fn real_line() -> Self {
        Curve::Line {
            point: Complex64::new(0.0, 0.0),
            direction: Complex64::new(1.0, 0.0),
        }
    }

    pub fn unit_circle() -> Self {
        Curve::Circle {
            center: Complex64::new(0.0, 0.0),
            radius: 1.0,
        }
    }

    /// Distance from z to the curve.
    pub fn distance(&self, z: Complex64) -> f64 {
        match *self {
            Curve::Line { point, direction } => {
                let u = direction / cx(direction.norm(), 0.0);
                ((z - point) / u).im.abs()
            }
            Curve::Circle { center, radius } => ((z - center).norm() - radius).abs(),
        }
    }

    /// 1-d parameter along the curve: signed coordinate on a line, angle
    /// in (-pi, pi] on a circle (anticlockwise).
    pub fn coordinate(&self, z: Complex64) -> f64 {
        match *self {
            Curve::Line { point, direction } => {
                let u = direction / cx(direction.norm(), 0.0);
                ((z - point) / u).re
            }
            Curve::Circle { center, .. } => (z - center).arg(),
        }
    }

    pub fn point_at(&self, t: f64) -> Complex64 {
        match *self {
            Curve::Line { point, direction } => {
                let u = direction / cx(direction.norm(), 0.0);
                point + u * cx(t, 0.0)
            }
            Curve::Circle { center, radius } => center + Complex64::from_polar(radius, t),
        }
    }

    fn scale(&self) -> f64 {
        match *self {
            Curve::Line { point, direction } => point.norm().max(direction.norm()).max(1.0),
            Curve::Circle { center, radius } => center.norm().max(radius).max(1.0),
        }
    }
}

// ---------------------------------------------------------------------------
// Multiset operations from the multiplicity calculus.
// ---------------------------------------------------------------------------

/// Matches the supports of two multisets within their merge tolerance.
/// Returns (value, count_a, count_b) triples; matched values use the
/// count-weighted representative.
fn matched_support(
    a: &ComplexMultiset,
    b: &ComplexMultiset,
) -> Vec<(Complex64, usize, usize)> {
    let tol = a.merge_tol.max(b.merge_tol);
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, &(va, _)) in a.entries.iter().enumerate() {
        for (j, &(vb, _)) in b.entries.iter().enumerate() {
            let d = (va - vb).norm();
            if d <= tol {
                pairs.push((d, i, j));
            }
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut used_a = vec![false; a.entries.len()];
    let mut used_b = vec![false; b.entries.len()];
    let mut out: Vec<(Complex64, usize, usize)> = Vec::new();
    for (_, i, j) in pairs {
        if used_a[i] || used_b[j] {
            continue;
        }
        used_a[i] = true;
        used_b[j] = true;
        let (va, ca) = a.entries[i];
        let (vb, cb) = b.entries[j];
        let rep = (va * cx(ca as f64, 0.0) + vb * cx(cb as f64, 0.0)) / cx((ca + cb) as f64, 0.0);
        out.push((rep, ca, cb));
    }
    for (i, &(va, ca)) in a.entries.iter().enumerate() {
        if !used_a[i] {
            out.push((va, ca, 0));
        }
    }
    for (j, &(vb, cb)) in b.entries.iter().enumerate() {
        if !used_b[j] {
            out.push((vb, 0, cb));
        }
    }
    out.sort_by(|x, y| key_order(&x.0, &y.0));
    out
}

/// A \ B with multiplicity max(0, chi_A - chi_B).
pub fn ms_difference(
    a: &ComplexMultiset,
    b: &ComplexMultiset,
) -> Result<ComplexMultiset, MultisetError> {
    a.check_compatible(b)?;
    let pairs: Vec<(Complex64, usize)> = matched_support(a, b)
        .into_iter()
        .filter(|&(_, ca, cb)| ca > cb)
        .map(|(v, ca, cb)| (v, ca - cb))
        .collect();
    ComplexMultiset::from_pairs(&pairs, a.merge_tol)
}

/// A ⊎ B with multiplicity chi_A + chi_B.
pub fn ms_union(
    a: &ComplexMultiset,
    b: &ComplexMultiset,
) -> Result<ComplexMultiset, MultisetError> {
    a.check_compatible(b)?;
    let pairs: Vec<(Complex64, usize)> = matched_support(a, b)
        .into_iter()
        .map(|(v, ca, cb)| (v, ca + cb))
        .collect();
    ComplexMultiset::from_pairs(&pairs, a.merge_tol)
}

/// A ∩ S for a closed region S; boundary points belong to the region.
pub fn ms_intersect_region(a: &ComplexMultiset, region: &Region) -> ComplexMultiset {
    let pairs: Vec<(Complex64, usize)> = a
        .entries
        .iter()
        .copied()
        .filter(|&(v, _)| region.contains(v))
        .collect();
    ComplexMultiset::from_pairs(&pairs, a.merge_tol).expect("counts stay positive")
}

/// Pointwise scalar Möbius image; multiplicities preserved.
pub fn mobius_apply_multiset(
    map: &MobiusMap,
    a: &ComplexMultiset,
) -> Result<ComplexMultiset, MultisetError> {
    if let Some(pole) = map.pole() {
        for &(v, _) in &a.entries {
            if (v - pole).norm() <= a.merge_tol.max(1.0e-14 * pole.norm()) {
                return Err(MultisetError::PoleOnSupport(v));
            }
        }
    }
    let pairs: Vec<(Complex64, usize)> = a
        .entries
        .iter()
        .map(|&(v, c)| (map.apply_scalar(v), c))
        .collect();
    ComplexMultiset::from_pairs(&pairs, a.merge_tol)
}

// ---------------------------------------------------------------------------
// dc and tilde-dc by candidate enumeration.
// ---------------------------------------------------------------------------

/// Signed weights chi_A - chi_B on the matched joint support, zero-weight
/// points dropped (they cannot change any count discrepancy).
fn weighted_support(a: &ComplexMultiset, b: &ComplexMultiset) -> Vec<(Complex64, i64)> {
    matched_support(a, b)
        .into_iter()
        .filter(|&(_, ca, cb)| ca != cb)
        .map(|(v, ca, cb)| (v, ca as i64 - cb as i64))
        .collect()
}

fn diameter(pts: &[(Complex64, i64)]) -> f64 {
    let mut d = 0.0f64;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            d = d.max((pts[i].0 - pts[j].0).norm());
        }
    }
    d
}

/// Max / min over contiguous subarrays, the empty subarray allowed.
fn best_linear(weights: &[i64]) -> (i64, i64) {
    let mut best_max = 0i64;
    let mut best_min = 0i64;
    let mut run_max = 0i64;
    let mut run_min = 0i64;
    for &w in weights {
        run_max = (run_max + w).max(w);
        run_min = (run_min + w).min(w);
        best_max = best_max.max(run_max);
        best_min = best_min.min(run_min);
    }
    (best_max, best_min)
}

/// Max / min over cyclically contiguous arcs, the empty arc allowed.
fn best_cyclic(weights: &[i64]) -> (i64, i64) {
    let total: i64 = weights.iter().sum();
    let (lin_max, lin_min) = best_linear(weights);
    let max = lin_max.max(total - lin_min).max(0);
    let min = lin_min.min(total - lin_max).min(0);
    (max, min)
}

struct DiskEval {
    /// Largest |score| over closed disks near the candidate.
    disk: i64,
    /// Largest |score| over closed complements of disks near the candidate.
    complement: i64,
}

fn eval_disk_candidate(pts: &[(Complex64, i64)], center: Complex64, radius: f64, eps: f64) -> DiskEval {
    let mut inside = 0i64;
    let mut outside = 0i64;
    let mut boundary: Vec<(f64, i64)> = Vec::new();
    for &(p, w) in pts {
        let d = (p - center).norm();
        if (d - radius).abs() <= eps {
            boundary.push(((p - center).arg(), w));
        } else if d < radius {
            inside += w;
        } else {
            outside += w;
        }
    }
    boundary.sort_by(|x, y| x.0.total_cmp(&y.0));
    let weights: Vec<i64> = boundary.iter().map(|&(_, w)| w).collect();
    let (arc_max, arc_min) = best_cyclic(&weights);
    let disk = (inside + arc_max).abs().max((inside + arc_min).abs());
    let complement = (outside + arc_max).abs().max((outside + arc_min).abs());
    DiskEval { disk, complement }
}

fn eval_halfplane_candidate(pts: &[(Complex64, i64)], p: Complex64, q: Complex64, eps: f64) -> i64 {
    let dir = q - p;
    let len = dir.norm();
    let mut side_pos = 0i64;
    let mut side_neg = 0i64;
    let mut boundary: Vec<(f64, i64)> = Vec::new();
    for &(z, w) in pts {
        let rel = z - p;
        let cross = dir.re * rel.im - dir.im * rel.re;
        let dist = cross / len;
        if dist.abs() <= eps {
            let t = (dir.re * rel.re + dir.im * rel.im) / len;
            boundary.push((t, w));
        } else if dist > 0.0 {
            side_pos += w;
        } else {
            side_neg += w;
        }
    }
    boundary.sort_by(|x, y| x.0.total_cmp(&y.0));
    let weights: Vec<i64> = boundary.iter().map(|&(_, w)| w).collect();
    let (int_max, int_min) = best_linear(&weights);
    let mut best = 0i64;
    for side in [side_pos, side_neg] {
        best = best
            .max((side + int_max).abs())
            .max((side + int_min).abs());
    }
    best
}

fn circumcircle(p: Complex64, q: Complex64, s: Complex64) -> Option<(Complex64, f64)> {
    let d = 2.0
        * (p.re * (q.im - s.im) + q.re * (s.im - p.im) + s.re * (p.im - q.im));
    let span = (p - q).norm().max((q - s).norm()).max((p - s).norm());
    if d.abs() <= 1.0e-12 * span * span {
        return None;
    }
    let p2 = p.norm_sqr();
    let q2 = q.norm_sqr();
    let s2 = s.norm_sqr();
    let ux = (p2 * (q.im - s.im) + q2 * (s.im - p.im) + s2 * (p.im - q.im)) / d;
    let uy = (p2 * (s.re - q.re) + q2 * (p.re - s.re) + s2 * (q.re - p.re)) / d;
    let center = Complex64::new(ux, uy);
    Some((center, (p - center).norm()))
}

fn max_discrepancy(pts: &[(Complex64, i64)], extended: bool) -> i64 {
    if pts.is_empty() {
        return 0;
    }
    let eps = 1.0e-12 * diameter(pts);
    let m = pts.len();
    let mut best = 0i64;
    for i in 0..m {
        let eval = eval_disk_candidate(pts, pts[i].0, 0.0, eps);
        best = best.max(eval.disk);
        if extended {
            best = best.max(eval.complement);
        }
    }
    for i in 0..m {
        for j in (i + 1)..m {
            let center = (pts[i].0 + pts[j].0) * cx(0.5, 0.0);
            let radius = (pts[i].0 - pts[j].0).norm() * 0.5;
            let eval = eval_disk_candidate(pts, center, radius, eps);
            best = best.max(eval.disk);
            if extended {
                best = best.max(eval.complement);
                best = best.max(eval_halfplane_candidate(pts, pts[i].0, pts[j].0, eps));
            }
        }
    }
    for i in 0..m {
        for j in (i + 1)..m {
            for k in (j + 1)..m {
                if let Some((center, radius)) = circumcircle(pts[i].0, pts[j].0, pts[k].0) {
                    let eval = eval_disk_candidate(pts, center, radius, eps);
                    best = best.max(eval.disk);
                    if extended {
                        best = best.max(eval.complement);
                    }
                }
            }
        }
    }
    best
}

/// dc(A, B): max over closed disks of the count discrepancy.
pub fn dc_distance(a: &ComplexMultiset, b: &ComplexMultiset) -> usize {
    max_discrepancy(&weighted_support(a, b), false) as usize
}

/// tilde-dc(A, B): max over closed disks, disk complements and closed
/// half-planes. Equals dc whenever |A| = |B|.
pub fn tilde_dc_distance(a: &ComplexMultiset, b: &ComplexMultiset) -> usize {
    max_discrepancy(&weighted_support(a, b), true) as usize
}

// ---------------------------------------------------------------------------
// Exact tilde-dc for multisets on a common circle or line.
// ---------------------------------------------------------------------------

fn curve_coordinates(
    points: &[(Complex64, i64)],
    curve: &Curve,
    on_tol: f64,
) -> Result<Vec<(f64, i64)>, MultisetError> {
    let mut out = Vec::with_capacity(points.len());
    for &(p, w) in points {
        if curve.distance(p) > on_tol {
            return Err(MultisetError::NotOnCurve(p));
        }
        out.push((curve.coordinate(p), w));
    }
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(out)
}

fn on_curve_tolerance(a: &ComplexMultiset, b: &ComplexMultiset, curve: &Curve) -> f64 {
    a.merge_tol
        .max(b.merge_tol)
        .max(1.0e-12 * curve.scale())
}

/// Exact tilde-dc for multisets supported on one curve: every achievable
/// count pattern of a region trace is a contiguous index window (cyclic on
/// a circle; on a line also a prefix ∪ suffix pair, the trace of a disk
/// complement).
pub fn interval_dc(
    a: &ComplexMultiset,
    b: &ComplexMultiset,
    curve: &Curve,
) -> Result<usize, MultisetError> {
    let pts = weighted_support(a, b);
    let coords = curve_coordinates(&pts, curve, on_curve_tolerance(a, b, curve))?;
    let weights: Vec<i64> = coords.iter().map(|&(_, w)| w).collect();
    let m = weights.len();
    let mut best = 0i64;
    match curve {
        Curve::Circle { .. } => {
            let (arc_max, arc_min) = best_cyclic(&weights);
            best = best.max(arc_max.abs()).max(arc_min.abs());
            let total: i64 = weights.iter().sum();
            best = best.max(total.abs());
        }
        Curve::Line { .. } => {
            let mut prefix = vec![0i64; m + 1];
            for i in 0..m {
                prefix[i + 1] = prefix[i] + weights[i];
            }
            let total = prefix[m];
            // Windows [i, j).
            for i in 0..=m {
                for j in i..=m {
                    best = best.max((prefix[j] - prefix[i]).abs());
                }
            }
            // Prefix ∪ suffix: complement traces.
            for i in 0..=m {
                for j in i..=m {
                    let value = prefix[i] + (total - prefix[j]);
                    best = best.max(value.abs());
                }
            }
        }
    }
    Ok(best as usize)
}

/// Strict alternation of two equal-size simple multisets on a line.
pub fn interlacing_check(
    a: &ComplexMultiset,
    b: &ComplexMultiset,
    line: &Curve,
) -> Result<bool, MultisetError> {
    if !matches!(line, Curve::Line { .. }) {
        return Err(MultisetError::NotOnCurve(Complex64::new(0.0, 0.0)));
    }
    if a.len() != b.len() {
        return Err(MultisetError::SizeMismatch(a.len(), b.len()));
    }
    if a.entries.iter().chain(b.entries.iter()).any(|&(_, c)| c != 1) {
        return Err(MultisetError::MultiplicityNotOne);
    }
    for (v, ca, cb) in matched_support(a, b) {
        if ca > 0 && cb > 0 {
            return Err(MultisetError::CoincidentSupport(v));
        }
    }
    let on_tol = on_curve_tolerance(a, b, line);
    let mut tagged: Vec<(f64, bool)> = Vec::new();
    for (set, is_a) in [(a, true), (b, false)] {
        for &(v, _) in &set.entries {
            if line.distance(v) > on_tol {
                return Err(MultisetError::NotOnCurve(v));
            }
            tagged.push((line.coordinate(v), is_a));
        }
    }
    tagged.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(tagged.windows(2).all(|w| w[0].1 != w[1].1))
}

/// One geodesic step from A toward B on the curve: strips the common part,
/// cyclically orders the leftover joint support anticlockwise (a line wraps
/// through infinity), and moves each A-point to its successor.
pub fn geodesic_step_on_curve(
    a: &ComplexMultiset,
    b: &ComplexMultiset,
    curve: &Curve,
) -> Result<ComplexMultiset, MultisetError> {
    a.check_compatible(b)?;
    if a.len() != b.len() {
        return Err(MultisetError::SizeMismatch(a.len(), b.len()));
    }
    let k = interval_dc(a, b, curve)?;
    if k < 2 {
        return Err(MultisetError::DistanceTooSmall(k));
    }

    let matched = matched_support(a, b);
    let mut common: Vec<(Complex64, usize)> = Vec::new();
    // gamma: (coordinate, value, residual count in A', membership flags)
    let mut gamma: Vec<(f64, Complex64, usize, bool)> = Vec::new();
    let on_tol = on_curve_tolerance(a, b, curve);
    for &(v, ca, cb) in &matched {
        let shared = ca.min(cb);
        if shared > 0 {
            common.push((v, shared));
        }
        let ra = ca - shared;
        let rb = cb - shared;
        if ra > 0 || rb > 0 {
            if curve.distance(v) > on_tol {
                return Err(MultisetError::NotOnCurve(v));
            }
            gamma.push((curve.coordinate(v), v, ra, ra > 0));
        }
    }
    gamma.sort_by(|x, y| x.0.total_cmp(&y.0));
    let tol = a.merge_tol.max(b.merge_tol);
    for w in gamma.windows(2) {
        if (w[0].1 - w[1].1).norm() <= tol {
            return Err(MultisetError::AmbiguousOrder(w[0].1));
        }
    }

    let r = gamma.len();
    let mut step_pairs: Vec<(Complex64, usize)> = Vec::new();
    for i in 0..r {
        let prev_in_a = gamma[(i + r - 1) % r].3;
        let here_in_a = gamma[i].3;
        let chi_a = gamma[i].2;
        let chi_c = match (here_in_a, prev_in_a) {
            (true, false) => chi_a - 1,
            (false, true) => 1,
            _ => chi_a,
        };
        if chi_c > 0 {
            step_pairs.push((gamma[i].1, chi_c));
        }
    }
    step_pairs.extend(common);
    let c = ComplexMultiset::from_pairs(&step_pairs, a.merge_tol)?;

    let d_ac = interval_dc(a, &c, curve)?;
    let d_cb = interval_dc(&c, b, curve)?;
    assert_eq!(d_ac, 1, "geodesic step must be at distance 1 from the start");
    assert_eq!(d_cb, k - 1, "geodesic step must reduce the distance by 1");
    Ok(c)
}

/// Full geodesic chain A = C_0, ..., C_k = B with successive tilde-dc 1.
pub fn geodesic_chain_on_curve(
    a: &ComplexMultiset,
    b: &ComplexMultiset,
    curve: &Curve,
) -> Result<Vec<ComplexMultiset>, MultisetError> {
    let mut chain = vec![a.clone()];
    loop {
        let current = chain.last().expect("chain is never empty");
        let k = interval_dc(current, b, curve)?;
        match k {
            0 => return Ok(chain),
            1 => {
                chain.push(b.clone());
                return Ok(chain);
            }
            _ => {
                let next = geodesic_step_on_curve(current, b, curve)?;
                chain.push(next);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Text format: one line per support point, "re im count".
// ---------------------------------------------------------------------------

pub fn parse_multiset(text: &str, merge_tol: f64) -> Result<ComplexMultiset, ParseError> {
    let mut pairs: Vec<(Complex64, usize)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let line_no = idx + 1;
        let mut parts = line.split_whitespace();
        let re: f64 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or(ParseError::Malformed { line: line_no, expected: "line `re im count`" })?;
        let im: f64 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or(ParseError::Malformed { line: line_no, expected: "line `re im count`" })?;
        let count: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or(ParseError::Malformed { line: line_no, expected: "line `re im count`" })?;
        if parts.next().is_some() {
            return Err(ParseError::Malformed { line: line_no, expected: "line `re im count`" });
        }
        if !re.is_finite() || !im.is_finite() {
            return Err(ParseError::NonFinite { line: line_no });
        }
        if count == 0 {
            return Err(ParseError::Malformed { line: line_no, expected: "positive count" });
        }
        pairs.push((Complex64::new(re, im), count));
    }
    ComplexMultiset::from_pairs(&pairs, merge_tol)
        .map_err(|_| ParseError::Malformed { line: 1, expected: "positive counts" })
}

pub fn format_multiset(ms: &ComplexMultiset) -> String {
    let mut out = String::new();
    for &(v, c) in &ms.entries {
        out.push_str(&format!("{} {} {}\n", v.re, v.im, c));
    }
    out
}
