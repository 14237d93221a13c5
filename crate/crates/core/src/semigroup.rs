//! The matrix tuple of a system: singular data, eigen-classification,
//! strongly invariant multicones, reducibility and the direction sets
//! `Y_F` and `X_F`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ifs::{IfSystem, Word};
use crate::linalg::{linear_fit, Mat2, Vec2};

/// Proximality threshold on `(|λ_u| - |λ_s|) / |λ_u|`.
pub const PROXIMAL_TOL: f64 = 1e-8;

/// Default angular resolution when deduplicating direction samples.
pub const DEDUP_RESOLUTION: f64 = 1e-6;

/// Margin, in radians, for strict multicone inclusion.
pub const CONE_MARGIN: f64 = 1e-9;

/// A line through the origin, stored as its angle in `[0, π)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub angle: f64,
}

impl Direction {
    pub fn new(angle: f64) -> Self {
        let mut a = angle.rem_euclid(PI);
        if a >= PI {
            a = 0.0;
        }
        Self { angle: a }
    }

    pub fn x_axis() -> Self {
        Self::new(0.0)
    }

    pub fn y_axis() -> Self {
        Self::new(PI / 2.0)
    }

    /// Line spanned by `v`; `v` must be nonzero.
    pub fn from_vec(v: Vec2) -> Self {
        Self::new(v.y.atan2(v.x))
    }

    /// `span{(t, 1)}`.
    pub fn from_slope_inverse(t: f64) -> Self {
        Self::from_vec(Vec2::new(t, 1.0))
    }

    pub fn unit(&self) -> Vec2 {
        Vec2::new(self.angle.cos(), self.angle.sin())
    }

    pub fn perp(&self) -> Direction {
        Direction::new(self.angle + PI / 2.0)
    }

    /// Projective distance `min(|Δ|, π - |Δ|)`.
    pub fn dist(&self, other: &Direction) -> f64 {
        let d = (self.angle - other.angle).abs();
        d.min(PI - d)
    }

    /// Image line `A·self`.
    pub fn mapped(&self, a: &Mat2) -> Direction {
        Direction::from_vec(a.apply(self.unit()))
    }
}

/// Singular values and directions of an invertible matrix.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SingularData {
    pub alpha1: f64,
    pub alpha2: f64,
    /// `A·v_dir`, the most expanded image direction.
    pub u_dir: Direction,
    /// Top eigendirection of `AᵀA`.
    pub v_dir: Direction,
    /// Singular values coincide, so the directions are arbitrary.
    pub degenerate: bool,
}

pub fn singular_data(a: &Mat2) -> Result<SingularData> {
    let det = a.det();
    if det == 0.0 || !det.is_finite() {
        return Err(Error::Degenerate("singular matrix has no singular data".into()));
    }
    let (alpha1, _) = a.singular_values();
    let alpha2 = det.abs() / alpha1;
    let degenerate = alpha1 - alpha2 <= 1e-12 * alpha1;
    let v_dir = if degenerate { Direction::x_axis() } else { top_eigendirection(&(a.transpose() * *a)) };
    let u_dir = v_dir.mapped(a);
    Ok(SingularData { alpha1, alpha2, u_dir, v_dir, degenerate })
}

/// Most expanded preimage and image directions `(v, A·v)`, without using
/// the determinant, so nearly singular products are fine.
pub fn top_singular_dirs(a: &Mat2) -> (Direction, Direction) {
    let v = top_eigendirection(&(a.transpose() * *a));
    (v, v.mapped(a))
}

/// Eigendirection of the larger eigenvalue of a symmetric matrix.
fn top_eigendirection(s: &Mat2) -> Direction {
    let q = 0.5 * (s.b + s.c);
    Direction::new(0.5 * (2.0 * q).atan2(s.a - s.d))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    Proximal,
    Conformal,
    Parabolic,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct MatrixClass {
    pub kind: MatrixKind,
    /// Eigenvalue of largest modulus (real part for conformal matrices).
    pub lambda_u: f64,
    pub lambda_s: f64,
    /// Eigenline of `lambda_u`, when proximal.
    pub u: Option<Direction>,
    /// Eigenline of `lambda_s`, when proximal.
    pub s: Option<Direction>,
}

pub fn classify_matrix(a: &Mat2) -> MatrixClass {
    let tr = a.trace();
    let det = a.det();
    let disc = tr * tr - 4.0 * det;
    if disc < 0.0 {
        return MatrixClass { kind: MatrixKind::Conformal, lambda_u: tr / 2.0, lambda_s: tr / 2.0, u: None, s: None };
    }
    let root = disc.sqrt();
    let l1 = 0.5 * (tr + root);
    let l2 = 0.5 * (tr - root);
    let (lu, ls) = if l1.abs() >= l2.abs() { (l1, l2) } else { (l2, l1) };
    if lu.abs() - ls.abs() > PROXIMAL_TOL * lu.abs() {
        MatrixClass {
            kind: MatrixKind::Proximal,
            lambda_u: lu,
            lambda_s: ls,
            u: Some(eigenline(a, lu)),
            s: Some(eigenline(a, ls)),
        }
    } else {
        MatrixClass { kind: MatrixKind::Parabolic, lambda_u: lu, lambda_s: ls, u: None, s: None }
    }
}

fn eigenline(a: &Mat2, lambda: f64) -> Direction {
    let r1 = Vec2::new(a.b, lambda - a.a);
    let r2 = Vec2::new(lambda - a.d, a.c);
    if r1.norm() >= r2.norm() && r1.norm() > 0.0 {
        Direction::from_vec(r1)
    } else if r2.norm() > 0.0 {
        Direction::from_vec(r2)
    } else {
        Direction::x_axis()
    }
}

/// Real eigenlines; empty for complex eigenvalues, and for multiples of
/// the identity, which fix every line.
pub fn eigenlines(a: &Mat2) -> Vec<Direction> {
    let tr = a.trace();
    let disc = tr * tr - 4.0 * a.det();
    if disc < 0.0 || a.max_abs_diff(&Mat2::IDENTITY.scale(tr / 2.0)) <= 1e-14 * a.frobenius() {
        return Vec::new();
    }
    let root = disc.max(0.0).sqrt();
    let l1 = eigenline(a, 0.5 * (tr + root));
    let l2 = eigenline(a, 0.5 * (tr - root));
    if l1.dist(&l2) < 1e-12 {
        vec![l1]
    } else {
        vec![l1, l2]
    }
}

/// A closed projective interval `[start, start + length]` (mod π).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub start: f64,
    pub length: f64,
}

impl Arc {
    pub fn new(start: f64, length: f64) -> Self {
        Self { start: start.rem_euclid(PI), length }
    }

    pub fn around(center: Direction, radius: f64) -> Self {
        Self::new(center.angle - radius, 2.0 * radius)
    }

    pub fn end(&self) -> f64 {
        self.start + self.length
    }

    /// Whether `d` lies in the arc shrunk by `margin` on both ends.
    pub fn contains(&self, d: &Direction, margin: f64) -> bool {
        let off = (d.angle - self.start).rem_euclid(PI);
        off >= margin && off <= self.length - margin
    }

    /// Whether `other` lies in the arc shrunk by `margin`.
    pub fn contains_arc(&self, other: &Arc, margin: f64) -> bool {
        let off = (other.start - self.start).rem_euclid(PI);
        off >= margin && off + other.length <= self.length - margin
    }

    /// `A·arc`, following orientation (reversed when `det A < 0`).
    pub fn image(&self, a: &Mat2) -> Arc {
        let s = Direction::new(self.start).mapped(a).angle;
        let e = Direction::new(self.end()).mapped(a).angle;
        let (from, to) = if a.det() > 0.0 { (s, e) } else { (e, s) };
        let mut len = (to - from).rem_euclid(PI);
        if self.length > 0.0 && len == 0.0 {
            len = PI;
        }
        Arc::new(from, len)
    }
}

/// Finite union of disjoint closed projective intervals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Multicone {
    pub intervals: Vec<Arc>,
}

impl Multicone {
    /// Merges overlapping arcs. Returns `None` if they cover `RP¹`.
    pub fn from_arcs(arcs: &[Arc]) -> Option<Multicone> {
        // unwrap to [0, π), merge linearly, then rejoin across 0
        let mut pieces: Vec<(f64, f64)> = Vec::new();
        for a in arcs {
            if a.length >= PI {
                return None;
            }
            let s = a.start;
            let e = s + a.length;
            if e <= PI {
                pieces.push((s, e));
            } else {
                pieces.push((s, PI));
                pieces.push((0.0, e - PI));
            }
        }
        pieces.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (s, e) in pieces {
            match merged.last_mut() {
                Some(last) if s <= last.1 => last.1 = last.1.max(e),
                _ => merged.push((s, e)),
            }
        }
        if merged.is_empty() {
            return Some(Multicone { intervals: Vec::new() });
        }
        if merged.len() == 1 && merged[0].0 <= 0.0 && merged[0].1 >= PI {
            return None;
        }
        let mut intervals: Vec<Arc> = merged.iter().map(|&(s, e)| Arc::new(s, e - s)).collect();
        if merged.len() > 1 && merged[0].0 <= 0.0 && merged[merged.len() - 1].1 >= PI {
            let first = intervals.remove(0);
            let last = intervals.pop().expect("at least two");
            intervals.push(Arc::new(last.start, last.length + first.length));
        }
        Some(Multicone { intervals })
    }

    pub fn contains(&self, d: &Direction, margin: f64) -> bool {
        self.intervals.iter().any(|a| a.contains(d, margin))
    }

    pub fn contains_arc(&self, arc: &Arc, margin: f64) -> bool {
        self.intervals.iter().any(|a| a.contains_arc(arc, margin))
    }

    pub fn inflate(&self, by: f64) -> Option<Multicone> {
        let arcs: Vec<Arc> = self.intervals.iter().map(|a| Arc::new(a.start - by, a.length + 2.0 * by)).collect();
        Multicone::from_arcs(&arcs)
    }

    /// Total angular measure.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|a| a.length).sum()
    }

    /// `A_i C ⊂ C°` for every matrix, with the given margin.
    pub fn is_strongly_invariant(&self, matrices: &[Mat2], margin: f64) -> bool {
        matrices
            .iter()
            .all(|m| self.intervals.iter().all(|arc| self.contains_arc(&arc.image(m), margin)))
    }
}

/// All products `A_w` for `1 ≤ |w| ≤ depth`, shortest first and
/// lexicographic within a length.
pub fn products_up_to(matrices: &[Mat2], depth: usize) -> Vec<(Word, Mat2)> {
    let mut out: Vec<(Word, Mat2)> = Vec::new();
    let mut level: Vec<(Word, Mat2)> = vec![(Word::empty(), Mat2::IDENTITY)];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(level.len() * matrices.len());
        for (w, p) in &level {
            for (i, m) in matrices.iter().enumerate() {
                let mut word = w.0.clone();
                word.push(i);
                next.push((Word(word), *p * *m));
            }
        }
        out.extend(next.iter().cloned());
        level = next;
    }
    out
}

/// Searches for a strongly invariant multicone.
///
/// Seeds small arcs at the unstable directions of all products of length
/// at most 3, then grows the set by its images until it is mapped into its
/// own interior. Gives up after `max_refine` rounds or when the set covers
/// the projective line.
pub fn find_multicone(matrices: &[Mat2], max_refine: usize) -> Option<Multicone> {
    let mut seeds = Vec::new();
    for (_, p) in products_up_to(matrices, 3) {
        let class = classify_matrix(&p);
        match class.kind {
            MatrixKind::Proximal => seeds.push(class.u.expect("proximal has u")),
            _ => return None,
        }
    }
    for eps in [1e-2, 1e-3, 1e-4] {
        let arcs: Vec<Arc> = seeds.iter().map(|&d| Arc::around(d, eps)).collect();
        let Some(mut cone) = Multicone::from_arcs(&arcs) else { continue };
        for _ in 0..=max_refine {
            if cone.is_strongly_invariant(matrices, CONE_MARGIN) {
                return Some(cone);
            }
            let mut all = cone.intervals.clone();
            for m in matrices {
                all.extend(cone.intervals.iter().map(|a| a.image(m)));
            }
            match Multicone::from_arcs(&all).and_then(|c| c.inflate(eps)) {
                Some(c) => cone = c,
                None => break,
            }
        }
    }
    None
}

#[derive(Clone, Debug, Serialize)]
pub struct DominationReport {
    pub multicone_found: bool,
    pub multicone: Option<Multicone>,
    /// `max_{|w| = k} |det A_w| / ‖A_w‖²` for `k = 1..=depth`.
    pub ratios: Vec<f64>,
    /// Fitted geometric decay rate of `ratios`.
    pub tau: f64,
    pub fit_r2: f64,
    pub depth: usize,
}

impl DominationReport {
    pub fn dominated(&self) -> bool {
        self.multicone_found && self.tau < 1.0
    }
}

pub fn is_dominated(sys: &IfSystem, depth: usize) -> Result<DominationReport> {
    is_dominated_matrices(&sys.matrices(), depth)
}

pub fn is_dominated_matrices(matrices: &[Mat2], depth: usize) -> Result<DominationReport> {
    if depth == 0 {
        return Err(Error::Parameter("domination check needs depth >= 1".into()));
    }
    let multicone = find_multicone(matrices, 32);
    let mut ratios = vec![0.0f64; depth];
    for (w, p) in products_up_to(matrices, depth) {
        let n = p.norm();
        let r = p.det().abs() / (n * n);
        let k = w.len() - 1;
        ratios[k] = ratios[k].max(r);
    }
    let ks: Vec<f64> = (1..=depth).map(|k| k as f64).collect();
    let logs: Vec<f64> = ratios.iter().map(|r| r.ln()).collect();
    let (slope, _, fit_r2) = if depth >= 2 { linear_fit(&ks, &logs) } else { (logs[0], 0.0, 1.0) };
    Ok(DominationReport {
        multicone_found: multicone.is_some(),
        multicone,
        ratios,
        tau: slope.exp(),
        fit_r2,
        depth,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reducibility {
    StronglyIrreducible,
    UpperTriangularizable,
    FiniteInvariantSet,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReducibilityReport {
    pub class: Reducibility,
    /// `M` with `M A_i M⁻¹` upper-triangular (upper-triangularizable case).
    pub conjugator: Option<Mat2>,
    /// The invariant direction or invariant pair.
    pub invariant: Vec<Direction>,
    /// Clusters in a sampled orbit (strongly irreducible case).
    pub orbit_clusters: usize,
    /// More than two orbit clusters were observed.
    pub certified: bool,
}

/// Looks for a common invariant line, then a common invariant pair of
/// lines, and otherwise reports strong irreducibility backed by an orbit
/// cluster count.
pub fn classify_reducibility(matrices: &[Mat2], tol: f64) -> ReducibilityReport {
    let fixes = |v: &Direction| matrices.iter().all(|m| v.mapped(m).dist(v) <= tol);

    let mut candidates: Vec<Direction> = matrices.iter().flat_map(eigenlines).collect();
    if candidates.is_empty() && matrices.iter().all(|m| m.trace() * m.trace() - 4.0 * m.det() >= 0.0) {
        // every matrix is a multiple of the identity
        candidates.push(Direction::x_axis());
    }
    if let Some(v) = candidates.iter().find(|v| fixes(v)) {
        let u = v.unit();
        let minv = Mat2::from_cols(u, u.perp());
        return ReducibilityReport {
            class: Reducibility::UpperTriangularizable,
            conjugator: minv.inverse(),
            invariant: vec![*v],
            orbit_clusters: 1,
            certified: true,
        };
    }

    let mut pair_candidates: Vec<Direction> = candidates.clone();
    for a in matrices {
        for b in matrices {
            pair_candidates.extend(eigenlines(&(*a * *b)));
        }
    }
    let in_pair = |d: &Direction, v: &Direction, w: &Direction| d.dist(v) <= tol || d.dist(w) <= tol;
    let keeps_pair = |v: &Direction, w: &Direction| {
        v.dist(w) > tol
            && matrices
                .iter()
                .all(|m| in_pair(&v.mapped(m), v, w) && in_pair(&w.mapped(m), v, w))
    };
    for v in &pair_candidates {
        let mut partners: Vec<Direction> = pair_candidates.clone();
        partners.extend(matrices.iter().map(|m| v.mapped(m)));
        if let Some(w) = partners.iter().find(|w| keeps_pair(v, w)) {
            let (a, b) = if v.angle <= w.angle { (*v, *w) } else { (*w, *v) };
            return ReducibilityReport {
                class: Reducibility::FiniteInvariantSet,
                conjugator: None,
                invariant: vec![a, b],
                orbit_clusters: 2,
                certified: true,
            };
        }
    }

    let start = Direction::new(0.618_033_988_749_895);
    let mut orbit: Vec<Direction> = vec![start];
    for (_, p) in products_up_to(matrices, 6) {
        orbit.push(start.mapped(&p));
    }
    let clusters = count_clusters(&orbit, tol);
    ReducibilityReport {
        class: Reducibility::StronglyIrreducible,
        conjugator: None,
        invariant: Vec::new(),
        orbit_clusters: clusters,
        certified: clusters > 2,
    }
}

/// Number of groups of directions separated by gaps larger than `tol`.
pub fn count_clusters(dirs: &[Direction], tol: f64) -> usize {
    if dirs.is_empty() {
        return 0;
    }
    let mut angles: Vec<f64> = dirs.iter().map(|d| d.angle).collect();
    angles.sort_by(f64::total_cmp);
    let mut gaps = 0;
    for w in angles.windows(2) {
        if w[1] - w[0] > tol {
            gaps += 1;
        }
    }
    let wrap = angles[0] + PI - angles[angles.len() - 1];
    if wrap > tol {
        gaps += 1;
    }
    gaps.max(1)
}

/// A finite sample of directions covering a closed set up to `radius`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DirectionSet {
    pub samples: Vec<Direction>,
    pub radius: f64,
    /// Set when the tuple did not pass the domination check.
    pub warning: Option<String>,
}

impl DirectionSet {
    pub fn from_samples(samples: Vec<Direction>) -> Self {
        Self { samples, radius: 0.0, warning: None }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Distance from `d` to the nearest sample.
    pub fn distance_to(&self, d: &Direction) -> f64 {
        self.samples.iter().map(|s| s.dist(d)).fold(f64::INFINITY, f64::min)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("angle\n");
        for s in &self.samples {
            out.push_str(&format!("{:.17e}\n", s.angle));
        }
        out
    }
}

/// Greedy dedup in input order; returns representatives and the largest
/// distance from a dropped direction to its representative.
pub fn dedup_directions(dirs: &[Direction], resolution: f64) -> (Vec<Direction>, f64) {
    let mut reps: Vec<Direction> = Vec::new();
    let mut sorted: Vec<f64> = Vec::new();
    let mut spread: f64 = 0.0;
    for d in dirs {
        // nearest representative via binary search on the sorted angles
        let pos = sorted.partition_point(|a| *a < d.angle);
        let mut best = f64::INFINITY;
        for idx in [pos.wrapping_sub(1), pos, 0, sorted.len().wrapping_sub(1)] {
            if let Some(a) = sorted.get(idx) {
                best = best.min(Direction::new(*a).dist(d));
            }
        }
        if best <= resolution {
            spread = spread.max(best);
        } else {
            reps.push(*d);
            sorted.insert(pos, d.angle);
        }
    }
    (reps, spread)
}

/// Keeps at most `count` directions, evenly spread in angular order.
fn thin(mut dirs: Vec<Direction>, count: usize) -> Vec<Direction> {
    if count == 0 || dirs.len() <= count {
        return dirs;
    }
    dirs.sort_by(|a, b| a.angle.total_cmp(&b.angle));
    let n = dirs.len();
    (0..count)
        .map(|k| dirs[if count == 1 { 0 } else { k * (n - 1) / (count - 1) }])
        .collect()
}

fn domination_warning(matrices: &[Mat2]) -> Option<String> {
    if find_multicone(matrices, 32).is_some() {
        None
    } else {
        Some("tuple is not certified dominated; directions may be meaningless".into())
    }
}

/// `{u(A_w)^⊥ : 1 ≤ |w| ≤ depth, A_w proximal}`, deduplicated and thinned
/// to at most `count` samples.
pub fn estimate_yf(sys: &IfSystem, depth: usize, count: usize) -> DirectionSet {
    estimate_yf_matrices(&sys.matrices(), depth, count)
}

pub fn estimate_yf_matrices(matrices: &[Mat2], depth: usize, count: usize) -> DirectionSet {
    let raw: Vec<Direction> = products_up_to(matrices, depth)
        .iter()
        .filter_map(|(_, p)| classify_matrix(p).u.map(|u| u.perp()))
        .collect();
    let (reps, spread) = dedup_directions(&raw, DEDUP_RESOLUTION);
    DirectionSet { samples: thin(reps, count), radius: spread, warning: domination_warning(matrices) }
}

/// Pullbacks `A_w⁻¹ V` of `Y_F` samples together with the unstable
/// directions of inverse products, deduplicated and thinned to `count`.
pub fn estimate_xf(sys: &IfSystem, depth: usize, count: usize) -> DirectionSet {
    estimate_xf_matrices(&sys.matrices(), depth, count)
}

pub fn estimate_xf_matrices(matrices: &[Mat2], depth: usize, count: usize) -> DirectionSet {
    let yf = estimate_yf_matrices(matrices, depth, count.max(1));
    let inverses: Vec<Mat2> = matrices.iter().map(|m| m.inverse().expect("invertible")).collect();
    let mut raw: Vec<Direction> = Vec::new();
    for (w, p) in products_up_to(&inverses, depth) {
        // p = A_{w1}^{-1}⋯A_{wn}^{-1}, the inverse of A_{wn}⋯A_{w1}
        let _ = w;
        raw.extend(yf.samples.iter().map(|v| v.mapped(&p)));
        if let Some(u) = classify_matrix(&p).u {
            raw.push(u);
        }
    }
    let (reps, spread) = dedup_directions(&raw, DEDUP_RESOLUTION);
    DirectionSet { samples: thin(reps, count), radius: spread.max(yf.radius), warning: yf.warning }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_tuple() -> Vec<Mat2> {
        vec![Mat2::diag(0.6, 0.2), Mat2::diag(0.7, 0.3)]
    }

    #[test]
    fn direction_wraps() {
        let d = Direction::new(-0.1);
        assert!((d.angle - (PI - 0.1)).abs() < 1e-15);
        assert!((d.dist(&Direction::new(0.1)) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn singular_data_of_symmetric_example() {
        let sd = singular_data(&Mat2::new(0.2, 0.05, 0.05, 0.15)).unwrap();
        let root = 0.0125f64.sqrt();
        assert!((sd.alpha1 - (0.35 + root) / 2.0).abs() < 1e-12);
        assert!((sd.alpha2 - (0.35 - root) / 2.0).abs() < 1e-12);
        assert!((sd.alpha1 - 0.230902).abs() < 1e-6);
        let id = singular_data(&Mat2::IDENTITY).unwrap();
        assert!(id.degenerate && id.alpha1 == 1.0);
        let d3 = singular_data(&Mat2::diag(3.0, 1.0)).unwrap();
        assert_eq!(d3.u_dir.angle, 0.0);
        assert!(singular_data(&Mat2::new(1.0, 2.0, 2.0, 4.0)).is_err());
    }

    #[test]
    fn matrix_kinds() {
        let p = classify_matrix(&Mat2::diag(0.6, 0.2));
        assert_eq!(p.kind, MatrixKind::Proximal);
        assert!(p.u.unwrap().dist(&Direction::x_axis()) < 1e-15);
        assert_eq!(classify_matrix(&Mat2::scaled_rotation(0.5, 0.3)).kind, MatrixKind::Conformal);
        assert_eq!(classify_matrix(&Mat2::new(0.5, 0.1, 0.0, 0.5)).kind, MatrixKind::Parabolic);
    }

    #[test]
    fn arc_image_reverses_with_negative_det() {
        let arc = Arc::new(0.1, 0.2);
        let flip = Mat2::diag(1.0, -1.0);
        let img = arc.image(&flip);
        assert!((img.start - (PI - 0.3)).abs() < 1e-12);
        assert!((img.length - 0.2).abs() < 1e-12);
    }

    #[test]
    fn merge_across_zero() {
        let c = Multicone::from_arcs(&[Arc::new(-0.1, 0.2), Arc::new(1.0, 0.1)]).unwrap();
        assert_eq!(c.intervals.len(), 2);
        assert!(c.contains(&Direction::new(PI - 0.05), 0.0));
        assert!(c.contains(&Direction::new(0.05), 0.0));
        assert!(Multicone::from_arcs(&[Arc::new(0.0, 2.0), Arc::new(1.9, 1.3)]).is_none());
    }

    #[test]
    fn diagonal_tuple_has_single_interval_cone() {
        let cone = find_multicone(&diag_tuple(), 32).unwrap();
        assert_eq!(cone.intervals.len(), 1);
        assert!(cone.contains(&Direction::x_axis(), 0.0));
        assert!(cone.is_strongly_invariant(&diag_tuple(), CONE_MARGIN));
    }

    #[test]
    fn conformal_tuple_has_no_cone() {
        let r = Mat2::scaled_rotation(0.5, 1.0);
        assert!(find_multicone(&[r, Mat2::diag(0.6, 0.2)], 32).is_none());
        let rep = is_dominated_matrices(&[r], 6).unwrap();
        assert!(!rep.multicone_found);
        assert!((rep.tau - 1.0).abs() < 1e-9);
    }

    #[test]
    fn diagonal_decay_rate() {
        let rep = is_dominated_matrices(&diag_tuple(), 8).unwrap();
        assert!(rep.dominated());
        assert!((rep.tau - 3.0 / 7.0).abs() < 1e-9);
    }

    #[test]
    fn reducibility_classes() {
        let r = classify_reducibility(&diag_tuple(), 1e-9);
        assert_eq!(r.class, Reducibility::UpperTriangularizable);
        let m = r.conjugator.unwrap();
        for a in diag_tuple() {
            let t = m * a * m.inverse().unwrap();
            assert!(t.c.abs() < 1e-12);
        }
        let pair = classify_reducibility(&[Mat2::diag(0.5, 0.3), Mat2::new(0.0, 0.5, 0.3, 0.0)], 1e-9);
        assert_eq!(pair.class, Reducibility::FiniteInvariantSet);
        assert!(pair.invariant[0].dist(&Direction::x_axis()) < 1e-12);
        assert!(pair.invariant[1].dist(&Direction::y_axis()) < 1e-12);
    }

    #[test]
    fn diagonal_direction_sets() {
        let yf = estimate_yf_matrices(&diag_tuple(), 4, 32);
        assert_eq!(yf.samples.len(), 1);
        assert!(yf.samples[0].dist(&Direction::y_axis()) < 1e-12);
        assert!(yf.radius < 1e-9);
        let xf = estimate_xf_matrices(&diag_tuple(), 4, 32);
        assert_eq!(xf.samples.len(), 1);
        assert!(xf.samples[0].dist(&Direction::y_axis()) < 1e-12);
    }

    #[test]
    fn single_map_xf_is_stable_direction() {
        let a = Mat2::new(0.5, 0.2, 0.1, 0.3);
        let class = classify_matrix(&a);
        let xf = estimate_xf_matrices(&[a], 12, 64);
        let s = class.s.unwrap();
        assert!(xf.samples.iter().any(|d| d.dist(&s) < 1e-6));
        let yf = estimate_yf_matrices(&[a], 5, 8);
        assert!(yf.samples.iter().all(|d| d.dist(&class.u.unwrap().perp()) < 1e-6));
    }
}
