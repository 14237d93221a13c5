//! Oblique projections, projections of the attractor onto lines, the
//! projection condition, slices and comb recognition.

use serde::Serialize;

use crate::ergodic::BernoulliMeasure;
use crate::error::{Error, Result};
use crate::ifs::{AttractorCloud, Budget, IfSystem, Walk};
use crate::linalg::{Mat2, Vec2};
use crate::semigroup::{Direction, DirectionSet};
use crate::tangent::hausdorff_distance;

/// Minimum porosity constant for a product comb.
pub const POROSITY_THRESHOLD: f64 = 0.01;

/// The rank-one projection onto `onto` with kernel `along`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ObliqueProjection {
    pub matrix: Mat2,
    pub onto: Direction,
    pub along: Direction,
}

impl ObliqueProjection {
    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }

    /// The projection scaled to operator norm one.
    pub fn normalized(&self) -> Mat2 {
        self.matrix.scale(1.0 / self.norm())
    }
}

pub fn make_projection(onto: Direction, along: Direction) -> Result<ObliqueProjection> {
    if onto.dist(&along) <= 1e-10 {
        return Err(Error::Degenerate("projection needs distinct image and kernel lines".into()));
    }
    let v = onto.unit();
    let n = along.unit().perp();
    let s = 1.0 / n.dot(v);
    // x ↦ v (n·x) / (n·v)
    let matrix = Mat2::new(v.x * n.x * s, v.x * n.y * s, v.y * n.x * s, v.y * n.y * s);
    Ok(ObliqueProjection { matrix, onto, along })
}

/// Sorted, pairwise disjoint closed intervals on a line.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntervalUnion {
    pub intervals: Vec<(f64, f64)>,
}

impl IntervalUnion {
    /// Merges intervals whose gaps are at most `tol`.
    pub fn from_intervals(mut raw: Vec<(f64, f64)>, tol: f64) -> Self {
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut intervals: Vec<(f64, f64)> = Vec::new();
        for (lo, hi) in raw {
            match intervals.last_mut() {
                Some(last) if lo <= last.1 + tol => last.1 = last.1.max(hi),
                _ => intervals.push((lo, hi)),
            }
        }
        Self { intervals }
    }

    pub fn is_single(&self) -> bool {
        self.intervals.len() == 1
    }

    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    pub fn span(&self) -> Option<(f64, f64)> {
        Some((self.intervals.first()?.0, self.intervals.last()?.1))
    }

    pub fn gaps(&self) -> Vec<f64> {
        self.intervals.windows(2).map(|w| w[1].0 - w[0].1).collect()
    }

    pub fn largest_gap(&self) -> f64 {
        self.gaps().into_iter().fold(0.0, f64::max)
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| x >= a - tol && x <= b + tol)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("start,end\n");
        for (a, b) in &self.intervals {
            out.push_str(&format!("{a:.17e},{b:.17e}\n"));
        }
        out
    }
}

/// Unit normal of a line, so that `n·p` is the coordinate along `V^⊥`.
fn normal(v: &Direction) -> Vec2 {
    v.unit().perp()
}

fn project_corners(corners: &[Vec2; 4], n: Vec2) -> (f64, f64) {
    corners.iter().map(|c| n.dot(*c)).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| (lo.min(t), hi.max(t)))
}

/// Orthogonal projection of the depth-`depth` cylinder hulls onto `V^⊥`,
/// one union per depth `0..=depth`. The coordinate on `V^⊥` is `n·p` with
/// `n` the counter-clockwise normal of `V`.
pub fn project_cylinders_by_depth(sys: &IfSystem, v: Direction, depth: usize, budget: &Budget) -> Result<Vec<IntervalUnion>> {
    budget.check(sys.len(), depth)?;
    let n = normal(&v);
    let tol = 1e-12 * sys.bounding_box.diameter();
    let mut raw: Vec<Vec<(f64, f64)>> = vec![Vec::new(); depth + 1];
    sys.walk_cylinders(|w, m| {
        raw[w.len()].push(project_corners(&sys.hull_corners(m), n));
        if w.len() == depth {
            Walk::Stop
        } else {
            Walk::Descend
        }
    });
    Ok(raw.into_iter().map(|r| IntervalUnion::from_intervals(r, tol)).collect())
}

pub fn project_cylinders(sys: &IfSystem, v: Direction, depth: usize, budget: &Budget) -> Result<IntervalUnion> {
    Ok(project_cylinders_by_depth(sys, v, depth, budget)?.pop().expect("depth + 1 unions"))
}

#[derive(Clone, Debug, Serialize)]
pub struct DirectionCheck {
    pub direction: Direction,
    pub holds: bool,
    /// Largest gap at the final depth; zero when the projection is one
    /// interval.
    pub gap_size: f64,
    pub intervals: usize,
    /// Smallest depth at which the projection splits.
    pub first_gap_depth: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProjectionReport {
    pub holds: bool,
    pub depth: usize,
    pub per_direction: Vec<DirectionCheck>,
}

impl ProjectionReport {
    pub fn max_gap(&self) -> f64 {
        self.per_direction.iter().map(|d| d.gap_size).fold(0.0, f64::max)
    }
}

/// For each direction `V`, whether the cylinder projection onto `V^⊥` is a
/// single interval of positive length at depths `depth-2 ..= depth`.
pub fn check_projection_condition(sys: &IfSystem, dirs: &DirectionSet, depth: usize, budget: &Budget) -> Result<ProjectionReport> {
    if dirs.is_empty() {
        return Err(Error::Parameter("projection check needs at least one direction".into()));
    }
    let per_direction = dirs
        .samples
        .iter()
        .map(|&v| {
            let unions = project_cylinders_by_depth(sys, v, depth, budget)?;
            let last = unions.last().expect("nonempty");
            let window = depth.saturating_sub(2)..=depth;
            let holds = window.into_iter().all(|k| unions[k].is_single() && unions[k].total_length() > 0.0);
            let first_gap_depth = unions.iter().position(|u| !u.is_single());
            Ok(DirectionCheck {
                direction: v,
                holds,
                gap_size: last.largest_gap(),
                intervals: last.intervals.len(),
                first_gap_depth,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProjectionReport { holds: per_direction.iter().all(|d| d.holds), depth, per_direction })
}

/// Whether the line through `x` with direction `f` meets the convex
/// polygon with the given corners.
pub fn hull_meets_line(corners: &[Vec2], f: &Direction, x: Vec2) -> bool {
    let n = normal(f);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for c in corners {
        let t = n.dot(*c - x);
        lo = lo.min(t);
        hi = hi.max(t);
    }
    lo <= 0.0 && hi >= 0.0
}

/// Cloud points near the line `F + x`.
#[derive(Clone, Debug, Serialize)]
pub struct SliceSample {
    pub direction: Direction,
    pub base: Vec2,
    pub thickness: f64,
    pub points: Vec<Vec2>,
    pub depth: usize,
    /// Thickness below the cloud resolution.
    pub undersampled: bool,
}

pub fn extract_slice(cloud: &AttractorCloud, f: Direction, x: Vec2, eps: f64) -> SliceSample {
    let n = normal(&f);
    let points = cloud.points.iter().copied().filter(|p| n.dot(*p - x).abs() <= eps).collect();
    SliceSample {
        direction: f,
        base: x,
        thickness: eps,
        points,
        depth: cloud.depth,
        undersampled: eps < cloud.diameter_bound,
    }
}

/// `ν`-mass of depth-`depth` cylinders whose hulls meet `F + x`.
pub fn line_incidence_mass(sys: &IfSystem, nu: &BernoulliMeasure, f: Direction, x: Vec2, depth: usize) -> Result<f64> {
    if nu.step != 1 || nu.alphabet != sys.len() {
        return Err(Error::Parameter("incidence mass needs a step-1 measure over the system's symbols".into()));
    }
    let mut mass = 0.0;
    let mut weight = vec![1.0f64; depth + 1];
    sys.walk_cylinders(|w, m| {
        if let Some(&last) = w.last() {
            weight[w.len()] = weight[w.len() - 1] * nu.probs[last];
        }
        if weight[w.len()] == 0.0 || !hull_meets_line(&sys.hull_corners(m), &f, x) {
            return Walk::Stop;
        }
        if w.len() == depth {
            mass += weight[depth];
            Walk::Stop
        } else {
            Walk::Descend
        }
    });
    Ok(mass)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CombVariant {
    /// `(R × C) ∩ B(0,1)` with `C` closed and porous.
    Product,
    /// `(ℓ × {0}) ∩ B(0,1)`.
    Segment,
}

#[derive(Clone, Debug, Serialize)]
pub struct CombModel {
    pub variant: CombVariant,
    /// Tooth heights `C` (product variant).
    pub teeth_positions: Vec<f64>,
    pub porosity_alpha: f64,
    /// Observed `x`-extent (segment variant).
    pub segment_span: Option<(f64, f64)>,
    /// Hausdorff distance between the points and the fitted model.
    pub fit_distance: f64,
}

/// Fits a comb to points in the closed unit ball at resolution `tol`.
pub fn comb_fit(points: &[Vec2], tol: f64) -> Option<CombModel> {
    if points.is_empty() || !(tol > 0.0) {
        return None;
    }
    if let Some(model) = fit_segment(points, tol) {
        return Some(model);
    }
    fit_product(points, tol)
}

fn fit_segment(points: &[Vec2], tol: f64) -> Option<CombModel> {
    if points.iter().any(|p| p.y.abs() > tol) {
        return None;
    }
    let mut xs: Vec<f64> = points.iter().map(|p| p.x).collect();
    xs.sort_by(f64::total_cmp);
    let (lo, hi) = (xs[0], xs[xs.len() - 1]);
    let left = lo <= -1.0 + tol && hi >= -tol;
    let right = lo <= tol && hi >= 1.0 - tol;
    if !(left || right) {
        return None;
    }
    let max_gap = xs.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    if max_gap > tol {
        return None;
    }
    let fit_distance = points.iter().map(|p| p.y.abs()).fold(0.0, f64::max);
    Some(CombModel {
        variant: CombVariant::Segment,
        teeth_positions: vec![0.0],
        porosity_alpha: 1.0,
        segment_span: Some((lo, hi)),
        fit_distance,
    })
}

/// Representatives of `ys` forming a `tol/2`-net, ascending: each is the
/// midpoint of a run of values spanning at most `tol`, paired with the
/// smallest `|y|` in the run.
fn tooth_net(ys: &mut [f64], tol: f64) -> Vec<(f64, f64)> {
    ys.sort_by(f64::total_cmp);
    let mut teeth = Vec::new();
    let mut i = 0;
    while i < ys.len() {
        let first = ys[i];
        let mut last = first;
        while i < ys.len() && ys[i] <= first + tol {
            last = ys[i];
            i += 1;
        }
        let inner = if first <= 0.0 && last >= 0.0 { 0.0 } else { first.abs().min(last.abs()) };
        teeth.push((0.5 * (first + last), inner));
    }
    teeth
}

fn fit_product(points: &[Vec2], tol: f64) -> Option<CombModel> {
    let mut ys: Vec<f64> = points.iter().map(|p| p.y).collect();
    let net = tooth_net(&mut ys, tol);
    let teeth: Vec<f64> = net.iter().map(|t| t.0).collect();

    let step = tol / 2.0;
    let mut model: Vec<Vec2> = Vec::new();
    for &(c, inner) in &net {
        // chord at the widest height the tooth stands for
        let half = (1.0 - inner * inner).max(0.0).sqrt();
        let k = (2.0 * half / step).ceil() as usize;
        for j in 0..=k {
            model.push(Vec2::new((-half + j as f64 * step).min(half), c));
        }
    }
    let fit_distance = hausdorff_distance(points, &model).ok()?;
    if fit_distance > tol {
        return None;
    }
    let alpha = porosity(&ys, tol);
    if alpha < POROSITY_THRESHOLD {
        return None;
    }
    Some(CombModel {
        variant: CombVariant::Product,
        teeth_positions: teeth,
        porosity_alpha: alpha,
        segment_span: None,
        fit_distance,
    })
}

/// Porosity constant of `teeth` thickened by `tol/2`: the smallest ratio
/// (largest hole radius in `[c-r, c+r]`)/r over heights `c` and
/// dyadic `r` from 1 down to `2·tol`.
pub fn porosity(teeth: &[f64], tol: f64) -> f64 {
    let thick = IntervalUnion::from_intervals(teeth.iter().map(|&c| (c - tol / 2.0, c + tol / 2.0)).collect(), 0.0);
    let mut sorted = teeth.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut centers: Vec<f64> = Vec::new();
    for c in sorted {
        if centers.last().map_or(true, |&l| c - l >= tol / 2.0) {
            centers.push(c);
        }
    }
    let mut alpha = f64::INFINITY;
    let mut r = 1.0;
    while r >= 2.0 * tol {
        for &c in &centers {
            let (lo, hi) = (c - r, c + r);
            let mut cursor = lo;
            let mut hole: f64 = 0.0;
            for &(a, b) in &thick.intervals {
                if b < lo {
                    continue;
                }
                if a > hi {
                    break;
                }
                hole = hole.max(a - cursor);
                cursor = cursor.max(b);
            }
            hole = hole.max(hi - cursor);
            alpha = alpha.min(hole / 2.0 / r);
        }
        r /= 2.0;
    }
    alpha.max(0.0)
}
