//! Magnifications, Hausdorff distance and tangent sets.
//!
//! A tangent approximation at `x` and scale `r` is the image of the
//! attractor near `x` under `z ↦ (z − x)/r`, clipped to the closed unit
//! ball. Local point sets come from [`Resolver`] at resolution `0.005·r`.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::ergodic::{renormalized_product, sample_rng, theta1, BernoulliMeasure};
use crate::error::{Error, Result};
use crate::ifs::{AffineMap, AttractorCloud, IfSystem, Word};
use crate::linalg::{Mat2, Vec2};
use crate::pieces::{distance_to_quad, Piece, Resolver};
use crate::semigroup::{top_singular_dirs, Direction};
use crate::stream::WordStream;

/// Resolution, relative to the scale, used for tangent point sets.
pub const TANGENT_RESOLUTION: f64 = 0.005;

/// Above this ratio of cloud resolution to scale a magnification is flagged.
pub const RESOLUTION_FLAG_RATIO: f64 = 0.01;

const BALL_SLACK: f64 = 1e-12;

/// Smallest `log s` for which a blow-up at `πj` is built explicitly.
const MIN_LOG_SCALE: f64 = -25.0;

/// `(z − x)/r` for every point, without clipping.
pub fn magnify_points(points: &[Vec2], x: Vec2, r: f64) -> Vec<Vec2> {
    points.iter().map(|&z| (z - x).scale(1.0 / r)).collect()
}

/// Points in the closed unit ball.
pub fn clip_to_unit_ball(points: &[Vec2]) -> Vec<Vec2> {
    points.iter().copied().filter(|p| p.norm() <= 1.0 + BALL_SLACK).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Magnified {
    pub points: Vec<Vec2>,
    /// The cloud is too coarse for this scale.
    pub resolution_flag: bool,
}

pub fn magnify(cloud: &AttractorCloud, x: Vec2, r: f64) -> Result<Magnified> {
    if !(r > 0.0) {
        return Err(Error::Parameter(format!("magnification scale must be positive, got {r}")));
    }
    Ok(Magnified {
        points: clip_to_unit_ball(&magnify_points(&cloud.points, x, r)),
        resolution_flag: cloud.diameter_bound / r > RESOLUTION_FLAG_RATIO,
    })
}

/// Hashed grid over a point set for nearest-neighbour queries.
struct PointGrid<'a> {
    points: &'a [Vec2],
    cell: f64,
    origin: Vec2,
    cells: HashMap<(i64, i64), Vec<u32>>,
    lo: (i64, i64),
    hi: (i64, i64),
}

impl<'a> PointGrid<'a> {
    fn new(points: &'a [Vec2]) -> Self {
        let (mut min, mut max) = (points[0], points[0]);
        for p in points {
            min = Vec2::new(min.x.min(p.x), min.y.min(p.y));
            max = Vec2::new(max.x.max(p.x), max.y.max(p.y));
        }
        let extent = (max.x - min.x).max(max.y - min.y);
        let cell = if extent > 0.0 { (extent / (points.len() as f64).sqrt()).max(extent * 1e-6) } else { 1.0 };
        let mut g = Self { points, cell, origin: min, cells: HashMap::new(), lo: (i64::MAX, i64::MAX), hi: (i64::MIN, i64::MIN) };
        for (i, &p) in points.iter().enumerate() {
            let k = g.key(p);
            g.lo = (g.lo.0.min(k.0), g.lo.1.min(k.1));
            g.hi = (g.hi.0.max(k.0), g.hi.1.max(k.1));
            g.cells.entry(k).or_default().push(i as u32);
        }
        g
    }

    fn key(&self, p: Vec2) -> (i64, i64) {
        (((p.x - self.origin.x) / self.cell).floor() as i64, ((p.y - self.origin.y) / self.cell).floor() as i64)
    }

    fn nearest(&self, p: Vec2) -> f64 {
        let (cx, cy) = self.key(p);
        let outside = (self.lo.0 - cx).max(cx - self.hi.0).max(self.lo.1 - cy).max(cy - self.hi.1).max(0);
        let mut best = f64::INFINITY;
        let mut ring = outside;
        loop {
            // cells at Chebyshev distance `ring` are at least (ring-1)·cell away
            if best.is_finite() && ((ring - 1) as f64) * self.cell > best {
                return best;
            }
            let mut visit = |x: i64, y: i64| {
                if let Some(ids) = self.cells.get(&(x, y)) {
                    for &i in ids {
                        best = best.min(p.dist(self.points[i as usize]));
                    }
                }
            };
            if ring == 0 {
                visit(cx, cy);
            } else {
                for x in cx - ring..=cx + ring {
                    visit(x, cy - ring);
                    visit(x, cy + ring);
                }
                for y in cy - ring + 1..cy + ring {
                    visit(cx - ring, y);
                    visit(cx + ring, y);
                }
            }
            ring += 1;
        }
    }
}

fn directed(p: &[Vec2], q: &[Vec2]) -> f64 {
    let grid = PointGrid::new(q);
    p.par_iter().map(|&a| grid.nearest(a)).reduce(|| 0.0, f64::max)
}

/// Hausdorff distance between two finite point sets.
pub fn hausdorff_distance(p: &[Vec2], q: &[Vec2]) -> Result<f64> {
    if p.is_empty() || q.is_empty() {
        return Err(Error::Parameter("Hausdorff distance needs two nonempty sets".into()));
    }
    Ok(directed(p, q).max(directed(q, p)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Provenance {
    PlainMagnification,
    Maintech { word_prefix: String, n: usize, log_s: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct TangentApprox {
    #[serde(skip)]
    pub points: Vec<Vec2>,
    pub base: Vec2,
    pub scale: f64,
    pub provenance: Provenance,
    pub theta1: Option<Direction>,
    /// Resolution of the underlying point set, in magnified units.
    pub resolution: f64,
    pub resolution_flag: bool,
}

impl TangentApprox {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y\n");
        for p in &self.points {
            s.push_str(&format!("{},{}\n", p.x, p.y));
        }
        s
    }

    /// JSON description without the points.
    pub fn sidecar_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

/// Part of `[a, b]` inside the disc of radius `rad` about `c`.
fn clip_segment(a: Vec2, b: Vec2, c: Vec2, rad: f64) -> Option<(Vec2, Vec2)> {
    let d = b - a;
    let f = a - c;
    let qa = d.norm_sq();
    if qa == 0.0 {
        return (f.norm() <= rad).then_some((a, b));
    }
    let qb = 2.0 * f.dot(d);
    let qc = f.norm_sq() - rad * rad;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let t0 = ((-qb - sq) / (2.0 * qa)).max(0.0);
    let t1 = ((-qb + sq) / (2.0 * qa)).min(1.0);
    (t0 <= t1).then(|| (a + d.scale(t0), a + d.scale(t1)))
}

/// Points of the attractor (image under `view`) within `radius` of `center`,
/// at the given resolution.
pub fn local_points(
    res: &Resolver,
    view: &AffineMap,
    center: Vec2,
    radius: f64,
    resolution: f64,
    max_nodes: u64,
) -> Result<Vec<Vec2>> {
    let mut out = Vec::new();
    res.resolve_in(
        view,
        resolution,
        max_nodes,
        |q| distance_to_quad(center, q) <= radius,
        |piece| match piece {
            Piece::Patch { point, .. } => out.push(point),
            Piece::Segment { a, b, .. } => {
                if let Some((a, b)) = clip_segment(a, b, center, radius + resolution) {
                    Piece::Segment { a, b, width: 0.0 }.sample(resolution, &mut out);
                }
            }
        },
    )?;
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct TangentOptions {
    /// Point-set resolution as a fraction of the scale.
    pub resolution_factor: f64,
    /// Cylinder visits allowed per scale.
    pub max_nodes: u64,
    pub theta1: Option<Direction>,
}

impl Default for TangentOptions {
    fn default() -> Self {
        Self { resolution_factor: TANGENT_RESOLUTION, max_nodes: 20_000_000, theta1: None }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TangentSequence {
    pub tangents: Vec<TangentApprox>,
    /// Hausdorff distance between consecutive elements.
    pub successive_distances: Vec<f64>,
    pub warning: Option<String>,
}

fn tangent_at(res: &Resolver, x: Vec2, r: f64, opts: &TangentOptions) -> Result<TangentApprox> {
    let rho = opts.resolution_factor * r;
    let pts = local_points(res, &AffineMap::IDENTITY, x, r, rho, opts.max_nodes)?;
    Ok(TangentApprox {
        points: clip_to_unit_ball(&magnify_points(&pts, x, r)),
        base: x,
        scale: r,
        provenance: Provenance::PlainMagnification,
        theta1: opts.theta1,
        resolution: opts.resolution_factor,
        resolution_flag: opts.resolution_factor > RESOLUTION_FLAG_RATIO,
    })
}

/// Magnifications at `x` for each scale in a decreasing list.
pub fn tangent_sequence(sys: &IfSystem, x: Vec2, scales: &[f64], opts: &TangentOptions) -> Result<TangentSequence> {
    let pairs: Vec<(Vec2, f64)> = scales.iter().map(|&r| (x, r)).collect();
    weak_tangent_sequence(sys, &pairs, opts)
}

/// As [`tangent_sequence`] with a base point per scale.
pub fn weak_tangent_sequence(sys: &IfSystem, pairs: &[(Vec2, f64)], opts: &TangentOptions) -> Result<TangentSequence> {
    if pairs.is_empty() {
        return Err(Error::Parameter("no scales given".into()));
    }
    for (k, &(_, r)) in pairs.iter().enumerate() {
        if !(r > 0.0) || (k > 0 && r >= pairs[k - 1].1) {
            return Err(Error::Parameter("scales must be positive and strictly decreasing".into()));
        }
    }
    let res = Resolver::new(sys);
    let results: Vec<Result<TangentApprox>> = pairs.par_iter().map(|&(x, r)| tangent_at(&res, x, r, opts)).collect();
    let mut tangents = Vec::new();
    let mut warning = None;
    for (k, t) in results.into_iter().enumerate() {
        match t {
            Ok(t) => tangents.push(t),
            Err(Error::BudgetExceeded { .. }) => {
                warning = Some(format!("cylinder budget exceeded at scale {}; sequence truncated to {k} elements", pairs[k].1));
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let successive_distances = tangents
        .windows(2)
        .map(|w| match (w[0].points.is_empty(), w[1].points.is_empty()) {
            (false, false) => hausdorff_distance(&w[0].points, &w[1].points).expect("nonempty"),
            (true, true) => 0.0,
            _ => f64::INFINITY,
        })
        .collect();
    Ok(TangentSequence { tangents, successive_distances, warning })
}

/// A base point `πi` for a random word `i`, with `ϑ₁(i)`.
#[derive(Clone, Debug, Serialize)]
pub struct BasePoint {
    pub word: Word,
    pub point: Vec2,
    pub theta1: Direction,
}

/// `πi` for `i` drawn from `nu` with sub-stream `index` of `seed`.
pub fn random_base(sys: &IfSystem, nu: &BernoulliMeasure, seed: u64, index: u64) -> Result<BasePoint> {
    let depth = sys.depth_for_resolution(1e-17 * sys.bounding_box.diameter()).max(8);
    let mut rng = sample_rng(seed, index);
    let word = Word(nu.draw_word(&mut rng, depth));
    let point = sys.canonical_point(&word)?;
    let theta1 = theta1(&sys.matrices(), word.symbols());
    Ok(BasePoint { word, point, theta1 })
}

/// Points rotated so that `ϑ₁` becomes the x-axis.
pub fn rotate_to_comb(t: &TangentApprox) -> Result<Vec<Vec2>> {
    let th = t.theta1.ok_or_else(|| Error::MissingDirection("tangent has no ϑ₁ direction".into()))?;
    Ok(t.points.iter().map(|p| p.rotate(-th.angle)).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct MaintechOptions {
    /// Radii `r_k`, strictly decreasing.
    pub radii: Vec<f64>,
    /// Longest prefix of the generic word searched for returns.
    pub max_prefix: usize,
    /// Build the tangent at the last step when it is numerically feasible.
    pub tangent: bool,
    pub resolution_factor: f64,
}

impl Default for MaintechOptions {
    fn default() -> Self {
        Self { radii: (1..=8).map(|k| 0.5 * 0.9f64.powi(k)).collect(), max_prefix: 20_000_000, tangent: true, resolution_factor: TANGENT_RESOLUTION }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MaintechStep {
    pub k: usize,
    pub r: f64,
    /// First return time of the shifted generic word to the target.
    pub n: usize,
    pub return_distance: f64,
    /// `log s_k`, with `s_k` the largest radius pulled back into `B(πi, r_k)`.
    pub log_s: f64,
    /// `(s_k / r_k)·‖A⁻¹‖`, which must lie in `[1 − 2⁻ᵏ, 1]`.
    pub norm_ratio: f64,
    pub bracket_ok: bool,
    /// Linear part of the composed map.
    pub g: Mat2,
    /// Least expanded direction of `g`.
    pub kernel: Direction,
    pub kernel_angle: f64,
    /// Angle between the most expanded image direction of `g` and `F`.
    pub image_angle: f64,
    /// Distance from `g` to the nearest of `±` the projection onto `ϑ₁⊥` along `ϑ₁`.
    pub projection_gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MaintechResult {
    pub steps: Vec<MaintechStep>,
    pub target_point: Vec2,
    pub theta1: Direction,
    pub tangent: Option<TangentApprox>,
    pub warning: Option<String>,
}

impl MaintechResult {
    /// Whether kernel angles are nonincreasing from step `burn_in` on.
    pub fn kernel_monotone(&self, burn_in: usize, tol: f64) -> bool {
        self.steps.iter().skip(burn_in).collect::<Vec<_>>().windows(2).all(|w| w[1].kernel_angle <= w[0].kernel_angle + tol)
    }
}

/// First `n ≥ start` with `|π(σⁿj) − p| < eps`, tested by refining the
/// bounding circles of `φ_{j_{n+1}} ∘ ⋯` until decided.
fn first_return(sys: &IfSystem, j: &mut WordStream, start: usize, p: Vec2, eps: f64, max_prefix: usize) -> Result<(usize, f64)> {
    let anchor = sys.anchor();
    let corners = sys.bounding_box.corners();
    let mut best = (f64::INFINITY, 0usize);
    for n in start.max(1)..max_prefix {
        let mut cur = AffineMap::IDENTITY;
        let mut m = 0;
        loop {
            cur = cur.then_inner(&sys.maps[j.symbol(n + m)]);
            m += 1;
            let c = cur.apply(anchor);
            let rad = corners.iter().map(|q| cur.apply(*q).dist(c)).fold(0.0, f64::max);
            let d = c.dist(p);
            if d < best.0 {
                best = (d, n);
            }
            if d - rad >= eps {
                break;
            }
            if d + rad < eps {
                return Ok((n, d));
            }
            if rad < eps * 1e-9 || m > 4096 {
                if d < eps {
                    return Ok((n, d));
                }
                break;
            }
        }
    }
    Err(Error::SearchExhausted(format!(
        "no return within {eps:e} of the target in the first {max_prefix} shifts; closest approach {:e} at shift {}",
        best.0, best.1
    )))
}

/// `max_{|u| ≤ 1} |d + σ E u|`.
fn ellipse_reach(d: Vec2, e: &Mat2, sigma: f64) -> f64 {
    let f = |t: f64| (d + e.apply(Vec2::new(t.cos(), t.sin())).scale(sigma)).norm();
    let n = 720;
    let mut bt = 0.0;
    let mut bv = f64::NEG_INFINITY;
    for i in 0..n {
        let t = std::f64::consts::TAU * i as f64 / n as f64;
        let v = f(t);
        if v > bv {
            bv = v;
            bt = t;
        }
    }
    // golden-section refinement around the best sample
    let h = std::f64::consts::TAU / n as f64;
    let (mut a, mut b) = (bt - h, bt + h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let c = b - g * (b - a);
        let dd = a + g * (b - a);
        if f(c) > f(dd) {
            b = dd;
        } else {
            a = c;
        }
    }
    bv.max(f(0.5 * (a + b)))
}

fn adjugate(m: &Mat2) -> Mat2 {
    Mat2::new(m.d, -m.b, -m.c, m.a)
}

/// Composed blow-ups along returns of a generic word `j` to a target
/// word `i`: for each radius `r_k`, the first return `n_k` of `σⁿj` to
/// within `2⁻ᵏ r_k` of `πi`, the radius `s_k`, and the linear part
/// `G_k = (s_k/r_k) A_{j|n_k}⁻¹` of `M_{πi,r_k} ∘ φ_{j|n_k}⁻¹ ∘ M_{πj,s_k}⁻¹`.
///
/// Products are handled in renormalized form, so long return times are
/// fine for the diagnostics. The tangent at `πj` is built only when the
/// last product is moderately conditioned.
pub fn maintech_tangent(
    sys: &IfSystem,
    target: &mut WordStream,
    generic: &mut WordStream,
    f: Direction,
    opts: &MaintechOptions,
) -> Result<MaintechResult> {
    if opts.radii.is_empty() {
        return Err(Error::Parameter("no radii given".into()));
    }
    for (k, &r) in opts.radii.iter().enumerate() {
        if !(r > 0.0) || (k > 0 && r >= opts.radii[k - 1]) {
            return Err(Error::Parameter("radii must be positive and strictly decreasing".into()));
        }
    }
    let mats = sys.matrices();
    let tdepth = sys.depth_for_resolution(1e-14 * sys.bounding_box.diameter()).max(8);
    let target_point = sys.canonical_point(&Word(target.prefix(tdepth).to_vec()))?;

    let mut raw = Vec::new();
    let mut start = 1;
    for (idx, &r) in opts.radii.iter().enumerate() {
        let k = idx + 1;
        let eps = r * 0.5f64.powi(k as i32);
        let (n, dist) = first_return(sys, generic, start, target_point, eps, opts.max_prefix)?;
        start = n;
        raw.push((k, r, n, dist));
    }
    let n_max = raw.last().expect("nonempty").2;
    let th_depth = n_max + tdepth;
    let theta = theta1(&mats, generic.prefix(th_depth));
    let ker_ref = theta;

    let mut steps = Vec::new();
    for &(k, r, n, dist) in &raw {
        let word = &generic.prefix(n)[..n];
        let prod = renormalized_product(&mats, word);
        let sign: f64 = word.iter().map(|&s| mats[s].det().signum()).product();
        let ahat = prod.matrix.scale(1.0 / prod.matrix.norm());
        // α₂ A⁻¹ = sign(det) · adj(Â), a unit-norm matrix
        let e = adjugate(&ahat).scale(sign);
        let tail_depth = tdepth;
        let shifted = generic.prefix(n + tail_depth)[n..].to_vec();
        let c = sys.canonical_point(&Word(shifted))?;
        let d = c - target_point;
        let (mut lo, mut hi) = (0.0, r + d.norm());
        while hi - lo > 1e-6 * hi {
            let mid = 0.5 * (lo + hi);
            if ellipse_reach(d, &e, mid) <= r {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let sigma = lo;
        let log_s = sigma.ln() + prod.log_alpha2();
        let norm_ratio = sigma / r;
        let bracket_ok = norm_ratio >= 1.0 - 0.5f64.powi(k as i32) - 1e-6 && norm_ratio <= 1.0 + 1e-9;
        let g = e.scale(sigma / r);
        let (top, image) = top_singular_dirs(&g);
        let kernel = top.perp();
        let proj = nproj(ker_ref);
        let projection_gap = (g - proj).norm().min((g + proj).norm());
        steps.push(MaintechStep {
            k,
            r,
            n,
            return_distance: dist,
            log_s,
            norm_ratio,
            bracket_ok,
            g,
            kernel,
            kernel_angle: kernel.dist(&ker_ref),
            image_angle: image.dist(&f),
            projection_gap,
        });
    }

    let mut warning = None;
    let mut tangent = None;
    if opts.tangent {
        // latest step whose blow-up is numerically representable
        let feasible = steps.iter().rev().find(|st| st.n <= 512 && st.log_s > MIN_LOG_SCALE);
        match feasible {
            Some(st) => {
                let word = Word(generic.prefix(st.n).to_vec());
                let m0 = sys.compose(&word)?;
                let s = st.log_s.exp();
                let jpoint = sys.canonical_point(&Word(generic.prefix(st.n + tdepth).to_vec()))?;
                let view = AffineMap::new(m0.matrix.scale(1.0 / s), (m0.translation - jpoint).scale(1.0 / s));
                let res = Resolver::new(sys);
                let pts = local_points(&res, &view, Vec2::ZERO, 1.0, opts.resolution_factor, 20_000_000)?;
                tangent = Some(TangentApprox {
                    points: clip_to_unit_ball(&pts),
                    base: jpoint,
                    scale: s,
                    provenance: Provenance::Maintech { word_prefix: word.to_string(), n: st.n, log_s: st.log_s },
                    theta1: Some(theta),
                    resolution: opts.resolution_factor,
                    resolution_flag: opts.resolution_factor > RESOLUTION_FLAG_RATIO,
                });
                if st.k != steps.len() {
                    warning = Some(format!("tangent built at step {} of {}; later scales are below double precision", st.k, steps.len()));
                }
            }
            None => warning = Some("no step has a blow-up scale representable in double precision".into()),
        }
    }
    Ok(MaintechResult { steps, target_point, theta1: theta, tangent, warning })
}

/// Projection onto `ϑ⊥` with kernel `ϑ`.
fn nproj(theta: Direction) -> Mat2 {
    let w = theta.perp().unit();
    Mat2::new(w.x * w.x, w.x * w.y, w.x * w.y, w.y * w.y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::{attractor_cloud, Budget};
    use crate::systems;

    #[test]
    fn hausdorff_basics() {
        let a = [Vec2::ZERO];
        let b = [Vec2::new(1.0, 0.0)];
        assert_eq!(hausdorff_distance(&a, &b).unwrap(), 1.0);
        assert_eq!(hausdorff_distance(&b, &b).unwrap(), 0.0);
        assert!(hausdorff_distance(&a, &[]).is_err());
    }

    #[test]
    fn hausdorff_shifted_grid() {
        let delta = 0.013;
        let grid: Vec<Vec2> = (0..20).flat_map(|i| (0..20).map(move |j| Vec2::new(i as f64 * 0.1, j as f64 * 0.1))).collect();
        let shifted: Vec<Vec2> = grid.iter().map(|p| *p + Vec2::new(delta, 0.0)).collect();
        assert!((hausdorff_distance(&grid, &shifted).unwrap() - delta).abs() < 1e-12);
    }

    #[test]
    fn hausdorff_matches_brute_force_far_points() {
        let p = vec![Vec2::new(0.0, 0.0), Vec2::new(5.0, 5.0), Vec2::new(-3.0, 2.0)];
        let q = vec![Vec2::new(0.1, 0.0), Vec2::new(0.2, 0.3), Vec2::new(0.15, 0.9)];
        let brute = |a: &[Vec2], b: &[Vec2]| a.iter().map(|x| b.iter().map(|y| x.dist(*y)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max);
        let want = brute(&p, &q).max(brute(&q, &p));
        assert!((hausdorff_distance(&p, &q).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn magnify_identity_and_flag() {
        let cloud = AttractorCloud { points: vec![Vec2::new(0.3, 0.4), Vec2::new(-0.5, 0.1)], depth: 0, diameter_bound: 0.0 };
        let m = magnify(&cloud, Vec2::ZERO, 1.0).unwrap();
        assert_eq!(m.points, cloud.points);
        assert!(!m.resolution_flag);
        let coarse = AttractorCloud { diameter_bound: 0.05, ..cloud };
        assert!(magnify(&coarse, Vec2::ZERO, 1.0).unwrap().resolution_flag);
        assert!(magnify(&coarse, Vec2::ZERO, 0.0).is_err());
    }

    #[test]
    fn whole_set_at_full_scale() {
        let sys = systems::square();
        let cloud = attractor_cloud(&sys, 4, &Budget::default()).unwrap();
        let x = sys.anchor();
        let r = sys.bounding_box.diameter();
        assert_eq!(magnify(&cloud, x, r).unwrap().points.len(), cloud.len());
    }

    #[test]
    fn rotation_to_comb() {
        let t = TangentApprox {
            points: vec![Vec2::new(0.0, 1.0)],
            base: Vec2::ZERO,
            scale: 1.0,
            provenance: Provenance::PlainMagnification,
            theta1: Some(Direction::y_axis()),
            resolution: 0.005,
            resolution_flag: false,
        };
        let p = rotate_to_comb(&t).unwrap()[0];
        assert!(p.dist(Vec2::new(1.0, 0.0)) < 1e-15);
        assert!(rotate_to_comb(&TangentApprox { theta1: None, ..t }).is_err());
    }

    #[test]
    fn cantor_fixed_point_tangents_repeat() {
        let sys = systems::cantor4();
        let scales: Vec<f64> = (1..5).map(|k| 0.25f64.powi(k)).collect();
        let seq = tangent_sequence(&sys, Vec2::ZERO, &scales, &TangentOptions::default()).unwrap();
        assert_eq!(seq.tangents.len(), 4);
        for d in &seq.successive_distances {
            assert!(*d < 0.011, "distance {d}");
        }
    }

    #[test]
    fn scales_must_decrease() {
        let sys = systems::square();
        assert!(tangent_sequence(&sys, Vec2::ZERO, &[0.1, 0.2], &TangentOptions::default()).is_err());
    }

    #[test]
    fn segment_clipping() {
        let (a, b) = clip_segment(Vec2::new(-2.0, 0.0), Vec2::new(2.0, 0.0), Vec2::ZERO, 1.0).unwrap();
        assert!(a.dist(Vec2::new(-1.0, 0.0)) < 1e-15 && b.dist(Vec2::new(1.0, 0.0)) < 1e-15);
        assert!(clip_segment(Vec2::new(-2.0, 2.0), Vec2::new(2.0, 2.0), Vec2::ZERO, 1.0).is_none());
    }
}
