//! Adaptive resolution of the attractor into small pieces.
//!
//! Cylinders are refined until their hull is below the requested
//! resolution. A cylinder that is thin (short side below the resolution)
//! but long is instead emitted as a segment when the projection of the
//! attractor onto its most expanded preimage direction has no gaps: its
//! contents then fill the segment up to the width of the cylinder.

use std::collections::HashMap;
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::ifs::{convex_hull, AffineMap, IfSystem, Walk};
use crate::linalg::Vec2;
use crate::semigroup::Direction;

/// Angular bin width for the projection-profile cache.
const PROFILE_BIN: f64 = 1e-3;

/// Cylinder count used for each projection profile.
const PROFILE_CYLINDERS: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Piece {
    /// Hull of a cylinder of diameter at most the resolution, with a point
    /// of the attractor inside it.
    Patch { corners: [Vec2; 4], point: Vec2 },
    /// Contents of a thin cylinder, within `width / 2` of segment `[a, b]`.
    Segment { a: Vec2, b: Vec2, width: f64 },
}

impl Piece {
    /// Points covering the piece at spacing at most `step`.
    pub fn sample(&self, step: f64, out: &mut Vec<Vec2>) {
        match *self {
            Piece::Patch { point, .. } => out.push(point),
            Piece::Segment { a, b, .. } => {
                let k = ((b - a).norm() / step).ceil().max(1.0) as usize;
                for j in 0..=k {
                    out.push(a + (b - a).scale(j as f64 / k as f64));
                }
            }
        }
    }
}

/// Refines a system into [`Piece`]s. Shared between threads; the profile
/// cache only stores deterministic values.
pub struct Resolver<'s> {
    sys: &'s IfSystem,
    segments: bool,
    hull: Vec<Vec2>,
    profile_depth: usize,
    profiles: Mutex<HashMap<i64, bool>>,
    /// Fixed point of the first map, a point of the attractor.
    anchor: Vec2,
}

impl<'s> Resolver<'s> {
    pub fn new(sys: &'s IfSystem) -> Self {
        let mut profile_depth = 3;
        while sys.len().pow(profile_depth as u32 + 1) <= PROFILE_CYLINDERS {
            profile_depth += 1;
        }
        if sys.len() == 1 {
            profile_depth = 3;
        }
        let mut corners = Vec::new();
        sys.walk_cylinders(|w, m| {
            if w.len() == profile_depth {
                corners.extend(sys.hull_corners(m));
                Walk::Stop
            } else {
                Walk::Descend
            }
        });
        let f = &sys.maps[0];
        let anchor = (crate::linalg::Mat2::IDENTITY - f.matrix)
            .inverse()
            .expect("contractions have a fixed point")
            .apply(f.translation);
        Self { sys, segments: true, hull: convex_hull(&corners), profile_depth, profiles: Mutex::new(HashMap::new()), anchor }
    }

    /// Plain refinement down to small hulls, without segment pieces.
    pub fn without_segments(sys: &'s IfSystem) -> Self {
        let mut r = Self::new(sys);
        r.segments = false;
        r
    }

    pub fn system(&self) -> &IfSystem {
        self.sys
    }

    /// Whether the projection `x ↦ v·x` of the attractor is gap-free,
    /// judged from cylinder hulls at three consecutive depths.
    fn profile_is_full(&self, dir: Direction) -> bool {
        let key = (dir.angle / PROFILE_BIN).round() as i64;
        if let Some(&full) = self.profiles.lock().expect("cache lock").get(&key) {
            return full;
        }
        let v = Direction::new(key as f64 * PROFILE_BIN).unit();
        let d = self.profile_depth;
        let mut raw: Vec<Vec<(f64, f64)>> = vec![Vec::new(); d + 1];
        self.sys.walk_cylinders(|w, m| {
            if w.len() + 2 >= d {
                let (lo, hi) = self
                    .sys
                    .hull_corners(m)
                    .iter()
                    .map(|c| v.dot(*c))
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), t| (a.min(t), b.max(t)));
                raw[w.len()].push((lo, hi));
            }
            if w.len() == d {
                Walk::Stop
            } else {
                Walk::Descend
            }
        });
        let tol = 1e-12 * self.sys.bounding_box.diameter();
        let full = raw[d.saturating_sub(2)..=d].iter_mut().all(|r| {
            r.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut reach = f64::NEG_INFINITY;
            for (k, &(lo, hi)) in r.iter().enumerate() {
                if k > 0 && lo > reach + tol {
                    return false;
                }
                reach = reach.max(hi);
            }
            true
        });
        self.profiles.lock().expect("cache lock").insert(key, full);
        full
    }

    /// Range of `v·x` over the attractor (outer approximation).
    fn support(&self, v: Vec2) -> (f64, f64) {
        self.hull
            .iter()
            .map(|p| v.dot(*p))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), t| (a.min(t), b.max(t)))
    }

    fn segment_of(&self, map: &AffineMap, resolution: f64) -> Option<Piece> {
        // `map` already includes the view, so its matrix acts on points of X
        let a = map.matrix;
        let (a1, _) = a.singular_values();
        let a2 = a.det().abs() / a1;
        let diam = self.sys.bounding_box.diameter();
        if a2 * diam > resolution / 2.0 || a1 * diam <= resolution {
            return None;
        }
        let s = a.transpose() * a;
        let q = 0.5 * (s.b + s.c);
        let vdir = Direction::new(0.5 * (2.0 * q).atan2(s.a - s.d));
        if !self.profile_is_full(vdir) {
            return None;
        }
        let v = vdir.unit();
        let w = v.perp();
        let (lo, hi) = self.support(v);
        let c = self.sys.bounding_box.center();
        let base = map.translation + a.apply(w.scale(w.dot(c)));
        Some(Piece::Segment { a: base + a.apply(v.scale(lo)), b: base + a.apply(v.scale(hi)), width: a2 * diam })
    }

    /// Emits pieces of size at most `resolution` covering the attractor
    /// inside the region accepted by `keep`. `keep` sees cylinder hull
    /// corners and must accept every hull meeting the region.
    pub fn resolve<K, E>(&self, resolution: f64, max_nodes: u64, keep: K, emit: E) -> Result<u64>
    where
        K: Fn(&[Vec2; 4]) -> bool,
        E: FnMut(Piece),
    {
        self.resolve_in(&AffineMap::IDENTITY, resolution, max_nodes, keep, emit)
    }

    /// As [`Resolver::resolve`], for the image of the attractor under `view`;
    /// sizes and pieces are measured after applying `view`.
    pub fn resolve_in<K, E>(&self, view: &AffineMap, resolution: f64, max_nodes: u64, keep: K, mut emit: E) -> Result<u64>
    where
        K: Fn(&[Vec2; 4]) -> bool,
        E: FnMut(Piece),
    {
        if !(resolution > 0.0) {
            return Err(Error::Parameter("resolution must be positive".into()));
        }
        let anchor = self.anchor;
        let mut nodes: u64 = 0;
        let mut over = false;
        self.sys.walk_cylinders(|_, m| {
            nodes += 1;
            if over || nodes > max_nodes {
                over = true;
                return Walk::Stop;
            }
            let m = &view.then_inner(m);
            let corners = self.sys.hull_corners(m);
            if !keep(&corners) {
                return Walk::Stop;
            }
            if self.sys.hull_diameter(m) <= resolution {
                emit(Piece::Patch { corners, point: m.apply(anchor) });
                return Walk::Stop;
            }
            if self.segments {
                if let Some(seg) = self.segment_of(m, resolution) {
                    emit(seg);
                    return Walk::Stop;
                }
            }
            Walk::Descend
        });
        if over {
            return Err(Error::BudgetExceeded { requested: nodes as u128, limit: max_nodes });
        }
        Ok(nodes)
    }
}

/// Distance from `p` to a convex quadrilateral (zero inside).
pub fn distance_to_quad(p: Vec2, q: &[Vec2; 4]) -> f64 {
    let mut sign = 0.0f64;
    let mut inside = true;
    for i in 0..4 {
        let c = (q[(i + 1) % 4] - q[i]).cross(p - q[i]);
        if c != 0.0 {
            if sign == 0.0 {
                sign = c.signum();
            } else if c.signum() != sign {
                inside = false;
                break;
            }
        }
    }
    if inside {
        return 0.0;
    }
    (0..4)
        .map(|i| {
            let (a, b) = (q[i], q[(i + 1) % 4]);
            let ab = b - a;
            let len2 = ab.norm_sq();
            let t = if len2 > 0.0 { ((p - a).dot(ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
            p.dist(a + ab.scale(t))
        })
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems;

    #[test]
    fn quad_distance() {
        let q = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0)];
        assert_eq!(distance_to_quad(Vec2::new(0.5, 0.5), &q), 0.0);
        assert!((distance_to_quad(Vec2::new(2.0, 0.5), &q) - 1.0).abs() < 1e-15);
        let mut r = q;
        r.reverse();
        assert_eq!(distance_to_quad(Vec2::new(0.5, 0.5), &r), 0.0);
    }

    #[test]
    fn carpet_uses_segments() {
        let sys = systems::carpet23();
        let res = Resolver::new(&sys);
        let mut segs = 0;
        let mut patches = 0;
        res.resolve(1e-3, 10_000_000, |_| true, |p| match p {
            Piece::Segment { .. } => segs += 1,
            Piece::Patch { .. } => patches += 1,
        })
        .unwrap();
        assert!(segs > 0);
        assert_eq!(patches, 0);
    }

    #[test]
    fn gapped_projection_refines_fully() {
        let sys = systems::carpet_missing_col();
        let res = Resolver::new(&sys);
        let mut segs = 0;
        res.resolve(1e-2, 10_000_000, |_| true, |p| {
            if matches!(p, Piece::Segment { .. }) {
                segs += 1
            }
        })
        .unwrap();
        assert_eq!(segs, 0);
    }

    #[test]
    fn segment_pieces_stay_near_cloud() {
        // every deep cloud point lies near some resolved piece
        let sys = systems::dominated3();
        let res = Resolver::new(&sys);
        let mut pts = Vec::new();
        res.resolve(2e-3, 10_000_000, |_| true, |p| p.sample(1e-3, &mut pts)).unwrap();
        let cloud = crate::ifs::attractor_cloud(&sys, 9, &crate::ifs::Budget::default()).unwrap();
        let d = crate::tangent::hausdorff_distance(&cloud.points, &pts).unwrap();
        assert!(d < cloud.diameter_bound + 4e-3, "hausdorff {d} vs {}", cloud.diameter_bound);
    }
}
