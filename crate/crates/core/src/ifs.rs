//! Words over the alphabet of an iterated function system, affine maps,
//! the attractor's cylinder approximation and the separation check.
//!
//! Symbols are stored 0-based (`0..N`). The textual form of a [`Word`] is
//! 1-based, so the word stored as `[0, 1]` prints as `12`.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat2, Vec2};

/// Default cap on enumerated cylinders.
pub const DEFAULT_BUDGET_POINTS: u64 = 10_000_000;

/// Environment variable overriding [`DEFAULT_BUDGET_POINTS`].
pub const BUDGET_ENV: &str = "ATL_BUDGET_POINTS";

/// A finite word; the empty word is allowed.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn repeat(symbol: usize, len: usize) -> Self {
        Word(vec![symbol; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[usize] {
        &self.0
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n.min(self.len())].to_vec())
    }

    pub fn reversed(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    /// Parses a 1-based textual word: either digits (`"1213"`) or a
    /// comma/space separated list (`"1, 12, 3"`).
    pub fn parse(text: &str) -> Result<Word> {
        let t = text.trim();
        if t.is_empty() || t == "∅" {
            return Ok(Word::empty());
        }
        let raw: Vec<usize> = if t.contains(',') || t.contains(' ') {
            t.split(|c| c == ',' || c == ' ')
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<usize>().map_err(|e| Error::Parse(format!("word {t:?}: {e}"))))
                .collect::<Result<_>>()?
        } else {
            t.chars()
                .map(|c| {
                    c.to_digit(10)
                        .map(|d| d as usize)
                        .ok_or_else(|| Error::Parse(format!("word {t:?}: bad symbol {c:?}")))
                })
                .collect::<Result<_>>()?
        };
        raw.iter()
            .enumerate()
            .map(|(position, &s)| {
                if s == 0 {
                    Err(Error::InvalidWord { symbol: 0, position, alphabet: 0 })
                } else {
                    Ok(s - 1)
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }

    /// Checks every symbol against an alphabet of size `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        for (position, &s) in self.0.iter().enumerate() {
            if s >= n {
                return Err(Error::InvalidWord { symbol: s + 1, position, alphabet: n });
            }
        }
        Ok(())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "∅");
        }
        if self.0.iter().all(|&s| s < 9) {
            for s in &self.0 {
                write!(f, "{}", s + 1)?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.0.iter().map(|s| (s + 1).to_string()).collect();
            write!(f, "{}", parts.join(","))
        }
    }
}

/// `x ↦ matrix·x + translation`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub matrix: Mat2,
    pub translation: Vec2,
}

impl AffineMap {
    pub const IDENTITY: AffineMap = AffineMap { matrix: Mat2::IDENTITY, translation: Vec2::ZERO };

    pub fn new(matrix: Mat2, translation: Vec2) -> Self {
        Self { matrix, translation }
    }

    pub fn apply(&self, p: Vec2) -> Vec2 {
        self.matrix.apply(p) + self.translation
    }

    /// `self ∘ inner`.
    pub fn then_inner(&self, inner: &AffineMap) -> AffineMap {
        AffineMap {
            matrix: self.matrix * inner.matrix,
            translation: self.matrix.apply(inner.translation) + self.translation,
        }
    }

    pub fn inverse(&self) -> Option<AffineMap> {
        let inv = self.matrix.inverse()?;
        Some(AffineMap { matrix: inv, translation: -inv.apply(self.translation) })
    }
}

/// Axis-aligned rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Vec2,
    pub max: Vec2,
}

impl Rect {
    pub fn new(min: Vec2, max: Vec2) -> Self {
        Self { min, max }
    }

    pub fn unit_square() -> Self {
        Self::new(Vec2::ZERO, Vec2::new(1.0, 1.0))
    }

    pub fn from_points<'a, I: IntoIterator<Item = &'a Vec2>>(points: I) -> Option<Rect> {
        let mut it = points.into_iter();
        let first = *it.next()?;
        let mut r = Rect::new(first, first);
        for p in it {
            r.min.x = r.min.x.min(p.x);
            r.min.y = r.min.y.min(p.y);
            r.max.x = r.max.x.max(p.x);
            r.max.y = r.max.y.max(p.y);
        }
        Some(r)
    }

    pub fn center(&self) -> Vec2 {
        (self.min + self.max).scale(0.5)
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn corners(&self) -> [Vec2; 4] {
        [
            self.min,
            Vec2::new(self.max.x, self.min.y),
            self.max,
            Vec2::new(self.min.x, self.max.y),
        ]
    }

    pub fn union(&self, other: &Rect) -> Rect {
        Rect::new(
            Vec2::new(self.min.x.min(other.min.x), self.min.y.min(other.min.y)),
            Vec2::new(self.max.x.max(other.max.x), self.max.y.max(other.max.y)),
        )
    }

    pub fn contains(&self, p: Vec2, tol: f64) -> bool {
        p.x >= self.min.x - tol && p.x <= self.max.x + tol && p.y >= self.min.y - tol && p.y <= self.max.y + tol
    }

    pub fn contains_rect(&self, other: &Rect, tol: f64) -> bool {
        self.contains(other.min, tol) && self.contains(other.max, tol)
    }

    pub fn inflate(&self, by: f64) -> Rect {
        Rect::new(self.min - Vec2::new(by, by), self.max + Vec2::new(by, by))
    }
}

/// How the bounding box of a system was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoxKind {
    /// `φ_i(box) ⊂ box` for every map.
    ForwardInvariant,
    /// Box of an invariant disc; contains the attractor but may not be
    /// mapped into itself.
    EnclosingDisc,
}

/// An iterated function system of contractive invertible affine maps.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IfSystem {
    pub name: String,
    pub maps: Vec<AffineMap>,
    pub bounding_box: Rect,
    pub box_kind: BoxKind,
}

#[derive(Serialize, Deserialize)]
struct MapSpec {
    matrix: [[f64; 2]; 2],
    translation: [f64; 2],
}

#[derive(Serialize, Deserialize)]
struct IfsFile {
    name: String,
    maps: Vec<MapSpec>,
}

impl IfSystem {
    /// Validates the maps and computes the bounding box.
    pub fn new(name: impl Into<String>, maps: Vec<AffineMap>) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::InvalidSystem("at least one map is required".into()));
        }
        for (index, m) in maps.iter().enumerate() {
            if !m.matrix.is_finite() || !m.translation.x.is_finite() || !m.translation.y.is_finite() {
                return Err(Error::InvalidMap { index, reason: "non-finite entry".into() });
            }
            let det = m.matrix.det();
            if det.abs() < 1e-300 {
                return Err(Error::InvalidMap { index, reason: "matrix is not invertible (det = 0)".into() });
            }
            let norm = m.matrix.norm();
            if norm >= 1.0 {
                return Err(Error::InvalidMap {
                    index,
                    reason: format!("matrix is not contractive (operator norm {norm} >= 1)"),
                });
            }
        }
        let (bounding_box, box_kind) = enclosing_box(&maps);
        Ok(Self { name: name.into(), maps, bounding_box, box_kind })
    }

    pub fn from_matrices(name: impl Into<String>, pairs: &[(Mat2, Vec2)]) -> Result<Self> {
        Self::new(name, pairs.iter().map(|&(m, v)| AffineMap::new(m, v)).collect())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: IfsFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let maps = file
            .maps
            .iter()
            .map(|m| AffineMap::new(m.matrix.into(), m.translation.into()))
            .collect();
        Self::new(file.name, maps)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let file = IfsFile {
            name: self.name.clone(),
            maps: self
                .maps
                .iter()
                .map(|m| MapSpec { matrix: m.matrix.into(), translation: m.translation.into() })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("plain data serializes")
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn matrices(&self) -> Vec<Mat2> {
        self.maps.iter().map(|m| m.matrix).collect()
    }

    pub fn max_norm(&self) -> f64 {
        self.maps.iter().map(|m| m.matrix.norm()).fold(0.0, f64::max)
    }

    /// Anchor used for cylinder representatives.
    pub fn anchor(&self) -> Vec2 {
        self.bounding_box.center()
    }

    /// Subsystem made of the listed maps (0-based indices).
    pub fn subsystem(&self, indices: &[usize]) -> Result<Self> {
        let maps = indices
            .iter()
            .map(|&i| self.maps.get(i).copied().ok_or(Error::InvalidWord { symbol: i + 1, position: 0, alphabet: self.len() }))
            .collect::<Result<Vec<_>>>()?;
        Self::new(format!("{}-sub", self.name), maps)
    }

    /// `φ_w = φ_{w_1} ∘ ⋯ ∘ φ_{w_n}`.
    pub fn compose(&self, w: &Word) -> Result<AffineMap> {
        w.validate(self.len())?;
        Ok(self.compose_symbols(w.symbols()))
    }

    pub(crate) fn compose_symbols(&self, symbols: &[usize]) -> AffineMap {
        symbols.iter().fold(AffineMap::IDENTITY, |acc, &s| acc.then_inner(&self.maps[s]))
    }

    /// `A_w = A_{w_1} ⋯ A_{w_n}`.
    pub fn matrix_product(&self, symbols: &[usize]) -> Mat2 {
        symbols.iter().fold(Mat2::IDENTITY, |acc, &s| acc * self.maps[s].matrix)
    }

    /// Diameter of the parallelogram `map(bounding_box)`.
    pub fn hull_diameter(&self, map: &AffineMap) -> f64 {
        let w = self.bounding_box.width();
        let h = self.bounding_box.height();
        let d1 = map.matrix.apply(Vec2::new(w, h)).norm();
        let d2 = map.matrix.apply(Vec2::new(w, -h)).norm();
        d1.max(d2)
    }

    /// Corners of `map(bounding_box)`, in boundary order.
    pub fn hull_corners(&self, map: &AffineMap) -> [Vec2; 4] {
        self.bounding_box.corners().map(|c| map.apply(c))
    }

    /// Point approximating `π([w])`; within [`Self::cylinder_error`] of
    /// every point of `φ_w(X)`.
    pub fn canonical_point(&self, w: &Word) -> Result<Vec2> {
        if w.is_empty() {
            return Err(Error::Parameter("canonical point needs a nonempty word".into()));
        }
        Ok(self.compose(w)?.apply(self.anchor()))
    }

    /// `diam(φ_w(box))`.
    pub fn cylinder_error(&self, w: &Word) -> Result<f64> {
        Ok(self.hull_diameter(&self.compose(w)?))
    }

    /// Depth-first traversal of cylinders in lexicographic order. The
    /// visitor sees the current word and `φ_word` and decides whether to
    /// descend. The empty word is visited first.
    pub fn walk_cylinders<F>(&self, mut visit: F)
    where
        F: FnMut(&[usize], &AffineMap) -> Walk,
    {
        let n = self.len();
        let mut word: Vec<usize> = Vec::new();
        // stack of (depth, symbol, map at that node)
        let mut stack: Vec<(usize, usize, AffineMap)> = Vec::new();
        if visit(&word, &AffineMap::IDENTITY) == Walk::Descend {
            for s in (0..n).rev() {
                stack.push((0, s, self.maps[s]));
            }
        }
        while let Some((depth, s, map)) = stack.pop() {
            word.truncate(depth);
            word.push(s);
            if visit(&word, &map) == Walk::Descend {
                for t in (0..n).rev() {
                    stack.push((depth + 1, t, map.then_inner(&self.maps[t])));
                }
            }
        }
    }

    /// All depth-`depth` cylinder maps in lexicographic order.
    pub fn cylinders(&self, depth: usize, budget: &Budget) -> Result<Vec<AffineMap>> {
        budget.check(self.len(), depth)?;
        let mut out = Vec::with_capacity(self.len().pow(depth as u32));
        self.walk_cylinders(|w, m| {
            if w.len() == depth {
                out.push(*m);
                Walk::Stop
            } else {
                Walk::Descend
            }
        });
        Ok(out)
    }

    /// Largest `diam(φ_w(box))` over words of length `depth`.
    pub fn diameter_bound(&self, depth: usize, budget: &Budget) -> Result<f64> {
        if budget.check(self.len(), depth).is_err() {
            // analytic bound when enumeration is too large
            return Ok(self.max_norm().powi(depth as i32) * self.bounding_box.diameter());
        }
        let mut best: f64 = 0.0;
        self.walk_cylinders(|w, m| {
            if w.len() == depth {
                best = best.max(self.hull_diameter(m));
                Walk::Stop
            } else {
                Walk::Descend
            }
        });
        Ok(best)
    }

    /// Smallest depth whose [`Self::diameter_bound`] is at most `target`,
    /// using the analytic bound `max‖A_i‖^n · diam(box)`.
    pub fn depth_for_resolution(&self, target: f64) -> usize {
        let rho = self.max_norm();
        let diam = self.bounding_box.diameter();
        if diam <= target {
            return 0;
        }
        ((target / diam).ln() / rho.ln()).ceil().max(0.0) as usize
    }
}

/// Traversal control for [`IfSystem::walk_cylinders`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Walk {
    Descend,
    Stop,
}

/// Limit on enumerated cylinders.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Budget {
    pub max_points: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Self { max_points: DEFAULT_BUDGET_POINTS }
    }
}

impl Budget {
    pub fn new(max_points: u64) -> Self {
        Self { max_points }
    }

    /// Reads `ATL_BUDGET_POINTS`, falling back to the default.
    pub fn from_env() -> Self {
        std::env::var(BUDGET_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<u64>().ok())
            .map(Budget::new)
            .unwrap_or_default()
    }

    pub fn check(&self, alphabet: usize, depth: usize) -> Result<()> {
        let requested = (alphabet as u128).checked_pow(depth as u32).unwrap_or(u128::MAX);
        if requested > self.max_points as u128 {
            return Err(Error::BudgetExceeded { requested, limit: self.max_points });
        }
        Ok(())
    }

    pub fn check_count(&self, requested: u128) -> Result<()> {
        if requested > self.max_points as u128 {
            return Err(Error::BudgetExceeded { requested, limit: self.max_points });
        }
        Ok(())
    }
}

/// Box containing the attractor: a forward-invariant box when the monotone
/// box iteration converges, otherwise the box of an invariant disc.
fn enclosing_box(maps: &[AffineMap]) -> (Rect, BoxKind) {
    let fixed: Vec<Vec2> = maps.iter().filter_map(fixed_point).collect();
    let mut b = Rect::from_points(&fixed).unwrap_or(Rect::new(Vec2::ZERO, Vec2::ZERO));
    for _ in 0..200 {
        let mut next = b;
        for m in maps {
            let img = Rect::from_points(&b.corners().map(|c| m.apply(c))).expect("four corners");
            next = next.union(&img);
        }
        let grow = (next.min - b.min).norm() + (next.max - b.max).norm();
        b = next;
        let scale = b.diameter().max(1.0);
        if grow <= 1e-12 * scale {
            // absorb rounding so the inclusion holds exactly
            let b = b.inflate(1e-12 * scale);
            return (b, BoxKind::ForwardInvariant);
        }
        if !b.diameter().is_finite() || b.diameter() > 1e12 {
            break;
        }
    }
    // invariant disc around the centroid of the fixed points
    let c = fixed.iter().fold(Vec2::ZERO, |acc, p| acc + *p).scale(1.0 / fixed.len().max(1) as f64);
    let rho = maps.iter().map(|m| m.matrix.norm()).fold(0.0, f64::max);
    let reach = maps.iter().map(|m| (m.apply(c) - c).norm()).fold(0.0, f64::max);
    let r = reach / (1.0 - rho) * (1.0 + 1e-9) + 1e-12;
    (Rect::new(c - Vec2::new(r, r), c + Vec2::new(r, r)), BoxKind::EnclosingDisc)
}

fn fixed_point(m: &AffineMap) -> Option<Vec2> {
    // (I - A) p = v
    let ia = Mat2::IDENTITY - m.matrix;
    ia.inverse().map(|inv| inv.apply(m.translation))
}

/// Depth-`n` cylinder representatives `φ_w(anchor)`.
#[derive(Clone, Debug, Serialize)]
pub struct AttractorCloud {
    pub points: Vec<Vec2>,
    pub depth: usize,
    /// Largest cylinder hull diameter at this depth.
    pub diameter_bound: f64,
}

impl AttractorCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// One representative per depth-`depth` cylinder, lexicographic order.
pub fn attractor_cloud(sys: &IfSystem, depth: usize, budget: &Budget) -> Result<AttractorCloud> {
    budget.check(sys.len(), depth)?;
    let anchor = sys.anchor();
    let mut points = Vec::with_capacity(sys.len().pow(depth as u32));
    let mut diameter_bound: f64 = 0.0;
    sys.walk_cylinders(|w, m| {
        if w.len() == depth {
            points.push(m.apply(anchor));
            diameter_bound = diameter_bound.max(sys.hull_diameter(m));
            Walk::Stop
        } else {
            Walk::Descend
        }
    });
    Ok(AttractorCloud { points, depth, diameter_bound })
}

/// Word of the `index`-th depth-`depth` cylinder in lexicographic order.
pub fn word_of_index(index: usize, alphabet: usize, depth: usize) -> Word {
    let mut w = vec![0; depth];
    let mut r = index;
    for k in (0..depth).rev() {
        w[k] = r % alphabet;
        r /= alphabet;
    }
    Word(w)
}

/// Which reading of the hull gap applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeparationRegime {
    /// Gap exceeds twice the cylinder diameter: the images are disjoint.
    Certified,
    /// Positive gap above the margin but below cloud resolution.
    BelowResolution,
    /// Images share cloud points: the images intersect at this resolution.
    Coincident,
    /// Hulls meet but no shared points; hull distance cannot decide.
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparationReport {
    pub holds: bool,
    pub min_gap: f64,
    pub regime: SeparationRegime,
    pub diameter_bound: f64,
    pub depth: usize,
    pub margin: f64,
    /// 1-based pair attaining the minimum gap.
    pub closest_pair: (usize, usize),
}

/// Distances between the convex hulls of the depth-`depth` cylinder
/// images inside each first-level piece `φ_i(X)`.
pub fn check_strong_separation(sys: &IfSystem, depth: usize, margin: f64, budget: &Budget) -> Result<SeparationReport> {
    if depth == 0 {
        return Err(Error::Parameter("separation check needs depth >= 1".into()));
    }
    let n = sys.len();
    if n == 1 {
        let diameter_bound = sys.diameter_bound(depth, budget)?;
        return Ok(SeparationReport {
            holds: true,
            min_gap: f64::INFINITY,
            regime: SeparationRegime::Certified,
            diameter_bound,
            depth,
            margin,
            closest_pair: (1, 1),
        });
    }
    budget.check_count((n as u128).saturating_pow(depth as u32).saturating_mul(4))?;
    let anchor = sys.anchor();
    // per first symbol: cylinder representatives and cylinder hull corners
    let mut pieces: Vec<Vec<Vec2>> = vec![Vec::new(); n];
    let mut corners: Vec<Vec<Vec2>> = vec![Vec::new(); n];
    sys.walk_cylinders(|w, m| {
        if w.len() == depth {
            pieces[w[0]].push(m.apply(anchor));
            corners[w[0]].extend(sys.hull_corners(m));
            Walk::Stop
        } else {
            Walk::Descend
        }
    });
    let hulls: Vec<Vec<Vec2>> = corners.iter().map(|p| convex_hull(p)).collect();
    let diameter_bound = sys.diameter_bound(depth, budget)?;

    let mut min_gap = f64::INFINITY;
    let mut closest_pair = (1, 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let g = polygon_distance(&hulls[i], &hulls[j]);
            if g < min_gap {
                min_gap = g;
                closest_pair = (i + 1, j + 1);
            }
        }
    }
    let holds = min_gap > margin;
    let regime = if min_gap > 2.0 * diameter_bound {
        SeparationRegime::Certified
    } else if holds {
        SeparationRegime::BelowResolution
    } else {
        let tol = margin.max(1e-12 * sys.bounding_box.diameter());
        let shared = (0..n).any(|i| ((i + 1)..n).any(|j| point_sets_meet(&pieces[i], &pieces[j], tol)));
        if shared {
            SeparationRegime::Coincident
        } else {
            SeparationRegime::Inconclusive
        }
    };
    Ok(SeparationReport { holds, min_gap, regime, diameter_bound, depth, margin, closest_pair })
}

/// Whether some `p ∈ a`, `q ∈ b` satisfy `|p - q| <= tol`.
fn point_sets_meet(a: &[Vec2], b: &[Vec2], tol: f64) -> bool {
    let cell = tol.max(1e-300);
    let key = |p: &Vec2| ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64);
    let mut grid: std::collections::HashMap<(i64, i64), Vec<Vec2>> = std::collections::HashMap::new();
    for p in b {
        grid.entry(key(p)).or_default().push(*p);
    }
    a.iter().any(|p| {
        let (kx, ky) = key(p);
        (-1..=1).any(|dx| {
            (-1..=1).any(|dy| {
                grid.get(&(kx + dx, ky + dy))
                    .is_some_and(|cell_pts| cell_pts.iter().any(|q| p.dist(*q) <= tol))
            })
        })
    })
}

/// Convex hull, counter-clockwise, without collinear points.
pub fn convex_hull(points: &[Vec2]) -> Vec<Vec2> {
    let mut pts: Vec<Vec2> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let turn = |o: Vec2, a: Vec2, b: Vec2| (a - o).cross(b - o);
    let mut lower: Vec<Vec2> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && turn(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Vec2> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && turn(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sq();
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a + ab.scale(t))
}

fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let o = |p: Vec2, q: Vec2, r: Vec2| (q - p).cross(r - p);
    let d1 = o(c, d, a);
    let d2 = o(c, d, b);
    let d3 = o(a, b, c);
    let d4 = o(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |p: Vec2, q: Vec2, r: Vec2| point_segment_distance(r, p, q) == 0.0;
    on(c, d, a) || on(c, d, b) || on(a, b, c) || on(a, b, d)
}

fn point_in_convex(p: Vec2, poly: &[Vec2]) -> bool {
    if poly.len() < 3 {
        return false;
    }
    (0..poly.len()).all(|i| (poly[(i + 1) % poly.len()] - poly[i]).cross(p - poly[i]) >= 0.0)
}

fn edges(poly: &[Vec2]) -> Vec<(Vec2, Vec2)> {
    match poly.len() {
        0 => vec![],
        1 => vec![(poly[0], poly[0])],
        2 => vec![(poly[0], poly[1])],
        n => (0..n).map(|i| (poly[i], poly[(i + 1) % n])).collect(),
    }
}

/// Euclidean distance between two convex polygons (0 when they meet).
pub fn polygon_distance(p: &[Vec2], q: &[Vec2]) -> f64 {
    if p.is_empty() || q.is_empty() {
        return f64::INFINITY;
    }
    if p.iter().any(|&v| point_in_convex(v, q)) || q.iter().any(|&v| point_in_convex(v, p)) {
        return 0.0;
    }
    let ep = edges(p);
    let eq = edges(q);
    let mut best = f64::INFINITY;
    for &(a, b) in &ep {
        for &(c, d) in &eq {
            if segments_intersect(a, b, c, d) {
                return 0.0;
            }
            best = best
                .min(point_segment_distance(a, c, d))
                .min(point_segment_distance(b, c, d))
                .min(point_segment_distance(c, a, b))
                .min(point_segment_distance(d, a, b));
        }
    }
    best
}

/// Distinct points of `points`, keyed on exact coordinates.
pub fn dedup_points(points: &[Vec2]) -> Vec<Vec2> {
    let mut seen = HashSet::new();
    points
        .iter()
        .copied()
        .filter(|p| seen.insert((p.x.to_bits(), p.y.to_bits())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_map() -> IfSystem {
        IfSystem::from_matrices("half", &[(Mat2::diag(0.5, 0.5), Vec2::new(1.0, 0.0))]).unwrap()
    }

    #[test]
    fn word_text_round_trip() {
        let w = Word::parse("1213").unwrap();
        assert_eq!(w.symbols(), &[0, 1, 0, 2]);
        assert_eq!(w.to_string(), "1213");
        assert_eq!(Word::parse("10, 2").unwrap().symbols(), &[9, 1]);
        assert!(Word::parse("102").is_err());
        assert_eq!(Word::empty().to_string(), "∅");
    }

    #[test]
    fn compose_empty_is_identity() {
        let sys = half_map();
        assert_eq!(sys.compose(&Word::empty()).unwrap(), AffineMap::IDENTITY);
    }

    #[test]
    fn compose_rejects_out_of_range_symbol() {
        let sys = half_map();
        let err = sys.compose(&Word(vec![0, 1])).unwrap_err();
        assert!(matches!(err, Error::InvalidWord { symbol: 2, position: 1, alphabet: 1 }));
    }

    #[test]
    fn geometric_series_fixed_point() {
        // φ(x) = x/2 + (1,0) fixes (2,0); φ^k(anchor) approaches it like 2^{1-k}
        let sys = half_map();
        for k in [1usize, 5, 20] {
            let p = sys.canonical_point(&Word::repeat(0, k)).unwrap();
            let err = sys.cylinder_error(&Word::repeat(0, k)).unwrap();
            assert!(p.dist(Vec2::new(2.0, 0.0)) <= 2f64.powi(1 - k as i32) + 1e-12);
            assert!(p.dist(Vec2::new(2.0, 0.0)) <= err + 1e-12);
        }
    }

    #[test]
    fn cloud_counts() {
        let sys = IfSystem::from_matrices(
            "three",
            &[
                (Mat2::diag(0.3, 0.3), Vec2::new(0.0, 0.0)),
                (Mat2::diag(0.3, 0.3), Vec2::new(0.7, 0.0)),
                (Mat2::diag(0.3, 0.3), Vec2::new(0.0, 0.7)),
            ],
        )
        .unwrap();
        let b = Budget::default();
        assert_eq!(attractor_cloud(&sys, 2, &b).unwrap().len(), 9);
        let c0 = attractor_cloud(&sys, 0, &b).unwrap();
        assert_eq!(c0.points, vec![sys.anchor()]);
        assert!(matches!(
            attractor_cloud(&sys, 20, &Budget::new(1000)),
            Err(Error::BudgetExceeded { limit: 1000, .. })
        ));
    }

    #[test]
    fn json_rejects_bad_maps_with_index() {
        let bad = r#"{"name":"x","maps":[
            {"matrix":[[0.5,0],[0,0.5]],"translation":[0,0]},
            {"matrix":[[1,2],[2,4]],"translation":[0,0]}]}"#;
        match IfSystem::from_json(bad) {
            Err(Error::InvalidMap { index: 1, reason }) => assert!(reason.contains("invertible")),
            other => panic!("unexpected {other:?}"),
        }
        let expanding = r#"{"name":"x","maps":[{"matrix":[[1.5,0],[0,0.5]],"translation":[0,0]}]}"#;
        assert!(matches!(IfSystem::from_json(expanding), Err(Error::InvalidMap { index: 0, .. })));
    }

    #[test]
    fn invariant_box_for_unit_square_maps() {
        let sys = IfSystem::from_matrices(
            "square",
            &[
                (Mat2::diag(0.5, 0.5), Vec2::new(0.0, 0.0)),
                (Mat2::diag(0.5, 0.5), Vec2::new(0.5, 0.5)),
            ],
        )
        .unwrap();
        assert_eq!(sys.box_kind, BoxKind::ForwardInvariant);
        assert!(sys.bounding_box.contains_rect(&Rect::unit_square(), 1e-9));
        assert!(Rect::unit_square().inflate(1e-9).contains_rect(&sys.bounding_box, 0.0));
    }

    #[test]
    fn rotating_maps_fall_back_to_disc() {
        let r = Mat2::scaled_rotation(0.9, std::f64::consts::FRAC_PI_4);
        let sys = IfSystem::from_matrices("rot", &[(r, Vec2::new(1.0, 0.0)), (r, Vec2::new(-1.0, 0.5))]).unwrap();
        // every cloud point still lies in the box
        let cloud = attractor_cloud(&sys, 8, &Budget::default()).unwrap();
        assert!(cloud.points.iter().all(|p| sys.bounding_box.contains(*p, 1e-9)));
    }

    #[test]
    fn polygon_distance_cases() {
        let sq = |x: f64, y: f64| vec![Vec2::new(x, y), Vec2::new(x + 1.0, y), Vec2::new(x + 1.0, y + 1.0), Vec2::new(x, y + 1.0)];
        assert_eq!(polygon_distance(&sq(0.0, 0.0), &sq(0.5, 0.5)), 0.0);
        assert!((polygon_distance(&sq(0.0, 0.0), &sq(3.0, 0.0)) - 2.0).abs() < 1e-15);
        assert!((polygon_distance(&sq(0.0, 0.0), &sq(2.0, 2.0)) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(polygon_distance(&sq(0.0, 0.0), &sq(1.0, 0.0)), 0.0);
    }

    #[test]
    fn coincident_images_fail_separation() {
        let sys = IfSystem::from_matrices(
            "twins",
            &[(Mat2::diag(0.5, 0.5), Vec2::ZERO), (Mat2::diag(0.5, 0.5), Vec2::ZERO)],
        )
        .unwrap();
        let r = check_strong_separation(&sys, 3, 1e-9, &Budget::default()).unwrap();
        assert_eq!(r.min_gap, 0.0);
        assert!(!r.holds);
        assert_eq!(r.regime, SeparationRegime::Coincident);
    }
}
