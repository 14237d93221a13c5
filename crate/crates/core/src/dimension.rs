//! Box-counting and Assouad dimension estimators.
//!
//! All estimates are least-squares slopes of log counts against log
//! scales. The Assouad estimators take the supremum of slopes over
//! windows of consecutive scales, and report where it was attained.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::ergodic::BernoulliMeasure;
use crate::error::{Error, Result};
use crate::geometry::hull_meets_line;
use crate::ifs::{Budget, IfSystem, Rect, Walk};
use crate::linalg::{linear_fit, Vec2};
use crate::pieces::{distance_to_quad, Piece, Resolver};
use crate::semigroup::{Direction, DirectionSet};
use crate::tangent::{random_base, TangentApprox};

/// Regressions need at least this many scales.
pub const MIN_SCALES: usize = 4;

/// Windowed estimators use at least this many consecutive scales.
pub const MIN_WINDOW: usize = 5;

/// Fits below this quality are tagged low-confidence.
pub const R2_CONFIDENT: f64 = 0.98;

/// Pieces are resolved to this multiple of the cell size.
pub const PIECE_FACTOR: f64 = 1.0;

/// Occupied cells of a square grid.
#[derive(Clone, Debug)]
pub struct CoverGrid {
    pub cell_size: f64,
    pub origin: Vec2,
    pub occupied: HashSet<(i64, i64)>,
}

impl CoverGrid {
    pub fn new(origin: Vec2, cell_size: f64) -> Self {
        assert!(cell_size > 0.0, "cell size must be positive");
        Self { cell_size, origin, occupied: HashSet::new() }
    }

    pub fn count(&self) -> usize {
        self.occupied.len()
    }

    fn coord(&self, v: f64, o: f64) -> i64 {
        ((v - o) / self.cell_size).floor() as i64
    }

    pub fn insert_point(&mut self, p: Vec2) {
        self.occupied.insert((self.coord(p.x, self.origin.x), self.coord(p.y, self.origin.y)));
    }

    /// Marks every cell meeting a convex polygon.
    pub fn insert_convex(&mut self, poly: &[Vec2]) {
        self.insert_convex_within(poly, None);
    }

    /// As [`CoverGrid::insert_convex`], skipping cells outside `window`.
    pub fn insert_convex_within(&mut self, poly: &[Vec2], window: Option<&Rect>) {
        let (mut xmin, mut xmax) = poly.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.x), b.max(p.x)));
        if let Some(w) = window {
            xmin = xmin.max(w.min.x);
            xmax = xmax.min(w.max.x);
            if xmin > xmax {
                return;
            }
        }
        let (i0, i1) = (self.coord(xmin, self.origin.x), self.coord(xmax, self.origin.x));
        for i in i0..=i1 {
            let x0 = self.origin.x + i as f64 * self.cell_size;
            let x1 = x0 + self.cell_size;
            if let Some((mut ylo, mut yhi)) = strip_extent(poly, x0, x1) {
                if let Some(w) = window {
                    ylo = ylo.max(w.min.y);
                    yhi = yhi.min(w.max.y);
                    if ylo > yhi {
                        continue;
                    }
                }
                let (j0, j1) = (self.coord(ylo, self.origin.y), self.coord(yhi, self.origin.y));
                for j in j0..=j1 {
                    self.occupied.insert((i, j));
                }
            }
        }
    }

    /// Lower-left corner of a cell.
    pub fn cell_corner(&self, cell: (i64, i64)) -> Vec2 {
        Vec2::new(self.origin.x + cell.0 as f64 * self.cell_size, self.origin.y + cell.1 as f64 * self.cell_size)
    }

    /// Number of cells meeting the closed disc `B(x, r)`.
    pub fn count_in_ball(&self, x: Vec2, r: f64) -> usize {
        self.occupied
            .iter()
            .filter(|&&c| {
                let lo = self.cell_corner(c);
                let dx = (lo.x - x.x).max(x.x - lo.x - self.cell_size).max(0.0);
                let dy = (lo.y - x.y).max(x.y - lo.y - self.cell_size).max(0.0);
                dx * dx + dy * dy <= r * r
            })
            .count()
    }

    pub fn merge(&mut self, other: &CoverGrid) {
        self.occupied.extend(other.occupied.iter().copied());
    }
}

/// `y`-range of a convex polygon within the strip `x0 ≤ x ≤ x1`.
fn strip_extent(poly: &[Vec2], x0: f64, x1: f64) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let n = poly.len();
    for k in 0..n {
        let (a, b) = (poly[k], poly[(k + 1) % n]);
        if a.x >= x0 && a.x <= x1 {
            lo = lo.min(a.y);
            hi = hi.max(a.y);
        }
        if a.x != b.x {
            for x in [x0, x1] {
                let t = (x - a.x) / (b.x - a.x);
                if (0.0..=1.0).contains(&t) {
                    let y = a.y + t * (b.y - a.y);
                    lo = lo.min(y);
                    hi = hi.max(y);
                }
            }
        }
    }
    (lo <= hi).then_some((lo, hi))
}

fn piece_polygon(p: &Piece) -> Vec<Vec2> {
    match *p {
        Piece::Patch { corners, .. } => corners.to_vec(),
        Piece::Segment { a, b, width } => {
            let d = b - a;
            let n = if d.norm() > 0.0 { d.normalized().perp().scale(width / 2.0) } else { Vec2::new(width / 2.0, 0.0) };
            vec![a + n, b + n, b - n, a - n]
        }
    }
}

/// Occupied-cell counts at one scale.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BoxCount {
    pub delta: f64,
    /// Cells meeting resolved hulls (upper estimate).
    pub hull: usize,
    /// Cells containing attractor points (lower estimate).
    pub point: usize,
}

/// Cell count of a point set.
pub fn box_count_points(points: &[Vec2], origin: Vec2, delta: f64) -> usize {
    let mut g = CoverGrid::new(origin, delta);
    for &p in points {
        g.insert_point(p);
    }
    g.count()
}

fn grids_at(res: &Resolver, delta: f64, max_nodes: u64, keep: impl Fn(&[Vec2; 4]) -> bool) -> Result<(CoverGrid, CoverGrid, u64)> {
    let origin = res.system().bounding_box.min;
    let mut hull = CoverGrid::new(origin, delta);
    let mut point = CoverGrid::new(origin, delta);
    let mut samples = Vec::new();
    let nodes = res.resolve(PIECE_FACTOR * delta, max_nodes, keep, |p| {
        hull.insert_convex(&piece_polygon(&p));
        samples.clear();
        p.sample(delta / 2.0, &mut samples);
        for &s in &samples {
            point.insert_point(s);
        }
    })?;
    Ok((hull, point, nodes))
}

/// Hull-mode cells meeting `B(x, big)` at cell size `delta`.
fn local_count(res: &Resolver, x: Vec2, big: f64, delta: f64, max_nodes: u64) -> Result<usize> {
    let mut hull = CoverGrid::new(res.system().bounding_box.min, delta);
    let window = Rect::new(x - Vec2::new(big, big), x + Vec2::new(big, big));
    res.resolve(PIECE_FACTOR * delta, max_nodes, |q| distance_to_quad(x, q) <= big, |p| {
        hull.insert_convex_within(&piece_polygon(&p), Some(&window));
    })?;
    Ok(hull.count_in_ball(x, big))
}

/// Hull- and point-mode counts of the attractor at scale `delta`.
pub fn box_count(sys: &IfSystem, delta: f64, budget: &Budget) -> Result<BoxCount> {
    if !(delta > 0.0) {
        return Err(Error::Parameter("cell size must be positive".into()));
    }
    let res = Resolver::new(sys);
    let (h, p, _) = grids_at(&res, delta, budget.max_points, |_| true)?;
    Ok(BoxCount { delta, hull: h.count(), point: p.count() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    BoxCounting,
    AssouadDirect,
    AssouadFormula,
    TangentSup,
}

/// Where a supremum was attained.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Witness {
    pub base: Option<Vec2>,
    pub radius: Option<f64>,
    pub small_scale: Option<f64>,
    pub direction: Option<Direction>,
    pub tangent_index: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegressionRow {
    /// `log(1/scale)` or `log(R/r)`.
    pub log_scale: f64,
    pub log_count: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DimensionEstimate {
    pub value: f64,
    pub method: Method,
    pub scale_range: (f64, f64),
    pub fit_r2: f64,
    pub params: serde_json::Value,
    pub witness: Option<Witness>,
    /// Regression table of the reported fit.
    pub table: Vec<RegressionRow>,
    pub low_confidence: bool,
    pub warnings: Vec<String>,
}

impl DimensionEstimate {
    pub fn table_csv(&self) -> String {
        let mut s = String::from("log_scale,log_count\n");
        for r in &self.table {
            s.push_str(&format!("{},{}\n", r.log_scale, r.log_count));
        }
        s
    }
}

fn clamp_dim(v: f64, warnings: &mut Vec<String>) -> f64 {
    if v > 2.0 || v < 0.0 {
        warnings.push(format!("raw slope {v:.4} clamped to [0, 2]"));
    }
    v.clamp(0.0, 2.0)
}

fn fit(table: &[RegressionRow]) -> (f64, f64) {
    let xs: Vec<f64> = table.iter().map(|r| r.log_scale).collect();
    let ys: Vec<f64> = table.iter().map(|r| r.log_count).collect();
    let (slope, _, r2) = linear_fit(&xs, &ys);
    let r2 = if r2.is_finite() { r2.clamp(0.0, 1.0) } else { 1.0 };
    (slope, r2)
}

/// Largest slope over windows of at least `min_window` consecutive rows.
fn window_sup(table: &[RegressionRow], min_window: usize) -> Option<(f64, f64, usize, usize)> {
    let mut best: Option<(f64, f64, usize, usize)> = None;
    for a in 0..table.len() {
        for b in a + min_window..=table.len() {
            let (s, r2) = fit(&table[a..b]);
            if best.map_or(true, |(bs, ..)| s > bs) {
                best = Some((s, r2, a, b));
            }
        }
    }
    best
}

#[derive(Clone, Debug, Serialize)]
pub struct BoxOptions {
    /// Cell sizes are `side · 2⁻ᵏ` for `k` in this range, `side` the longer
    /// side of the bounding box. Scales past the node budget are dropped
    /// as long as enough remain.
    pub depth_range: (u32, u32),
    pub budget: Budget,
}

impl Default for BoxOptions {
    fn default() -> Self {
        Self { depth_range: (5, 15), budget: Budget::default() }
    }
}

/// Slope of log hull-mode counts against `log(1/δ)` over dyadic `δ`.
pub fn box_dimension(sys: &IfSystem, opts: &BoxOptions) -> Result<DimensionEstimate> {
    let (k0, k1) = opts.depth_range;
    if k1 < k0 || ((k1 - k0 + 1) as usize) < MIN_SCALES {
        return Err(Error::Parameter(format!("box dimension needs at least {MIN_SCALES} scales")));
    }
    let side = sys.bounding_box.width().max(sys.bounding_box.height());
    let res = Resolver::new(sys);
    let mut warnings = Vec::new();
    let mut counts = Vec::new();
    let mut last_nodes = 0u64;
    for k in k0..=k1 {
        // halving the cell size at most quadruples the work
        if counts.len() >= MIN_SCALES && last_nodes.saturating_mul(4) > opts.budget.max_points {
            warnings.push(format!("budget reached; finest cell size {:.3e}", side * 0.5f64.powi(k as i32 - 1)));
            break;
        }
        let delta = side * 0.5f64.powi(k as i32);
        let (h, p, nodes) = grids_at(&res, delta, opts.budget.max_points, |_| true)?;
        counts.push(BoxCount { delta, hull: h.count(), point: p.count() });
        last_nodes = nodes;
    }
    let table: Vec<RegressionRow> =
        counts.iter().map(|c| RegressionRow { log_scale: (1.0 / c.delta).ln(), log_count: (c.hull as f64).ln() }).collect();
    let (slope, r2) = fit(&table);
    let value = clamp_dim(slope, &mut warnings);
    Ok(DimensionEstimate {
        value,
        method: Method::BoxCounting,
        scale_range: (counts.last().expect("scales").delta, counts[0].delta),
        fit_r2: r2,
        params: json!({ "depth_range": [k0, k1], "counts": counts }),
        witness: None,
        table,
        low_confidence: r2 < R2_CONFIDENT,
        warnings,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DirectOptions {
    /// Number of base points, drawn from the uniform Bernoulli measure.
    pub samples: usize,
    /// Outer radii as fractions of the bounding-box diameter.
    pub radius_fractions: Vec<f64>,
    /// Exponents `k` of the ratios `R/r = 2ᵏ`.
    pub ratio_exponents: (u32, u32),
    pub seed: u64,
    pub min_window: usize,
    pub budget: Budget,
}

impl Default for DirectOptions {
    fn default() -> Self {
        Self {
            samples: 64,
            radius_fractions: vec![0.25, 2f64.powi(-7), 2f64.powi(-12), 2f64.powi(-17), 2f64.powi(-22)],
            ratio_exponents: (4, 10),
            seed: 0,
            min_window: 7,
            budget: Budget::default(),
        }
    }
}

/// Local counts `N(X ∩ B(x, R), r)` for each ratio.
fn local_table(res: &Resolver, x: Vec2, big: f64, exps: (u32, u32), max_nodes: u64) -> Result<Vec<RegressionRow>> {
    (exps.0..=exps.1)
        .map(|k| {
            let r = big * 0.5f64.powi(k as i32);
            let n = local_count(res, x, big, r, max_nodes)?.max(1);
            Ok(RegressionRow { log_scale: (big / r).ln(), log_count: (n as f64).ln() })
        })
        .collect()
}

/// Supremum over base points, outer radii and windows of ratios of the
/// slope of `log N(X ∩ B(x,R), r)` against `log(R/r)`.
pub fn assouad_direct(sys: &IfSystem, opts: &DirectOptions) -> Result<DimensionEstimate> {
    let (e0, e1) = opts.ratio_exponents;
    if e0 < 4 {
        return Err(Error::Parameter("ratios R/r must be at least 16".into()));
    }
    if e1 < e0 || ((e1 - e0 + 1) as usize) < opts.min_window || opts.samples == 0 || opts.radius_fractions.is_empty() {
        return Err(Error::Parameter("not enough base points, radii or ratios for a windowed fit".into()));
    }
    let nu = BernoulliMeasure::uniform(sys.len());
    let diam = sys.bounding_box.diameter();
    let res = Resolver::new(sys);
    let tasks: Vec<(usize, f64)> =
        (0..opts.samples).flat_map(|i| opts.radius_fractions.iter().map(move |&f| (i, f))).collect();
    let results: Vec<Result<(Vec2, f64, Vec<RegressionRow>)>> = tasks
        .par_iter()
        .map(|&(i, frac)| {
            let x = random_base(sys, &nu, opts.seed, i as u64)?.point;
            let big = frac * diam;
            Ok((x, big, local_table(&res, x, big, (e0, e1), opts.budget.max_points)?))
        })
        .collect();
    let mut best: Option<(f64, f64, Witness, Vec<RegressionRow>, (f64, f64))> = None;
    let mut skipped = 0usize;
    let mut last_err = None;
    for r in results {
        let (x, big, table) = match r {
            Ok(t) => t,
            Err(e @ Error::BudgetExceeded { .. }) => {
                skipped += 1;
                last_err = Some(e);
                continue;
            }
            Err(e) => return Err(e),
        };
        if let Some((s, r2, a, b)) = window_sup(&table, opts.min_window) {
            if best.as_ref().map_or(true, |bb| s > bb.0) {
                let small = big * 0.5f64.powi((e0 as usize + b - 1) as i32);
                let large = big * 0.5f64.powi((e0 as usize + a) as i32);
                let w = Witness { base: Some(x), radius: Some(big), small_scale: Some(small), ..Default::default() };
                best = Some((s, r2, w, table[a..b].to_vec(), (small, large)));
            }
        }
    }
    let Some((s, r2, witness, table, range)) = best else {
        return Err(last_err.expect("no result without an error"));
    };
    let mut warnings = Vec::new();
    if skipped > 0 {
        warnings.push(format!("{skipped} of {} (x, R) pairs skipped: point budget exceeded", tasks.len()));
    }
    let value = clamp_dim(s, &mut warnings);
    Ok(DimensionEstimate {
        value,
        method: Method::AssouadDirect,
        scale_range: range,
        fit_r2: r2,
        params: serde_json::to_value(opts).expect("serializable"),
        witness: Some(witness),
        table,
        low_confidence: r2 < R2_CONFIDENT,
        warnings,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FormulaOptions {
    pub base_samples: usize,
    /// Directions taken from the supplied set, evenly spread.
    pub directions: usize,
    /// Largest depth `n`; thickness scales are `θⁿ·diam`.
    pub depth: usize,
    pub seed: u64,
    pub min_window: usize,
    /// Whether the projection condition was reported to hold.
    pub projection_holds: Option<bool>,
    pub budget: Budget,
}

impl Default for FormulaOptions {
    fn default() -> Self {
        Self {
            base_samples: 64,
            directions: 32,
            depth: 12,
            seed: 0,
            min_window: MIN_WINDOW,
            projection_holds: None,
            budget: Budget::default(),
        }
    }
}

/// Counts of cylinders meeting the line `x + F`, refined until their
/// short side is at most `θⁿ·diam`, for `n = 1..=depth`.
pub fn slice_counts(sys: &IfSystem, f: Direction, x: Vec2, depth: usize, max_nodes: u64) -> Result<Vec<u64>> {
    let theta = contraction_scale(sys);
    let diam = sys.bounding_box.diameter();
    let thresholds: Vec<f64> = (1..=depth).map(|n| diam * theta.powi(n as i32)).collect();
    let mut counts = vec![0u64; depth];
    let mut nodes = 0u64;
    let mut over = false;
    sys.walk_cylinders(|_, m| {
        nodes += 1;
        if over || nodes > max_nodes {
            over = true;
            return Walk::Stop;
        }
        if !hull_meets_line(&sys.hull_corners(m), &f, x) {
            return Walk::Stop;
        }
        let (a1, _) = m.matrix.singular_values();
        let thick = m.matrix.det().abs() / a1 * diam;
        // this cylinder is the stopping cylinder for every threshold in
        // (thick, parent thickness]; count it there
        let parent = thick / min_ratio(sys);
        for (n, &t) in thresholds.iter().enumerate() {
            if thick <= t && (parent > t || thick == 0.0) {
                counts[n] += 1;
            }
        }
        if thick <= thresholds[depth - 1] {
            Walk::Stop
        } else {
            Walk::Descend
        }
    });
    if over {
        return Err(Error::BudgetExceeded { requested: nodes as u128, limit: max_nodes });
    }
    Ok(counts)
}

/// Largest smaller singular value among the maps.
pub fn contraction_scale(sys: &IfSystem) -> f64 {
    sys.matrices().iter().map(|a| a.det().abs() / a.singular_values().0).fold(0.0, f64::max)
}

fn min_ratio(sys: &IfSystem) -> f64 {
    sys.matrices().iter().map(|a| a.det().abs() / a.singular_values().0).fold(f64::INFINITY, f64::min)
}

/// `1 +` the supremum over directions `F` and base points `x` of the
/// windowed slope of log slice counts against `n·log(1/θ)`.
pub fn assouad_formula(sys: &IfSystem, xf: &DirectionSet, opts: &FormulaOptions) -> Result<DimensionEstimate> {
    if xf.is_empty() {
        return Err(Error::Parameter("direction set is empty".into()));
    }
    if opts.depth < opts.min_window || opts.base_samples == 0 || opts.directions == 0 {
        return Err(Error::Parameter(format!("slice regression needs at least {} depths", opts.min_window)));
    }
    let dirs: Vec<Direction> = if xf.len() <= opts.directions {
        xf.samples.clone()
    } else {
        (0..opts.directions).map(|k| xf.samples[k * (xf.len() - 1) / (opts.directions - 1).max(1)]).collect()
    };
    let nu = BernoulliMeasure::uniform(sys.len());
    let bases: Vec<Vec2> =
        (0..opts.base_samples).map(|i| random_base(sys, &nu, opts.seed, i as u64).map(|b| b.point)).collect::<Result<_>>()?;
    let theta = contraction_scale(sys);
    let tasks: Vec<(Direction, Vec2)> = dirs.iter().flat_map(|&f| bases.iter().map(move |&x| (f, x))).collect();
    let results: Vec<Result<Vec<u64>>> =
        tasks.par_iter().map(|&(f, x)| slice_counts(sys, f, x, opts.depth, opts.budget.max_points)).collect();
    let mut best: Option<(f64, f64, Witness, Vec<RegressionRow>, (f64, f64))> = None;
    let diam = sys.bounding_box.diameter();
    for ((f, x), r) in tasks.iter().zip(results) {
        let counts = r?;
        let table: Vec<RegressionRow> = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(n, &c)| RegressionRow { log_scale: (n + 1) as f64 * (1.0 / theta).ln(), log_count: (c as f64).ln() })
            .collect();
        if let Some((s, r2, a, b)) = window_sup(&table, opts.min_window) {
            if best.as_ref().map_or(true, |bb| s > bb.0) {
                let to_scale = |row: &RegressionRow| diam * (-row.log_scale).exp();
                let range = (to_scale(&table[b - 1]), to_scale(&table[a]));
                let w = Witness { base: Some(*x), direction: Some(*f), small_scale: Some(range.0), ..Default::default() };
                best = Some((s, r2, w, table[a..b].to_vec(), range));
            }
        }
    }
    let mut warnings = Vec::new();
    match opts.projection_holds {
        Some(true) => {}
        Some(false) => warnings.push("projection condition fails; the slice formula need not equal the Assouad dimension".into()),
        None => warnings.push("projection condition not checked".into()),
    }
    warnings.push("supremum over finitely many slices: biased low".into());
    let (s, r2, witness, table, range) = best.unwrap_or_else(|| (0.0, 1.0, Witness::default(), Vec::new(), (0.0, 0.0)));
    let value = clamp_dim(1.0 + s, &mut warnings);
    Ok(DimensionEstimate {
        value,
        method: Method::AssouadFormula,
        scale_range: range,
        fit_r2: r2,
        params: serde_json::to_value(opts).expect("serializable"),
        witness: Some(witness),
        table,
        low_confidence: r2 < R2_CONFIDENT,
        warnings,
    })
}

/// Box dimension of a point set in the unit ball over dyadic cells from
/// `1/2` down to four times `resolution`.
pub fn point_set_dimension(points: &[Vec2], resolution: f64) -> (f64, f64, Vec<RegressionRow>) {
    if points.len() <= 1 {
        return (0.0, 1.0, Vec::new());
    }
    let origin = Vec2::new(-1.0, -1.0);
    let mut table = Vec::new();
    let mut delta = 0.5;
    while delta >= 4.0 * resolution || table.len() < MIN_SCALES {
        let n = box_count_points(points, origin, delta);
        table.push(RegressionRow { log_scale: (1.0 / delta).ln(), log_count: (n as f64).ln() });
        delta /= 2.0;
    }
    let (s, r2) = fit(&table);
    (s, r2, table)
}

/// Largest box dimension among the given tangent approximations.
pub fn tangent_dim_sup(tangents: &[TangentApprox]) -> Result<DimensionEstimate> {
    let mut best: Option<(f64, f64, usize, Vec<RegressionRow>)> = None;
    for (i, t) in tangents.iter().enumerate() {
        let (s, r2, table) = point_set_dimension(&t.points, t.resolution);
        if best.as_ref().map_or(true, |b| s > b.0) {
            best = Some((s, r2, i, table));
        }
    }
    let mut warnings = Vec::new();
    let (s, r2, idx, table) = best.unwrap_or((0.0, 1.0, 0, Vec::new()));
    let value = clamp_dim(s, &mut warnings);
    let range = match (table.first(), table.last()) {
        (Some(a), Some(b)) => ((-b.log_scale).exp(), (-a.log_scale).exp()),
        _ => (0.0, 0.0),
    };
    Ok(DimensionEstimate {
        value,
        method: Method::TangentSup,
        scale_range: range,
        fit_r2: r2,
        params: json!({ "tangents": tangents.len() }),
        witness: tangents.get(idx).map(|t| Witness {
            base: Some(t.base),
            radius: Some(t.scale),
            tangent_index: Some(idx),
            direction: t.theta1,
            ..Default::default()
        }),
        table,
        low_confidence: r2 < R2_CONFIDENT,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems;

    #[test]
    fn segment_cells() {
        let pts: Vec<Vec2> = (0..=1000).map(|i| Vec2::new(i as f64 / 1000.0 * 0.999, 0.5)).collect();
        for k in [4usize, 10, 16] {
            let n = box_count_points(&pts, Vec2::ZERO, 1.0 / k as f64);
            assert!(n == k || n == k + 1, "{n} vs {k}");
        }
        assert_eq!(box_count_points(&[Vec2::new(0.3, 0.3)], Vec2::ZERO, 0.1), 1);
    }

    #[test]
    fn full_square_counts() {
        let c = box_count(&systems::square(), 0.125, &Budget::default()).unwrap();
        assert!(c.hull >= 64 && c.hull <= 81, "{}", c.hull);
        assert!(c.hull >= c.point);
    }

    #[test]
    fn convex_raster_matches_area() {
        let mut g = CoverGrid::new(Vec2::ZERO, 0.1);
        g.insert_convex(&[Vec2::new(0.05, 0.05), Vec2::new(0.95, 0.05), Vec2::new(0.95, 0.95), Vec2::new(0.05, 0.95)]);
        assert_eq!(g.count(), 100);
        let mut t = CoverGrid::new(Vec2::ZERO, 0.1);
        t.insert_convex(&[Vec2::new(0.01, 0.01), Vec2::new(0.99, 0.01), Vec2::new(0.01, 0.99)]);
        assert!(t.count() >= 50 && t.count() < 70);
    }

    #[test]
    fn window_sup_prefers_steepest_run() {
        let rows: Vec<RegressionRow> =
            [0.0, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0].iter().enumerate().map(|(i, &y)| RegressionRow { log_scale: i as f64, log_count: y }).collect();
        let (s, ..) = window_sup(&rows, 5).unwrap();
        assert!((s - 2.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_scales_rejected() {
        let o = BoxOptions { depth_range: (3, 5), ..Default::default() };
        assert!(box_dimension(&systems::square(), &o).is_err());
    }

    #[test]
    fn single_point_tangent_has_dimension_zero() {
        let t = TangentApprox {
            points: vec![Vec2::ZERO],
            base: Vec2::ZERO,
            scale: 1.0,
            provenance: crate::tangent::Provenance::PlainMagnification,
            theta1: None,
            resolution: 0.005,
            resolution_flag: false,
        };
        assert_eq!(tangent_dim_sup(&[t]).unwrap().value, 0.0);
    }
}
