//! Command-line front end.
//!
//! Exit codes: `check` returns 0 when the property holds, 1 when it fails
//! and 2 when inconclusive; `estimate` returns 2 when the point budget is
//! exceeded; malformed input and I/O failures return 3; `example` returns
//! 1 when the requested parameters violate a condition.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::dimension::{self, BoxOptions, DirectOptions, FormulaOptions};
use crate::ergodic::{self, BernoulliMeasure};
use crate::error::{Error, Result};
use crate::geometry;
use crate::ifs::{self, attractor_cloud, Budget, IfSystem, Rect, SeparationRegime, Word};
use crate::linalg::Vec2;
use crate::semigroup::{self, Direction, DirectionSet, Reducibility};
use crate::systems::{self, DominatedParams};
use crate::tangent::{self, TangentOptions};

/// Numerical defaults, in one place.
pub mod defaults {
    pub const SEPARATION_DEPTH: usize = 6;
    pub const SEPARATION_MARGIN: f64 = 1e-9;
    pub const DOMINATION_DEPTH: usize = 8;
    pub const IRREDUCIBILITY_TOL: f64 = 1e-9;
    pub const PROJECTION_DEPTH: usize = 8;
    pub const DIRECTION_DEPTH: usize = 10;
    pub const DIRECTION_COUNT: usize = 32;
    pub const LYAPUNOV_DEPTH: usize = 2000;
    pub const LYAPUNOV_SAMPLES: usize = 400;
    pub const FURSTENBERG_DEPTH: usize = 64;
    pub const FURSTENBERG_SAMPLES: usize = 2000;
    pub const TRIG_DEGREE: u32 = 4;
    pub const AFFINITY_LEVEL: usize = 8;
    pub const AFFINITY_TOL: f64 = 1e-6;
    pub const DIMS_SAMPLES: usize = 64;
    pub const FORMULA_DEPTH: usize = 12;
    pub const TANGENT_BASES: usize = 4;
    pub const TANGENT_SCALES: [i32; 3] = [24, 30, 36];
    pub const RENDER_DEPTH: usize = 9;
    pub const SLICE_DEPTH: usize = 10;
    pub const SEED: u64 = 0;
    pub const CANVAS: u32 = 1000;
}

#[derive(Parser, Debug)]
#[command(name = "atl", version, about = "Checks and dimension estimates for planar self-affine sets")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    /// IFS file in JSON format.
    #[arg(long, global = true)]
    pub ifs: Option<PathBuf>,
    /// Bundled system instead of a file.
    #[arg(long, global = true, value_parser = clap::builder::PossibleValuesParser::new(systems::BUNDLED))]
    pub system: Option<String>,
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a structural property of the system.
    Check {
        #[command(subcommand)]
        what: CheckCmd,
    },
    /// Estimate an ergodic or dimensional quantity.
    Estimate {
        #[command(subcommand)]
        what: EstimateCmd,
    },
    /// Render an SVG picture.
    Render {
        #[command(subcommand)]
        what: RenderCmd,
    },
    /// Write a generated IFS file.
    Example {
        #[command(subcommand)]
        what: ExampleCmd,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckCmd {
    Separation {
        #[arg(long, default_value_t = defaults::SEPARATION_MARGIN)]
        margin: f64,
    },
    Domination,
    Irreducibility {
        #[arg(long, default_value_t = defaults::IRREDUCIBILITY_TOL)]
        tol: f64,
    },
    Projection {
        /// Directions as `t` values of `span(t, 1)`, comma separated;
        /// defaults to samples of the Furstenberg direction set.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        slopes: Vec<f64>,
    },
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct MeasureArg {
    /// `uniform` or comma-separated weights, one per map.
    #[arg(long, default_value = "uniform")]
    pub measure: String,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateCmd {
    Lyapunov {
        #[command(flatten)]
        measure: MeasureArg,
    },
    Furstenberg {
        #[command(flatten)]
        measure: MeasureArg,
    },
    Entropy {
        #[command(flatten)]
        measure: MeasureArg,
    },
    Affinity {
        #[arg(long, default_value_t = defaults::AFFINITY_LEVEL)]
        level: usize,
        #[arg(long, default_value_t = defaults::AFFINITY_TOL)]
        tol: f64,
    },
    Dims,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RenderCmd {
    Attractor {
        /// Outline the images of the bounding box under each map.
        #[arg(long)]
        overlay: bool,
    },
    Slice {
        /// Angle of the line direction in radians; defaults to a sampled
        /// Furstenberg direction.
        #[arg(long, allow_hyphen_values = true)]
        angle: Option<f64>,
        /// Base point `x,y`; defaults to a random point of the attractor.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        base: Vec<f64>,
        /// Half-width of the slab, relative to the bounding-box diameter.
        #[arg(long, default_value_t = 0.002)]
        thickness: f64,
    },
    Tangent {
        /// Periodic word (symbols from 1) whose point is the base.
        #[arg(long)]
        base_word: Option<String>,
        /// Magnify at `2^-scales` times the bounding-box diameter.
        #[arg(long, default_value_t = 8)]
        scales: u32,
        /// Rotate so the expanded direction is horizontal.
        #[arg(long)]
        rotate: bool,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExampleCmd {
    /// Carpet on an `m × n` grid.
    Carpet {
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Cells as `col,row` pairs separated by `;`.
        #[arg(long, default_value = "0,0;0,1;1,0")]
        cells: String,
        #[arg(long, default_value_t = 1.0)]
        shrink: f64,
    },
    /// Three-map dominated, strongly irreducible family.
    #[command(alias = "dominated")]
    Paper4 {
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        b: Option<f64>,
        #[arg(long)]
        d: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        v3: Vec<f64>,
        /// Scan a parameter lattice for the first valid tuple.
        #[arg(long)]
        search: bool,
    },
}

/// Resolved configuration recorded in every output.
#[derive(Serialize, Debug)]
pub struct RunConfig<'a> {
    pub command: &'static str,
    pub subcommand: Value,
    pub ifs_path: Option<String>,
    pub system: Option<&'a str>,
    pub depth: Option<usize>,
    pub samples: Option<usize>,
    pub seed: u64,
    pub out: Option<String>,
    pub format: Format,
    pub budget_points: u64,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.common.threads.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return 2;
        }
    };
    pool.install(|| dispatch(&cli))
}

fn dispatch(cli: &Cli) -> i32 {
    let c = &cli.common;
    let budget = Budget::from_env();
    let (command, sub) = match &cli.command {
        Command::Check { what } => ("check", serde_json::to_value(what)),
        Command::Estimate { what } => ("estimate", serde_json::to_value(what)),
        Command::Render { what } => ("render", serde_json::to_value(what)),
        Command::Example { what } => ("example", serde_json::to_value(what)),
    };
    let cfg = RunConfig {
        command,
        subcommand: sub.unwrap_or(Value::Null),
        ifs_path: c.ifs.as_ref().map(|p| p.display().to_string()),
        system: c.system.as_deref(),
        depth: c.depth,
        samples: c.samples,
        seed: c.seed.unwrap_or(defaults::SEED),
        out: c.out.as_ref().map(|p| p.display().to_string()),
        format: c.format,
        budget_points: budget.max_points,
    };
    if let Command::Example { what } = &cli.command {
        return cmd_example(what, c);
    }
    let sys = match load_system(c) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return 3;
        }
    };
    match &cli.command {
        Command::Check { what } => cmd_check(what, &sys, &cfg, c, &budget),
        Command::Estimate { what } => cmd_estimate(what, &sys, &cfg, c, &budget),
        Command::Render { what } => cmd_render(what, &sys, &cfg, c, &budget),
        Command::Example { .. } => unreachable!("handled above"),
    }
}

fn load_system(c: &Common) -> Result<IfSystem> {
    match (&c.ifs, &c.system) {
        (Some(p), None) => IfSystem::load(p),
        (None, Some(name)) => systems::bundled(name).ok_or_else(|| Error::Parse(format!("unknown system {name}"))),
        (Some(_), Some(_)) => Err(Error::Parse("give either --ifs or --system, not both".into())),
        (None, None) => Err(Error::Parse("no system given; pass --ifs PATH or --system NAME".into())),
    }
}

fn measure_of(sys: &IfSystem, m: &MeasureArg) -> Result<BernoulliMeasure> {
    if m.measure == "uniform" {
        return Ok(BernoulliMeasure::uniform(sys.len()));
    }
    let w: Vec<f64> = m
        .measure
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("measure weight {s:?}: {e}"))))
        .collect::<Result<_>>()?;
    BernoulliMeasure::from_weights(sys.len(), 1, &w)
}

fn timestamp() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Report envelope; `timestamp` is the only field that varies between
/// identical runs.
fn envelope(cfg: &RunConfig, report: Value) -> Value {
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "timestamp": timestamp(),
        "config": cfg,
        "report": report,
    })
}

fn emit(c: &Common, text: &str) -> Result<()> {
    match &c.out {
        Some(p) => std::fs::write(p, text).map_err(Error::from),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Writes the report in the requested format; `csv` is a CSV rendering of
/// the report body, or `None` for a flattened key/value listing.
fn write_report(c: &Common, cfg: &RunConfig, report: Value, csv: Option<String>) -> std::result::Result<(), i32> {
    let text = match c.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&envelope(cfg, report)).expect("serializable");
            s.push('\n');
            s
        }
        Format::Csv => csv.unwrap_or_else(|| flat_csv(&report)),
    };
    emit(c, &text).map_err(|e| {
        eprintln!("error: {e}");
        3
    })
}

fn flat_csv(v: &Value) -> String {
    fn walk(prefix: &str, v: &Value, out: &mut String) {
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&key, x, out);
                }
            }
            Value::Array(a) => {
                for (i, x) in a.iter().enumerate() {
                    walk(&format!("{prefix}.{i}"), x, out);
                }
            }
            _ => {
                let _ = writeln!(out, "{prefix},{v}");
            }
        }
    }
    let mut out = String::from("key,value\n");
    walk("", v, &mut out);
    out
}

fn fail(e: &Error) -> i32 {
    eprintln!("error: {e}");
    match e {
        Error::BudgetExceeded { .. } => {
            eprintln!("hint: raise the budget with ATL_BUDGET_POINTS");
            2
        }
        Error::Parse(_) | Error::Json(_) | Error::Io(_) => 3,
        _ => 2,
    }
}

fn furstenberg_dirs(sys: &IfSystem, c: &Common) -> DirectionSet {
    semigroup::estimate_xf(sys, defaults::DIRECTION_DEPTH, c.samples.unwrap_or(defaults::DIRECTION_COUNT))
}

fn cmd_check(what: &CheckCmd, sys: &IfSystem, cfg: &RunConfig, c: &Common, budget: &Budget) -> i32 {
    let outcome: Result<(Value, i32)> = (|| match what {
        CheckCmd::Separation { margin } => {
            let r = ifs::check_strong_separation(sys, c.depth.unwrap_or(defaults::SEPARATION_DEPTH), *margin, budget)?;
            let code = match (r.holds, r.regime) {
                (_, SeparationRegime::Inconclusive) => 2,
                (true, _) => 0,
                (false, _) => 1,
            };
            Ok((serde_json::to_value(&r)?, code))
        }
        CheckCmd::Domination => {
            let r = semigroup::is_dominated(sys, c.depth.unwrap_or(defaults::DOMINATION_DEPTH))?;
            let code = if r.dominated() { 0 } else { 1 };
            Ok((json!({ "dominated": r.dominated(), "details": r }), code))
        }
        CheckCmd::Irreducibility { tol } => {
            let r = semigroup::classify_reducibility(&sys.matrices(), *tol);
            let code = match (r.class, r.certified) {
                (Reducibility::StronglyIrreducible, true) => 0,
                (Reducibility::StronglyIrreducible, false) => 2,
                _ => 1,
            };
            Ok((serde_json::to_value(&r)?, code))
        }
        CheckCmd::Projection { slopes } => {
            let dirs = if slopes.is_empty() {
                furstenberg_dirs(sys, c)
            } else {
                DirectionSet::from_samples(slopes.iter().map(|&t| Direction::from_vec(Vec2::new(t, 1.0))).collect())
            };
            if dirs.is_empty() {
                return Ok((json!({ "holds": null, "warning": "no Furstenberg directions found" }), 2));
            }
            let r = geometry::check_projection_condition(sys, &dirs, c.depth.unwrap_or(defaults::PROJECTION_DEPTH), budget)?;
            let code = if r.holds { 0 } else { 1 };
            Ok((json!({ "holds": r.holds, "max_gap": r.max_gap(), "details": r }), code))
        }
    })();
    match outcome {
        Ok((report, code)) => write_report(c, cfg, report, None).err().unwrap_or(code),
        Err(e) => fail(&e),
    }
}

fn cmd_estimate(what: &EstimateCmd, sys: &IfSystem, cfg: &RunConfig, c: &Common, budget: &Budget) -> i32 {
    let seed = cfg.seed;
    let outcome: Result<(Value, Option<String>)> = (|| match what {
        EstimateCmd::Lyapunov { measure } => {
            let nu = measure_of(sys, measure)?;
            let r = ergodic::lyapunov(
                sys,
                &nu,
                c.depth.unwrap_or(defaults::LYAPUNOV_DEPTH),
                c.samples.unwrap_or(defaults::LYAPUNOV_SAMPLES),
                seed,
            )?;
            Ok((serde_json::to_value(&r)?, None))
        }
        EstimateCmd::Furstenberg { measure } => {
            let nu = measure_of(sys, measure)?;
            let s = ergodic::furstenberg_sample(
                sys,
                &nu,
                c.depth.unwrap_or(defaults::FURSTENBERG_DEPTH),
                c.samples.unwrap_or(defaults::FURSTENBERG_SAMPLES),
                seed,
            )?;
            let st = ergodic::check_stationarity(sys, &nu, &s.directions, &ergodic::trig_battery(defaults::TRIG_DEGREE))?;
            let mut csv = String::from("angle\n");
            for d in &s.directions {
                let _ = writeln!(csv, "{}", d.angle);
            }
            Ok((json!({ "sample": s, "stationarity": st }), Some(csv)))
        }
        EstimateCmd::Entropy { measure } => {
            let nu = measure_of(sys, measure)?;
            Ok((json!({ "entropy": ergodic::entropy(&nu), "measure": nu }), None))
        }
        EstimateCmd::Affinity { level, tol } => {
            let r = ergodic::affinity_dimension(sys, *level, *tol, budget)?;
            Ok((serde_json::to_value(&r)?, None))
        }
        EstimateCmd::Dims => {
            let r = estimate_dims(sys, c, seed, budget)?;
            let mut csv = String::from("method,log_scale,log_count\n");
            for est in r.estimates() {
                let m = serde_json::to_value(est.method)?;
                for row in &est.table {
                    let _ = writeln!(csv, "{},{},{}", m.as_str().unwrap_or(""), row.log_scale, row.log_count);
                }
            }
            Ok((serde_json::to_value(&r)?, Some(csv)))
        }
    })();
    match outcome {
        Ok((report, csv)) => write_report(c, cfg, report, csv).err().unwrap_or(0),
        Err(e) => fail(&e),
    }
}

/// All four dimension estimates with their consistency checks.
#[derive(Serialize, Debug)]
pub struct DimsReport {
    pub box_dimension: dimension::DimensionEstimate,
    pub assouad_direct: dimension::DimensionEstimate,
    pub assouad_formula: Option<dimension::DimensionEstimate>,
    pub tangent_sup: dimension::DimensionEstimate,
    pub projection_holds: Option<bool>,
    pub separation_holds: bool,
    pub consistency: Consistency,
}

impl DimsReport {
    pub fn estimates(&self) -> Vec<&dimension::DimensionEstimate> {
        let mut v = vec![&self.box_dimension, &self.assouad_direct];
        v.extend(self.assouad_formula.as_ref());
        v.push(&self.tangent_sup);
        v
    }
}

#[derive(Serialize, Debug)]
pub struct Consistency {
    /// `box ≤ direct + 0.05`.
    pub box_below_direct: bool,
    /// `tangent_sup ≤ direct + 0.1`.
    pub tangent_below_direct: bool,
    /// `|direct - formula|`, when the formula was evaluated.
    pub direct_formula_gap: Option<f64>,
}

/// Runs the four estimators with defaults scaled by `--samples`.
pub fn estimate_dims(sys: &IfSystem, c: &Common, seed: u64, budget: &Budget) -> Result<DimsReport> {
    let samples = c.samples.unwrap_or(defaults::DIMS_SAMPLES);
    let box_dimension = dimension::box_dimension(sys, &BoxOptions { budget: *budget, ..Default::default() })?;
    let assouad_direct = dimension::assouad_direct(sys, &DirectOptions { samples, seed, budget: *budget, ..Default::default() })?;
    let xf = furstenberg_dirs(sys, c);
    let projection_holds = if xf.is_empty() {
        None
    } else {
        Some(geometry::check_projection_condition(sys, &xf, defaults::PROJECTION_DEPTH, budget)?.holds)
    };
    let separation_holds =
        ifs::check_strong_separation(sys, defaults::SEPARATION_DEPTH, defaults::SEPARATION_MARGIN, budget)?.holds;
    let assouad_formula = if xf.is_empty() {
        None
    } else {
        let opts = FormulaOptions {
            base_samples: samples,
            depth: c.depth.unwrap_or(defaults::FORMULA_DEPTH),
            seed,
            projection_holds,
            budget: *budget,
            ..Default::default()
        };
        Some(dimension::assouad_formula(sys, &xf, &opts)?)
    };
    let tangent_sup = dimension::tangent_dim_sup(&sample_tangents(sys, seed)?)?;
    let consistency = Consistency {
        box_below_direct: box_dimension.value <= assouad_direct.value + 0.05,
        tangent_below_direct: tangent_sup.value <= assouad_direct.value + 0.1,
        direct_formula_gap: assouad_formula.as_ref().map(|f| (f.value - assouad_direct.value).abs()),
    };
    Ok(DimsReport { box_dimension, assouad_direct, assouad_formula, tangent_sup, projection_holds, separation_holds, consistency })
}

/// Finest tangents at a few random base points.
pub fn sample_tangents(sys: &IfSystem, seed: u64) -> Result<Vec<tangent::TangentApprox>> {
    let nu = BernoulliMeasure::uniform(sys.len());
    let diam = sys.bounding_box.diameter();
    let scales: Vec<f64> = defaults::TANGENT_SCALES.iter().map(|&e| diam * 0.5f64.powi(e)).collect();
    let mut out = Vec::new();
    for i in 0..defaults::TANGENT_BASES {
        let b = tangent::random_base(sys, &nu, seed, i as u64)?;
        let opts = TangentOptions { theta1: Some(b.theta1), ..Default::default() };
        let seq = tangent::tangent_sequence(sys, b.point, &scales, &opts)?;
        out.extend(seq.tangents.into_iter().last());
    }
    Ok(out)
}

/// Deterministic SVG of points in `frame`, as 1px squares.
pub fn render_svg(points: &[Vec2], frame: Rect, polygons: &[Vec<Vec2>], meta: &str, warning: Option<&str>) -> String {
    let size = defaults::CANVAS;
    let span = frame.width().max(frame.height());
    let margin = 10.0;
    let scale = if span > 0.0 { (size as f64 - 2.0 * margin) / span } else { 1.0 };
    let to_px = |p: Vec2| {
        let x = margin + (p.x - frame.min.x) * scale;
        let y = size as f64 - margin - (p.y - frame.min.y) * scale;
        (x, y)
    };
    let mut pixels: Vec<(i64, i64)> = points
        .iter()
        .map(|&p| {
            let (x, y) = to_px(p);
            (x.floor() as i64, y.floor() as i64)
        })
        .filter(|&(x, y)| x >= 0 && y >= 0 && x < size as i64 && y < size as i64)
        .collect();
    pixels.sort_unstable();
    pixels.dedup();
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#);
    let _ = writeln!(s, "<!-- atl {}\n{}\n-->", env!("CARGO_PKG_VERSION"), meta.replace("--", "- -"));
    if let Some(w) = warning {
        let _ = writeln!(s, "<!-- warning: {} -->", w.replace("--", "- -"));
    }
    let _ = writeln!(s, r#"<rect width="{size}" height="{size}" fill="white"/>"#);
    for poly in polygons {
        let pts: Vec<String> = poly
            .iter()
            .map(|&p| {
                let (x, y) = to_px(p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(s, r#"<polygon points="{}" fill="none" stroke="red" stroke-width="1"/>"#, pts.join(" "));
    }
    let _ = writeln!(s, r#"<g fill="black">"#);
    for (x, y) in pixels {
        let _ = writeln!(s, r#"<rect x="{x}" y="{y}" width="1" height="1"/>"#);
    }
    let _ = writeln!(s, "</g>\n</svg>");
    s
}

fn cmd_render(what: &RenderCmd, sys: &IfSystem, cfg: &RunConfig, c: &Common, budget: &Budget) -> i32 {
    let meta = serde_json::to_string_pretty(cfg).expect("serializable");
    let outcome: Result<String> = (|| match what {
        RenderCmd::Attractor { overlay } => {
            let cloud = attractor_cloud(sys, c.depth.unwrap_or(defaults::RENDER_DEPTH), budget)?;
            let frame = sys.bounding_box;
            let polys: Vec<Vec<Vec2>> = if *overlay {
                sys.maps.iter().map(|m| sys.hull_corners(m).to_vec()).collect()
            } else {
                Vec::new()
            };
            Ok(render_svg(&cloud.points, frame, &polys, &meta, None))
        }
        RenderCmd::Slice { angle, base, thickness } => {
            let f = match angle {
                Some(a) => Direction::new(*a),
                None => *furstenberg_dirs(sys, c)
                    .samples
                    .first()
                    .ok_or_else(|| Error::MissingDirection("no Furstenberg direction; pass --angle".into()))?,
            };
            let x = match base.as_slice() {
                [] => tangent::random_base(sys, &BernoulliMeasure::uniform(sys.len()), cfg.seed, 0)?.point,
                [x, y] => Vec2::new(*x, *y),
                _ => return Err(Error::Parse("--base takes two numbers x,y".into())),
            };
            let cloud = attractor_cloud(sys, c.depth.unwrap_or(defaults::SLICE_DEPTH), budget)?;
            let s = geometry::extract_slice(&cloud, f, x, thickness * sys.bounding_box.diameter());
            let warning = s.points.is_empty().then_some("slice is empty at this thickness");
            Ok(render_svg(&s.points, sys.bounding_box, &[], &meta, warning))
        }
        RenderCmd::Tangent { base_word, scales, rotate } => {
            let base = match base_word {
                Some(w) => {
                    let word = Word::parse(w)?;
                    if word.is_empty() {
                        return Err(Error::Parse("--base-word must be nonempty".into()));
                    }
                    word.validate(sys.len())?;
                    let need = sys.depth_for_resolution(1e-17 * sys.bounding_box.diameter());
                    let reps = need / word.len() + 1;
                    let full = Word(word.symbols().iter().copied().cycle().take(reps * word.len()).collect());
                    (sys.canonical_point(&full)?, ergodic::theta1(&sys.matrices(), full.symbols()))
                }
                None => {
                    let b = tangent::random_base(sys, &BernoulliMeasure::uniform(sys.len()), cfg.seed, 0)?;
                    (b.point, b.theta1)
                }
            };
            let r = sys.bounding_box.diameter() * 0.5f64.powi(*scales as i32);
            let opts = TangentOptions { theta1: Some(base.1), ..Default::default() };
            let seq = tangent::tangent_sequence(sys, base.0, &[r], &opts)?;
            let t = seq.tangents.first().ok_or_else(|| Error::Degenerate("no tangent produced".into()))?;
            let pts = if *rotate { tangent::rotate_to_comb(t)? } else { t.points.clone() };
            let frame = Rect::new(Vec2::new(-1.0, -1.0), Vec2::new(1.0, 1.0));
            let warning = seq.warning.as_deref();
            Ok(render_svg(&pts, frame, &[], &meta, warning))
        }
    })();
    match outcome {
        Ok(svg) => match emit(c, &svg) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("error: {e}");
                3
            }
        },
        Err(e) => fail(&e),
    }
}

fn parse_cells(text: &str) -> Result<Vec<(usize, usize)>> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let v: Vec<&str> = pair.split(',').map(str::trim).collect();
            match v.as_slice() {
                [a, b] => Ok((
                    a.parse().map_err(|e| Error::Parse(format!("cell {pair:?}: {e}")))?,
                    b.parse().map_err(|e| Error::Parse(format!("cell {pair:?}: {e}")))?,
                )),
                _ => Err(Error::Parse(format!("cell {pair:?}: expected col,row"))),
            }
        })
        .collect()
}

fn cmd_example(what: &ExampleCmd, c: &Common) -> i32 {
    match what {
        ExampleCmd::Carpet { m, n, cells, shrink } => {
            let sys = match parse_cells(cells).and_then(|cells| systems::carpet(*m, *n, &cells, *shrink)) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return 1;
                }
            };
            write_system(c, &sys)
        }
        ExampleCmd::Paper4 { lambda, gamma, a, b, d, v3, search } => {
            let base = if *search {
                match DominatedParams::search() {
                    Some(p) => p,
                    None => {
                        eprintln!("error: no lattice point satisfies all conditions");
                        return 1;
                    }
                }
            } else {
                DominatedParams::default()
            };
            let v3 = match v3.as_slice() {
                [] => base.v3,
                [x, y] => [*x, *y],
                _ => {
                    eprintln!("error: --v3 takes two numbers x,y");
                    return 3;
                }
            };
            let p = DominatedParams {
                lambda: lambda.unwrap_or(base.lambda),
                gamma: gamma.unwrap_or(base.gamma),
                a: a.unwrap_or(base.a),
                b: b.unwrap_or(base.b),
                d: d.unwrap_or(base.d),
                v3,
            };
            for cond in p.conditions() {
                eprintln!("({}) {} {}: slack {:.6}", cond.id, if cond.holds { "holds" } else { "VIOLATED" }, cond.statement, cond.slack);
            }
            match p.system() {
                Ok(mut sys) => {
                    sys.name = "paper4".into();
                    write_system(c, &sys)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    1
                }
            }
        }
    }
}

fn write_system(c: &Common, sys: &IfSystem) -> i32 {
    let mut text = sys.to_json();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match emit(c, &text) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            3
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_parse() {
        assert_eq!(parse_cells("0,0; 1,2").unwrap(), vec![(0, 0), (1, 2)]);
        assert!(parse_cells("0;1").is_err());
    }

    #[test]
    fn svg_is_fixed_canvas() {
        let frame = Rect::unit_square();
        let s = render_svg(&[Vec2::new(0.5, 0.5), Vec2::new(0.5, 0.5)], frame, &[], "{}", None);
        assert!(s.contains(r#"width="1000" height="1000""#));
        assert_eq!(s.matches(r#"width="1" height="1""#).count(), 1);
    }

    #[test]
    fn empty_svg_has_warning() {
        let s = render_svg(&[], Rect::unit_square(), &[], "{}", Some("empty"));
        assert!(s.contains("warning: empty"));
        assert!(!s.contains(r#"width="1" height="1""#));
    }

    #[test]
    fn unknown_flag_rejected() {
        assert!(Cli::try_parse_from(["atl", "check", "domination", "--bogus"]).is_err());
    }
}
