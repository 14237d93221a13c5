//! Acceptance run: one pass/fail line per criterion.

use std::collections::BTreeMap;
use std::process::Command;
use std::time::{Duration, Instant};

use atl::cli::{self, Common, DimsReport, Format};
use atl::ergodic::{self, BernoulliMeasure};
use atl::geometry::{self, comb_fit};
use atl::semigroup::{self, Direction, DirectionSet, CONE_MARGIN};
use atl::stream::WordStream;
use atl::systems::{self, DominatedParams};
use atl::tangent::{self, MaintechOptions, TangentOptions};
use atl::{Budget, IfSystem, Mat2, Vec2, Word};
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_atl");

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn atl(args: &[&str]) -> (i32, String) {
    let out = Command::new(BIN).args(args).env_remove("ATL_BUDGET_POINTS").output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).expect("utf-8 output"))
}

fn common(samples: usize) -> Common {
    Common { ifs: None, system: None, depth: None, samples: Some(samples), seed: None, threads: None, out: None, format: Format::Json }
}

fn value_at(v: &Value, path: &[&str]) -> f64 {
    path.iter().fold(v, |v, k| &v[*k]).as_f64().unwrap_or(f64::NAN)
}

/// Base points for the direct estimate; the full square is costly, so it
/// gets fewer.
fn dims_samples(name: &str) -> usize {
    if name == "square" {
        2
    } else {
        64
    }
}

fn criterion1(carpet_json: &Value, elapsed: Duration) -> Outcome {
    let target_a = 1.0 + 2f64.ln() / 3f64.ln();
    let target_box = (2f64.powf(2f64.ln() / 3f64.ln()) + 1.0).log2();
    let r = &carpet_json["report"];
    let direct = value_at(r, &["assouad_direct", "value"]);
    let formula = value_at(r, &["assouad_formula", "value"]);
    let boxd = value_at(r, &["box_dimension", "value"]);
    let pass = (direct - target_a).abs() <= 0.1
        && (formula - target_a).abs() <= 0.1
        && (boxd - target_box).abs() <= 0.05
        && elapsed.as_secs_f64() <= 60.0;
    outcome(
        pass,
        format!(
            "direct {direct:.4}, formula {formula:.4} (target {target_a:.4} ± 0.1); box {boxd:.4} (target {target_box:.4} ± 0.05); {:.1} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion2(reports: &BTreeMap<String, DimsReport>) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in systems::BUNDLED {
        let (sep, _) = atl(&["check", "separation", "--system", name]);
        let (proj, _) = atl(&["check", "projection", "--system", name]);
        if sep != 0 || proj != 0 {
            continue;
        }
        let r = &reports[name];
        let gap = r.consistency.direct_formula_gap.unwrap_or(f64::INFINITY);
        pass &= gap <= 0.1;
        parts.push(format!(
            "{name}: direct {:.4} formula {:.4} gap {gap:.4}",
            r.assouad_direct.value,
            r.assouad_formula.as_ref().map_or(f64::NAN, |f| f.value)
        ));
    }
    pass &= !parts.is_empty();
    outcome(pass, parts.join("; "))
}

fn criterion3() -> Outcome {
    let sys = systems::diag2();
    let nu = BernoulliMeasure::uniform(2);
    let est = ergodic::lyapunov(&sys, &nu, 2000, 400, 7).expect("lyapunov runs");
    let chi1 = -(0.6f64.ln() + 0.7f64.ln()) / 2.0;
    let chi2 = -(0.2f64.ln() + 0.3f64.ln()) / 2.0;
    let ok1 = (est.chi1 - chi1).abs() <= 2.0 * est.stderr1;
    let ok2 = (est.chi2 - chi2).abs() <= 2.0 * est.stderr2;
    let pass = ok1 && ok2 && est.stderr1 <= 1e-2 && est.stderr2 <= 1e-2 && est.simple_spectrum;
    outcome(
        pass,
        format!(
            "chi1 {:.6} vs {chi1:.6} (stderr {:.2e}); chi2 {:.6} vs {chi2:.6} (stderr {:.2e}); simple {}",
            est.chi1, est.stderr1, est.chi2, est.stderr2, est.simple_spectrum
        ),
    )
}

fn criterion4() -> Outcome {
    let sys = systems::dominated3();
    let rep = semigroup::is_dominated(&sys, 8).expect("domination check runs");
    let verified = rep.multicone.as_ref().is_some_and(|c| c.is_strongly_invariant(&sys.matrices(), CONE_MARGIN));
    let rot = |s: f64, t: f64| Mat2::new(s * t.cos(), -s * t.sin(), s * t.sin(), s * t.cos());
    let conformal = semigroup::is_dominated_matrices(&[rot(0.5, 1.0), rot(0.4, 2.3)], 8).expect("domination check runs");
    let cases: [(&str, DominatedParams); 6] = {
        let p = DominatedParams::default();
        [
            ("i", DominatedParams { lambda: 1.05, ..p }),
            ("ii", DominatedParams { b: -0.05, ..p }),
            ("iii", DominatedParams { v3: [0.9, 0.4], ..p }),
            ("iv", DominatedParams { v3: [0.4, 0.1], ..p }),
            ("v", DominatedParams { lambda: 0.9, gamma: 0.1, b: 0.2, ..p }),
            ("vi", DominatedParams { lambda: 0.55, ..p }),
        ]
    };
    let cited: Vec<bool> = cases
        .iter()
        .map(|(id, p)| {
            let v = p.violations();
            v.len() == 1 && v[0].id == *id && p.system().is_err_and(|e| e.to_string().contains(&format!("({id})")))
        })
        .collect();
    let pass = verified && !conformal.multicone_found && (conformal.tau - 1.0).abs() < 0.02 && cited.iter().all(|&c| c);
    outcome(
        pass,
        format!(
            "multicone verified {verified}; rotations: multicone {} tau {:.4}; single violations cited {}/6",
            conformal.multicone_found,
            conformal.tau,
            cited.iter().filter(|&&c| c).count()
        ),
    )
}

fn criterion5() -> Outcome {
    let sys = systems::dominated3();
    let p = DominatedParams::default();
    let lo = p.threshold();
    let dirs: Vec<Direction> = (1..=50).map(|k| Direction::from_vec(Vec2::new(lo - lo * k as f64 / 50.0, 1.0))).collect();
    let rep = geometry::check_projection_condition(&sys, &DirectionSet::from_samples(dirs), 8, &Budget::default())
        .expect("projection check runs");
    let gapped = systems::carpet_missing_col();
    let g = geometry::check_projection_condition(&gapped, &DirectionSet::from_samples(vec![Direction::y_axis()]), 8, &Budget::default())
        .expect("projection check runs");
    let pass = rep.holds && !g.holds && (g.max_gap() - 1.0 / 3.0).abs() < 1e-9;
    outcome(pass, format!("example passes on 50 directions: {}; missing column gap {:.12}", rep.holds, g.max_gap()))
}

fn criterion6() -> Outcome {
    let count = 2000;
    let diag = systems::diag2();
    let s = ergodic::furstenberg_sample(&diag, &BernoulliMeasure::uniform(2), 64, count, 1).expect("sampling runs");
    let off_y = s.directions.iter().map(|d| d.dist(&Direction::y_axis())).fold(0.0, f64::max);
    let upper = IfSystem::from_matrices(
        "upper",
        &[(Mat2::new(0.2, 0.3, 0.0, 0.5), Vec2::ZERO), (Mat2::new(0.3, -0.1, 0.0, 0.6), Vec2::new(0.5, 0.4))],
    )
    .expect("valid system");
    let u = ergodic::furstenberg_sample(&upper, &BernoulliMeasure::uniform(2), 64, count, 1).expect("sampling runs");
    let off_x = u.directions.iter().map(|d| d.dist(&Direction::x_axis())).fold(0.0, f64::max);
    let bound = 3.0 / (count as f64).sqrt();
    let mut worst = 0.0f64;
    let mut all = systems::all_bundled();
    all.push(upper);
    for sys in &all {
        let nu = BernoulliMeasure::uniform(sys.len());
        let s = ergodic::furstenberg_sample(sys, &nu, 64, count, 1).expect("sampling runs");
        let st = ergodic::check_stationarity(sys, &nu, &s.directions, &ergodic::trig_battery(4)).expect("stationarity runs");
        worst = worst.max(st.max_discrepancy);
    }
    let pass = off_y <= 1e-6 && off_x <= 1e-6 && worst <= bound;
    outcome(pass, format!("diagonal off y-axis {off_y:.1e}; upper-triangular off x-axis {off_x:.1e}; stationarity {worst:.2e} <= {bound:.2e}"))
}

fn criterion7() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for sys in [systems::carpet23(), systems::dominated3()] {
        let nu = BernoulliMeasure::uniform(sys.len());
        let diam = sys.bounding_box.diameter();
        let scales: Vec<f64> = [24, 30, 36].iter().map(|&e| diam * 0.5f64.powi(e)).collect();
        let mut combs = 0;
        for i in 0..20 {
            let b = tangent::random_base(&sys, &nu, 2024, i).expect("base point");
            let opts = TangentOptions { theta1: Some(b.theta1), ..Default::default() };
            let seq = tangent::tangent_sequence(&sys, b.point, &scales, &opts).expect("tangents");
            let last = seq.tangents.last().expect("nonempty");
            if comb_fit(&tangent::rotate_to_comb(last).expect("rotation"), 0.05).is_some() {
                combs += 1;
            }
        }
        let f = semigroup::estimate_xf(&sys, 10, 32).samples.first().copied().unwrap_or(Direction::y_axis());
        let mut target = WordStream::periodic(Word(vec![0]));
        let mut generic = WordStream::breadth_first(sys.len());
        let opts = MaintechOptions { tangent: false, ..Default::default() };
        let m = tangent::maintech_tangent(&sys, &mut target, &mut generic, f, &opts).expect("maintech runs");
        let brackets = m.steps.iter().filter(|s| s.k <= 8).all(|s| s.bracket_ok);
        let monotone = m.kernel_monotone(2, 1e-9);
        pass &= combs >= 18 && brackets && monotone && !m.steps.is_empty();
        parts.push(format!("{}: combs {combs}/20, brackets {brackets}, kernel monotone {monotone}", sys.name));
    }
    outcome(pass, parts.join("; "))
}

fn criterion8(reports: &BTreeMap<String, DimsReport>) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, r) in reports {
        let ok = r.box_dimension.value <= r.assouad_direct.value + 0.05 && r.tangent_sup.value <= r.assouad_direct.value + 0.1;
        pass &= ok;
        parts.push(format!(
            "{name}: box {:.3} direct {:.3} tangent {:.3}",
            r.box_dimension.value, r.assouad_direct.value, r.tangent_sup.value
        ));
    }
    pass &= reports.len() == systems::BUNDLED.len();
    outcome(pass, parts.join("; "))
}

fn without_timestamp(text: &str) -> Value {
    let mut v: Value = serde_json::from_str(text).expect("json output");
    v.as_object_mut().expect("object").remove("timestamp");
    v
}

fn criterion9() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let json_runs: [&[&str]; 3] = [
        &["estimate", "furstenberg", "--system", "dominated3", "--samples", "500", "--seed", "3"],
        &["estimate", "lyapunov", "--system", "dominated3", "--samples", "50", "--depth", "200"],
        &["estimate", "dims", "--system", "diag2", "--samples", "4"],
    ];
    let mut same = 0;
    let mut total = 0;
    for args in json_runs {
        let outs: Vec<Value> = ["1", "3"]
            .iter()
            .map(|t| {
                let mut a = args.to_vec();
                a.extend(["--threads", t]);
                without_timestamp(&atl(&a).1)
            })
            .collect();
        total += 1;
        same += usize::from(outs[0] == outs[1]);
    }
    let svg_runs: [&[&str]; 2] = [
        &["render", "attractor", "--system", "dominated3", "--depth", "7", "--overlay"],
        &["render", "tangent", "--system", "carpet23", "--base-word", "121212", "--scales", "8"],
    ];
    for args in svg_runs {
        let bytes: Vec<Vec<u8>> = ["1", "3"]
            .iter()
            .map(|t| {
                // same relative path in both runs: it is part of the metadata
                let sub = dir.path().join(format!("t{t}"));
                std::fs::create_dir_all(&sub).expect("temp dir");
                let mut a = args.to_vec();
                a.extend(["--threads", t, "--out", "render.svg"]);
                let status = Command::new(BIN).args(&a).current_dir(&sub).status().expect("binary runs");
                assert!(status.success(), "render failed");
                let path = sub.join("render.svg");
                std::fs::read(&path).expect("svg written")
            })
            .collect();
        total += 1;
        same += usize::from(bytes[0] == bytes[1]);
    }
    outcome(same == total, format!("{same}/{total} outputs identical across thread counts"))
}

fn main() {
    let started = Instant::now();
    let (code, carpet_out) = atl(&["estimate", "dims", "--system", "carpet23"]);
    let carpet_time = started.elapsed();
    assert_eq!(code, 0, "estimate dims failed");
    let carpet_json: Value = serde_json::from_str(&carpet_out).expect("json output");

    let reports: BTreeMap<String, DimsReport> = systems::BUNDLED
        .iter()
        .map(|&name| {
            let sys = systems::bundled(name).expect("bundled");
            let r = cli::estimate_dims(&sys, &common(dims_samples(name)), 0, &Budget::default()).expect("estimates run");
            (name.to_string(), r)
        })
        .collect();

    let results = [
        criterion1(&carpet_json, carpet_time),
        criterion2(&reports),
        criterion3(),
        criterion4(),
        criterion5(),
        criterion6(),
        criterion7(),
        criterion8(&reports),
        criterion9(),
    ];
    let mut failed = 0;
    for (i, r) in results.iter().enumerate() {
        println!("criterion {}: {} ({})", i + 1, if r.pass { "PASS" } else { "FAIL" }, r.detail);
        failed += usize::from(!r.pass);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
