//! Built-in systems and generators.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ifs::IfSystem;
use crate::linalg::{Mat2, Vec2};

/// Bedford–McMullen carpet on an `m × n` grid (`m` columns, `n` rows).
/// Each `(col, row)` cell gets the map `diag(s/m, s/n)`, centered in the
/// cell; `shrink = 1` fills the cell exactly.
pub fn carpet(m: usize, n: usize, cells: &[(usize, usize)], shrink: f64) -> Result<IfSystem> {
    if m == 0 || n == 0 || cells.is_empty() {
        return Err(Error::Parameter("carpet needs a nonempty cell list on a nonempty grid".into()));
    }
    if !(shrink > 0.0 && shrink <= 1.0) {
        return Err(Error::Parameter(format!("shrink must lie in (0, 1], got {shrink}")));
    }
    let (mf, nf) = (m as f64, n as f64);
    let mut pairs = Vec::with_capacity(cells.len());
    for (k, &(c, r)) in cells.iter().enumerate() {
        if c >= m || r >= n {
            return Err(Error::InvalidMap { index: k, reason: format!("cell ({c}, {r}) outside the {m}x{n} grid") });
        }
        let pad = (1.0 - shrink) / 2.0;
        pairs.push((
            Mat2::diag(shrink / mf, shrink / nf),
            Vec2::new((c as f64 + pad) / mf, (r as f64 + pad) / nf),
        ));
    }
    IfSystem::from_matrices(format!("carpet{m}x{n}"), &pairs)
}

/// Carpet on the 2 × 3 grid with cells `(0,0), (0,1), (1,0)`.
pub fn carpet23() -> IfSystem {
    let mut s = carpet(2, 3, &[(0, 0), (0, 1), (1, 0)], 1.0).expect("valid carpet");
    s.name = "carpet23".into();
    s
}

/// Carpet on the 3 × 4 grid whose middle column is empty.
pub fn carpet_missing_col() -> IfSystem {
    let mut s = carpet(3, 4, &[(0, 0), (0, 2), (2, 1), (2, 3)], 1.0).expect("valid carpet");
    s.name = "carpet_missing_col".into();
    s
}

/// Four maps of ratio 1/2 tiling the unit square.
pub fn square() -> IfSystem {
    let h = Mat2::diag(0.5, 0.5);
    IfSystem::from_matrices(
        "square",
        &[
            (h, Vec2::new(0.0, 0.0)),
            (h, Vec2::new(0.5, 0.0)),
            (h, Vec2::new(0.0, 0.5)),
            (h, Vec2::new(0.5, 0.5)),
        ],
    )
    .expect("valid system")
}

/// Four maps of ratio 1/4 at the corners of the unit square.
pub fn cantor4() -> IfSystem {
    let q = Mat2::diag(0.25, 0.25);
    IfSystem::from_matrices(
        "cantor4",
        &[
            (q, Vec2::new(0.0, 0.0)),
            (q, Vec2::new(0.75, 0.0)),
            (q, Vec2::new(0.0, 0.75)),
            (q, Vec2::new(0.75, 0.75)),
        ],
    )
    .expect("valid system")
}

/// Two diagonal maps with distinct contraction ratios.
pub fn diag2() -> IfSystem {
    IfSystem::from_matrices(
        "diag2",
        &[
            (Mat2::diag(0.6, 0.2), Vec2::new(0.0, 0.0)),
            (Mat2::diag(0.7, 0.3), Vec2::new(0.3, 0.7)),
        ],
    )
    .expect("valid system")
}

/// Parameters of the three-map dominated, strongly irreducible family:
/// `A₁ = A₂ = diag(λ, γ)`, `A₃ = [[a, b], [b, d]]`, with translations
/// `0`, `(1-λ, 1-γ)` and `v₃`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DominatedParams {
    pub lambda: f64,
    pub gamma: f64,
    pub a: f64,
    pub b: f64,
    pub d: f64,
    pub v3: [f64; 2],
}

impl Default for DominatedParams {
    fn default() -> Self {
        Self { lambda: 0.7, gamma: 0.2, a: 0.2, b: 0.05, d: 0.15, v3: [0.4, 0.4] }
    }
}

/// One of the six defining inequalities and how far it is from failing.
#[derive(Clone, Debug, Serialize)]
pub struct ConditionCheck {
    pub id: &'static str,
    pub statement: &'static str,
    pub holds: bool,
    /// Positive when the inequality holds; the smallest margin in it.
    pub slack: f64,
}

impl DominatedParams {
    /// `(1 - 2λ) / (1 - 2γ)`.
    pub fn threshold(&self) -> f64 {
        (1.0 - 2.0 * self.lambda) / (1.0 - 2.0 * self.gamma)
    }

    /// `(a - d - √((a-d)² + 4b²)) / (2b)`, the `t` with
    /// `span{(t, 1)}` orthogonal to the unstable line of `A₃`.
    pub fn t_min(&self) -> f64 {
        let (a, b, d) = (self.a, self.b, self.d);
        (a - d - ((a - d) * (a - d) + 4.0 * b * b).sqrt()) / (2.0 * b)
    }

    pub fn conditions(&self) -> Vec<ConditionCheck> {
        let DominatedParams { lambda, gamma, a, b, d, v3 } = *self;
        let mk = |id, statement, slack: f64| ConditionCheck { id, statement, holds: slack > 0.0, slack };
        vec![
            mk("i", "0 < gamma < 1/2 < lambda < 1", gamma.min(0.5 - gamma).min(lambda - 0.5).min(1.0 - lambda)),
            mk("ii", "a, b, d > 0", a.min(b).min(d)),
            mk("iii", "0 < v3_x < 1 - a - b", v3[0].min(1.0 - a - b - v3[0])),
            mk("iv", "gamma < v3_y < 1 - gamma - b - d", (v3[1] - gamma).min(1.0 - gamma - b - d - v3[1])),
            mk("v", "a d > b^2", a * d - b * b),
            mk("vi", "(1 - 2 lambda)/(1 - 2 gamma) < (a - d - sqrt((a - d)^2 + 4 b^2))/(2 b)", {
                let s = self.t_min() - self.threshold();
                if s.is_finite() {
                    s
                } else {
                    f64::NEG_INFINITY
                }
            }),
        ]
    }

    pub fn violations(&self) -> Vec<ConditionCheck> {
        self.conditions().into_iter().filter(|c| !c.holds).collect()
    }

    /// The system, or an error listing every violated condition.
    pub fn system(&self) -> Result<IfSystem> {
        let bad = self.violations();
        if !bad.is_empty() {
            let list: Vec<String> = bad.iter().map(|c| format!("({}) {}", c.id, c.statement)).collect();
            return Err(Error::Parameter(format!("violated: {}", list.join("; "))));
        }
        let a12 = Mat2::diag(self.lambda, self.gamma);
        IfSystem::from_matrices(
            "dominated3",
            &[
                (a12, Vec2::ZERO),
                (a12, Vec2::new(1.0 - self.lambda, 1.0 - self.gamma)),
                (Mat2::new(self.a, self.b, self.b, self.d), Vec2::from(self.v3)),
            ],
        )
    }

    /// First lattice point, in lexicographic order, satisfying all six
    /// conditions.
    pub fn search() -> Option<DominatedParams> {
        let grid = |lo: f64, hi: f64, step: f64| -> Vec<f64> {
            let n = ((hi - lo) / step).round() as usize;
            (0..=n).map(|k| lo + k as f64 * step).collect()
        };
        let lambdas = grid(0.55, 0.95, 0.05);
        let gammas = grid(0.05, 0.45, 0.05);
        let entries = grid(0.05, 0.45, 0.05);
        let shifts = grid(0.05, 0.95, 0.05);
        for &lambda in &lambdas {
            for &gamma in &gammas {
                for &a in &entries {
                    for &b in &entries {
                        for &d in &entries {
                            for &x in &shifts {
                                for &y in &shifts {
                                    let p = DominatedParams { lambda, gamma, a, b, d, v3: [x, y] };
                                    if p.violations().is_empty() {
                                        return Some(p);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        None
    }
}

/// The dominated three-map system at its default parameters.
pub fn dominated3() -> IfSystem {
    DominatedParams::default().system().expect("default parameters are valid")
}

/// Names of the bundled systems.
pub const BUNDLED: [&str; 6] = ["carpet23", "dominated3", "square", "cantor4", "carpet_missing_col", "diag2"];

pub fn bundled(name: &str) -> Option<IfSystem> {
    match name {
        "carpet23" => Some(carpet23()),
        "dominated3" => Some(dominated3()),
        "square" => Some(square()),
        "cantor4" => Some(cantor4()),
        "carpet_missing_col" => Some(carpet_missing_col()),
        "diag2" => Some(diag2()),
        _ => None,
    }
}

pub fn all_bundled() -> Vec<IfSystem> {
    BUNDLED.iter().map(|n| bundled(n).expect("listed")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::Word;

    #[test]
    fn default_parameters_pass() {
        let p = DominatedParams::default();
        assert!(p.conditions().iter().all(|c| c.holds));
        assert!((p.threshold() + 2.0 / 3.0).abs() < 1e-12);
        assert!((p.t_min() + 0.618_033_988_749_895).abs() < 1e-9);
    }

    #[test]
    fn second_map_fixes_corner() {
        let s = dominated3();
        let m = s.compose(&Word(vec![1])).unwrap();
        assert!(m.apply(Vec2::new(1.0, 1.0)).dist(Vec2::new(1.0, 1.0)) < 1e-15);
        let sq = s.compose(&Word(vec![0, 0])).unwrap();
        assert!(sq.matrix.max_abs_diff(&Mat2::diag(0.49, 0.04)) < 1e-15);
    }

    #[test]
    fn each_violation_is_named() {
        let base = DominatedParams::default();
        let cases = [
            ("i", DominatedParams { gamma: 0.6, ..base }),
            ("ii", DominatedParams { b: -0.05, ..base }),
            ("iii", DominatedParams { v3: [0.8, 0.4], ..base }),
            ("iv", DominatedParams { v3: [0.4, 0.1], ..base }),
            ("v", DominatedParams { a: 0.04, d: 0.05, ..base }),
            ("vi", DominatedParams { lambda: 0.55, ..base }),
        ];
        for (id, p) in cases {
            let bad: Vec<&str> = p.violations().iter().map(|c| c.id).collect();
            assert!(bad.contains(&id), "{id}: {bad:?}");
        }
    }

    #[test]
    fn lattice_search_finds_valid_tuple() {
        let p = DominatedParams::search().unwrap();
        assert!(p.system().is_ok());
    }

    #[test]
    fn carpet_rejects_cells_outside_grid() {
        assert!(carpet(2, 3, &[(2, 0)], 1.0).is_err());
        assert_eq!(carpet23().len(), 3);
    }
}
