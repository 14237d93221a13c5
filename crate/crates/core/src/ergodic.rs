//! Bernoulli measures and the quantities they induce: Lyapunov exponents,
//! limit directions, Furstenberg samples, entropy, Lyapunov dimension, the
//! singular value pressure and its zero, and level-`n` equilibrium weights.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ifs::{Budget, IfSystem, Walk, Word};
use crate::linalg::{compensated_sum, Mat2};
use crate::semigroup::{top_singular_dirs, Direction};

/// Bernoulli measure on blocks of `step` symbols. `probs` is indexed by
/// blocks in lexicographic order, so it has `alphabet^step` entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BernoulliMeasure {
    pub alphabet: usize,
    pub step: usize,
    pub probs: Vec<f64>,
}

impl BernoulliMeasure {
    pub fn new(alphabet: usize, step: usize, probs: Vec<f64>) -> Result<Self> {
        if alphabet == 0 || step == 0 {
            return Err(Error::Parameter("measure needs alphabet >= 1 and step >= 1".into()));
        }
        let expected = alphabet.checked_pow(step as u32).ok_or_else(|| Error::Parameter("measure too large".into()))?;
        if probs.len() != expected {
            return Err(Error::Parameter(format!(
                "measure over {alphabet} symbols with step {step} needs {expected} weights, got {}",
                probs.len()
            )));
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::Parameter("weights must be finite and nonnegative".into()));
        }
        let total = compensated_sum(probs.iter().copied());
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Parameter(format!("weights sum to {total}, expected 1")));
        }
        Ok(Self { alphabet, step, probs })
    }

    /// Normalizes nonnegative weights into a step-`step` measure.
    pub fn from_weights(alphabet: usize, step: usize, weights: &[f64]) -> Result<Self> {
        let total = compensated_sum(weights.iter().copied());
        if !(total > 0.0) {
            return Err(Error::Parameter("weights must have positive sum".into()));
        }
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        Self::new(alphabet, step, probs)
    }

    pub fn uniform(alphabet: usize) -> Self {
        Self { alphabet, step: 1, probs: vec![1.0 / alphabet as f64; alphabet] }
    }

    pub fn dirac(alphabet: usize, symbol: usize) -> Self {
        let mut probs = vec![0.0; alphabet];
        probs[symbol] = 1.0;
        Self { alphabet, step: 1, probs }
    }

    pub fn fully_supported(&self) -> bool {
        self.probs.iter().all(|p| *p > 0.0)
    }

    /// Appends one block of `step` symbols drawn from the measure.
    pub fn draw_block<R: Rng>(&self, rng: &mut R, out: &mut Vec<usize>) {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut idx = self.probs.len() - 1;
        for (k, p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc && *p > 0.0 {
                idx = k;
                break;
            }
        }
        while self.probs[idx] == 0.0 && idx > 0 {
            idx -= 1;
        }
        let start = out.len();
        out.resize(start + self.step, 0);
        let mut r = idx;
        for k in (0..self.step).rev() {
            out[start + k] = r % self.alphabet;
            r /= self.alphabet;
        }
    }

    /// Random word of exactly `len` symbols.
    pub fn draw_word<R: Rng>(&self, rng: &mut R, len: usize) -> Vec<usize> {
        let mut w = Vec::with_capacity(len + self.step);
        while w.len() < len {
            self.draw_block(rng, &mut w);
        }
        w.truncate(len);
        w
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("word,probability\n");
        for (k, p) in self.probs.iter().enumerate() {
            let w = crate::ifs::word_of_index(k, self.alphabet, self.step);
            out.push_str(&format!("{w},{p:.17e}\n"));
        }
        out
    }
}

/// Generator for Monte-Carlo sample `index` of a run seeded with `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Product of matrices kept at unit scale, with the scale in log form.
#[derive(Clone, Copy, Debug)]
pub struct RenormalizedProduct {
    pub matrix: Mat2,
    pub log_scale: f64,
    /// `Σ log|det A_i|`, tracked exactly.
    pub log_det: f64,
}

impl Default for RenormalizedProduct {
    fn default() -> Self {
        Self { matrix: Mat2::IDENTITY, log_scale: 0.0, log_det: 0.0 }
    }
}

impl RenormalizedProduct {
    /// Right-multiplies by `m`.
    pub fn push(&mut self, m: &Mat2) {
        self.matrix = self.matrix * *m;
        self.log_det += m.det().abs().ln();
        let f = self.matrix.frobenius();
        self.matrix = self.matrix.scale(1.0 / f);
        self.log_scale += f.ln();
    }

    /// `log ‖product‖`.
    pub fn log_alpha1(&self) -> f64 {
        self.matrix.norm().ln() + self.log_scale
    }

    /// `log ‖product⁻¹‖⁻¹`.
    pub fn log_alpha2(&self) -> f64 {
        self.log_det - self.log_alpha1()
    }
}

pub fn renormalized_product(mats: &[Mat2], word: &[usize]) -> RenormalizedProduct {
    let mut p = RenormalizedProduct::default();
    for &s in word {
        p.push(&mats[s]);
    }
    p
}

#[derive(Clone, Debug, Serialize)]
pub struct LyapunovEstimate {
    pub chi1: f64,
    pub chi2: f64,
    pub stderr1: f64,
    pub stderr2: f64,
    pub samples: usize,
    pub depth: usize,
    pub seed: u64,
    pub simple_spectrum: bool,
    pub fully_supported: bool,
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = compensated_sum(values.iter().copied()) / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean))) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Monte-Carlo Lyapunov exponents from `samples` random products of
/// length `depth`.
pub fn lyapunov(sys: &IfSystem, nu: &BernoulliMeasure, depth: usize, samples: usize, seed: u64) -> Result<LyapunovEstimate> {
    if depth == 0 || samples == 0 {
        return Err(Error::Parameter("lyapunov needs depth >= 1 and samples >= 1".into()));
    }
    check_alphabet(sys, nu)?;
    let mats = sys.matrices();
    let pairs: Vec<(f64, f64)> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = sample_rng(seed, k as u64);
            let w = nu.draw_word(&mut rng, depth);
            let p = renormalized_product(&mats, &w);
            (-p.log_alpha1() / depth as f64, -p.log_alpha2() / depth as f64)
        })
        .collect();
    let c1: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let c2: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let (chi1, stderr1) = mean_and_stderr(&c1);
    let (chi2, stderr2) = mean_and_stderr(&c2);
    Ok(LyapunovEstimate {
        chi1,
        chi2,
        stderr1,
        stderr2,
        samples,
        depth,
        seed,
        simple_spectrum: chi1 + 2.0 * stderr1 < chi2 - 2.0 * stderr2,
        fully_supported: nu.fully_supported(),
    })
}

fn check_alphabet(sys: &IfSystem, nu: &BernoulliMeasure) -> Result<()> {
    if nu.alphabet != sys.len() {
        return Err(Error::Parameter(format!(
            "measure is over {} symbols but the system has {} maps",
            nu.alphabet,
            sys.len()
        )));
    }
    Ok(())
}

/// Finite-depth limit directions `(ϑ₁(w), ϑ₂(w))`: the most expanded image
/// direction of `A_{w₁}⋯A_{wₙ}` and of `A_{w₁}⁻¹⋯A_{wₙ}⁻¹`.
pub fn oseledets_dirs(sys: &IfSystem, w: &Word) -> Result<(Direction, Direction)> {
    if w.is_empty() {
        return Err(Error::Parameter("limit directions need a nonempty word".into()));
    }
    w.validate(sys.len())?;
    let mats = sys.matrices();
    let inv = inverses(&mats);
    Ok((top_direction(&mats, w.symbols()), top_direction(&inv, w.symbols())))
}

/// `ϑ₁` of a finite word.
pub fn theta1(mats: &[Mat2], word: &[usize]) -> Direction {
    top_direction(mats, word)
}

/// Most expanded image direction of `A_{wₙ}⁻¹⋯A_{w₁}⁻¹`, the reversed
/// order used when tracking a direction along the skew product.
pub fn theta2_reversed(sys: &IfSystem, w: &Word) -> Result<Direction> {
    w.validate(sys.len())?;
    Ok(top_direction(&inverses(&sys.matrices()), &w.reversed().0))
}

pub(crate) fn inverses(mats: &[Mat2]) -> Vec<Mat2> {
    mats.iter().map(|m| m.inverse().expect("system maps are invertible")).collect()
}

fn top_direction(mats: &[Mat2], word: &[usize]) -> Direction {
    top_singular_dirs(&renormalized_product(mats, word).matrix).1
}

#[derive(Clone, Debug, Serialize)]
pub struct FurstenbergSample {
    pub directions: Vec<Direction>,
    pub word_depth: usize,
    pub measure: BernoulliMeasure,
    pub seed: u64,
}

/// `count` independent draws of `ϑ₂(i|depth)` with `i ~ ν`.
pub fn furstenberg_sample(sys: &IfSystem, nu: &BernoulliMeasure, depth: usize, count: usize, seed: u64) -> Result<FurstenbergSample> {
    if depth == 0 {
        return Err(Error::Parameter("furstenberg sampling needs depth >= 1".into()));
    }
    check_alphabet(sys, nu)?;
    let inv = inverses(&sys.matrices());
    let directions: Vec<Direction> = (0..count)
        .into_par_iter()
        .map(|k| {
            let mut rng = sample_rng(seed, k as u64);
            let w = nu.draw_word(&mut rng, depth);
            top_direction(&inv, &w)
        })
        .collect();
    Ok(FurstenbergSample { directions, word_depth: depth, measure: nu.clone(), seed })
}

/// `f(θ) = cos 2kθ` or `sin 2kθ`, smooth on the projective line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrigTest {
    pub k: u32,
    pub sine: bool,
}

impl TrigTest {
    pub fn eval(&self, d: &Direction) -> f64 {
        let x = 2.0 * self.k as f64 * d.angle;
        if self.sine {
            x.sin()
        } else {
            x.cos()
        }
    }
}

/// `cos 2kθ`, `sin 2kθ` for `k = 1..=degree`.
pub fn trig_battery(degree: u32) -> Vec<TrigTest> {
    (1..=degree).flat_map(|k| [TrigTest { k, sine: false }, TrigTest { k, sine: true }]).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct StationarityReport {
    pub max_discrepancy: f64,
    pub per_function: Vec<(TrigTest, f64)>,
    pub count: usize,
}

/// `max_f |∫ f dm − Σ p_i ∫ f(A_i⁻¹ V) dm|` over the empirical measure `m`.
pub fn check_stationarity(sys: &IfSystem, nu: &BernoulliMeasure, sample: &[Direction], tests: &[TrigTest]) -> Result<StationarityReport> {
    if nu.step != 1 {
        return Err(Error::Parameter("stationarity check needs a step-1 measure".into()));
    }
    check_alphabet(sys, nu)?;
    if sample.is_empty() {
        return Err(Error::Parameter("empty direction sample".into()));
    }
    let inv = inverses(&sys.matrices());
    let n = sample.len() as f64;
    let per_function: Vec<(TrigTest, f64)> = tests
        .iter()
        .map(|f| {
            let lhs = compensated_sum(sample.iter().map(|v| f.eval(v))) / n;
            let rhs = compensated_sum(nu.probs.iter().zip(&inv).map(|(p, a)| {
                p * compensated_sum(sample.iter().map(|v| f.eval(&v.mapped(a)))) / n
            }));
            (*f, (lhs - rhs).abs())
        })
        .collect();
    let max_discrepancy = per_function.iter().map(|x| x.1).fold(0.0, f64::max);
    Ok(StationarityReport { max_discrepancy, per_function, count: sample.len() })
}

/// One step of the skew product: `(i, V) ↦ (σi, A_{i₁}⁻¹ V)`.
pub fn skew_step<'a>(sys: &IfSystem, word: &'a [usize], v: Direction) -> Result<(&'a [usize], Direction)> {
    let (&first, rest) = word
        .split_first()
        .ok_or_else(|| Error::Parameter("skew step needs a nonempty word".into()))?;
    let m = sys
        .maps
        .get(first)
        .ok_or(Error::InvalidWord { symbol: first + 1, position: 0, alphabet: sys.len() })?;
    let inv = m.matrix.inverse().expect("system maps are invertible");
    Ok((rest, v.mapped(&inv)))
}

/// Entropy per symbol, `-(1/step) Σ p log p`.
pub fn entropy(nu: &BernoulliMeasure) -> f64 {
    let s = compensated_sum(nu.probs.iter().filter(|p| **p > 0.0).map(|p| -p * p.ln()));
    s / nu.step as f64
}

/// `min{h/χ₁, 1 + (h − χ₁)/χ₂}`, uncapped.
pub fn lyapunov_dimension(h: f64, chi1: f64, chi2: f64) -> Result<f64> {
    if !(chi1 > 0.0 && chi2 > 0.0) {
        return Err(Error::Parameter("Lyapunov exponents must be positive".into()));
    }
    Ok((h / chi1).min(1.0 + (h - chi1) / chi2))
}

/// Singular value function `φ^s(A)` for `0 ≤ s ≤ 2`.
pub fn svf(a: &Mat2, s: f64) -> Result<f64> {
    if !(0.0..=2.0).contains(&s) {
        return Err(Error::Parameter(format!("singular value function needs 0 <= s <= 2, got {s}")));
    }
    let (a1, _) = a.singular_values();
    let a2 = a.det().abs() / a1;
    Ok(svf_from(a1, a2, s))
}

fn svf_from(a1: f64, a2: f64, s: f64) -> f64 {
    if s <= 1.0 {
        a1.powf(s)
    } else {
        a1 * a2.powf(s - 1.0)
    }
}

fn log_svf(l1: f64, l2: f64, s: f64) -> f64 {
    if s <= 1.0 {
        s * l1
    } else {
        l1 + (s - 1.0) * l2
    }
}

/// Log singular values of every level-`n` product, lexicographic order.
fn level_log_singular_values(sys: &IfSystem, level: usize, budget: &Budget) -> Result<Vec<(f64, f64)>> {
    budget.check(sys.len(), level)?;
    let mut out = Vec::with_capacity(sys.len().pow(level as u32));
    sys.walk_cylinders(|w, m| {
        if w.len() == level {
            let (a1, _) = m.matrix.singular_values();
            let l1 = a1.ln();
            out.push((l1, m.matrix.det().abs().ln() - l1));
            Walk::Stop
        } else {
            Walk::Descend
        }
    });
    Ok(out)
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    max + compensated_sum(values.map(|v| (v - max).exp())).ln()
}

/// Level-`n` pressure `(1/n) log Σ_{|w| = n} φ^s(A_w)`.
pub fn pressure(sys: &IfSystem, level: usize, s: f64, budget: &Budget) -> Result<f64> {
    if !(0.0..=2.0).contains(&s) {
        return Err(Error::Parameter(format!("pressure needs 0 <= s <= 2, got {s}")));
    }
    if level == 0 {
        return Err(Error::Parameter("pressure needs level >= 1".into()));
    }
    let sv = level_log_singular_values(sys, level, budget)?;
    Ok(log_sum_exp(sv.iter().map(|&(l1, l2)| log_svf(l1, l2, s))) / level as f64)
}

#[derive(Clone, Debug, Serialize)]
pub struct AffinityEstimate {
    pub value: f64,
    /// Pressure is still positive at `s = 2`; `value` is then 2.
    pub saturated: bool,
    pub level: usize,
    pub tol: f64,
}

/// Zero of the level-`n` pressure on `[0, 2]`, by bisection.
pub fn affinity_dimension(sys: &IfSystem, level: usize, tol: f64, budget: &Budget) -> Result<AffinityEstimate> {
    if level == 0 || !(tol > 0.0) {
        return Err(Error::Parameter("affinity dimension needs level >= 1 and tol > 0".into()));
    }
    let sv = level_log_singular_values(sys, level, budget)?;
    let p = |s: f64| log_sum_exp(sv.iter().map(|&(l1, l2)| log_svf(l1, l2, s))) / level as f64;
    let (p_lo, p_hi) = (p(0.0), p(2.0));
    if p_hi > 0.0 {
        return Ok(AffinityEstimate { value: 2.0, saturated: true, level, tol });
    }
    let (mut lo, mut hi) = (0.0f64, 2.0f64);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let pm = p(mid);
        assert!(pm <= p_lo + 1e-9 && pm >= p_hi - 1e-9, "pressure must be nonincreasing in s");
        if pm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(AffinityEstimate { value: 0.5 * (lo + hi), saturated: false, level, tol })
}

/// Level-`n` Bernoulli weights proportional to `φ^s(A_w)`.
pub fn kaenmaki_weights(sys: &IfSystem, level: usize, s: f64, budget: &Budget) -> Result<BernoulliMeasure> {
    if !(0.0..=2.0).contains(&s) {
        return Err(Error::Parameter(format!("weights need 0 <= s <= 2, got {s}")));
    }
    if level == 0 {
        return Err(Error::Parameter("weights need level >= 1".into()));
    }
    let sv = level_log_singular_values(sys, level, budget)?;
    let logs: Vec<f64> = sv.iter().map(|&(l1, l2)| log_svf(l1, l2, s)).collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    BernoulliMeasure::from_weights(sys.len(), level, &weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Vec2;

    fn diag2() -> IfSystem {
        IfSystem::from_matrices(
            "diag2",
            &[(Mat2::diag(0.6, 0.2), Vec2::ZERO), (Mat2::diag(0.7, 0.3), Vec2::new(0.3, 0.7))],
        )
        .unwrap()
    }

    #[test]
    fn measure_validation() {
        assert!(BernoulliMeasure::new(2, 1, vec![0.5, 0.6]).is_err());
        assert!(BernoulliMeasure::new(2, 2, vec![0.5, 0.5]).is_err());
        let m = BernoulliMeasure::new(2, 2, vec![0.25; 4]).unwrap();
        assert!(m.fully_supported());
        assert!(!BernoulliMeasure::dirac(3, 1).fully_supported());
    }

    #[test]
    fn dirac_lyapunov_is_exact() {
        let sys = IfSystem::from_matrices("one", &[(Mat2::diag(0.6, 0.2), Vec2::ZERO)]).unwrap();
        let est = lyapunov(&sys, &BernoulliMeasure::uniform(1), 50, 10, 1).unwrap();
        assert!((est.chi1 + 0.6f64.ln()).abs() < 1e-12);
        assert!((est.chi2 + 0.2f64.ln()).abs() < 1e-12);
        assert!(est.stderr1 < 1e-12);
    }

    #[test]
    fn conformal_spectrum_is_not_simple() {
        let sys = IfSystem::from_matrices("rot", &[(Mat2::scaled_rotation(0.5, 1.0), Vec2::ZERO)]).unwrap();
        let est = lyapunov(&sys, &BernoulliMeasure::uniform(1), 100, 8, 3).unwrap();
        assert!((est.chi1 - 2f64.ln()).abs() < 1e-10 && (est.chi2 - 2f64.ln()).abs() < 1e-10);
        assert!(!est.simple_spectrum);
    }

    #[test]
    fn renormalized_log_norm_matches_direct() {
        let mats = vec![Mat2::new(0.5, 0.2, 0.1, 0.4), Mat2::new(0.3, -0.1, 0.2, 0.6)];
        let word: Vec<usize> = (0..30).map(|k| (k * 7 + 3) % 2).collect();
        let direct = word.iter().fold(Mat2::IDENTITY, |acc, &s| acc * mats[s]);
        let p = renormalized_product(&mats, &word);
        assert!((p.log_alpha1() - direct.norm().ln()).abs() < 1e-8);
    }

    #[test]
    fn entropy_values() {
        assert!((entropy(&BernoulliMeasure::uniform(3)) - 3f64.ln()).abs() < 1e-15);
        assert_eq!(entropy(&BernoulliMeasure::dirac(3, 0)), 0.0);
        let m = BernoulliMeasure::new(2, 1, vec![0.25, 0.75]).unwrap();
        assert!((entropy(&m) - 0.5623351446188083).abs() < 1e-12);
    }

    #[test]
    fn lyapunov_dimension_branches() {
        assert!((lyapunov_dimension(0.5, 0.5, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((lyapunov_dimension(0.3, 0.5, 1.0).unwrap() - 0.6).abs() < 1e-15);
        let carpet = lyapunov_dimension(3f64.ln(), 2f64.ln(), 3f64.ln()).unwrap();
        assert!((carpet - (2.0 - 2f64.ln() / 3f64.ln())).abs() < 1e-14);
    }

    #[test]
    fn svf_values() {
        let a = Mat2::diag(0.6, 0.2);
        assert_eq!(svf(&a, 0.0).unwrap(), 1.0);
        assert!((svf(&a, 2.0).unwrap() - 0.12).abs() < 1e-15);
        assert!((svf(&a, 1.5).unwrap() - 0.6 * 0.2f64.sqrt()).abs() < 1e-15);
        assert!(svf(&a, 2.5).is_err());
    }

    #[test]
    fn similarity_affinity_dimension() {
        let sys = IfSystem::from_matrices(
            "sierpinski",
            &[
                (Mat2::diag(0.5, 0.5), Vec2::ZERO),
                (Mat2::diag(0.5, 0.5), Vec2::new(0.5, 0.0)),
                (Mat2::diag(0.5, 0.5), Vec2::new(0.0, 0.5)),
            ],
        )
        .unwrap();
        for level in [1, 4] {
            let est = affinity_dimension(&sys, level, 1e-9, &Budget::default()).unwrap();
            assert!((est.value - 3f64.ln() / 2f64.ln()).abs() < 1e-8);
        }
        let w = kaenmaki_weights(&sys, 3, 1.2, &Budget::default()).unwrap();
        assert!(w.probs.iter().all(|p| (p - 1.0 / 27.0).abs() < 1e-15));
    }

    #[test]
    fn skew_step_keeps_vertical_for_diagonal() {
        let sys = diag2();
        let (rest, v) = skew_step(&sys, &[1, 0, 1], Direction::y_axis()).unwrap();
        assert_eq!(rest, &[0, 1]);
        assert!(v.dist(&Direction::y_axis()) < 1e-15);
    }
}
