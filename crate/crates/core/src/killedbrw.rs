//! Binary branching random walk killed below a line of slope v(p) − ε.
//!
//! ρ(m, ε) is the probability that some descending path of length m from the
//! root stays at or above the line through the origin. It is estimated three
//! ways: by simulating the killed front, by an exact recursion on lattice
//! steps, and by a tilted first-moment estimator that brackets it from above.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel::{map_indexed, mean_and_se};
use crate::rng::Stream;
use crate::stepdist::{Kind, StepDistribution, StepSampler};
use crate::theory::TheoryConstants;

/// Default cap on the number of alive vertices in one front.
pub const DEFAULT_CAP: usize = 100_000;
/// Two-sided 95% normal quantile used for Wilson intervals.
const Z95: f64 = 1.959_963_984_540_054;

/// Default upper tube wall λ·ε^{−1/2} with λ = 4.
pub fn default_band(eps: f64) -> f64 {
    4.0 / eps.sqrt()
}

/// Critical horizon ⌈λ·ε^{−3/2}⌉.
pub fn critical_horizon(lambda: f64, eps: f64) -> u64 {
    (lambda * eps.powf(-1.5)).ceil().max(1.0) as u64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BarrierSpec {
    /// Killing slope v(p) − ε.
    pub speed: f64,
    pub eps: f64,
    pub horizon: u64,
    /// Offset of the upper tube wall above the line of slope v(p).
    pub band: f64,
}

impl BarrierSpec {
    pub fn from_constants(constants: &TheoryConstants, eps: f64, horizon: u64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::param("eps", "must be positive"));
        }
        Ok(Self {
            speed: constants.v_inf - eps,
            eps,
            horizon,
            band: default_band(eps),
        })
    }

    /// A barrier with an explicit slope; `eps` is kept for bookkeeping only.
    pub fn with_speed(speed: f64, horizon: u64) -> Self {
        Self {
            speed,
            eps: f64::NAN,
            horizon,
            band: f64::INFINITY,
        }
    }

    #[inline]
    fn admits(&self, position: f64, gen: u64) -> bool {
        position >= self.speed * gen as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Fate {
    Alive,
    Dead,
    /// The front exceeded the cap before the horizon.
    Capped,
}

/// Simulates one killed front to the barrier's horizon.
pub fn survive_once(
    dist: &StepDistribution,
    barrier: &BarrierSpec,
    cap: usize,
    rng: &mut Stream,
) -> Fate {
    let mut front = vec![0.0f64];
    let mut next = Vec::new();
    for gen in 1..=barrier.horizon {
        next.clear();
        for &x in &front {
            for _ in 0..2 {
                let y = x + dist.draw(rng);
                if barrier.admits(y, gen) {
                    next.push(y);
                }
            }
        }
        if next.is_empty() {
            return Fate::Dead;
        }
        if gen < barrier.horizon && next.len() > cap {
            return Fate::Capped;
        }
        std::mem::swap(&mut front, &mut next);
    }
    Fate::Alive
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Direct,
    TiltedFirstMoment,
    ExactDp,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SurvivalEstimate {
    /// Capped fronts are counted as survivors.
    pub rho_hat: f64,
    /// Half-width of the 95% Wilson interval around `rho_hat`.
    pub ci_halfwidth: f64,
    pub std_err: f64,
    /// Capped fronts counted dead.
    pub rho_lower: f64,
    /// Capped fronts counted alive.
    pub rho_upper: f64,
    pub capped_fraction: f64,
    pub replicas: usize,
    pub horizon: u64,
    pub eps: f64,
    pub method: Method,
}

impl SurvivalEstimate {
    fn from_counts(alive: usize, capped: usize, replicas: usize, barrier: &BarrierSpec) -> Self {
        let r = replicas as f64;
        let lower = alive as f64 / r;
        let upper = (alive + capped) as f64 / r;
        let p = upper;
        let (_, half) = wilson(p, r);
        Self {
            rho_hat: p,
            ci_halfwidth: half,
            std_err: (p * (1.0 - p) / r).sqrt(),
            rho_lower: lower,
            rho_upper: upper,
            capped_fraction: capped as f64 / r,
            replicas,
            horizon: barrier.horizon,
            eps: barrier.eps,
            method: Method::Direct,
        }
    }
}

/// Wilson score interval at 95%: (center, half-width).
fn wilson(p: f64, n: f64) -> (f64, f64) {
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    (center, half)
}

/// Direct Monte Carlo estimate of ρ(m, ε) at slope v(p) − ε.
pub fn estimate_rho(
    dist: &StepDistribution,
    constants: &TheoryConstants,
    eps: f64,
    horizon: u64,
    replicas: usize,
    cap: usize,
    seed: u64,
) -> Result<SurvivalEstimate> {
    let barrier = BarrierSpec::from_constants(constants, eps, horizon)?;
    estimate_rho_at(dist, &barrier, replicas, cap, &Stream::new(seed))
}

/// Direct estimate for an arbitrary barrier; replica r uses `base.derive(r)`.
pub fn estimate_rho_at(
    dist: &StepDistribution,
    barrier: &BarrierSpec,
    replicas: usize,
    cap: usize,
    base: &Stream,
) -> Result<SurvivalEstimate> {
    if replicas == 0 {
        return Err(Error::param("replicas", "must be positive"));
    }
    if cap == 0 {
        return Err(Error::param("cap", "must be positive"));
    }
    if barrier.horizon == 0 {
        return Err(Error::param("horizon", "must be at least 1"));
    }
    // Chunk replicas so the parallel map has few, large work items.
    const CHUNK: usize = 1024;
    let chunks = replicas.div_ceil(CHUNK);
    let counts = map_indexed(chunks, |c| {
        let (mut alive, mut capped) = (0usize, 0usize);
        for r in c * CHUNK..((c + 1) * CHUNK).min(replicas) {
            match survive_once(dist, barrier, cap, &mut base.derive(r as u64)) {
                Fate::Alive => alive += 1,
                Fate::Capped => capped += 1,
                Fate::Dead => {}
            }
        }
        (alive, capped)
    });
    let (alive, capped) = counts
        .iter()
        .fold((0, 0), |(a, c), &(x, y)| (a + x, c + y));
    Ok(SurvivalEstimate::from_counts(alive, capped, replicas, barrier))
}

/// Exact ρ(m, ε) for Bernoulli steps by backward recursion over integer
/// positions.
pub fn exact_rho_dp(
    dist: &StepDistribution,
    constants: &TheoryConstants,
    eps: f64,
    horizon: u64,
) -> Result<f64> {
    exact_rho_dp_at(dist, &BarrierSpec::from_constants(constants, eps, horizon)?)
}

pub fn exact_rho_dp_at(dist: &StepDistribution, barrier: &BarrierSpec) -> Result<f64> {
    let alpha = match dist.kind() {
        Kind::Bernoulli { alpha } => alpha,
        _ => {
            return Err(Error::UnsupportedDistribution(format!(
                "{dist}: the exact recursion needs Bernoulli (lattice) steps"
            )))
        }
    };
    let m = barrier.horizon as usize;
    // good[x] = P(vertex at (i, x) is good to depth m − i), x = 0..=i.
    let mut good: Vec<f64> = (0..=m)
        .map(|x| if barrier.admits(x as f64, m as u64) { 1.0 } else { 0.0 })
        .collect();
    for i in (0..m).rev() {
        let gen = (i + 1) as u64;
        let child = |x: usize| {
            if barrier.admits(x as f64, gen) {
                good[x]
            } else {
                0.0
            }
        };
        let prev: Vec<f64> = (0..=i)
            .map(|x| {
                let c = alpha * child(x + 1) + (1.0 - alpha) * child(x);
                1.0 - (1.0 - c) * (1.0 - c)
            })
            .collect();
        good = prev;
    }
    Ok(good[0])
}

/// Mean and standard error of a Monte Carlo estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub replicas: usize,
}

/// E(Ξ_m): the expected number of length-m descending paths staying in the
/// tube (v − ε)·i ≤ S_i ≤ v·i + band, computed under the tilted law as the
/// average of exp(−t*(S_m − v·m)) over tube-respecting walks.
pub fn tilted_first_moment(
    dist: &StepDistribution,
    constants: &TheoryConstants,
    eps: f64,
    horizon: u64,
    band: f64,
    replicas: usize,
    seed: u64,
) -> Result<MeanEstimate> {
    if replicas == 0 {
        return Err(Error::param("replicas", "must be positive"));
    }
    if !(band > 0.0) {
        return Err(Error::param("band", "must be positive"));
    }
    if horizon == 0 {
        return Ok(MeanEstimate {
            mean: 1.0,
            std_err: 0.0,
            replicas,
        });
    }
    let tilted = dist.tilt(constants.t_star);
    let v = constants.v_inf;
    let base = Stream::new(seed);
    const CHUNK: usize = 4096;
    let chunks = replicas.div_ceil(CHUNK);
    let sums = map_indexed(chunks, |c| {
        let (mut s1, mut s2) = (0.0, 0.0);
        for r in c * CHUNK..((c + 1) * CHUNK).min(replicas) {
            let mut rng = base.derive(r as u64);
            let mut s = 0.0;
            let mut inside = true;
            for i in 1..=horizon {
                s += tilted.draw(&mut rng);
                let fi = i as f64;
                if s < (v - eps) * fi || s > v * fi + band {
                    inside = false;
                    break;
                }
            }
            if inside {
                let w = (-constants.t_star * (s - v * horizon as f64)).exp();
                s1 += w;
                s2 += w * w;
            }
        }
        (s1, s2)
    });
    let (s1, s2) = sums.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let n = replicas as f64;
    let mean = s1 / n;
    let var = if replicas > 1 {
        ((s2 - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(MeanEstimate {
        mean,
        std_err: (var / n).sqrt(),
        replicas,
    })
}

/// Union bound (m + 1)·exp(−t*·band) on the probability that some path
/// leaves the tube through its upper wall.
pub fn delta_tail_bound(constants: &TheoryConstants, band: f64, horizon: u64) -> Result<f64> {
    if !(band > 0.0) {
        return Err(Error::param("band", "must be positive"));
    }
    Ok((horizon as f64 + 1.0) * (-constants.t_star * band).exp())
}

/// Certified survival lower bound for a Galton–Watson process: if
/// a·Q([a, ∞)) ≥ 2 log 2 the survival probability is at least Q([a, ∞))/2.
pub fn gw_survival_lower_bound(q_a: f64, a: f64) -> Result<Option<f64>> {
    if !(0.0..=1.0).contains(&q_a) {
        return Err(Error::param("q_a", "must be a probability"));
    }
    if !(a >= 1.0) {
        return Err(Error::param("a", "must be at least 1"));
    }
    Ok((a * q_a >= 2.0 * std::f64::consts::LN_2).then_some(q_a / 2.0))
}

/// Monte Carlo P(M_n ≥ φⁿ) for the binomial(2, q) Galton–Watson process
/// started from one individual.
pub fn gw_growth_probability(
    q: f64,
    phi: f64,
    generations: u32,
    replicas: usize,
    seed: u64,
) -> Result<MeanEstimate> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::param("q", "must be a probability"));
    }
    if 2.0 * q <= 1.0 {
        return Err(Error::SubcriticalOffspring { q });
    }
    if !(phi > 1.0) {
        return Err(Error::param("phi", "must exceed 1"));
    }
    if replicas == 0 {
        return Err(Error::param("replicas", "must be positive"));
    }
    let target = phi.powi(generations as i32);
    let base = Stream::new(seed);
    let hits = map_indexed(replicas, |r| {
        let mut rng = base.derive(r as u64);
        let mut size: u64 = 1;
        for _ in 0..generations {
            if size == 0 {
                break;
            }
            size = binomial(&mut rng, 2 * size, q);
        }
        (size as f64 >= target) as u8
    });
    let k = hits.iter().map(|&h| h as usize).sum::<usize>();
    let p = k as f64 / replicas as f64;
    Ok(MeanEstimate {
        mean: p,
        std_err: (p * (1.0 - p) / replicas as f64).sqrt(),
        replicas,
    })
}

fn binomial(rng: &mut Stream, trials: u64, p: f64) -> u64 {
    use rand::Rng;
    if p >= 1.0 {
        return trials;
    }
    if p <= 0.0 {
        return 0;
    }
    rng.sample(rand_distr::Binomial::new(trials, p).expect("valid binomial"))
}

/// One-generation survival 1 − (1 − q)² with q = P(step ≥ speed).
pub fn one_step_survival(dist: &StepDistribution, speed: f64) -> f64 {
    let q = dist.tail(speed);
    1.0 - (1.0 - q) * (1.0 - q)
}

/// Mean and SE of replica-level values, for callers that hold them already.
pub fn summarize(values: &[f64]) -> MeanEstimate {
    let (mean, std_err) = mean_and_se(values);
    MeanEstimate {
        mean,
        std_err,
        replicas: values.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory;

    fn bern_constants() -> (StepDistribution, TheoryConstants) {
        let d = StepDistribution::bernoulli(0.25).unwrap();
        let c = theory::constants(&d, 1e-12).unwrap();
        (d, c)
    }

    #[test]
    fn point_mass_fronts() {
        let d = StepDistribution::point(0.5).unwrap();
        let mut rng = Stream::new(0);
        assert_eq!(survive_once(&d, &BarrierSpec::with_speed(0.6, 5), 100, &mut rng), Fate::Dead);
        assert_eq!(survive_once(&d, &BarrierSpec::with_speed(0.5, 5), 1000, &mut rng), Fate::Alive);
        assert_eq!(survive_once(&d, &BarrierSpec::with_speed(0.5, 30), 1000, &mut rng), Fate::Capped);
    }

    #[test]
    fn dp_small_horizons() {
        let (d, _) = bern_constants();
        for speed in [0.1, 0.6105, 1.0] {
            let p = exact_rho_dp_at(&d, &BarrierSpec::with_speed(speed, 1)).unwrap();
            assert!((p - 0.4375).abs() < 1e-15);
        }
        for speed in [0.0, -0.5] {
            assert_eq!(exact_rho_dp_at(&d, &BarrierSpec::with_speed(speed, 1)).unwrap(), 1.0);
        }
        assert_eq!(exact_rho_dp_at(&d, &BarrierSpec::with_speed(0.3, 0)).unwrap(), 1.0);
        let g = StepDistribution::standard_gaussian();
        assert!(matches!(
            exact_rho_dp_at(&g, &BarrierSpec::with_speed(0.3, 2)),
            Err(Error::UnsupportedDistribution(_))
        ));
    }

    #[test]
    fn dp_two_generations_regression() {
        let (d, _) = bern_constants();
        let p = exact_rho_dp_at(&d, &BarrierSpec::with_speed(0.55, 2)).unwrap();
        assert!((p - 0.206_787_109_375).abs() < 1e-15);
    }

    #[test]
    fn tilted_one_step_matches_enumeration() {
        let (d, c) = bern_constants();
        // The tube at m = 1 admits only the up-step: E(Ξ₁) = 2·α.
        let m = tilted_first_moment(&d, &c, 0.2, 1, 5.0, 20_000, 9).unwrap();
        assert!((m.mean - 0.5).abs() <= 3.0 * m.std_err + 1e-12, "{m:?}");
    }

    #[test]
    fn tilted_moment_edge_cases() {
        let (d, c) = bern_constants();
        let m = tilted_first_moment(&d, &c, 0.2, 0, 1.0, 10, 0).unwrap();
        assert_eq!(m.mean, 1.0);
        assert!(tilted_first_moment(&d, &c, 0.2, 3, 0.0, 10, 0).is_err());
    }

    #[test]
    fn tail_bound_arithmetic() {
        let unit = TheoryConstants {
            t_star: 1.0,
            v_inf: 0.0,
            chi: 1.0,
        };
        assert!((delta_tail_bound(&unit, 1000f64.ln(), 9).unwrap() - 0.01).abs() < 1e-15);
        let g = theory::constants(&StepDistribution::standard_gaussian(), 1e-12).unwrap();
        assert!(delta_tail_bound(&g, 100.0 / g.t_star, 5).unwrap() < 1e-12);
        let b = delta_tail_bound(&g, 20.0, 100).unwrap();
        assert!(b < 1e-7);
        assert!((b - 101.0 * (-g.t_star * 20.0).exp()).abs() < 1e-20);
    }

    #[test]
    fn gw_bound_cases() {
        assert_eq!(gw_survival_lower_bound(0.81, 2.0).unwrap(), Some(0.405));
        assert_eq!(gw_survival_lower_bound(0.5, 1.0).unwrap(), None);
        assert_eq!(gw_survival_lower_bound(1.0, 2.0).unwrap(), Some(0.5));
        assert!(gw_survival_lower_bound(1.5, 2.0).is_err());
    }

    #[test]
    fn gw_growth_edge_cases() {
        let e = gw_growth_probability(1.0, 1.9, 12, 50, 0).unwrap();
        assert_eq!(e.mean, 1.0);
        assert!(matches!(
            gw_growth_probability(0.5, 1.5, 5, 10, 0),
            Err(Error::SubcriticalOffspring { .. })
        ));
    }

    #[test]
    fn wilson_contains_estimate() {
        let (c, h) = wilson(0.3, 1000.0);
        assert!((c - h) < 0.3 && 0.3 < (c + h));
        let (c, h) = wilson(0.0, 100.0);
        assert!(c - h <= 1e-12 && h > 0.0);
    }
}
