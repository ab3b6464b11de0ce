//! Velocity of the N-particle front, and the exponential-moment check.
//!
//! By subadditivity E(max X_n)/n over-estimates v_N and E(min X_n)/n
//! under-estimates it; both converge to v_N. The estimator reports the two
//! sides of this sandwich and their midpoint.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::parallel::{map_indexed, mean_and_se};
use crate::rng::Stream;
use crate::stepdist::{Kind, StepDistribution};
use crate::theory::TheoryConstants;

use super::kernel::Stepper;
use super::population::{Population, RECENTER_EVERY};
use super::select::Selection;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VelocityEstimate {
    pub n_particles: usize,
    /// Measured generations per replica (after burn-in).
    pub generations: u64,
    pub burn_in: u64,
    pub replicas: usize,
    pub v_upper: f64,
    pub v_lower: f64,
    pub v_point: f64,
    /// Standard error of `v_point` from the replica dispersion.
    pub std_err: f64,
    pub se_upper: f64,
    pub se_lower: f64,
}

impl VelocityEstimate {
    /// Burn-in of 10% of the measured length.
    pub fn default_burn_in(generations: u64) -> u64 {
        generations / 10
    }

    /// Aggregates per-replica (max, min) increments.
    pub(crate) fn from_increments(
        n_particles: usize,
        generations: u64,
        burn_in: u64,
        incs: &[(f64, f64)],
    ) -> Self {
        let ups: Vec<f64> = incs.iter().map(|x| x.0).collect();
        let lows: Vec<f64> = incs.iter().map(|x| x.1).collect();
        let mids: Vec<f64> = incs.iter().map(|x| 0.5 * (x.0 + x.1)).collect();
        let (v_upper, se_upper) = mean_and_se(&ups);
        let (v_lower, se_lower) = mean_and_se(&lows);
        let (v_point, std_err) = mean_and_se(&mids);
        Self {
            n_particles,
            generations,
            burn_in,
            replicas: incs.len(),
            v_upper,
            v_lower,
            v_point,
            std_err,
            se_upper,
            se_lower,
        }
    }
}

pub(crate) fn check_velocity_args(
    n_particles: usize,
    generations: u64,
    burn_in: u64,
    replicas: usize,
) -> Result<()> {
    if n_particles == 0 {
        return Err(Error::param("N", "at least one particle is required"));
    }
    if generations == 0 || generations <= burn_in {
        return Err(Error::param("gens", "must exceed the burn-in"));
    }
    if replicas < 2 {
        return Err(Error::param("replicas", "at least two replicas are required"));
    }
    Ok(())
}

/// Per-replica increments of (max, min) over the measured window.
pub(crate) fn replica_increments(
    dist: &StepDistribution,
    n_particles: usize,
    generations: u64,
    burn_in: u64,
    stream: &Stream,
    selection: Selection,
) -> (f64, f64) {
    let mut rng = stream.clone();
    let mut pop = Population::concentrated(n_particles, 0.0);
    let mut stepper = Stepper::with_selection(selection);
    let mut start = (0.0, 0.0);
    if burn_in == 0 {
        start = (pop.max(), pop.min());
    }
    for gen in 1..=burn_in + generations {
        stepper.step(&mut pop, dist, &mut rng, None);
        if gen == burn_in {
            start = (pop.max(), pop.min());
        }
        if gen % RECENTER_EVERY == 0 {
            pop.recenter();
        }
    }
    let (lo, hi) = pop.extremes();
    let n = generations as f64;
    ((hi - start.0) / n, (lo - start.1) / n)
}

pub fn estimate_velocity(
    dist: &StepDistribution,
    n_particles: usize,
    generations: u64,
    burn_in: u64,
    replicas: usize,
    seed: u64,
) -> Result<VelocityEstimate> {
    estimate_velocity_with(
        dist,
        n_particles,
        generations,
        burn_in,
        replicas,
        &Stream::new(seed),
        Selection::Rightmost,
    )
}

/// As [`estimate_velocity`], with replica `r` drawing from `base.derive(r)`.
pub fn estimate_velocity_with(
    dist: &StepDistribution,
    n_particles: usize,
    generations: u64,
    burn_in: u64,
    replicas: usize,
    base: &Stream,
    selection: Selection,
) -> Result<VelocityEstimate> {
    check_velocity_args(n_particles, generations, burn_in, replicas)?;
    let incs = map_indexed(replicas, |r| {
        replica_increments(
            dist,
            n_particles,
            generations,
            burn_in,
            &base.derive(r as u64),
            selection,
        )
    });
    Ok(VelocityEstimate::from_increments(
        n_particles,
        generations,
        burn_in,
        &incs,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub replicas: usize,
}

impl MomentEstimate {
    pub fn relative_se(&self) -> f64 {
        self.std_err / self.mean
    }
}

/// Monte Carlo estimate of E exp(t*(max X_n − v(p)·n)) from X_0 = N·δ₀,
/// which the first-moment bound keeps below N.
pub fn exp_moment_check(
    dist: &StepDistribution,
    constants: &TheoryConstants,
    n_particles: usize,
    generations: u64,
    replicas: usize,
    seed: u64,
) -> Result<MomentEstimate> {
    if n_particles == 0 || replicas == 0 {
        return Err(Error::param("replicas", "N and replicas must be positive"));
    }
    let base = Stream::new(seed);
    let values = map_indexed(replicas, |r| {
        let mut rng = base.derive(r as u64);
        let mut pop = Population::concentrated(n_particles, 0.0);
        let mut stepper = Stepper::new();
        for _ in 0..generations {
            stepper.step(&mut pop, dist, &mut rng, None);
        }
        (constants.t_star * (pop.max() - constants.v_inf * generations as f64)).exp()
    });
    let (mean, se) = mean_and_se(&values);
    Ok(MomentEstimate {
        mean,
        std_err: if replicas < 2 { 0.0 } else { se },
        replicas,
    })
}

/// Rate at which the front of a Bernoulli(α) system fails to advance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StallEstimate {
    pub n_particles: usize,
    pub generations: u64,
    pub burn_in: u64,
    pub replicas: usize,
    /// Mean over generations of (1 − α)^{2K}, K = particles at the maximum.
    pub rate: f64,
    pub std_err: f64,
    /// Fraction of generations in which the maximum did not move.
    pub direct_rate: f64,
    pub direct_se: f64,
}

impl StallEstimate {
    /// v̂_N = 1 − rate, since v_∞ = 1 for α ≥ 1/2.
    pub fn velocity(&self) -> f64 {
        1.0 - self.rate
    }
}

/// Conditional estimate of 1 − v_N for Bernoulli(α) steps.
///
/// Given the current population the maximum stays put exactly when all 2K
/// children of the K leaders step 0, so averaging (1 − α)^{2K} along the
/// trajectory estimates the same limit as the observed stall frequency, with
/// a nonzero contribution from every generation.
pub fn bernoulli_stall_rate(
    dist: &StepDistribution,
    n_particles: usize,
    generations: u64,
    burn_in: u64,
    replicas: usize,
    base: &Stream,
) -> Result<StallEstimate> {
    let Kind::Bernoulli { alpha } = dist.kind() else {
        return Err(Error::UnsupportedDistribution(format!(
            "stall rate needs a bernoulli law, got {dist}"
        )));
    };
    check_velocity_args(n_particles, generations, burn_in, replicas)?;
    let q2 = (1.0 - alpha) * (1.0 - alpha);
    let per = map_indexed(replicas, |r| {
        let mut rng = base.derive(r as u64);
        let mut pop = Population::concentrated(n_particles, 0.0);
        let mut stepper = Stepper::new();
        let (mut sum, mut stalls) = (0.0, 0u64);
        let mut top = pop.max();
        for gen in 1..=burn_in + generations {
            let k = pop.local.iter().filter(|&&x| x == top - pop.offset).count();
            stepper.step(&mut pop, dist, &mut rng, None);
            let next = pop.max();
            if gen > burn_in {
                sum += q2.powi(k as i32);
                if next == top {
                    stalls += 1;
                }
            }
            top = next;
            if gen % RECENTER_EVERY == 0 {
                pop.recenter();
            }
        }
        let n = generations as f64;
        (sum / n, stalls as f64 / n)
    });
    let rb: Vec<f64> = per.iter().map(|x| x.0).collect();
    let direct: Vec<f64> = per.iter().map(|x| x.1).collect();
    let (rate, std_err) = mean_and_se(&rb);
    let (direct_rate, direct_se) = mean_and_se(&direct);
    Ok(StallEstimate {
        n_particles,
        generations,
        burn_in,
        replicas,
        rate,
        std_err,
        direct_rate,
        direct_se,
    })
}
