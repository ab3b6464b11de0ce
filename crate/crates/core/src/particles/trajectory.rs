//! Instrumented runs of the N-particle chain and the diameter check.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::stepdist::StepDistribution;

use super::kernel::Stepper;
use super::population::{Population, RECENTER_EVERY};

/// u_N = ⌈log N / log 2⌉ + 1, the look-back window of the diameter bound.
pub fn window_length(n_particles: usize) -> usize {
    let ceil_log2 = if n_particles <= 1 {
        0
    } else {
        (usize::BITS - (n_particles - 1).leading_zeros()) as usize
    };
    ceil_log2 + 1
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Instrumentation {
    /// Track the windowed step extremes needed by [`check_diameter_bound`].
    pub diameter: bool,
    /// Keep every raw step (2N per generation).
    pub steps: bool,
}

impl Instrumentation {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn all() -> Self {
        Self {
            diameter: true,
            steps: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GenerationRecord {
    pub gen: u64,
    pub max: f64,
    pub min: f64,
    pub diameter: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryStats {
    pub n_particles: usize,
    /// Generations 0 through n.
    pub records: Vec<GenerationRecord>,
    /// u_N when the diameter window was tracked.
    pub window: Option<usize>,
    /// For generation g ≥ u_N, `window_spread[g − u_N]` is the largest minus
    /// the smallest of the 2N·u_N steps drawn in generations g − u_N + 1 … g.
    pub window_spread: Option<Vec<f64>>,
    /// Raw steps, 2N per generation, generation 1 first.
    pub step_log: Option<Vec<f64>>,
}

/// Runs `n` generations from `pop0`; deterministic in `(pop0, dist, n, seed)`.
pub fn run(
    pop0: &Population,
    dist: &StepDistribution,
    n: u64,
    seed: u64,
    flags: Instrumentation,
) -> TrajectoryStats {
    run_with(pop0, dist, n, &Stream::new(seed), flags, &mut Stepper::new())
}

pub(crate) fn run_with(
    pop0: &Population,
    dist: &StepDistribution,
    n: u64,
    stream: &Stream,
    flags: Instrumentation,
    stepper: &mut Stepper,
) -> TrajectoryStats {
    let n_particles = pop0.len();
    let mut rng = stream.clone();
    let mut pop = pop0.clone();
    let u = window_length(n_particles);
    let mut records = Vec::with_capacity(n as usize + 1);
    let record = |gen, p: &Population| {
        let (min, max) = p.extremes();
        GenerationRecord {
            gen,
            max,
            min,
            diameter: max - min,
        }
    };
    records.push(record(0, &pop));
    let mut ring: VecDeque<(f64, f64)> = VecDeque::with_capacity(u + 1);
    let mut spreads = Vec::new();
    let mut log = if flags.steps {
        Some(Vec::with_capacity(2 * n_particles * n as usize))
    } else {
        None
    };
    for gen in 1..=n {
        let ext = stepper.step(&mut pop, dist, &mut rng, log.as_mut());
        if flags.diameter {
            ring.push_back((ext.min_step, ext.max_step));
            if ring.len() > u {
                ring.pop_front();
            }
            if gen as usize >= u {
                let lo = ring.iter().map(|e| e.0).fold(f64::INFINITY, f64::min);
                let hi = ring.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
                spreads.push(hi - lo);
            }
        }
        records.push(record(gen, &pop));
        if gen % RECENTER_EVERY == 0 {
            pop.recenter();
        }
    }
    TrajectoryStats {
        n_particles,
        records,
        window: flags.diameter.then_some(u),
        window_spread: flags.diameter.then_some(spreads),
        step_log: log,
    }
}

/// Per-generation comparison of d(X_n) against u_N·(m⁽²⁾ − m⁽¹⁾).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiameterSlack {
    pub gen: u64,
    pub diameter: f64,
    pub bound: f64,
}

/// Window spreads recomputed from the raw step log.
fn spreads_from_log(log: &[f64], n_particles: usize, gens: usize, u: usize) -> Vec<f64> {
    let per = 2 * n_particles;
    (u..=gens)
        .map(|g| {
            let window = &log[(g - u) * per..g * per];
            let lo = window.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = window.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            hi - lo
        })
        .collect()
}

pub fn diameter_slack(stats: &TrajectoryStats, n_particles: usize) -> Result<Vec<DiameterSlack>> {
    let u = window_length(n_particles);
    let gens = stats.records.len().saturating_sub(1);
    if gens < u {
        return Err(Error::param(
            "trajectory",
            format!("needs at least u_N = {u} generations, has {gens}"),
        ));
    }
    let spreads = match (&stats.window_spread, &stats.step_log) {
        (Some(s), _) if stats.window == Some(u) => s.clone(),
        (_, Some(log)) => spreads_from_log(log, n_particles, gens, u),
        _ => return Err(Error::MissingStepLog),
    };
    Ok(stats.records[u..]
        .iter()
        .zip(spreads)
        .map(|(r, spread)| DiameterSlack {
            gen: r.gen,
            diameter: r.diameter,
            bound: u as f64 * spread,
        })
        .collect())
}

/// d(X_n) ≤ u_N·(max step − min step over the last u_N generations) for every
/// n ≥ u_N, checked on the realized steps.
pub fn check_diameter_bound(stats: &TrajectoryStats, n_particles: usize) -> Result<bool> {
    Ok(diameter_slack(stats, n_particles)?
        .iter()
        .all(|s| s.diameter <= s.bound + 1e-9 * (1.0 + s.bound.abs())))
}
