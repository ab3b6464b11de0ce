//! Sweeps over N, ε and m, and the scaling-law fits applied to their output.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{config_hash, extended_real, fmt_num, Table};
use crate::killedbrw::{self, critical_horizon, BarrierSpec, SurvivalEstimate};
use crate::parallel::map_indexed;
use crate::particles::{check_velocity_args, replica_increments, Selection, VelocityEstimate};
use crate::rng::Stream;
use crate::stepdist::StepDistribution;
use crate::theory::TheoryConstants;

/// Largest horizon a survival sweep will run.
pub const MAX_HORIZON: u64 = 100_000;
/// Fraction of capped fronts above which a survival point is unusable.
pub const MAX_CAPPED_FRACTION: f64 = 0.5;

/// Run length per sweep point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GenerationPlan {
    Fixed { gens: u64, burn_in: u64 },
    /// ⌈factor·(log₂N)³⌉ measured generations (at least 100) after 10% burn-in.
    LogCubed { factor: f64 },
}

impl Default for GenerationPlan {
    fn default() -> Self {
        GenerationPlan::LogCubed { factor: 200.0 }
    }
}

impl GenerationPlan {
    /// (measured generations, burn-in) for `n_particles`.
    pub fn for_particles(&self, n_particles: usize) -> (u64, u64) {
        match *self {
            GenerationPlan::Fixed { gens, burn_in } => (gens, burn_in),
            GenerationPlan::LogCubed { factor } => {
                let l = (n_particles.max(1) as f64).log2();
                let gens = ((factor * l * l * l).ceil() as u64).max(100);
                (gens, VelocityEstimate::default_burn_in(gens))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VelocitySweepConfig {
    pub dist: StepDistribution,
    pub n_list: Vec<usize>,
    pub plan: GenerationPlan,
    pub replicas: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Control {
    Particles(usize),
    Eps(f64),
    Horizon(u64),
}

impl Control {
    pub fn value(&self) -> f64 {
        match *self {
            Control::Particles(n) => n as f64,
            Control::Eps(e) => e,
            Control::Horizon(m) => m as f64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimate {
    Velocity(VelocityEstimate),
    Survival(SurvivalEstimate),
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRecord {
    pub control: Control,
    pub estimate: Estimate,
    pub seed: u64,
    pub config_hash: String,
    /// Not serialized: outputs must not depend on timing.
    #[serde(skip)]
    pub wall_time_s: f64,
}

impl SweepRecord {
    pub fn velocity(&self) -> Option<&VelocityEstimate> {
        match &self.estimate {
            Estimate::Velocity(v) => Some(v),
            Estimate::Survival(_) => None,
        }
    }

    pub fn survival(&self) -> Option<&SurvivalEstimate> {
        match &self.estimate {
            Estimate::Survival(s) => Some(s),
            Estimate::Velocity(_) => None,
        }
    }
}

/// Runs every (point, replica) pair as one work item. Replica r of point k
/// draws from `Stream::new(seed).derive(k).derive(r)`.
pub fn velocity_sweep(config: &VelocitySweepConfig) -> Result<Vec<SweepRecord>> {
    velocity_sweep_with(config, Selection::Rightmost)
}

pub fn velocity_sweep_with(
    config: &VelocitySweepConfig,
    selection: Selection,
) -> Result<Vec<SweepRecord>> {
    if config.n_list.is_empty() {
        return Err(Error::param("n-list", "must be nonempty"));
    }
    if config.n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("n-list", "must be strictly ascending"));
    }
    let plans: Vec<(u64, u64)> = config
        .n_list
        .iter()
        .map(|&n| config.plan.for_particles(n))
        .collect();
    for (&n, &(gens, burn)) in config.n_list.iter().zip(&plans) {
        check_velocity_args(n, gens, burn, config.replicas)?;
    }
    let hash = config_hash(config)?;
    let root = Stream::new(config.seed);
    let r = config.replicas;
    let started = Instant::now();
    let incs = map_indexed(config.n_list.len() * r, |job| {
        let (k, rep) = (job / r, job % r);
        let (gens, burn) = plans[k];
        let stream = root.derive(k as u64).derive(rep as u64);
        replica_increments(&config.dist, config.n_list[k], gens, burn, &stream, selection)
    });
    let wall = started.elapsed().as_secs_f64() / config.n_list.len() as f64;
    Ok(config
        .n_list
        .iter()
        .zip(&plans)
        .zip(incs.chunks(r))
        .map(|((&n, &(gens, burn)), chunk)| SweepRecord {
            control: Control::Particles(n),
            estimate: Estimate::Velocity(VelocityEstimate::from_increments(n, gens, burn, chunk)),
            seed: config.seed,
            config_hash: hash.clone(),
            wall_time_s: wall,
        })
        .collect())
}

pub fn velocity_table(records: &[SweepRecord]) -> Table {
    let mut t = Table::new([
        "n", "gens", "burn_in", "replicas", "v_upper", "v_lower", "v_point", "std_err",
        "se_upper", "se_lower", "seed", "config_hash",
    ]);
    for rec in records {
        if let Some(v) = rec.velocity() {
            t.push(vec![
                v.n_particles.to_string(),
                v.generations.to_string(),
                v.burn_in.to_string(),
                v.replicas.to_string(),
                fmt_num(v.v_upper),
                fmt_num(v.v_lower),
                fmt_num(v.v_point),
                fmt_num(v.std_err),
                fmt_num(v.se_upper),
                fmt_num(v.se_lower),
                rec.seed.to_string(),
                rec.config_hash.clone(),
            ]);
        }
    }
    t
}

/// Consecutive pairs (i, i + 1) where v_point drops by more than `k`
/// combined standard errors.
pub fn monotonicity_violations(records: &[SweepRecord], k: f64) -> Vec<usize> {
    let v: Vec<&VelocityEstimate> = records.iter().filter_map(SweepRecord::velocity).collect();
    v.windows(2)
        .enumerate()
        .filter(|(_, w)| {
            let se = (w[0].std_err.powi(2) + w[1].std_err.powi(2)).sqrt();
            w[1].v_point < w[0].v_point - k * se
        })
        .map(|(i, _)| i)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivalSweepConfig {
    pub dist: StepDistribution,
    pub eps_list: Vec<f64>,
    pub lambda: f64,
    pub replicas: usize,
    pub cap: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SurvivalPoint {
    pub eps: f64,
    pub horizon: u64,
    pub rho_hat: f64,
    /// −√ε·log ρ̂, comparable with √χ.
    #[serde(serialize_with = "extended_real")]
    pub s_eps: f64,
    pub usable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurvivalSummary {
    pub points: Vec<SurvivalPoint>,
    pub sqrt_chi: f64,
    /// Largest over smallest s(ε) among usable points with ρ̂ ∈ (0, 1).
    #[serde(serialize_with = "extended_real")]
    pub s_spread: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SurvivalSweep {
    pub records: Vec<SweepRecord>,
    pub summary: SurvivalSummary,
}

/// s(ε) = −√ε·log ρ̂.
pub fn survival_exponent(eps: f64, rho_hat: f64) -> f64 {
    let s = -eps.sqrt() * rho_hat.ln();
    if s == 0.0 {
        0.0
    } else {
        s
    }
}

/// One point per ε at m = ⌈λ·ε^{−3/2}⌉ (capped at [`MAX_HORIZON`]); point k
/// uses `Stream::new(seed).derive(k)` as its replica root.
pub fn survival_sweep(
    config: &SurvivalSweepConfig,
    constants: &TheoryConstants,
) -> Result<SurvivalSweep> {
    if config.eps_list.is_empty() {
        return Err(Error::param("eps-list", "must be nonempty"));
    }
    if config.eps_list.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::param("eps-list", "values must be positive"));
    }
    if config.eps_list.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::param("eps-list", "must be strictly descending"));
    }
    if !(config.lambda > 0.0) {
        return Err(Error::param("lambda", "must be positive"));
    }
    let hash = config_hash(config)?;
    let root = Stream::new(config.seed);
    let mut records = Vec::with_capacity(config.eps_list.len());
    let mut points = Vec::with_capacity(config.eps_list.len());
    for (k, &eps) in config.eps_list.iter().enumerate() {
        let horizon = critical_horizon(config.lambda, eps).min(MAX_HORIZON);
        let barrier = BarrierSpec::from_constants(constants, eps, horizon)?;
        let started = Instant::now();
        let est = killedbrw::estimate_rho_at(
            &config.dist,
            &barrier,
            config.replicas,
            config.cap,
            &root.derive(k as u64),
        )?;
        points.push(SurvivalPoint {
            eps,
            horizon,
            rho_hat: est.rho_hat,
            s_eps: survival_exponent(eps, est.rho_hat),
            usable: est.capped_fraction <= MAX_CAPPED_FRACTION,
        });
        records.push(SweepRecord {
            control: Control::Eps(eps),
            estimate: Estimate::Survival(est),
            seed: config.seed,
            config_hash: hash.clone(),
            wall_time_s: started.elapsed().as_secs_f64(),
        });
    }
    let s: Vec<f64> = points
        .iter()
        .filter(|p| p.usable && p.rho_hat > 0.0 && p.rho_hat < 1.0)
        .map(|p| p.s_eps)
        .collect();
    let s_spread = if s.is_empty() {
        f64::NAN
    } else {
        let hi = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = s.iter().copied().fold(f64::INFINITY, f64::min);
        hi / lo
    };
    Ok(SurvivalSweep {
        records,
        summary: SurvivalSummary {
            points,
            sqrt_chi: constants.chi.sqrt(),
            s_spread,
        },
    })
}

/// ρ̂(m, ε) for several horizons at fixed ε; point k uses
/// `Stream::new(seed).derive(k)`.
pub fn horizon_sweep(
    dist: &StepDistribution,
    constants: &TheoryConstants,
    eps: f64,
    horizons: &[u64],
    replicas: usize,
    cap: usize,
    seed: u64,
) -> Result<Vec<SweepRecord>> {
    #[derive(Serialize)]
    struct Config<'a> {
        dist: &'a StepDistribution,
        eps: f64,
        horizons: &'a [u64],
        replicas: usize,
        cap: usize,
        seed: u64,
    }
    let hash = config_hash(&Config {
        dist,
        eps,
        horizons,
        replicas,
        cap,
        seed,
    })?;
    let root = Stream::new(seed);
    horizons
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            let barrier = BarrierSpec::from_constants(constants, eps, m)?;
            let started = Instant::now();
            let est = killedbrw::estimate_rho_at(dist, &barrier, replicas, cap, &root.derive(k as u64))?;
            Ok(SweepRecord {
                control: Control::Horizon(m),
                estimate: Estimate::Survival(est),
                seed,
                config_hash: hash.clone(),
                wall_time_s: started.elapsed().as_secs_f64(),
            })
        })
        .collect()
}

pub fn survival_table(records: &[SweepRecord]) -> Table {
    let mut t = Table::new([
        "eps", "horizon", "rho_hat", "ci_halfwidth", "std_err", "rho_lower", "rho_upper",
        "capped_fraction", "replicas", "s_eps", "usable", "seed", "config_hash",
    ]);
    for rec in records {
        if let Some(s) = rec.survival() {
            t.push(vec![
                fmt_num(s.eps),
                s.horizon.to_string(),
                fmt_num(s.rho_hat),
                fmt_num(s.ci_halfwidth),
                fmt_num(s.std_err),
                fmt_num(s.rho_lower),
                fmt_num(s.rho_upper),
                fmt_num(s.capped_fraction),
                s.replicas.to_string(),
                fmt_num(survival_exponent(s.eps, s.rho_hat)),
                (s.capped_fraction <= MAX_CAPPED_FRACTION).to_string(),
                rec.seed.to_string(),
                rec.config_hash.clone(),
            ]);
        }
    }
    t
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    /// gap = c·(log N + a)⁻²
    LogInverseSquare,
    /// gap = c·(log N)^{−β}
    FreePowerLogN,
    /// gap = c·N^{−γ}
    PowerInN,
    /// gap = c·e^{−d·N}
    ExponentialInN,
}

/// Fits are least squares on the log of the gap; `residuals` are observed
/// minus fitted log-gaps and `r_squared` is computed in the same space.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitResult {
    pub model: FitModel,
    pub amplitude: f64,
    pub exponent: Option<f64>,
    pub offset: Option<f64>,
    pub r_squared: f64,
    pub residuals: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogSquareFit {
    pub offset_model: FitResult,
    pub free_power: FitResult,
}

fn velocity_points(records: &[SweepRecord]) -> (Vec<f64>, Vec<f64>) {
    records
        .iter()
        .filter_map(SweepRecord::velocity)
        .map(|v| (v.n_particles as f64, v.v_point))
        .unzip()
}

fn gaps(ns: &[f64], vs: &[f64], limit: f64) -> Result<Vec<f64>> {
    if ns.len() != vs.len() {
        return Err(Error::param("input", "N and v columns differ in length"));
    }
    ns.iter()
        .zip(vs)
        .map(|(&n, &v)| {
            let gap = limit - v;
            if gap > 0.0 {
                Ok(gap)
            } else {
                Err(Error::NonPositiveGap { control: n, gap })
            }
        })
        .collect()
}

fn need(points: usize, needed: usize) -> Result<()> {
    if points < needed {
        Err(Error::InsufficientData {
            needed,
            got: points,
        })
    } else {
        Ok(())
    }
}

/// Ordinary least squares y = b₀ + b₁·x: (b₀, b₁, residuals, r²).
fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64, Vec<f64>, f64)> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|xi| (xi - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::param("input", "control values must not all coincide"));
    }
    let sxy: f64 = x.iter().zip(y).map(|(xi, yi)| (xi - mx) * (yi - my)).sum();
    let b1 = sxy / sxx;
    let b0 = my - b1 * mx;
    let residuals: Vec<f64> = x.iter().zip(y).map(|(xi, yi)| yi - (b0 + b1 * xi)).collect();
    let r2 = r_squared(y, &residuals);
    Ok((b0, b1, residuals, r2))
}

fn r_squared(y: &[f64], residuals: &[f64]) -> f64 {
    let my = y.iter().sum::<f64>() / y.len() as f64;
    let tot: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let res: f64 = residuals.iter().map(|r| r * r).sum();
    if tot > 0.0 {
        (1.0 - res / tot).clamp(0.0, 1.0)
    } else if res == 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Profile objective of the (c, a) model: for fixed a the best log c is the
/// mean of z_i = log gap_i + 2·log(L_i + a). Returns (SS, dSS/da, d²SS/da²).
fn profile(l: &[f64], log_gap: &[f64], a: f64) -> (f64, f64, f64) {
    let n = l.len() as f64;
    let z: Vec<f64> = l.iter().zip(log_gap).map(|(li, g)| g + 2.0 * (li + a).ln()).collect();
    let w: Vec<f64> = l.iter().map(|li| 2.0 / (li + a)).collect();
    let zm = z.iter().sum::<f64>() / n;
    let wm = w.iter().sum::<f64>() / n;
    let mut f = 0.0;
    let mut d1 = 0.0;
    let mut d2 = 0.0;
    for i in 0..l.len() {
        let dz = z[i] - zm;
        f += dz * dz;
        d1 += 2.0 * dz * w[i];
        d2 += 2.0 * ((w[i] - wm) * w[i] - dz * w[i] * w[i] / 2.0);
    }
    (f, d1, d2)
}

fn fit_offset_model(l: &[f64], log_gap: &[f64], gap: &[f64]) -> Result<FitResult> {
    let l_min = l.iter().copied().fold(f64::INFINITY, f64::min);
    // Start from the linearization gap^{−1/2} = (L + a)/√c.
    let inv: Vec<f64> = gap.iter().map(|g| g.powf(-0.5)).collect();
    let (b0, b1, _, _) = linear_fit(l, &inv)?;
    let floor = -l_min + 1e-6 * (1.0 + l_min.abs());
    let mut a = if b1 > 0.0 { b0 / b1 } else { 0.0 };
    if !(a > floor) {
        a = floor.max(0.0) + 1.0;
    }
    let (mut f, _, _) = profile(l, log_gap, a);
    for _ in 0..200 {
        let (_, d1, d2) = profile(l, log_gap, a);
        if d1 == 0.0 {
            break;
        }
        let mut step = if d2 > 0.0 { -d1 / d2 } else { -d1.signum() * (1.0 + a.abs()) * 0.1 };
        let mut accepted = false;
        for _ in 0..60 {
            let cand = a + step;
            if cand > floor {
                let (fc, _, _) = profile(l, log_gap, cand);
                if fc <= f {
                    accepted = (cand - a).abs() > 1e-15 * (1.0 + a.abs());
                    a = cand;
                    f = fc;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let n = l.len() as f64;
    let log_c = l
        .iter()
        .zip(log_gap)
        .map(|(li, g)| g + 2.0 * (li + a).ln())
        .sum::<f64>()
        / n;
    let residuals: Vec<f64> = l
        .iter()
        .zip(log_gap)
        .map(|(li, g)| g - (log_c - 2.0 * (li + a).ln()))
        .collect();
    Ok(FitResult {
        model: FitModel::LogInverseSquare,
        amplitude: log_c.exp(),
        exponent: Some(2.0),
        offset: Some(a),
        r_squared: r_squared(log_gap, &residuals),
        residuals,
    })
}

/// Fits v_inf − v_N against c·(log N + a)⁻² and c·(log N)^{−β}.
pub fn fit_log_square(records: &[SweepRecord], v_inf: f64) -> Result<LogSquareFit> {
    let (ns, vs) = velocity_points(records);
    fit_log_square_xy(&ns, &vs, v_inf)
}

pub fn fit_log_square_xy(ns: &[f64], vs: &[f64], v_inf: f64) -> Result<LogSquareFit> {
    need(ns.len(), 4)?;
    if ns.iter().any(|&n| !(n >= 2.0)) {
        return Err(Error::param("n", "log-scale fits need N >= 2"));
    }
    let gap = gaps(ns, vs, v_inf)?;
    let l: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    let log_gap: Vec<f64> = gap.iter().map(|g| g.ln()).collect();
    let log_l: Vec<f64> = l.iter().map(|x| x.ln()).collect();
    let (b0, b1, residuals, r2) = linear_fit(&log_l, &log_gap)?;
    Ok(LogSquareFit {
        offset_model: fit_offset_model(&l, &log_gap, &gap)?,
        free_power: FitResult {
            model: FitModel::FreePowerLogN,
            amplitude: b0.exp(),
            exponent: Some(-b1),
            offset: None,
            r_squared: r2,
            residuals,
        },
    })
}

/// gap = c·N^{−γ} by log-log least squares.
pub fn fit_power_in_n(ns: &[f64], gap: &[f64]) -> Result<FitResult> {
    need(ns.len(), 2)?;
    if ns.iter().any(|&n| !(n > 0.0)) || gap.iter().any(|&g| !(g > 0.0)) {
        return Err(Error::param("input", "power fit needs positive N and gaps"));
    }
    let x: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    let y: Vec<f64> = gap.iter().map(|g| g.ln()).collect();
    let (b0, b1, residuals, r2) = linear_fit(&x, &y)?;
    Ok(FitResult {
        model: FitModel::PowerInN,
        amplitude: b0.exp(),
        exponent: Some(-b1),
        offset: None,
        r_squared: r2,
        residuals,
    })
}

/// log gap = e − d·N by least squares; amplitude is eᵉ, exponent is d.
pub fn fit_exponential_in_n(ns: &[f64], gap: &[f64]) -> Result<FitResult> {
    need(ns.len(), 2)?;
    if gap.iter().any(|&g| !(g > 0.0)) {
        return Err(Error::param("input", "exponential fit needs positive gaps"));
    }
    let y: Vec<f64> = gap.iter().map(|g| g.ln()).collect();
    let (b0, b1, residuals, r2) = linear_fit(ns, &y)?;
    Ok(FitResult {
        model: FitModel::ExponentialInN,
        amplitude: b0.exp(),
        exponent: Some(-b1),
        offset: None,
        r_squared: r2,
        residuals,
    })
}

/// α = 1/2: power law in N; α > 1/2: exponential in N. Gaps are 1 − v_N.
pub fn fit_bernoulli_regimes(records: &[SweepRecord], alpha: f64) -> Result<FitResult> {
    let (ns, vs) = velocity_points(records);
    fit_bernoulli_regimes_xy(&ns, &vs, alpha)
}

pub fn fit_bernoulli_regimes_xy(ns: &[f64], vs: &[f64], alpha: f64) -> Result<FitResult> {
    if !(0.5..1.0).contains(&alpha) {
        return Err(Error::param("alpha", "regime fits need 1/2 <= alpha < 1"));
    }
    need(ns.len(), 3)?;
    let gap = gaps(ns, vs, 1.0)?;
    if alpha == 0.5 {
        fit_power_in_n(ns, &gap)
    } else {
        fit_exponential_in_n(ns, &gap)
    }
}
