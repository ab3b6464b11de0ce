//! Invariant suites behind `frontlab verify`.
//!
//! Every check is seeded and its detail string holds only simulation output,
//! so two runs with the same seed produce identical reports.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::killedbrw::{self, BarrierSpec};
use crate::particles::{
    self, check_diameter_bound, check_good_count, coupled_step, estimate_velocity_with,
    exp_moment_check, stochastic_order, Instrumentation, Population, Selection, Selector,
};
use crate::rng::Stream;
use crate::stepdist::StepDistribution;
use crate::theory;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Fast,
    Full,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub seed: u64,
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect()
    }

    /// One `PASS`/`FAIL` line per check.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("{tag} {}: {}\n", c.name, c.detail));
        }
        out
    }
}

/// Runs `suite`; `selection` replaces the selection rule in the checks that
/// exercise it, so a corrupted rule can be shown to be caught.
pub fn run_suite(suite: Suite, seed: u64, selection: Selection) -> Result<VerifyReport> {
    let root = Stream::new(seed);
    let mut checks = vec![
        closed_form_constants()?,
        selection_oracle(&root.derive(1), selection),
        coupling_order(&root.derive(2))?,
        lemma_good_indices(&root.derive(3))?,
        gw_quadratic(&root.derive(4))?,
        one_step_survival(&root.derive(5))?,
        quick_velocity(&root.derive(6), selection)?,
    ];
    if suite == Suite::Full {
        checks.push(diameter_runs(&root.derive(10))?);
        checks.push(n1_velocity_laws(&root.derive(11), selection)?);
        checks.push(dp_vs_direct(&root.derive(12))?);
        checks.push(exp_moment(seed.wrapping_add(13))?);
    }
    Ok(VerifyReport {
        suite,
        seed,
        checks,
    })
}

fn outcome(name: &'static str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome {
        name,
        passed,
        detail,
    }
}

fn closed_form_constants() -> Result<CheckOutcome> {
    let g = theory::constants(&StepDistribution::standard_gaussian(), 1e-13)?;
    let t = (2.0 * LN_2).sqrt();
    let gt = (g.t_star - t).abs();
    let gc = (g.chi - 0.5 * PI * PI * t).abs();
    let b = theory::constants(&StepDistribution::bernoulli(0.25)?, 1e-13)?;
    let bt = (b.t_star - 2.553_244_909_185_657_3).abs();
    let bv = (b.v_inf - 0.810_710_375_084_768_2).abs();
    let bc = (b.chi - 1.933_547_145_891_544_3).abs();
    let a3_rejected = theory::constants(&StepDistribution::point(0.5)?, 1e-10).is_err();
    let ok = gt <= 1e-10 && gc <= 1e-9 && bt <= 1e-8 && bv <= 1e-8 && bc <= 1e-8 && a3_rejected;
    Ok(outcome(
        "closed_form_constants",
        ok,
        format!("gaussian dt*={gt:.2e} dchi={gc:.2e}; bernoulli(0.25) dt*={bt:.2e} dv={bv:.2e} dchi={bc:.2e}; point mass rejected={a3_rejected}"),
    ))
}

fn selection_oracle(root: &Stream, selection: Selection) -> CheckOutcome {
    let mut selector = Selector::new();
    let mut kept = Vec::new();
    let trials = 500;
    let mut bad = 0;
    for trial in 0..trials {
        let mut rng = root.derive(trial);
        let n = 1 + (rng.next_raw() % 64) as usize;
        let lattice = trial % 3 == 0;
        let children: Vec<f64> = (0..2 * n)
            .map(|_| {
                if lattice {
                    (rng.next_raw() % 4) as f64
                } else {
                    rng.next_f64()
                }
            })
            .collect();
        selector.retain(&children, n, selection, &mut kept);
        let mut expect = children.clone();
        expect.sort_by(|a, b| b.total_cmp(a));
        expect.truncate(n);
        let mut got = kept.clone();
        got.sort_by(|a, b| b.total_cmp(a));
        if got != expect {
            bad += 1;
        }
    }
    outcome(
        "selection_oracle",
        bad == 0,
        format!("{bad}/{trials} trials differ from the sort-based top-N"),
    )
}

fn random_population(rng: &mut Stream, n: usize) -> Population {
    Population::new((0..n).map(|_| 4.0 * rng.next_f64() - 2.0).collect())
}

fn coupling_order(root: &Stream) -> Result<CheckOutcome> {
    let dist = StepDistribution::standard_gaussian();
    let trials = 1000;
    let mut bad = 0;
    for trial in 0..trials {
        let mut rng = root.derive(trial);
        let n = 1 + (rng.next_raw() % 16) as usize;
        let mu1 = random_population(&mut rng, n);
        let shift: Vec<f64> = mu1
            .sorted_desc()
            .iter()
            .map(|x| x + rng.next_f64())
            .collect();
        let mu2 = Population::new(shift);
        let (z1, z2) = coupled_step(&mu1, &mu2, &dist, &mut rng)?;
        if !stochastic_order(&z1, &z2) {
            bad += 1;
        }
    }
    Ok(outcome(
        "coupling_order",
        bad == 0,
        format!("{bad}/{trials} coupled steps broke the order"),
    ))
}

/// Random drifting paths with increments at most K = 1; returns (checked, failed).
pub(crate) fn lemma_trials(root: &Stream, trials: u64) -> Result<(usize, usize)> {
    let (mut checked, mut failed) = (0, 0);
    for trial in 0..trials {
        let mut rng = root.derive(trial);
        let n = 8 + (rng.next_raw() % 57) as usize;
        let m = 1 + (rng.next_raw() % (n as u64 / 2)) as usize;
        let k_bound = 1.0;
        let drift = rng.next_f64();
        let mut seq = vec![0.0];
        for _ in 0..n {
            let inc = (drift + (1.0 - drift) * (2.0 * rng.next_f64() - 1.0)).min(k_bound);
            seq.push(seq.last().copied().unwrap_or(0.0) + inc);
        }
        let v2 = seq[n] / n as f64;
        let v1 = v2 - (0.05 + 0.5 * rng.next_f64());
        if let Some(ok) = check_good_count(&seq, v1, v2, m, k_bound)? {
            checked += 1;
            if !ok {
                failed += 1;
            }
        }
    }
    Ok((checked, failed))
}

fn lemma_good_indices(root: &Stream) -> Result<CheckOutcome> {
    let (checked, failed) = lemma_trials(root, 5000)?;
    Ok(outcome(
        "lemma_good_indices",
        failed == 0 && checked > 0,
        format!("{failed}/{checked} sequences below the cardinality bound"),
    ))
}

/// Survival probability of the binomial(2, q) Galton–Watson process from the
/// smaller root of q²d² + (2q(1 − q) − 1)d + (1 − q)² = 0.
pub fn binomial2_survival(q: f64) -> f64 {
    if q <= 0.5 {
        return 0.0;
    }
    let a = q * q;
    let b = 2.0 * q * (1.0 - q) - 1.0;
    let c = (1.0 - q) * (1.0 - q);
    // Smaller root, written to avoid cancellation.
    let disc = (b * b - 4.0 * a * c).max(0.0).sqrt();
    let d = 2.0 * c / (-b + disc);
    1.0 - d
}

/// (q, a) pairs with a ∈ [1, 2]; returns (certified, violations).
pub(crate) fn gw_trials(root: &Stream, trials: u64) -> Result<(usize, usize)> {
    let (mut certified, mut bad) = (0, 0);
    for trial in 0..trials {
        let mut rng = root.derive(trial);
        let q = rng.next_f64();
        let a = 1.0 + rng.next_f64();
        let q_a = if a <= 1.0 { 1.0 - (1.0 - q) * (1.0 - q) } else { q * q };
        if let Some(bound) = killedbrw::gw_survival_lower_bound(q_a, a)? {
            certified += 1;
            if binomial2_survival(q) < bound {
                bad += 1;
            }
        }
    }
    Ok((certified, bad))
}

fn gw_quadratic(root: &Stream) -> Result<CheckOutcome> {
    let (certified, bad) = gw_trials(root, 1000)?;
    let anchor = (binomial2_survival(0.9) - (1.0 - 0.012_345_679_012_345_68)).abs() < 1e-12;
    Ok(outcome(
        "gw_quadratic_oracle",
        bad == 0 && certified > 0 && anchor,
        format!("{bad}/{certified} certified bounds exceed the exact survival"),
    ))
}

fn one_step_survival(root: &Stream) -> Result<CheckOutcome> {
    let bern = StepDistribution::bernoulli(0.25)?;
    let c = theory::constants(&bern, 1e-12)?;
    let mut worst_dp: f64 = 0.0;
    for eps in [0.1, 0.2, 0.5] {
        let dp = killedbrw::exact_rho_dp(&bern, &c, eps, 1)?;
        let q = bern.tail(c.v_inf - eps);
        worst_dp = worst_dp.max((dp - (1.0 - (1.0 - q) * (1.0 - q))).abs());
    }
    let gauss = StepDistribution::standard_gaussian();
    let gc = theory::constants(&gauss, 1e-12)?;
    let barrier = BarrierSpec::from_constants(&gc, 0.3, 1)?;
    let est = killedbrw::estimate_rho_at(&gauss, &barrier, 20_000, killedbrw::DEFAULT_CAP, root)?;
    let exact = killedbrw::one_step_survival(&gauss, barrier.speed);
    let z = (est.rho_hat - exact).abs() / est.std_err.max(1e-300);
    Ok(outcome(
        "one_step_survival",
        worst_dp < 1e-15 && z <= 3.0,
        format!("dp vs 1-(1-q)^2: {worst_dp:.2e}; gaussian direct z={z:.3}"),
    ))
}

fn quick_velocity(root: &Stream, selection: Selection) -> Result<CheckOutcome> {
    let dist = StepDistribution::bernoulli(0.75)?;
    let v = estimate_velocity_with(&dist, 1, 20_000, 100, 8, root, selection)?;
    let z = (v.v_point - 0.9375).abs() / v.std_err.max(1e-300);
    Ok(outcome(
        "n1_velocity_quick",
        z <= 4.0,
        format!("bernoulli(0.75) N=1 v={:.6} target 0.9375 z={z:.3}", v.v_point),
    ))
}

fn diameter_runs(root: &Stream) -> Result<CheckOutcome> {
    let dists = [
        StepDistribution::standard_gaussian(),
        StepDistribution::bernoulli(0.25)?,
        StepDistribution::uniform(0.0, 1.0)?,
    ];
    let (mut runs, mut bad) = (0, 0);
    for (i, dist) in dists.iter().enumerate() {
        for (j, n) in [1usize, 2, 7, 64, 300].into_iter().enumerate() {
            let seed = root.derive((i * 8 + j) as u64).next_raw();
            let stats = particles::run(
                &Population::concentrated(n, 0.0),
                dist,
                2000,
                seed,
                Instrumentation {
                    diameter: true,
                    steps: false,
                },
            );
            runs += 1;
            if !check_diameter_bound(&stats, n)? {
                bad += 1;
            }
        }
    }
    Ok(outcome(
        "diameter_bound",
        bad == 0,
        format!("{bad}/{runs} instrumented trajectories violate the bound"),
    ))
}

fn n1_velocity_laws(root: &Stream, selection: Selection) -> Result<CheckOutcome> {
    let cases = [
        (StepDistribution::bernoulli(0.75)?, 0.9375),
        (StepDistribution::bernoulli(0.5)?, 0.75),
        (StepDistribution::standard_gaussian(), 1.0 / PI.sqrt()),
    ];
    let mut zs = Vec::new();
    for (k, (dist, target)) in cases.iter().enumerate() {
        let v = estimate_velocity_with(dist, 1, 200_000, 1000, 8, &root.derive(k as u64), selection)?;
        zs.push((v.v_point - target).abs() / v.std_err.max(1e-300));
    }
    let worst = zs.iter().copied().fold(0.0, f64::max);
    Ok(outcome(
        "n1_velocity_laws",
        worst <= 3.0,
        format!("z-scores {:.3} {:.3} {:.3}", zs[0], zs[1], zs[2]),
    ))
}

fn dp_vs_direct(root: &Stream) -> Result<CheckOutcome> {
    let bern = StepDistribution::bernoulli(0.25)?;
    let c = theory::constants(&bern, 1e-12)?;
    let mut worst: f64 = 0.0;
    let mut k = 0;
    for eps in [0.2, 0.4] {
        for m in 1..=10 {
            let barrier = BarrierSpec::from_constants(&c, eps, m)?;
            let exact = killedbrw::exact_rho_dp_at(&bern, &barrier)?;
            let est = killedbrw::estimate_rho_at(
                &bern,
                &barrier,
                20_000,
                killedbrw::DEFAULT_CAP,
                &root.derive(k),
            )?;
            k += 1;
            let se = (exact * (1.0 - exact) / est.replicas as f64).sqrt();
            worst = worst.max((est.rho_hat - exact).abs() / se.max(1e-300));
        }
    }
    Ok(outcome(
        "dp_vs_direct_survival",
        worst <= 4.0,
        format!("largest |rho_hat - dp|/SE over 20 cells: {worst:.3}"),
    ))
}

fn exp_moment(seed: u64) -> Result<CheckOutcome> {
    let dist = StepDistribution::standard_gaussian();
    let c = theory::constants(&dist, 1e-12)?;
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for (i, (n, gens)) in [(1usize, 5u64), (4, 10), (16, 20)].into_iter().enumerate() {
        let m = exp_moment_check(&dist, &c, n, gens, 20_000, seed.wrapping_add(i as u64))?;
        let ratio = m.mean / n as f64;
        worst = worst.max(ratio);
        ok &= m.mean <= n as f64 * (1.0 + 4.0 * m.relative_se());
    }
    Ok(outcome(
        "exp_moment_inequality",
        ok,
        format!("largest estimate/N: {worst:.4}"),
    ))
}
