//! Survival of the branching random walk killed below the line (v(p) − ε)·i:
//! direct Monte Carlo against the exact lattice recursion, then the ε-sweep
//! of s(ε) = −√ε·log ρ̂ for Gaussian steps.

use frontlab::experiments::{survival_sweep, SurvivalSweepConfig};
use frontlab::killedbrw::{self, DEFAULT_CAP};
use frontlab::theory;
use frontlab::StepDistribution;

fn main() -> frontlab::Result<()> {
    let bern = StepDistribution::bernoulli(0.25)?;
    let c = theory::constants(&bern, 1e-12)?;
    println!("bernoulli(0.25), eps = 0.2");
    for m in [1u64, 2, 4, 8, 16] {
        let exact = killedbrw::exact_rho_dp(&bern, &c, 0.2, m)?;
        let est = killedbrw::estimate_rho(&bern, &c, 0.2, m, 50_000, DEFAULT_CAP, m)?;
        println!(
            "  m={m:<3} exact {exact:.5}  direct {:.5} +- {:.5}",
            est.rho_hat, est.ci_halfwidth
        );
    }

    let gauss = StepDistribution::standard_gaussian();
    let gc = theory::constants(&gauss, 1e-12)?;
    let sweep = survival_sweep(
        &SurvivalSweepConfig {
            dist: gauss,
            eps_list: vec![0.4, 0.2, 0.1],
            lambda: 2.0,
            replicas: 100_000,
            cap: DEFAULT_CAP,
            seed: 3,
        },
        &gc,
    )?;
    println!("gaussian, m = ceil(2 eps^-3/2), sqrt(chi) = {:.4}", sweep.summary.sqrt_chi);
    for p in &sweep.summary.points {
        println!(
            "  eps={:<4} m={:<3} rho={:.4e} s={:.4}",
            p.eps, p.horizon, p.rho_hat, p.s_eps
        );
    }
    Ok(())
}
