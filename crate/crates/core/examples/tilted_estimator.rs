//! Upper bound on survival from the expected number of tube-respecting
//! paths, computed by sampling under the tilted law, next to the direct
//! estimate it dominates.

use frontlab::killedbrw::{self, default_band, DEFAULT_CAP};
use frontlab::theory;
use frontlab::StepDistribution;

fn main() -> frontlab::Result<()> {
    let dist = StepDistribution::standard_gaussian();
    let c = theory::constants(&dist, 1e-12)?;
    let eps = 0.3;
    let band = default_band(eps);
    println!("gaussian, eps={eps}, band={band:.3}");
    for m in [1u64, 5, 10, 20] {
        let first = killedbrw::tilted_first_moment(&dist, &c, eps, m, band, 100_000, 9)?;
        let delta = killedbrw::delta_tail_bound(&c, band, m)?;
        let direct = killedbrw::estimate_rho(&dist, &c, eps, m, 100_000, DEFAULT_CAP, 10)?;
        println!(
            "  m={m:<3} E(paths)={:.4e} +- {:.1e}  tail={delta:.2e}  direct={:.4e}",
            first.mean, first.std_err, direct.rho_hat
        );
    }
    Ok(())
}
