//! Solve for t*, v(p) and χ(p) for the built-in step laws and print the
//! leading-order predictions they imply.

use frontlab::theory::{self, check_assumptions, predicted_shift, predicted_survival_exponent};
use frontlab::StepDistribution;

fn main() -> frontlab::Result<()> {
    let laws = [
        StepDistribution::standard_gaussian(),
        StepDistribution::bernoulli(0.25)?,
        StepDistribution::uniform(0.0, 1.0)?,
        StepDistribution::bernoulli(0.75)?,
        StepDistribution::point(0.5)?,
    ];
    for dist in &laws {
        let report = check_assumptions(dist);
        match theory::constants(dist, 1e-12) {
            Ok(c) => {
                println!(
                    "{dist:<16} t*={:.10} v={:.10} chi={:.10}",
                    c.t_star, c.v_inf, c.chi
                );
                for n in [1_000u64, 1_000_000] {
                    println!("    N={n:<8} chi/(log N)^2 = {:.6}", predicted_shift(&c, n)?);
                }
                println!(
                    "    eps=0.1     sqrt(chi/eps) = {:.6}",
                    predicted_survival_exponent(&c, 0.1)?
                );
            }
            Err(e) => println!("{dist:<16} rejected (a3={}): {e}", report.a3_holds),
        }
    }
    Ok(())
}
