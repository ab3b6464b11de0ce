//! Run one N-particle front, print its trajectory every few generations and
//! check the pathwise diameter bound.

use frontlab::particles::{self, check_diameter_bound, Instrumentation, Population};
use frontlab::StepDistribution;

fn main() -> frontlab::Result<()> {
    let dist = StepDistribution::standard_gaussian();
    let n = 64;
    let stats = particles::run(
        &Population::concentrated(n, 0.0),
        &dist,
        2000,
        7,
        Instrumentation::all(),
    );
    for r in stats.records.iter().step_by(250) {
        println!(
            "gen {:>5}  max {:>10.4}  min {:>10.4}  diameter {:>7.4}  max/gen {:.4}",
            r.gen,
            r.max,
            r.min,
            r.diameter,
            r.max / r.gen.max(1) as f64
        );
    }
    println!("diameter bound holds: {}", check_diameter_bound(&stats, n)?);
    Ok(())
}
