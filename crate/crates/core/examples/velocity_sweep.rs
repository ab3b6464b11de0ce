//! A short velocity sweep in N for Gaussian steps, followed by the two
//! log-scale fits of v(p) − v_N.
//!
//! Usage: cargo run --release --example velocity_sweep [gens-factor]

use frontlab::experiments::{
    fit_log_square, monotonicity_violations, velocity_sweep, velocity_table, GenerationPlan,
    VelocitySweepConfig,
};
use frontlab::theory;
use frontlab::StepDistribution;

fn main() -> frontlab::Result<()> {
    let factor: f64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(2.0);
    let dist = StepDistribution::standard_gaussian();
    let c = theory::constants(&dist, 1e-12)?;
    let cfg = VelocitySweepConfig {
        dist,
        n_list: vec![16, 32, 64, 128, 256, 512, 1024],
        plan: GenerationPlan::LogCubed { factor },
        replicas: 4,
        seed: 1,
    };
    let records = velocity_sweep(&cfg)?;
    print!("{}", velocity_table(&records).to_csv());
    println!("monotonicity violations: {:?}", monotonicity_violations(&records, 2.0));
    let fit = fit_log_square(&records, c.v_inf)?;
    println!(
        "c*(log N + a)^-2: c={:.3} a={:.3} (chi={:.3})",
        fit.offset_model.amplitude,
        fit.offset_model.offset.unwrap_or(f64::NAN),
        c.chi
    );
    println!(
        "c*(log N)^-beta:  c={:.3} beta={:.3} r2={:.4}",
        fit.free_power.amplitude,
        fit.free_power.exponent.unwrap_or(f64::NAN),
        fit.free_power.r_squared
    );
    Ok(())
}
