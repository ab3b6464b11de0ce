//! Bernoulli(α) fronts with α ≥ 1/2, where v_∞ = 1 and the gap 1 − v_N
//! decays polynomially at α = 1/2 and exponentially above it.
//!
//! Usage: cargo run --example bernoulli_regimes [generations]

use frontlab::experiments::fit_exponential_in_n;
use frontlab::particles::bernoulli_stall_rate;
use frontlab::{Stream, StepDistribution};

fn main() -> frontlab::Result<()> {
    let gens: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(200_000);
    let dist = StepDistribution::bernoulli(0.75)?;
    let root = Stream::new(11);
    let (mut ns, mut gaps) = (Vec::new(), Vec::new());
    println!("{:>3} {:>14} {:>10} {:>14} {:>10}", "N", "1-v (cond)", "se", "1-v (direct)", "se");
    for n in 1..=10usize {
        let s = bernoulli_stall_rate(&dist, n, gens, gens / 10, 4, &root.derive(n as u64))?;
        println!(
            "{n:>3} {:>14.6e} {:>10.2e} {:>14.6e} {:>10.2e}",
            s.rate, s.std_err, s.direct_rate, s.direct_se
        );
        ns.push(n as f64);
        gaps.push(s.rate);
    }
    let fit = fit_exponential_in_n(&ns, &gaps)?;
    println!(
        "1 - v_N ~ {:.4} exp(-{:.4} N), r^2 = {:.4}",
        fit.amplitude,
        fit.exponent.unwrap_or(f64::NAN),
        fit.r_squared
    );
    Ok(())
}
