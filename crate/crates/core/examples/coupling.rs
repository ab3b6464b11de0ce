//! The rank-aligned coupling: ordered populations stay ordered after a
//! shared step, and shared-noise maxima are subadditive.

use frontlab::particles::{coupled_step, stochastic_order, Population, SharedNoise};
use frontlab::{StepDistribution, Stream};

fn main() -> frontlab::Result<()> {
    let dist = StepDistribution::standard_gaussian();
    let mut rng = Stream::new(5);
    let mut lower = Population::new(vec![0.0, -0.5, -1.0, -2.0]);
    let mut upper = Population::new(vec![0.3, 0.0, -0.2, -1.5]);
    for gen in 1..=5 {
        let (a, b) = coupled_step(&lower, &upper, &dist, &mut rng)?;
        lower = a;
        upper = b;
        println!(
            "gen {gen}: lower {:?}\n       upper {:?}  ordered={}",
            round(&lower.sorted_desc()),
            round(&upper.sorted_desc()),
            stochastic_order(&lower, &upper)
        );
    }

    let noise = SharedNoise {
        dist: &dist,
        n_particles: 8,
        seed: 11,
    };
    let (n, m) = (40, 60);
    let whole = noise.run_from(0, n + m).max();
    let split = noise.run_from(0, n).max() + noise.run_from(n, m).max();
    println!("max W(0,{}) = {whole:.4} <= {split:.4} = max W(0,{n}) + max W({n},{m})", n + m);
    Ok(())
}

fn round(xs: &[f64]) -> Vec<f64> {
    xs.iter().map(|x| (x * 1000.0).round() / 1000.0).collect()
}
