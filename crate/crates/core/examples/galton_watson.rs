//! Binomial(2, q) Galton–Watson processes: the certified survival lower
//! bound and the probability of exponential growth.

use frontlab::killedbrw::{gw_growth_probability, gw_survival_lower_bound};

fn main() -> frontlab::Result<()> {
    for q in [0.7f64, 0.8, 0.9, 0.95] {
        let survival = 1.0 - ((1.0 - q) / q).powi(2);
        let bound = gw_survival_lower_bound(q * q, 2.0)?;
        let growth = gw_growth_probability(q, 1.5, 12, 100_000, 4)?;
        println!(
            "q={q:<5} survival {survival:.5}  bound {}  P(Z_12 >= 1.5^12) {:.5} +- {:.5}",
            bound.map_or("none".to_string(), |b| format!("{b:.5}")),
            growth.mean,
            growth.std_err
        );
    }
    Ok(())
}
