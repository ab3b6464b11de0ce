//! Good starting indices along a random path with increments at most K, and
//! the lower bound on how many there must be.

use frontlab::particles::{good_count_bound, good_indices};
use frontlab::Stream;

fn main() -> frontlab::Result<()> {
    let mut rng = Stream::new(2);
    let n = 60;
    let k = 1.0;
    let mut seq = vec![0.0];
    for _ in 0..n {
        let step = if rng.next_f64() < 0.7 { 1.0 } else { -1.0 };
        seq.push(seq.last().copied().unwrap_or(0.0) + step);
    }
    let v2 = seq[n] / n as f64;
    for (v1, m) in [(0.0, 5), (0.1, 10), (-0.2, 20)] {
        let good = good_indices(&seq, v1, m, k)?;
        println!(
            "v1={v1:<5} m={m:<3} #I={:<3} bound {:.3}  I={good:?}",
            good.len(),
            good_count_bound(v1, v2, k, n, m)
        );
    }
    Ok(())
}
