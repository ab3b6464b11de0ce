//! Counting "good" starting indices along a path with bounded increments.
//!
//! For a sequence 0 = x₀, …, xₙ with increments at most K, an index i is good
//! when the path stays above the line of slope v₁ through (i, xᵢ) for the next
//! m steps. If xₙ ≥ v₂·n with v₂ > v₁, at least
//! ((v₂ − v₁)/(K − v₁))·(n/m) − K/(K − v₁) indices are good when v₁ ≥ 0.
//!
//! For v₁ < 0 that constant is too small: the unfinished last block of
//! length L < m contributes at most K·L, which exceeds v₁·L + K·m once
//! L > K·m/(K − v₁). Charging it (K − v₁)·m instead gives the constant 1, so
//! the bound used here subtracts max(K/(K − v₁), 1).

use crate::error::{Error, Result};

fn check_increments(seq: &[f64], k_bound: f64) -> Result<()> {
    for (i, w) in seq.windows(2).enumerate() {
        let inc = w[1] - w[0];
        if inc > k_bound {
            return Err(Error::StepBoundViolated {
                index: i,
                increment: inc,
                bound: k_bound,
            });
        }
    }
    Ok(())
}

/// I = { i ≤ n − m : x_j − x_i ≥ v₁(j − i) for all j ∈ [i, i + m] }.
pub fn good_indices(seq: &[f64], v1: f64, m: usize, k_bound: f64) -> Result<Vec<usize>> {
    if seq.is_empty() {
        return Err(Error::param("seq", "sequence must contain x_0"));
    }
    let n = seq.len() - 1;
    if m == 0 || m > n {
        return Err(Error::param("m", format!("need 1 <= m <= n = {n}, got {m}")));
    }
    check_increments(seq, k_bound)?;
    Ok((0..=n - m)
        .filter(|&i| (i..=i + m).all(|j| seq[j] - seq[i] >= v1 * (j - i) as f64))
        .collect())
}

/// The lower bound on #I.
pub fn good_count_bound(v1: f64, v2: f64, k_bound: f64, n: usize, m: usize) -> f64 {
    let slack = (k_bound / (k_bound - v1)).max(1.0);
    (v2 - v1) / (k_bound - v1) * (n as f64 / m as f64) - slack
}

/// `None` when xₙ < v₂·n (nothing to check); otherwise whether #I meets the bound.
pub fn check_good_count(seq: &[f64], v1: f64, v2: f64, m: usize, k_bound: f64) -> Result<Option<bool>> {
    if !(v1 < v2 && v1 < k_bound) {
        return Err(Error::param("v1", "need v1 < v2 and v1 < K"));
    }
    let good = good_indices(seq, v1, m, k_bound)?;
    let n = seq.len() - 1;
    if seq[n] < v2 * n as f64 {
        return Ok(None);
    }
    Ok(Some(good.len() as f64 >= good_count_bound(v1, v2, k_bound, n, m)))
}
