//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use std::collections::HashMap;

/// C(n, k) p^k (1 − p)^{n−k}, summed in log space.
pub fn binomial_pmf(n: usize, k: usize, p: f64) -> f64 {
    if p <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    let k_small = k.min(n - k);
    let mut log_c = 0.0;
    for i in 0..k_small {
        log_c += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
    }
    (log_c + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp()
}

/// Exact 1 − v_N for Bernoulli(α) steps with N small.
///
/// The population seen from its maximum is a finite Markov chain on level
/// counts c[d] (particles d steps below the top). The maximum stalls exactly
/// when all 2·c[0] leader children step 0, so 1 − v_N is the stationary mean
/// of (1 − α)^{2 c[0]}.
pub fn bernoulli_gap_exact(alpha: f64, n: usize) -> f64 {
    let start = vec![n as u16];
    let mut index: HashMap<Vec<u16>, usize> = HashMap::new();
    let mut states = vec![start.clone()];
    index.insert(start, 0);
    let mut edges: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut i = 0;
    while i < states.len() {
        let mut out: HashMap<usize, f64> = HashMap::new();
        for (next, p) in transitions(&states[i], alpha, n) {
            let j = *index.entry(next.clone()).or_insert_with(|| {
                states.push(next);
                states.len() - 1
            });
            *out.entry(j).or_insert(0.0) += p;
        }
        edges.push(out.into_iter().collect());
        i += 1;
    }
    let m = states.len();
    let mut pi = vec![1.0 / m as f64; m];
    for _ in 0..200_000 {
        let mut next = vec![0.0; m];
        for (s, out) in edges.iter().enumerate() {
            for &(t, p) in out {
                next[t] += pi[s] * p;
            }
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        let diff: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        pi = next;
        if diff < 1e-15 {
            break;
        }
    }
    let q2 = (1.0 - alpha) * (1.0 - alpha);
    states
        .iter()
        .zip(&pi)
        .map(|(c, w)| w * q2.powi(c[0] as i32))
        .sum()
}

/// Successor level-count vectors with probabilities.
fn transitions(c: &[u16], alpha: f64, n: usize) -> Vec<(Vec<u16>, f64)> {
    let mut out = Vec::new();
    let mut ups = vec![0u16; c.len()];
    enumerate(c, alpha, 0, 1.0, &mut ups, n, &mut out);
    out
}

fn enumerate(
    c: &[u16],
    alpha: f64,
    d: usize,
    prob: f64,
    ups: &mut Vec<u16>,
    n: usize,
    out: &mut Vec<(Vec<u16>, f64)>,
) {
    if d == c.len() {
        // Children by level relative to the old top, one level higher first.
        let mut levels = vec![0u16; c.len() + 1];
        for (j, &cj) in c.iter().enumerate() {
            levels[j] += ups[j];
            levels[j + 1] += 2 * cj - ups[j];
        }
        let mut kept = Vec::new();
        let mut left = n as u16;
        for &l in &levels {
            if left == 0 {
                break;
            }
            let take = l.min(left);
            if kept.is_empty() && take == 0 {
                continue;
            }
            kept.push(take);
            left -= take;
        }
        while kept.last() == Some(&0) {
            kept.pop();
        }
        out.push((kept, prob));
        return;
    }
    let trials = 2 * c[d] as usize;
    for u in 0..=trials {
        ups[d] = u as u16;
        enumerate(c, alpha, d + 1, prob * binomial_pmf(trials, u, alpha), ups, n, out);
    }
}

/// P(Z_n ≥ target) for the binomial(2, q) Galton–Watson process from one
/// individual, by propagating the exact law of Z_k.
pub fn gw_tail_exact(q: f64, generations: u32, target: f64) -> f64 {
    let mut law = vec![0.0, 1.0];
    for _ in 0..generations {
        let max = 2 * (law.len() - 1);
        let mut next = vec![0.0; max + 1];
        for (z, &w) in law.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for k in 0..=2 * z {
                next[k] += w * binomial_pmf(2 * z, k, q);
            }
        }
        law = next;
    }
    law.iter()
        .enumerate()
        .filter(|(z, _)| *z as f64 >= target)
        .map(|(_, w)| w)
        .sum()
}

/// Survival of the binomial(2, q) Galton–Watson process: 1 minus the smaller
/// fixed point of s ↦ (1 − q + q s)², found by iterating from 0.
pub fn gw_survival_iterated(q: f64) -> f64 {
    let mut s = 0.0f64;
    for _ in 0..100_000 {
        let next = (1.0 - q + q * s).powi(2);
        if (next - s).abs() < 1e-17 {
            s = next;
            break;
        }
        s = next;
    }
    1.0 - s
}
