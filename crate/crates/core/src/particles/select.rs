//! Linear-time selection of the N rightmost children.
//!
//! The threshold (the N-th largest value) comes from a three-way-partition
//! quickselect, which stays linear on lattice laws where most children tie.
//! A second pass keeps everything strictly above the threshold plus the
//! lowest-indexed children equal to it, so exactly N survive.

use std::cmp::Ordering;

/// Which end of the cloud survives selection.
///
/// The model keeps the rightmost particles. `Leftmost` exists only as a
/// mutation knob for the verifier's self-check.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Selection {
    #[default]
    Rightmost,
    Leftmost,
}

const INSERTION_CUTOFF: usize = 16;
/// Inputs at least this long use the sampled bracketing pass.
const SAMPLED_MIN_LEN: usize = 512;

/// Value of rank `k` (0-based, ascending) in `buf`. Reorders `buf`.
///
/// Panics if `k >= buf.len()`.
pub fn select_nth_ascending(buf: &mut [f64], k: usize) -> f64 {
    assert!(k < buf.len(), "rank {k} out of bounds for length {}", buf.len());
    let mut lo = 0;
    let mut hi = buf.len();
    // Past this many rounds, fall back to sorting the remaining window.
    let mut budget = 2 * (usize::BITS - buf.len().leading_zeros()) as usize + 4;
    loop {
        let len = hi - lo;
        if len <= INSERTION_CUTOFF || budget == 0 {
            let w = &mut buf[lo..hi];
            if len <= INSERTION_CUTOFF {
                insertion_sort(w);
            } else {
                w.sort_unstable_by(f64::total_cmp);
            }
            return buf[k];
        }
        budget -= 1;
        let pivot = choose_pivot(&buf[lo..hi]);
        let (lt, gt) = partition3(&mut buf[lo..hi], pivot);
        let (lt, gt) = (lo + lt, lo + gt);
        if k < lt {
            hi = lt;
        } else if k >= gt {
            lo = gt;
        } else {
            return pivot;
        }
    }
}

/// The k-th largest value (1-based). Reorders `buf`.
pub fn kth_largest(buf: &mut [f64], k: usize) -> f64 {
    assert!(k >= 1 && k <= buf.len());
    let n = buf.len();
    select_nth_ascending(buf, n - k)
}

fn insertion_sort(w: &mut [f64]) {
    for i in 1..w.len() {
        let x = w[i];
        let mut j = i;
        while j > 0 && w[j - 1] > x {
            w[j] = w[j - 1];
            j -= 1;
        }
        w[j] = x;
    }
}

fn median3(a: f64, b: f64, c: f64) -> f64 {
    if (a <= b) == (b <= c) {
        b
    } else if (b <= a) == (a <= c) {
        a
    } else {
        c
    }
}

/// Median of three, or Tukey's ninther on large windows.
fn choose_pivot(w: &[f64]) -> f64 {
    let n = w.len();
    if n < 128 {
        return median3(w[0], w[n / 2], w[n - 1]);
    }
    let s = n / 8;
    let m = n / 2;
    median3(
        median3(w[0], w[s], w[2 * s]),
        median3(w[m - s], w[m], w[m + s]),
        median3(w[n - 1 - 2 * s], w[n - 1 - s], w[n - 1]),
    )
}

/// Dutch-flag partition: returns `(lt, gt)` with `w[..lt] < pivot`,
/// `w[lt..gt] == pivot`, `w[gt..] > pivot`.
fn partition3(w: &mut [f64], pivot: f64) -> (usize, usize) {
    let mut lt = 0;
    let mut i = 0;
    let mut gt = w.len();
    while i < gt {
        let x = w[i];
        match x.partial_cmp(&pivot).unwrap_or(Ordering::Equal) {
            Ordering::Less => {
                w.swap(lt, i);
                lt += 1;
                i += 1;
            }
            Ordering::Greater => {
                gt -= 1;
                w.swap(i, gt);
            }
            Ordering::Equal => i += 1,
        }
    }
    (lt, gt)
}

/// Reusable buffers for repeated selections.
#[derive(Clone, Debug, Default)]
pub struct Selector {
    scratch: Vec<f64>,
}

impl Selector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Value of ascending rank `k` among `children`, which are not reordered.
    ///
    /// Large inputs first bracket the rank between two pivots read off a
    /// sorted stride sample, so one branch-free pass usually leaves only a
    /// small band for the exact quickselect.
    pub fn rank_value(&mut self, children: &[f64], k: usize) -> f64 {
        let len = children.len();
        assert!(k < len, "rank {k} out of bounds for length {len}");
        if len >= SAMPLED_MIN_LEN {
            if let Some(v) = self.rank_value_sampled(children, k) {
                return v;
            }
        }
        self.scratch.clear();
        self.scratch.extend_from_slice(children);
        select_nth_ascending(&mut self.scratch, k)
    }

    fn rank_value_sampled(&mut self, children: &[f64], k: usize) -> Option<f64> {
        let len = children.len();
        let size = ((len as f64).powf(2.0 / 3.0) as usize).clamp(64, len / 4);
        let stride = len / size;
        self.scratch.clear();
        self.scratch.extend(children.iter().step_by(stride).take(size));
        let sample = &mut self.scratch;
        sample.sort_unstable_by(f64::total_cmp);
        let s = sample.len();
        let center = (k as f64 + 0.5) / len as f64 * s as f64;
        let spread = 2.0 * (s as f64).sqrt() + 2.0;
        let lo_idx = (center - spread).floor();
        let hi_idx = (center + spread).ceil();
        let lo = if lo_idx < 0.0 { f64::NEG_INFINITY } else { sample[lo_idx as usize] };
        let hi = if hi_idx >= s as f64 { f64::INFINITY } else { sample[hi_idx as usize] };
        if !(lo <= hi) {
            return None;
        }
        sample.clear();
        sample.resize(len, 0.0);
        let mut below = 0usize;
        let mut band = 0usize;
        for &x in children {
            sample[band] = x;
            below += (x < lo) as usize;
            band += ((x >= lo) & (x <= hi)) as usize;
        }
        if k < below || k >= below + band {
            return None;
        }
        sample.truncate(band);
        Some(select_nth_ascending(sample, k - below))
    }

    /// Keeps `n` of `children` according to `rule`, ties broken by lower index.
    /// Output preserves the children's relative order.
    pub fn retain(&mut self, children: &[f64], n: usize, rule: Selection, out: &mut Vec<f64>) {
        out.clear();
        if n == 0 {
            return;
        }
        if n >= children.len() {
            out.extend_from_slice(children);
            return;
        }
        let len = children.len();
        match rule {
            Selection::Rightmost => {
                let threshold = self.rank_value(children, len - n);
                // Fast path: no surplus ties at the threshold.
                out.resize(len, 0.0);
                let mut kept = 0usize;
                for &x in children {
                    out[kept] = x;
                    kept += (x >= threshold) as usize;
                }
                if kept == n {
                    out.truncate(n);
                    return;
                }
                out.clear();
                let above = children.iter().filter(|&&x| x > threshold).count();
                let mut ties = n - above;
                for &x in children {
                    if x > threshold {
                        out.push(x);
                    } else if x == threshold && ties > 0 {
                        out.push(x);
                        ties -= 1;
                    }
                }
            }
            Selection::Leftmost => {
                let threshold = self.rank_value(children, n - 1);
                let below = children.iter().filter(|&&x| x < threshold).count();
                let mut ties = n - below;
                for &x in children {
                    if x < threshold {
                        out.push(x);
                    } else if x == threshold && ties > 0 {
                        out.push(x);
                        ties -= 1;
                    }
                }
            }
        }
        debug_assert_eq!(out.len(), n);
    }
}

/// The `n` rightmost values of `children` (stable tie rule).
pub fn select_rightmost(children: &[f64], n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    Selector::new().retain(children, n, Selection::Rightmost, &mut out);
    out
}
