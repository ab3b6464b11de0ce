use serde::Serialize;

/// Generations between re-centerings of a long trajectory.
pub const RECENTER_EVERY: u64 = 1_000_000;

/// A finite counting measure with exactly `len()` atoms.
///
/// Positions are kept relative to `offset` in an unsorted buffer, so long
/// runs can be re-centered without losing precision.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Population {
    pub(crate) local: Vec<f64>,
    pub(crate) offset: f64,
}

impl Population {
    pub fn new(positions: Vec<f64>) -> Self {
        Self {
            local: positions,
            offset: 0.0,
        }
    }

    /// N particles at `x`, i.e. N·δ_x.
    pub fn concentrated(n: usize, x: f64) -> Self {
        Self::new(vec![x; n])
    }

    pub fn len(&self) -> usize {
        self.local.len()
    }

    pub fn is_empty(&self) -> bool {
        self.local.is_empty()
    }

    pub fn positions(&self) -> Vec<f64> {
        self.local.iter().map(|x| x + self.offset).collect()
    }

    pub fn max(&self) -> f64 {
        self.offset + self.local.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.offset + self.local.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// (min, max) in a single scan.
    pub fn extremes(&self) -> (f64, f64) {
        let (lo, hi) = self
            .local
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                (lo.min(x), hi.max(x))
            });
        (self.offset + lo, self.offset + hi)
    }

    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.extremes();
        hi - lo
    }

    /// Positions sorted in decreasing order.
    pub fn sorted_desc(&self) -> Vec<f64> {
        let mut v = self.positions();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    /// Shift local coordinates so the minimum sits at 0.
    pub fn recenter(&mut self) {
        let lo = self.local.iter().copied().fold(f64::INFINITY, f64::min);
        if lo.is_finite() && lo != 0.0 {
            for x in &mut self.local {
                *x -= lo;
            }
            self.offset += lo;
        }
    }
}

/// μ ≺ ν: M(μ) ≤ M(ν) and, ranking both in decreasing order, xᵢ ≤ yᵢ for
/// every i ≤ M(μ).
pub fn stochastic_order(mu: &Population, nu: &Population) -> bool {
    if mu.len() > nu.len() {
        return false;
    }
    let x = mu.sorted_desc();
    let y = nu.sorted_desc();
    x.iter().zip(&y).all(|(a, b)| a <= b)
}
