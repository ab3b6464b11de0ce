//! One branching-selection step, and the rank-aligned coupled variants.

use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::stepdist::StepSampler;

use super::population::{stochastic_order, Population};
use super::select::{Selection, Selector};

/// Smallest and largest of the 2N steps drawn during one generation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepExtremes {
    pub min_step: f64,
    pub max_step: f64,
}

/// Branching-selection kernel with reusable buffers.
#[derive(Clone, Debug, Default)]
pub struct Stepper {
    children: Vec<f64>,
    next: Vec<f64>,
    selector: Selector,
    pub selection: Selection,
}

impl Stepper {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_selection(selection: Selection) -> Self {
        Self {
            selection,
            ..Self::default()
        }
    }

    /// Parent `i` spawns children `2i` and `2i + 1`, each displaced by an
    /// independent step; the N rightmost of the 2N children survive.
    pub fn step<S: StepSampler>(
        &mut self,
        pop: &mut Population,
        dist: &S,
        rng: &mut Stream,
        mut log: Option<&mut Vec<f64>>,
    ) -> StepExtremes {
        let n = pop.len();
        self.children.clear();
        self.children.reserve(2 * n);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &x in &pop.local {
            for _ in 0..2 {
                let s = dist.draw(rng);
                lo = lo.min(s);
                hi = hi.max(s);
                if let Some(log) = log.as_deref_mut() {
                    log.push(s);
                }
                self.children.push(x + s);
            }
        }
        self.selector
            .retain(&self.children, n, self.selection, &mut self.next);
        std::mem::swap(&mut pop.local, &mut self.next);
        StepExtremes {
            min_step: lo,
            max_step: hi,
        }
    }
}

/// One step of the N-particle chain, returning the new population.
pub fn branch_select_step<S: StepSampler>(pop: &Population, dist: &S, rng: &mut Stream) -> Population {
    let mut next = pop.clone();
    Stepper::new().step(&mut next, dist, rng, None);
    next
}

/// Branch every particle with explicitly given step pairs, then select.
/// `steps[2i]` and `steps[2i + 1]` go to the i-th particle in `pop`'s order.
pub fn branch_select_with_steps(pop: &Population, steps: &[f64]) -> Population {
    assert_eq!(steps.len(), 2 * pop.len(), "need two steps per particle");
    let children: Vec<f64> = pop
        .local
        .iter()
        .enumerate()
        .flat_map(|(i, &x)| [x + steps[2 * i], x + steps[2 * i + 1]])
        .collect();
    let mut out = Vec::with_capacity(pop.len());
    Selector::new().retain(&children, pop.len(), Selection::Rightmost, &mut out);
    Population {
        local: out,
        offset: pop.offset,
    }
}

/// Children of the rank-sorted population `desc` using `noise[2i], noise[2i+1]`
/// for rank i, followed by selection of `desc.len()` particles.
fn rank_aligned_step(desc: &[f64], noise: &[f64], selector: &mut Selector) -> Vec<f64> {
    let children: Vec<f64> = desc
        .iter()
        .enumerate()
        .flat_map(|(i, &x)| [x + noise[2 * i], x + noise[2 * i + 1]])
        .collect();
    let mut out = Vec::with_capacity(desc.len());
    selector.retain(&children, desc.len(), Selection::Rightmost, &mut out);
    out
}

/// Monotone coupling of one step from μ₁ ≺ μ₂: both populations are ranked in
/// decreasing order and rank i of each uses the same pair of steps. The
/// outputs satisfy Z¹ ≺ Z² on every realization.
pub fn coupled_step<S: StepSampler>(
    mu1: &Population,
    mu2: &Population,
    dist: &S,
    rng: &mut Stream,
) -> Result<(Population, Population)> {
    if !stochastic_order(mu1, mu2) {
        return Err(Error::OrderViolated);
    }
    let width = mu1.len().max(mu2.len());
    let mut noise = vec![0.0; 2 * width];
    dist.fill(rng, &mut noise);
    let mut selector = Selector::new();
    let z1 = rank_aligned_step(&mu1.sorted_desc(), &noise, &mut selector);
    let z2 = rank_aligned_step(&mu2.sorted_desc(), &noise, &mut selector);
    Ok((Population::new(z1), Population::new(z2)))
}

/// The i.i.d. array ε_{ℓ,i,j} (time ℓ, rank i, child j) used to build the
/// shifted systems W_{ℓ,k} whose maxima are subadditive.
#[derive(Clone, Copy, Debug)]
pub struct SharedNoise<'a, S> {
    pub dist: &'a S,
    pub n_particles: usize,
    pub seed: u64,
}

impl<S: StepSampler> SharedNoise<'_, S> {
    /// All 2N steps at time `time`, in rank order.
    pub fn at_time(&self, time: u64, out: &mut Vec<f64>) {
        out.resize(2 * self.n_particles, 0.0);
        let mut rng = Stream::keyed(self.seed, time);
        self.dist.fill(&mut rng, out);
    }

    /// W_{start, gens}: N·δ₀ evolved for `gens` steps with noise from times
    /// `start, start + 1, …`.
    pub fn run_from(&self, start: u64, gens: u64) -> Population {
        let mut desc = vec![0.0; self.n_particles];
        let mut noise = Vec::new();
        let mut selector = Selector::new();
        for k in 0..gens {
            self.at_time(start + k, &mut noise);
            desc = rank_aligned_step(&desc, &noise, &mut selector);
            desc.sort_by(|a, b| b.total_cmp(a));
        }
        Population::new(desc)
    }
}
