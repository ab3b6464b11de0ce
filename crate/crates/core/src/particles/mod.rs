//! The N-particle branching-selection chain X_N^n.
//!
//! Each step, every particle spawns two children displaced by independent
//! draws from the step law and only the N rightmost children are kept.

mod kernel;
mod lemma;
mod population;
mod select;
mod trajectory;
mod velocity;

pub use kernel::{
    branch_select_step, branch_select_with_steps, coupled_step, SharedNoise, StepExtremes, Stepper,
};
pub use lemma::{check_good_count, good_count_bound, good_indices};
pub use population::{stochastic_order, Population, RECENTER_EVERY};
pub use select::{kth_largest, select_nth_ascending, select_rightmost, Selection, Selector};
pub use trajectory::{
    check_diameter_bound, diameter_slack, run, window_length, DiameterSlack, GenerationRecord,
    Instrumentation, TrajectoryStats,
};
pub use velocity::{
    bernoulli_stall_rate, estimate_velocity, estimate_velocity_with, exp_moment_check, MomentEstimate,
    StallEstimate, VelocityEstimate,
};
pub(crate) use velocity::{check_velocity_args, replica_increments};
