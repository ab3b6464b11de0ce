//! Simulation and verification toolkit for branching-selection particle
//! systems on the real line.
//!
//! * [`stepdist`]: step laws, log-MGF calculus and exponential tilting.
//! * [`theory`]: Assumptions (A1)–(A3) and the constants t*, v(p), χ(p).
//! * [`particles`]: the N-particle chain, couplings, velocity estimation.
//! * [`killedbrw`]: branching random walks killed below a line, survival
//!   probabilities and Galton–Watson helpers.
//! * [`experiments`]: sweeps over N, ε and m, and scaling-law fits.
//! * [`cli`]: the `frontlab` command-line front end and `verify` suites.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod io;
pub mod killedbrw;
pub mod parallel;
pub mod particles;
pub mod rng;
pub mod stepdist;
pub mod theory;

pub use error::{Error, Result};
pub use rng::Stream;
pub use stepdist::{StepDistribution, StepSampler, TiltedDistribution};
pub use theory::TheoryConstants;
