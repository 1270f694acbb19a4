//! Langevin chains: LMC with constant or varying steps, noisy-gradient LMC,
//! the second-order LMCO and LMCO' updates, mixture LMC and the `τ`-scaled
//! limits.
//!
//! Every run takes a `u64` seed and is bitwise reproducible for that seed.

mod chain;
mod lmc;
mod mixture;
mod ozaki;
mod schedule;
mod tau;

pub use chain::{ChainState, ChainTrace, HypothesisWarning, RunOptions, TraceRecord};
pub use lmc::{check_schedule, langevin_update, lmc_run, lmc_step, lmc_transition, nlmc_run};
pub use mixture::mlmc_run;
pub use ozaki::{lmco_prime_run, lmco_prime_transition, lmco_run, lmco_transition};
pub use schedule::{compute_k1, StepSchedule};
pub use tau::{gradient_descent_step, tau_scaled_run, TauMode};
