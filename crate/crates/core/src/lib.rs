//! Langevin Monte Carlo for strongly log-concave targets, with exact
//! evaluators of its Wasserstein-2 guarantees.
//!
//! * [`model`]: potentials `f` with declared constants `(m, M, M2)`.
//! * [`samplers`]: LMC (constant or varying step), noisy-gradient LMC, the
//!   second-order LMCO and LMCO', mixture LMC and the `τ`-scaled limits.
//! * [`noise`]: gradient corruption models and their `(δ, σ)` check.
//! * [`bounds`]: closed-form `W2` upper bounds and the recursions behind them.
//! * [`planner`]: iteration budgets for a target precision `ε`.
//! * [`metrics`]: exact laws of the chains on Gaussian targets and exact `W2`.
//!
//! ```
//! use langevin_kit::bounds::{bound_thm1, BoundQuery};
//! use langevin_kit::model::IsotropicGaussian;
//! use langevin_kit::samplers::{lmc_run, RunOptions, StepSchedule};
//! use nalgebra::DVector;
//!
//! let target = IsotropicGaussian::centered(1.0, 3)?;
//! let (state, _) = lmc_run(&target, DVector::zeros(3), &StepSchedule::constant(0.1)?, 100, 7, RunOptions::default())?;
//! assert_eq!(state.k, 100);
//!
//! let q = BoundQuery::new(1.0, 1.0, 3, 0.1, 100, 3f64.sqrt());
//! assert!(bound_thm1(&q)?.value < 1.0);
//! # Ok::<(), langevin_kit::Error>(())
//! ```

pub mod bounds;
pub mod error;
pub mod format;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod noise;
pub mod planner;
pub mod rng;
pub mod samplers;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/targets.md")]
    mod targets {}
    #[doc = include_str!("../../../book/src/samplers.md")]
    mod samplers {}
    #[doc = include_str!("../../../book/src/noise.md")]
    mod noise {}
    #[doc = include_str!("../../../book/src/guarantees.md")]
    mod guarantees {}
    #[doc = include_str!("../../../book/src/planning.md")]
    mod planning {}
    #[doc = include_str!("../../../book/src/validation.md")]
    mod validation {}
}
