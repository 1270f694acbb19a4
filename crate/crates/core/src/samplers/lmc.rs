use nalgebra::DVector;

use super::chain::{drive, ChainState, ChainTrace, HypothesisWarning, RunOptions};
use super::schedule::StepSchedule;
use crate::error::{check_dim, Error, Result};
use crate::model::Target;
use crate::noise::NoiseModel;

/// `θ − h·grad + √(2h)·ξ`
pub fn langevin_update(theta: &DVector<f64>, grad: &DVector<f64>, h: f64, xi: &DVector<f64>) -> DVector<f64> {
    theta - grad * h + xi * (2.0 * h).sqrt()
}

/// One LMC transition with a given innovation `ξ`.
pub fn lmc_transition<T: Target + ?Sized>(target: &T, theta: &DVector<f64>, h: f64, xi: &DVector<f64>) -> Result<DVector<f64>> {
    check_dim(target.dim(), theta.len())?;
    check_dim(theta.len(), xi.len())?;
    let grad = target.gradient(theta);
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite { iteration: 0 });
    }
    Ok(langevin_update(theta, &grad, h, xi))
}

/// Advances `state` by one LMC step of size `h`, drawing `ξ` from the chain's
/// innovation stream.
pub fn lmc_step<T: Target + ?Sized>(state: &mut ChainState, target: &T, h: f64) -> Result<()> {
    if !(h >= 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("step must be non-negative, got {h}")));
    }
    let xi = state.rng.innovation(state.dim());
    state.theta = lmc_transition(target, &state.theta, h, &xi).map_err(|e| match e {
        Error::NonFinite { .. } => Error::NonFinite { iteration: state.k + 1 },
        other => other,
    })?;
    state.k += 1;
    Ok(())
}

/// Checks a schedule against the step-size hypotheses of the first-order
/// guarantees: a constant `h ≥ 2/M` is refused, `h > 2/(m+M)` is a warning.
pub fn check_schedule<T: Target + ?Sized>(target: &T, schedule: &StepSchedule) -> Result<Vec<HypothesisWarning>> {
    let cert = target.certificate();
    let (m, big_m) = (cert.strong_convexity, cert.lipschitz);
    match *schedule {
        StepSchedule::Constant { h } => {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::InvalidParameter(format!("step must be positive, got {h}")));
            }
            if h >= 2.0 / big_m {
                return Err(Error::StepHypothesis(format!("constant step {h} is not below 2/M = {}", 2.0 / big_m)));
            }
            Ok(HypothesisWarning::check("h <= 2/(m+M)", h, 2.0 / (m + big_m))
                .into_iter()
                .collect())
        }
        StepSchedule::Varying { .. } => {
            let h0 = schedule.step(0);
            if h0 >= 2.0 / big_m {
                return Err(Error::StepHypothesis(format!(
                    "schedule starts at {h0}, not below 2/M = {}",
                    2.0 / big_m
                )));
            }
            Ok(HypothesisWarning::check("h <= 2/(m+M)", h0, 2.0 / (m + big_m))
                .into_iter()
                .collect())
        }
    }
}

/// Runs `iterations` LMC steps from `theta0` with step sizes from `schedule`.
pub fn lmc_run<T: Target + ?Sized>(
    target: &T,
    theta0: DVector<f64>,
    schedule: &StepSchedule,
    iterations: u64,
    seed: u64,
    options: RunOptions,
) -> Result<(ChainState, ChainTrace)> {
    check_dim(target.dim(), theta0.len())?;
    let mut trace = ChainTrace {
        warnings: check_schedule(target, schedule)?,
        ..Default::default()
    };
    let mut state = ChainState::new(theta0, seed);
    continue_lmc(target, &mut state, &mut trace, schedule, iterations, options)?;
    Ok((state, trace))
}

pub(crate) fn continue_lmc<T: Target + ?Sized>(
    target: &T,
    state: &mut ChainState,
    trace: &mut ChainTrace,
    schedule: &StepSchedule,
    iterations: u64,
    options: RunOptions,
) -> Result<()> {
    drive(state, trace, iterations, options, |s, _| {
        let h = schedule.step(s.k);
        let xi = s.rng.innovation(s.dim());
        let grad = target.gradient(&s.theta);
        s.theta = langevin_update(&s.theta, &grad, h, &xi);
        Ok(h)
    })
}

/// Noisy LMC: each step uses `Y = ∇f(θ) + ζ` with `ζ` from `noise`.
///
/// `ζ` comes from the chain's noise stream and `ξ` from its innovation
/// stream, so `ξ_{k+1}` is independent of `ζ_0, …, ζ_k` and a zero-noise run
/// reproduces [`lmc_run`] bit for bit.
pub fn nlmc_run<T: Target + ?Sized>(
    target: &T,
    theta0: DVector<f64>,
    h: f64,
    iterations: u64,
    noise: &dyn NoiseModel,
    seed: u64,
    options: RunOptions,
) -> Result<(ChainState, ChainTrace)> {
    check_dim(target.dim(), theta0.len())?;
    if let Some(d) = noise.dim() {
        check_dim(target.dim(), d)?;
    }
    let schedule = StepSchedule::constant(h)?;
    let mut warnings = check_schedule(target, &schedule)?;
    // The noisy guarantee only covers h ≤ 2/(m+M); check_schedule already
    // warns there.
    warnings.dedup();
    let mut trace = ChainTrace {
        warnings,
        ..Default::default()
    };
    let mut state = ChainState::new(theta0, seed);
    drive(&mut state, &mut trace, iterations, options, |s, tr| {
        let zeta = noise.draw(&s.theta, s.rng.noise());
        tr.noise_draws += 1;
        tr.noise_sq_norm_sum += zeta.norm_squared();
        let xi = s.rng.innovation(s.dim());
        let y = target.gradient(&s.theta) + zeta;
        s.theta = langevin_update(&s.theta, &y, h, &xi);
        Ok(h)
    })?;
    Ok((state, trace))
}
