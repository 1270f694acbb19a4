use nalgebra::DVector;

use super::chain::{ChainState, ChainTrace, RunOptions};
use super::lmc::{check_schedule, continue_lmc};
use super::schedule::StepSchedule;
use crate::error::{check_dim, Error, Result};
use crate::model::MixtureTarget;

/// Mixture LMC: draws `η ~ π₀` once from the chain's mixing stream, then runs
/// varying-step LMC on `f_η` with `K₁` computed from the caller's `w2_0`.
pub fn mlmc_run<X: MixtureTarget + ?Sized>(
    mixture: &X,
    theta0: DVector<f64>,
    iterations: u64,
    w2_0: f64,
    seed: u64,
    options: RunOptions,
) -> Result<(ChainState, ChainTrace, X::Label)> {
    let shared = *mixture.certificate();
    check_dim(shared.dim, theta0.len())?;
    let schedule = StepSchedule::theorem2(shared.strong_convexity, shared.lipschitz, shared.dim, w2_0)?;
    let mut state = ChainState::new(theta0, seed);
    let label = mixture.draw_label(state.rng.mixing());
    let component = mixture.component(&label)?;
    let cert = component.certificate();
    if cert.strong_convexity != shared.strong_convexity || cert.lipschitz != shared.lipschitz || cert.dim != shared.dim {
        return Err(Error::Component(format!(
            "component {label:?} has (m, M, p) = ({}, {}, {}), mixture declares ({}, {}, {})",
            cert.strong_convexity, cert.lipschitz, cert.dim, shared.strong_convexity, shared.lipschitz, shared.dim
        )));
    }
    let mut trace = ChainTrace {
        warnings: check_schedule(&component, &schedule)?,
        ..Default::default()
    };
    continue_lmc(&component, &mut state, &mut trace, &schedule, iterations, options)?;
    Ok((state, trace, label))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GaussianMeanMixture;
    use crate::samplers::lmc::lmc_run;
    use nalgebra::dvector;

    #[test]
    fn seed_fixes_label_and_path() {
        let mix = GaussianMeanMixture::new(
            vec![0.5, 0.5],
            vec![dvector![-3.0, 0.0], dvector![3.0, 1.0]],
            dvector![1.0, 2.0],
        )
        .unwrap();
        let a = mlmc_run(&mix, DVector::zeros(2), 50, 5.0, 11, RunOptions::every(10)).unwrap();
        let b = mlmc_run(&mix, DVector::zeros(2), 50, 5.0, 11, RunOptions::every(10)).unwrap();
        assert_eq!(a.2, b.2);
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn single_component_matches_lmc() {
        let mu = dvector![1.0, -1.0];
        let a = dvector![1.0, 3.0];
        let mix = GaussianMeanMixture::new(vec![1.0], vec![mu.clone()], a.clone()).unwrap();
        let (s, _, label) = mlmc_run(&mix, DVector::zeros(2), 40, 4.0, 3, RunOptions::default()).unwrap();
        assert_eq!(label, 0);
        let target = crate::model::DiagonalGaussian::new(a, mu).unwrap();
        let sched = StepSchedule::theorem2(1.0, 3.0, 2, 4.0).unwrap();
        let (t, _) = lmc_run(&target, DVector::zeros(2), &sched, 40, 3, RunOptions::default()).unwrap();
        assert_eq!(s.theta, t.theta);
    }
}
