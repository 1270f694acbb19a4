use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::chain::{drive, ChainState, ChainTrace, RunOptions};
use super::lmc::langevin_update;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{lmco_matrices, SymMatrix};
use crate::model::Target;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauMode {
    Lmc,
    Lmco,
}

/// Runs a sampler on `f/τ`.
///
/// * `Lmc`: `θ ← θ − h∇f(θ) + √(2hτ)ξ`, i.e. LMC on `f/τ` with step `hτ`.
///   `h` defaults to `1/M`; at `τ = 0` this is gradient descent.
/// * `Lmco`: LMCO on `f/τ` with step `h` (default `1/M`). At `τ = 0` it is
///   the Newton step `θ ← θ − ∇²f(θ)⁻¹∇f(θ)`.
///
/// For a fixed seed the innovations `ξ` do not depend on `τ`, so runs at
/// different `τ` are coupled.
pub fn tau_scaled_run<T: Target + ?Sized>(
    target: &T,
    tau: f64,
    mode: TauMode,
    theta0: DVector<f64>,
    h: Option<f64>,
    iterations: u64,
    seed: u64,
    options: RunOptions,
) -> Result<(ChainState, ChainTrace)> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::InvalidParameter(format!("tau must be finite and non-negative, got {tau}")));
    }
    check_dim(target.dim(), theta0.len())?;
    let h = h.unwrap_or(1.0 / target.certificate().lipschitz);
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidParameter(format!("step must be positive, got {h}")));
    }
    let mut state = ChainState::new(theta0, seed);
    let mut trace = ChainTrace::default();
    match mode {
        TauMode::Lmc => drive(&mut state, &mut trace, iterations, options, |s, _| {
            let xi = s.rng.innovation(s.dim());
            let grad = target.gradient(&s.theta);
            s.theta = if tau == 0.0 {
                &s.theta - grad * h
            } else {
                // h·τ step on f/τ: the gradient factor is h, the noise √(2hτ).
                &s.theta - grad * h + xi * (2.0 * h * tau).sqrt()
            };
            Ok(h * tau)
        })?,
        TauMode::Lmco => drive(&mut state, &mut trace, iterations, options, |s, _| {
            let xi = s.rng.innovation(s.dim());
            let hess = target.hessian(&s.theta).ok_or(Error::MissingHessian)?;
            let grad = target.gradient(&s.theta);
            if tau == 0.0 {
                let chol = hess.cholesky().ok_or(Error::NotPositive(f64::NAN))?;
                s.theta -= chol.solve(&grad);
            } else {
                let mats = lmco_matrices(&SymMatrix::new(hess / tau)?, h)?;
                s.theta = &s.theta - mats.drift.apply(&(grad / tau)) + mats.cov_sqrt.apply(&xi);
            }
            Ok(h)
        })?,
    }
    Ok((state, trace))
}

/// Gradient descent `θ ← θ − h∇f(θ)`, the `τ = 0` limit of LMC.
pub fn gradient_descent_step<T: Target + ?Sized>(target: &T, theta: &DVector<f64>, h: f64) -> DVector<f64> {
    langevin_update(theta, &target.gradient(theta), h, &DVector::zeros(theta.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DiagonalGaussian;
    use nalgebra::dvector;

    fn target() -> DiagonalGaussian {
        DiagonalGaussian::new(dvector![1.0, 4.0, 2.0], dvector![1.0, -2.0, 0.5]).unwrap()
    }

    #[test]
    fn gradient_descent_contracts() {
        let t = target();
        let theta0 = dvector![5.0, 5.0, 5.0];
        let star = t.mean().clone();
        let gap0 = (&theta0 - &star).norm();
        let (s, trace) = tau_scaled_run(&t, 0.0, TauMode::Lmc, theta0, None, 30, 0, RunOptions::every(1)).unwrap();
        for r in &trace.records {
            assert!((&r.theta - &star).norm() <= (0.75f64).powi(r.k as i32) * gap0 * (1.0 + 1e-12));
        }
        assert_eq!(s.k, 30);
    }

    #[test]
    fn newton_converges_in_one_step() {
        let t = target();
        let (s, _) =
            tau_scaled_run(&t, 0.0, TauMode::Lmco, dvector![9.0, -9.0, 3.0], None, 1, 0, RunOptions::default()).unwrap();
        assert!((s.theta - t.mean()).amax() < 1e-12);
    }

    #[test]
    fn small_tau_tracks_gradient_descent() {
        let t = target();
        let run = |tau| tau_scaled_run(&t, tau, TauMode::Lmc, dvector![3.0, 3.0, 3.0], None, 20, 4, RunOptions::default()).unwrap().0.theta;
        let gd = run(0.0);
        let gaps: Vec<f64> = [1.0, 0.01].iter().map(|&tau| (run(tau) - &gd).norm()).collect();
        // Linear in the noise, so the gap scales exactly like √τ.
        assert!((gaps[0] / gaps[1] - 10.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_negative_tau() {
        assert!(tau_scaled_run(&target(), -1.0, TauMode::Lmc, DVector::zeros(3), None, 1, 0, RunOptions::default()).is_err());
    }
}
