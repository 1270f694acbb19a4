use nalgebra::DVector;

use super::chain::{drive, ChainState, ChainTrace, HypothesisWarning, RunOptions};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{lmco_matrices, lmco_prime_cov_factor_apply, SymMatrix};
use crate::model::Target;

fn positive_step(h: f64) -> Result<()> {
    if h.is_finite() && h > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("step must be positive, got {h}")))
    }
}

/// One LMCO transition `θ − M_k ∇f(θ) + Σ_k^{1/2} ξ` with `H_k = ∇²f(θ)`.
pub fn lmco_transition<T: Target + ?Sized>(target: &T, theta: &DVector<f64>, h: f64, xi: &DVector<f64>) -> Result<DVector<f64>> {
    check_dim(target.dim(), theta.len())?;
    check_dim(theta.len(), xi.len())?;
    let hess = target.hessian(theta).ok_or(Error::MissingHessian)?;
    let mats = lmco_matrices(&SymMatrix::new(hess)?, h)?;
    let grad = target.gradient(theta);
    Ok(theta - mats.drift.apply(&grad) + mats.cov_sqrt.apply(xi))
}

/// Runs `iterations` LMCO steps of size `h`. Warns when `h > m/M²`.
pub fn lmco_run<T: Target + ?Sized>(
    target: &T,
    theta0: DVector<f64>,
    h: f64,
    iterations: u64,
    seed: u64,
    options: RunOptions,
) -> Result<(ChainState, ChainTrace)> {
    check_dim(target.dim(), theta0.len())?;
    positive_step(h)?;
    if target.hessian(&theta0).is_none() {
        return Err(Error::MissingHessian);
    }
    let cert = target.certificate();
    let mut trace = ChainTrace {
        warnings: HypothesisWarning::check("h <= m/M^2", h, cert.strong_convexity / cert.lipschitz.powi(2))
            .into_iter()
            .collect(),
        ..Default::default()
    };
    let mut state = ChainState::new(theta0, seed);
    drive(&mut state, &mut trace, iterations, options, |s, _| {
        let xi = s.rng.innovation(s.dim());
        s.theta = lmco_transition(target, &s.theta, h, &xi)?;
        Ok(h)
    })?;
    Ok((state, trace))
}

/// One LMCO' transition
/// `θ − h(I − ½hH)∇f(θ) + √(2h)[(I − ½hH)η + (√3/6)hHη′]`, using three
/// Hessian-vector products at `θ` and no matrix function.
pub fn lmco_prime_transition<T: Target + ?Sized>(
    target: &T,
    theta: &DVector<f64>,
    h: f64,
    eta: &DVector<f64>,
    eta_prime: &DVector<f64>,
) -> Result<DVector<f64>> {
    check_dim(target.dim(), theta.len())?;
    check_dim(theta.len(), eta.len())?;
    let hvp = |v: &DVector<f64>| target.hessian_vector_product(theta, v);
    let grad = target.gradient(theta);
    let h_grad = hvp(&grad).ok_or(Error::MissingHessian)?;
    check_dim(theta.len(), h_grad.len())?;
    let drift = (&grad - h_grad * (0.5 * h)) * h;
    let noise = lmco_prime_cov_factor_apply(|v| hvp(v).unwrap_or_else(|| DVector::zeros(v.len())), h, eta, eta_prime)?;
    Ok(theta - drift + noise * (2.0 * h).sqrt())
}

/// Runs `iterations` LMCO' steps of size `h`. Warns when `h > 3m/(4M²)`.
pub fn lmco_prime_run<T: Target + ?Sized>(
    target: &T,
    theta0: DVector<f64>,
    h: f64,
    iterations: u64,
    seed: u64,
    options: RunOptions,
) -> Result<(ChainState, ChainTrace)> {
    check_dim(target.dim(), theta0.len())?;
    positive_step(h)?;
    let probe = DVector::zeros(theta0.len());
    if target.hessian_vector_product(&theta0, &probe).is_none() {
        return Err(Error::MissingHessian);
    }
    let cert = target.certificate();
    let limit = 0.75 * cert.strong_convexity / cert.lipschitz.powi(2);
    let mut trace = ChainTrace {
        warnings: HypothesisWarning::check("h <= 3m/(4M^2)", h, limit).into_iter().collect(),
        ..Default::default()
    };
    let mut state = ChainState::new(theta0, seed);
    drive(&mut state, &mut trace, iterations, options, |s, _| {
        let p = s.dim();
        let eta = s.rng.innovation(p);
        let eta_prime = s.rng.innovation(p);
        s.theta = lmco_prime_transition(target, &s.theta, h, &eta, &eta_prime)?;
        Ok(h)
    })?;
    Ok((state, trace))
}
