//! Inexact gradient oracles.
//!
//! A [`NoiseModel`] corrupts the exact gradient: the sampler observes
//! `Y = ∇f(θ) + ζ`. Each model declares a bias level `δ` and a spread `σ`
//! meant to satisfy
//!
//! - `E‖E(ζ | θ)‖² ≤ δ²p`
//! - `E‖ζ − E(ζ | θ)‖² ≤ σ²p`
//!
//! and [`certify_condition_n`] estimates both quantities by Monte Carlo at
//! fixed probe points.

use std::sync::Arc;

use nalgebra::DVector;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::model::FiniteSum;
use crate::rng::standard_normal;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseLevels {
    pub delta: f64,
    pub sigma: f64,
}

pub trait NoiseModel: Send + Sync {
    /// Declared `(δ, σ)`.
    fn levels(&self) -> NoiseLevels;

    /// Dimension the model is tied to, if any.
    fn dim(&self) -> Option<usize> {
        None
    }

    /// One realization of `ζ` at `theta`.
    fn draw(&self, theta: &DVector<f64>, rng: &mut dyn RngCore) -> DVector<f64>;
}

/// Exact gradients.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroNoise;

impl NoiseModel for ZeroNoise {
    fn levels(&self) -> NoiseLevels {
        NoiseLevels { delta: 0.0, sigma: 0.0 }
    }
    fn draw(&self, theta: &DVector<f64>, _rng: &mut dyn RngCore) -> DVector<f64> {
        DVector::zeros(theta.len())
    }
}

/// `ζ = b + σ·N(0, I)` with a fixed bias vector `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianNoise {
    bias: DVector<f64>,
    sigma: f64,
    delta: f64,
}

impl GaussianNoise {
    /// Declares `δ = ‖b‖/√p`.
    pub fn new(bias: DVector<f64>, sigma: f64) -> Result<Self> {
        let delta = bias.norm() / (bias.len() as f64).sqrt();
        Self::with_delta(bias, sigma, delta)
    }

    /// Declares a looser `δ`; requires `‖b‖ ≤ δ√p`.
    pub fn with_delta(bias: DVector<f64>, sigma: f64, delta: f64) -> Result<Self> {
        if bias.is_empty() {
            return Err(Error::InvalidParameter("bias vector is empty".into()));
        }
        if !(sigma.is_finite() && sigma >= 0.0 && delta.is_finite() && delta >= 0.0) {
            return Err(Error::InvalidParameter(format!("need σ, δ ≥ 0, got σ={sigma}, δ={delta}")));
        }
        let p = bias.len() as f64;
        if bias.norm() > delta * p.sqrt() * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "‖b‖ = {} exceeds δ√p = {}",
                bias.norm(),
                delta * p.sqrt()
            )));
        }
        Ok(Self { bias, sigma, delta })
    }

    /// Constant bias `δ·(1, …, 1)`, so that `‖b‖ = δ√p` exactly.
    pub fn uniform_bias(dim: usize, delta: f64, sigma: f64) -> Result<Self> {
        Self::with_delta(DVector::from_element(dim, delta), sigma, delta)
    }

    pub fn bias(&self) -> &DVector<f64> {
        &self.bias
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

impl NoiseModel for GaussianNoise {
    fn levels(&self) -> NoiseLevels {
        NoiseLevels {
            delta: self.delta,
            sigma: self.sigma,
        }
    }
    fn dim(&self) -> Option<usize> {
        Some(self.bias.len())
    }
    fn draw(&self, theta: &DVector<f64>, rng: &mut dyn RngCore) -> DVector<f64> {
        debug_assert_eq!(theta.len(), self.bias.len());
        if self.sigma == 0.0 {
            return self.bias.clone();
        }
        &self.bias + standard_normal(rng, self.bias.len()) * self.sigma
    }
}

/// Deterministic bias `δ·θ/‖θ‖` (zero at the origin).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDependentBias {
    delta: f64,
}

impl StateDependentBias {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(Error::InvalidParameter(format!("δ must be non-negative, got {delta}")));
        }
        Ok(Self { delta })
    }
}

impl NoiseModel for StateDependentBias {
    fn levels(&self) -> NoiseLevels {
        NoiseLevels {
            delta: self.delta,
            sigma: 0.0,
        }
    }
    fn draw(&self, theta: &DVector<f64>, _rng: &mut dyn RngCore) -> DVector<f64> {
        let n = theta.norm();
        if n == 0.0 {
            DVector::zeros(theta.len())
        } else {
            theta * (self.delta / n)
        }
    }
}

/// Minibatch gradient of a finite sum `f = (1/n)Σℓᵢ`.
///
/// `ζ = (1/s)Σⱼ ∇ℓ_{Nⱼ}(θ) − ∇f(θ)` with `N₁, …, N_s` iid uniform on
/// `{0, …, n−1}` (with replacement), so `δ = 0` and the variance is the
/// per-term population variance divided by `s`. A batch of `s ≥ n` is taken
/// as one full pass, which returns exactly zero.
#[derive(Clone)]
pub struct SubsampledGradient {
    target: Arc<dyn FiniteSum>,
    batch: usize,
    sigma: f64,
}

impl std::fmt::Debug for SubsampledGradient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SubsampledGradient")
            .field("n_terms", &self.target.n_terms())
            .field("batch", &self.batch)
            .field("sigma", &self.sigma)
            .finish()
    }
}

impl SubsampledGradient {
    /// Declares `σ² = max over probes of (population variance)/(s·p)`.
    pub fn new(target: Arc<dyn FiniteSum>, batch: usize, probes: &[DVector<f64>]) -> Result<Self> {
        if batch == 0 {
            return Err(Error::InvalidParameter("batch size must be positive".into()));
        }
        if probes.is_empty() {
            return Err(Error::InvalidParameter("need at least one probe point to declare σ".into()));
        }
        let p = target.dim();
        let mut worst: f64 = 0.0;
        for theta in probes {
            check_dim(p, theta.len())?;
            worst = worst.max(population_variance(target.as_ref(), theta));
        }
        let sigma = if batch >= target.n_terms() {
            0.0
        } else {
            (worst / (batch as f64 * p as f64)).sqrt()
        };
        Ok(Self { target, batch, sigma })
    }

    pub fn batch(&self) -> usize {
        self.batch
    }

    /// `ζ` for an explicit multiset of term indices.
    pub fn correction_for(&self, indices: &[usize], theta: &DVector<f64>) -> DVector<f64> {
        let sum = indices
            .iter()
            .fold(DVector::zeros(theta.len()), |acc, &i| acc + self.target.term_gradient(i, theta));
        sum / indices.len() as f64 - self.target.gradient(theta)
    }
}

/// `(1/n) Σᵢ ‖∇ℓᵢ(θ) − ∇f(θ)‖²`, by enumeration of all terms.
pub fn population_variance(target: &dyn FiniteSum, theta: &DVector<f64>) -> f64 {
    let n = target.n_terms();
    let grads: Vec<_> = (0..n).map(|i| target.term_gradient(i, theta)).collect();
    let mean = grads.iter().fold(DVector::zeros(theta.len()), |acc, g| acc + g) / n as f64;
    grads.iter().map(|g| (g - &mean).norm_squared()).sum::<f64>() / n as f64
}

impl NoiseModel for SubsampledGradient {
    fn levels(&self) -> NoiseLevels {
        NoiseLevels {
            delta: 0.0,
            sigma: self.sigma,
        }
    }
    fn dim(&self) -> Option<usize> {
        Some(self.target.dim())
    }
    fn draw(&self, theta: &DVector<f64>, rng: &mut dyn RngCore) -> DVector<f64> {
        let n = self.target.n_terms();
        if self.batch >= n {
            return DVector::zeros(theta.len());
        }
        let indices: Vec<usize> = (0..self.batch).map(|_| rng.random_range(0..n)).collect();
        self.correction_for(&indices, theta)
    }
}

/// Monte-Carlo estimates of the bias and spread levels of a noise model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionNReport {
    /// `max over probes of ‖mean(ζ)‖/√p`
    pub delta_hat: f64,
    /// `sqrt(max over probes of tr(Cov ζ)/p)`
    pub sigma_hat: f64,
    pub delta_se: f64,
    pub sigma_se: f64,
    pub declared: NoiseLevels,
    /// Both estimates are within three standard errors of the declaration.
    pub consistent: bool,
}

pub fn certify_condition_n(
    model: &dyn NoiseModel,
    probes: &[DVector<f64>],
    draws_per_point: usize,
    seed: u64,
) -> Result<ConditionNReport> {
    if draws_per_point < 100 {
        return Err(Error::InvalidParameter(format!(
            "need at least 100 draws per point, got {draws_per_point}"
        )));
    }
    if probes.is_empty() {
        return Err(Error::InvalidParameter("need at least one probe point".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let n = draws_per_point as f64;
    let (mut delta_hat, mut delta_se) = (0.0_f64, 0.0);
    let (mut var_hat, mut var_se) = (0.0_f64, 0.0);

    for theta in probes {
        if let Some(d) = model.dim() {
            check_dim(d, theta.len())?;
        }
        let p = theta.len() as f64;
        let draws: Vec<_> = (0..draws_per_point).map(|_| model.draw(theta, &mut rng)).collect();
        let mean = draws.iter().fold(DVector::zeros(theta.len()), |acc, z| acc + z) / n;
        let sq: Vec<f64> = draws.iter().map(|z| (z - &mean).norm_squared()).collect();
        let total_var = sq.iter().sum::<f64>() / (n - 1.0);
        let sq_mean = sq.iter().sum::<f64>() / n;
        let sq_var = sq.iter().map(|q| (q - sq_mean).powi(2)).sum::<f64>() / (n - 1.0);

        let d = mean.norm() / p.sqrt();
        if d >= delta_hat {
            delta_hat = d;
            delta_se = (total_var / n).sqrt() / p.sqrt();
        }
        let v = total_var / p;
        if v >= var_hat {
            var_hat = v;
            var_se = (sq_var / n).sqrt() / p;
        }
    }

    let sigma_hat = var_hat.sqrt();
    let sigma_se = if sigma_hat > 0.0 { var_se / (2.0 * sigma_hat) } else { 0.0 };
    let declared = model.levels();
    let consistent = delta_hat <= declared.delta + 3.0 * delta_se + 1e-12
        && sigma_hat <= declared.sigma + 3.0 * sigma_se + 1e-12;
    Ok(ConditionNReport {
        delta_hat,
        sigma_hat,
        delta_se,
        sigma_se,
        declared,
        consistent,
    })
}
