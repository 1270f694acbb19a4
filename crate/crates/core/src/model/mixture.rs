use nalgebra::DVector;
use rand::Rng;

use super::{DiagonalGaussian, Target, TargetCertificate};
use crate::error::{Error, Result};

/// `π(θ) = ∫ π₁(θ | η) π₀(dη)` where every component `π₁(·|η) ∝ exp(−f_η)`
/// shares the same constants `(m, M)`.
pub trait MixtureTarget: Send + Sync {
    /// Mixing variable `η`.
    type Label: Clone + std::fmt::Debug;

    /// The constants every component must satisfy.
    fn certificate(&self) -> &TargetCertificate;

    /// Draws `η ~ π₀`.
    fn draw_label<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Label;

    /// Builds the component potential `f_η`.
    fn component(&self, label: &Self::Label) -> Result<Box<dyn Target>>;
}

/// Finite mixture of diagonal Gaussians sharing their curvatures:
/// `π = Σⱼ wⱼ N(μⱼ, diag(1/a))`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMeanMixture {
    weights: Vec<f64>,
    means: Vec<DVector<f64>>,
    curvatures: DVector<f64>,
    certificate: TargetCertificate,
}

impl GaussianMeanMixture {
    pub fn new(weights: Vec<f64>, means: Vec<DVector<f64>>, curvatures: DVector<f64>) -> Result<Self> {
        if weights.is_empty() || weights.len() != means.len() {
            return Err(Error::InvalidParameter(format!(
                "{} weights for {} means",
                weights.len(),
                means.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidParameter("mixture weights must be non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidParameter("mixture weights sum to zero".into()));
        }
        // Validates curvatures and the dimension of every mean.
        for mu in &means {
            DiagonalGaussian::new(curvatures.clone(), mu.clone())?;
        }
        let certificate = TargetCertificate::new(curvatures.min(), curvatures.max(), Some(0.0), curvatures.len())?;
        Ok(Self {
            weights: weights.iter().map(|w| w / total).collect(),
            means,
            curvatures,
            certificate,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn means(&self) -> &[DVector<f64>] {
        &self.means
    }

    pub fn curvatures(&self) -> &DVector<f64> {
        &self.curvatures
    }

    /// Mixture mean `Σ wⱼ μⱼ`.
    pub fn mean(&self) -> DVector<f64> {
        self.weights
            .iter()
            .zip(&self.means)
            .fold(DVector::zeros(self.curvatures.len()), |acc, (w, mu)| acc + mu * *w)
    }

    /// Per-coordinate mixture variance `1/aᵢ + Σ wⱼ μⱼᵢ² − (Σ wⱼ μⱼᵢ)²`.
    pub fn variances(&self) -> DVector<f64> {
        let mean = self.mean();
        let second = self
            .weights
            .iter()
            .zip(&self.means)
            .fold(DVector::zeros(mean.len()), |acc, (w, mu)| acc + mu.component_mul(mu) * *w);
        self.curvatures.map(|a| 1.0 / a) + second - mean.component_mul(&mean)
    }
}

impl MixtureTarget for GaussianMeanMixture {
    type Label = usize;

    fn certificate(&self) -> &TargetCertificate {
        &self.certificate
    }

    fn draw_label<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (j, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return j;
            }
        }
        self.weights.len() - 1
    }

    fn component(&self, label: &usize) -> Result<Box<dyn Target>> {
        let mu = self
            .means
            .get(*label)
            .ok_or_else(|| Error::Component(format!("no component {label}")))?;
        Ok(Box::new(DiagonalGaussian::new(self.curvatures.clone(), mu.clone())?))
    }
}
