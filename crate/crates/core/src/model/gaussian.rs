use nalgebra::{DMatrix, DVector};

use super::{Target, TargetCertificate};
use crate::error::{check_dim, Error, Result};

/// `f(θ) = (m/2)‖θ − μ‖²`, i.e. `π = N(μ, I/m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotropicGaussian {
    mean: DVector<f64>,
    certificate: TargetCertificate,
}

impl IsotropicGaussian {
    pub fn new(m: f64, mean: DVector<f64>) -> Result<Self> {
        let certificate = TargetCertificate::new(m, m, Some(0.0), mean.len())?;
        Ok(Self { mean, certificate })
    }

    pub fn centered(m: f64, dim: usize) -> Result<Self> {
        Self::new(m, DVector::zeros(dim))
    }

    pub fn curvature(&self) -> f64 {
        self.certificate.strong_convexity
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn to_diagonal(&self) -> DiagonalGaussian {
        DiagonalGaussian {
            curvatures: DVector::from_element(self.mean.len(), self.curvature()),
            mean: self.mean.clone(),
            certificate: self.certificate,
        }
    }
}

impl Target for IsotropicGaussian {
    fn certificate(&self) -> &TargetCertificate {
        &self.certificate
    }
    fn value(&self, theta: &DVector<f64>) -> f64 {
        0.5 * self.curvature() * (theta - &self.mean).norm_squared()
    }
    fn gradient(&self, theta: &DVector<f64>) -> DVector<f64> {
        (theta - &self.mean) * self.curvature()
    }
    fn hessian(&self, _theta: &DVector<f64>) -> Option<DMatrix<f64>> {
        let p = self.mean.len();
        Some(DMatrix::identity(p, p) * self.curvature())
    }
    fn hessian_vector_product(&self, _theta: &DVector<f64>, v: &DVector<f64>) -> Option<DVector<f64>> {
        Some(v * self.curvature())
    }
    fn minimizer(&self) -> Option<DVector<f64>> {
        Some(self.mean.clone())
    }
    fn lower_bound(&self) -> Option<f64> {
        Some(0.0)
    }
    fn as_diagonal_gaussian(&self) -> Option<DiagonalGaussian> {
        Some(self.to_diagonal())
    }
}

/// `f(θ) = ½ Σ aᵢ(θᵢ − μᵢ)²`, i.e. `π = N(μ, diag(1/a))`.
///
/// The certificate is `m = min aᵢ`, `M = max aᵢ`, `M2 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalGaussian {
    curvatures: DVector<f64>,
    mean: DVector<f64>,
    certificate: TargetCertificate,
}

impl DiagonalGaussian {
    pub fn new(curvatures: DVector<f64>, mean: DVector<f64>) -> Result<Self> {
        check_dim(curvatures.len(), mean.len())?;
        if curvatures.is_empty() {
            return Err(Error::InvalidConstants("dimension must be at least 1".into()));
        }
        if curvatures.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(Error::InvalidConstants("curvatures must be positive and finite".into()));
        }
        let certificate =
            TargetCertificate::new(curvatures.min(), curvatures.max(), Some(0.0), curvatures.len())?;
        Ok(Self {
            curvatures,
            mean,
            certificate,
        })
    }

    pub fn curvatures(&self) -> &DVector<f64> {
        &self.curvatures
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    /// Per-coordinate variances `1/aᵢ` of the target law.
    pub fn variances(&self) -> DVector<f64> {
        self.curvatures.map(|a| 1.0 / a)
    }
}

impl Target for DiagonalGaussian {
    fn certificate(&self) -> &TargetCertificate {
        &self.certificate
    }
    fn value(&self, theta: &DVector<f64>) -> f64 {
        let d = theta - &self.mean;
        0.5 * d.component_mul(&d).dot(&self.curvatures)
    }
    fn gradient(&self, theta: &DVector<f64>) -> DVector<f64> {
        (theta - &self.mean).component_mul(&self.curvatures)
    }
    fn hessian(&self, _theta: &DVector<f64>) -> Option<DMatrix<f64>> {
        Some(DMatrix::from_diagonal(&self.curvatures))
    }
    fn hessian_vector_product(&self, _theta: &DVector<f64>, v: &DVector<f64>) -> Option<DVector<f64>> {
        Some(v.component_mul(&self.curvatures))
    }
    fn minimizer(&self) -> Option<DVector<f64>> {
        Some(self.mean.clone())
    }
    fn lower_bound(&self) -> Option<f64> {
        Some(0.0)
    }
    fn as_diagonal_gaussian(&self) -> Option<DiagonalGaussian> {
        Some(self.clone())
    }
}
