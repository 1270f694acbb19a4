use nalgebra::{DMatrix, DVector};

use super::{Target, TargetCertificate};
use crate::error::{check_dim, Error, Result};

/// A potential of the form `f = (1/n) Σᵢ ℓᵢ`, exposing per-term gradients for
/// subsampling.
pub trait FiniteSum: Target {
    fn n_terms(&self) -> usize;

    /// `∇ℓᵢ(θ)` for `i < n_terms()`.
    fn term_gradient(&self, i: usize, theta: &DVector<f64>) -> DVector<f64>;
}

/// `f(θ) = (1/n) Σᵢ ½ Σⱼ aᵢⱼ(θⱼ − cᵢⱼ)²`.
///
/// Each term is a diagonal quadratic with its own curvatures and center, so
/// subsampled gradients carry state-dependent noise whenever the curvatures
/// differ across terms.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSumQuadratic {
    /// `n × p`, row `i` holds the curvatures of term `i`.
    curvatures: DMatrix<f64>,
    /// `n × p`, row `i` holds the center of term `i`.
    centers: DMatrix<f64>,
    mean_curvature: DVector<f64>,
    /// `(1/n) Σᵢ aᵢⱼ cᵢⱼ`
    linear: DVector<f64>,
    minimizer: DVector<f64>,
    certificate: TargetCertificate,
}

impl FiniteSumQuadratic {
    pub fn new(curvatures: DMatrix<f64>, centers: DMatrix<f64>) -> Result<Self> {
        if curvatures.shape() != centers.shape() {
            return Err(Error::Data(format!(
                "curvatures are {:?} but centers are {:?}",
                curvatures.shape(),
                centers.shape()
            )));
        }
        let (n, p) = curvatures.shape();
        if n == 0 || p == 0 {
            return Err(Error::Data("need at least one term and one coordinate".into()));
        }
        if curvatures.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(Error::InvalidConstants("term curvatures must be non-negative".into()));
        }
        let mean_curvature = curvatures.row_mean().transpose();
        if mean_curvature.iter().any(|a| *a <= 0.0) {
            return Err(Error::InvalidConstants("every coordinate needs positive mean curvature".into()));
        }
        let linear = curvatures.component_mul(&centers).row_mean().transpose();
        let minimizer = linear.component_div(&mean_curvature);
        let certificate = TargetCertificate::new(mean_curvature.min(), mean_curvature.max(), Some(0.0), p)?;
        Ok(Self {
            curvatures,
            centers,
            mean_curvature,
            linear,
            minimizer,
            certificate,
        })
    }

    /// Every term shares the curvatures `a`; only the centers differ.
    pub fn shared_curvature(a: DVector<f64>, centers: DMatrix<f64>) -> Result<Self> {
        check_dim(a.len(), centers.ncols())?;
        let curvatures = DMatrix::from_fn(centers.nrows(), a.len(), |_, j| a[j]);
        Self::new(curvatures, centers)
    }

    pub fn curvatures(&self) -> &DMatrix<f64> {
        &self.curvatures
    }

    pub fn centers(&self) -> &DMatrix<f64> {
        &self.centers
    }

    fn term_value(&self, i: usize, theta: &DVector<f64>) -> f64 {
        let mut acc = 0.0;
        for j in 0..theta.len() {
            let d = theta[j] - self.centers[(i, j)];
            acc += self.curvatures[(i, j)] * d * d;
        }
        0.5 * acc
    }
}

impl Target for FiniteSumQuadratic {
    fn certificate(&self) -> &TargetCertificate {
        &self.certificate
    }

    fn value(&self, theta: &DVector<f64>) -> f64 {
        let n = self.curvatures.nrows();
        (0..n).map(|i| self.term_value(i, theta)).sum::<f64>() / n as f64
    }

    fn gradient(&self, theta: &DVector<f64>) -> DVector<f64> {
        theta.component_mul(&self.mean_curvature) - &self.linear
    }

    fn hessian(&self, _theta: &DVector<f64>) -> Option<DMatrix<f64>> {
        Some(DMatrix::from_diagonal(&self.mean_curvature))
    }

    fn hessian_vector_product(&self, _theta: &DVector<f64>, v: &DVector<f64>) -> Option<DVector<f64>> {
        Some(v.component_mul(&self.mean_curvature))
    }

    fn minimizer(&self) -> Option<DVector<f64>> {
        Some(self.minimizer.clone())
    }

    fn lower_bound(&self) -> Option<f64> {
        Some(self.value(&self.minimizer))
    }

    fn as_diagonal_gaussian(&self) -> Option<super::DiagonalGaussian> {
        super::DiagonalGaussian::new(self.mean_curvature.clone(), self.minimizer.clone()).ok()
    }
}

impl FiniteSum for FiniteSumQuadratic {
    fn n_terms(&self) -> usize {
        self.curvatures.nrows()
    }

    fn term_gradient(&self, i: usize, theta: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(theta.len(), |j, _| {
            self.curvatures[(i, j)] * (theta[j] - self.centers[(i, j)])
        })
    }
}
