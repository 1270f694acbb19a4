//! Targets `π ∝ exp(−f)` with declared smoothness and convexity constants.
//!
//! A [`Target`] bundles a value oracle, a gradient oracle and optionally a
//! Hessian oracle together with a [`TargetCertificate`] carrying the constants
//! `(m, M, M2)` that every guarantee in [`crate::bounds`] consumes. The
//! constants are declared by whoever builds the target; [`certify`] only
//! spot-checks them on probe points.

mod finite_sum;
mod gaussian;
mod logistic;
mod mixture;

pub use finite_sum::{FiniteSum, FiniteSumQuadratic};
pub use gaussian::{DiagonalGaussian, IsotropicGaussian};
pub use logistic::RidgeLogistic;
pub use mixture::{GaussianMeanMixture, MixtureTarget};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Constants of a strongly log-concave target.
///
/// `m` bounds the curvature of `f` from below, `M` is the Lipschitz constant of
/// the gradient and `M2`, when present, the Lipschitz constant of the Hessian
/// in spectral norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetCertificate {
    #[serde(rename = "m")]
    pub strong_convexity: f64,
    #[serde(rename = "M")]
    pub lipschitz: f64,
    #[serde(rename = "M2", default, skip_serializing_if = "Option::is_none")]
    pub hessian_lipschitz: Option<f64>,
    #[serde(rename = "p")]
    pub dim: usize,
}

impl TargetCertificate {
    pub fn new(m: f64, big_m: f64, m2: Option<f64>, dim: usize) -> Result<Self> {
        let cert = Self {
            strong_convexity: m,
            lipschitz: big_m,
            hessian_lipschitz: m2,
            dim,
        };
        cert.validate()?;
        Ok(cert)
    }

    pub fn validate(&self) -> Result<()> {
        let (m, big_m) = (self.strong_convexity, self.lipschitz);
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::InvalidConstants(format!("m must be positive, got {m}")));
        }
        if !(big_m.is_finite() && big_m >= m) {
            return Err(Error::InvalidConstants(format!(
                "M must be finite and at least m = {m}, got {big_m}"
            )));
        }
        if let Some(m2) = self.hessian_lipschitz {
            if !(m2.is_finite() && m2 >= 0.0) {
                return Err(Error::InvalidConstants(format!("M2 must be non-negative, got {m2}")));
            }
        }
        if self.dim == 0 {
            return Err(Error::InvalidConstants("dimension must be at least 1".into()));
        }
        Ok(())
    }

    /// Condition number `M/m`.
    pub fn condition_number(&self) -> f64 {
        self.lipschitz / self.strong_convexity
    }
}

/// A potential `f` with its oracles.
///
/// Implementations are immutable after construction and can be shared across
/// threads running independent chains.
pub trait Target: Send + Sync {
    fn certificate(&self) -> &TargetCertificate;

    fn dim(&self) -> usize {
        self.certificate().dim
    }

    fn value(&self, theta: &DVector<f64>) -> f64;

    fn gradient(&self, theta: &DVector<f64>) -> DVector<f64>;

    fn hessian(&self, _theta: &DVector<f64>) -> Option<DMatrix<f64>> {
        None
    }

    fn hessian_vector_product(&self, theta: &DVector<f64>, v: &DVector<f64>) -> Option<DVector<f64>> {
        self.hessian(theta).map(|h| h * v)
    }

    /// The minimizer `θ*`, when it is known in closed form.
    fn minimizer(&self) -> Option<DVector<f64>> {
        None
    }

    /// A certified lower bound on `f`.
    fn lower_bound(&self) -> Option<f64> {
        None
    }

    /// The target as a diagonal quadratic, for the closed-form oracles in
    /// [`crate::metrics`].
    fn as_diagonal_gaussian(&self) -> Option<DiagonalGaussian> {
        None
    }
}

impl<T: Target + ?Sized> Target for &T {
    fn certificate(&self) -> &TargetCertificate {
        (**self).certificate()
    }
    fn value(&self, theta: &DVector<f64>) -> f64 {
        (**self).value(theta)
    }
    fn gradient(&self, theta: &DVector<f64>) -> DVector<f64> {
        (**self).gradient(theta)
    }
    fn hessian(&self, theta: &DVector<f64>) -> Option<DMatrix<f64>> {
        (**self).hessian(theta)
    }
    fn hessian_vector_product(&self, theta: &DVector<f64>, v: &DVector<f64>) -> Option<DVector<f64>> {
        (**self).hessian_vector_product(theta, v)
    }
    fn minimizer(&self) -> Option<DVector<f64>> {
        (**self).minimizer()
    }
    fn lower_bound(&self) -> Option<f64> {
        (**self).lower_bound()
    }
    fn as_diagonal_gaussian(&self) -> Option<DiagonalGaussian> {
        (**self).as_diagonal_gaussian()
    }
}

impl<T: Target + ?Sized> Target for Box<T> {
    fn certificate(&self) -> &TargetCertificate {
        (**self).certificate()
    }
    fn value(&self, theta: &DVector<f64>) -> f64 {
        (**self).value(theta)
    }
    fn gradient(&self, theta: &DVector<f64>) -> DVector<f64> {
        (**self).gradient(theta)
    }
    fn hessian(&self, theta: &DVector<f64>) -> Option<DMatrix<f64>> {
        (**self).hessian(theta)
    }
    fn hessian_vector_product(&self, theta: &DVector<f64>, v: &DVector<f64>) -> Option<DVector<f64>> {
        (**self).hessian_vector_product(theta, v)
    }
    fn minimizer(&self) -> Option<DVector<f64>> {
        (**self).minimizer()
    }
    fn lower_bound(&self) -> Option<f64> {
        (**self).lower_bound()
    }
    fn as_diagonal_gaussian(&self) -> Option<DiagonalGaussian> {
        (**self).as_diagonal_gaussian()
    }
}

/// A target whose declared constants replace the ones it was built with.
///
/// Used to declare tighter or looser constants than the built-in defaults,
/// e.g. to see [`certify`] catch a wrong declaration.
#[derive(Debug, Clone)]
pub struct Declared<T> {
    inner: T,
    certificate: TargetCertificate,
}

impl<T: Target> Declared<T> {
    pub fn new(inner: T, certificate: TargetCertificate) -> Result<Self> {
        certificate.validate()?;
        check_dim(inner.dim(), certificate.dim)?;
        Ok(Self { inner, certificate })
    }

    pub fn inner(&self) -> &T {
        &self.inner
    }
}

impl<T: Target> Target for Declared<T> {
    fn certificate(&self) -> &TargetCertificate {
        &self.certificate
    }
    fn value(&self, theta: &DVector<f64>) -> f64 {
        self.inner.value(theta)
    }
    fn gradient(&self, theta: &DVector<f64>) -> DVector<f64> {
        self.inner.gradient(theta)
    }
    fn hessian(&self, theta: &DVector<f64>) -> Option<DMatrix<f64>> {
        self.inner.hessian(theta)
    }
    fn hessian_vector_product(&self, theta: &DVector<f64>, v: &DVector<f64>) -> Option<DVector<f64>> {
        self.inner.hessian_vector_product(theta, v)
    }
    fn minimizer(&self) -> Option<DVector<f64>> {
        self.inner.minimizer()
    }
    fn lower_bound(&self) -> Option<f64> {
        self.inner.lower_bound()
    }
    fn as_diagonal_gaussian(&self) -> Option<DiagonalGaussian> {
        self.inner.as_diagonal_gaussian()
    }
}

/// Value and gradient of `f` at `theta`.
pub fn evaluate<T: Target + ?Sized>(target: &T, theta: &DVector<f64>) -> Result<(f64, DVector<f64>)> {
    check_dim(target.dim(), theta.len())?;
    Ok((target.value(theta), target.gradient(theta)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// `f(θ) − f(θ′) − ∇f(θ′)ᵀ(θ − θ′) < (m/2)‖θ − θ′‖²`
    StrongConvexity,
    /// `‖∇f(θ) − ∇f(θ′)‖ > M‖θ − θ′‖`
    GradientLipschitz,
    /// Hessian eigenvalue outside `[m, M]`.
    HessianSpectrum,
    /// `‖∇²f(θ) − ∇²f(θ′)‖ > M2‖θ − θ′‖`
    HessianLipschitz,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertViolation {
    pub pair: usize,
    pub kind: ViolationKind,
    /// The constant the pair actually requires (curvature ratio for the
    /// lower bound, Lipschitz ratio for the upper ones).
    pub observed: f64,
    pub declared: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertReport {
    pub pairs_checked: usize,
    pub violations: Vec<CertViolation>,
}

impl CertReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Spot-checks the declared constants of `target` on `pairs`.
///
/// Each pair is checked in both orders against the strong-convexity
/// inequality with constant `m − tolerance` and the gradient-Lipschitz
/// inequality with constant `M + tolerance`. When the target has a Hessian
/// oracle its spectrum is checked at both points, and when `M2` is declared
/// the Hessian difference is checked too. Violations are collected, not
/// raised.
pub fn certify<T: Target + ?Sized>(
    target: &T,
    pairs: &[(DVector<f64>, DVector<f64>)],
    tolerance: f64,
) -> Result<CertReport> {
    if pairs.is_empty() {
        return Err(Error::InvalidParameter("certify needs at least one probe pair".into()));
    }
    let cert = *target.certificate();
    let (m, big_m) = (cert.strong_convexity, cert.lipschitz);
    let mut violations = Vec::new();

    for (idx, (a, b)) in pairs.iter().enumerate() {
        check_dim(cert.dim, a.len())?;
        check_dim(cert.dim, b.len())?;
        let diff = a - b;
        let dist2 = diff.norm_squared();
        if dist2 == 0.0 {
            continue;
        }
        let (fa, ga) = (target.value(a), target.gradient(a));
        let (fb, gb) = (target.value(b), target.gradient(b));
        // Rounding in f differences, not a modelling slack.
        let roundoff = 1e-12 * (1.0 + fa.abs() + fb.abs());

        for gap in [fa - fb - gb.dot(&diff), fb - fa + ga.dot(&diff)] {
            if gap + roundoff < 0.5 * (m - tolerance) * dist2 {
                violations.push(CertViolation {
                    pair: idx,
                    kind: ViolationKind::StrongConvexity,
                    observed: 2.0 * gap / dist2,
                    declared: m,
                });
                break;
            }
        }

        let grad_ratio = (&ga - &gb).norm() / dist2.sqrt();
        if grad_ratio > big_m + tolerance {
            violations.push(CertViolation {
                pair: idx,
                kind: ViolationKind::GradientLipschitz,
                observed: grad_ratio,
                declared: big_m,
            });
        }

        if let (Some(ha), Some(hb)) = (target.hessian(a), target.hessian(b)) {
            for h in [&ha, &hb] {
                let eig = SymmetricEigen::new(h.clone()).eigenvalues;
                let lo = eig.min();
                let hi = eig.max();
                if lo < m - tolerance || hi > big_m + tolerance {
                    violations.push(CertViolation {
                        pair: idx,
                        kind: ViolationKind::HessianSpectrum,
                        observed: if lo < m - tolerance { lo } else { hi },
                        declared: if lo < m - tolerance { m } else { big_m },
                    });
                    break;
                }
            }
            if let Some(m2) = cert.hessian_lipschitz {
                let d = &ha - &hb;
                let spectral = SymmetricEigen::new(d).eigenvalues.amax();
                let ratio = spectral / dist2.sqrt();
                if ratio > m2 + tolerance {
                    violations.push(CertViolation {
                        pair: idx,
                        kind: ViolationKind::HessianLipschitz,
                        observed: ratio,
                        declared: m2,
                    });
                }
            }
        }
    }

    Ok(CertReport {
        pairs_checked: pairs.len(),
        violations,
    })
}

/// Computable upper bound on `W2(δ_{θ0}, π)`.
///
/// Two routes are available: with a known minimizer,
/// `W2² ≤ ‖θ0 − θ*‖² + p/m`; with a known lower bound `f_low ≤ f`,
/// `W2² ≤ (2(f(θ0) − f_low) + p)/m`. The smaller applicable value is returned.
pub fn initial_w2_bound<T: Target + ?Sized>(target: &T, theta0: &DVector<f64>) -> Result<f64> {
    check_dim(target.dim(), theta0.len())?;
    let cert = target.certificate();
    let m = cert.strong_convexity;
    let p = cert.dim as f64;

    let via_minimizer = target
        .minimizer()
        .map(|star| ((theta0 - star).norm_squared() + p / m).sqrt());
    let via_lower_bound = target
        .lower_bound()
        .map(|low| ((2.0 * (target.value(theta0) - low) + p) / m).sqrt());

    match (via_minimizer, via_lower_bound) {
        (Some(a), Some(b)) => Ok(a.min(b)),
        (Some(a), None) | (None, Some(a)) => Ok(a),
        (None, None) => Err(Error::NoInitialBound),
    }
}
