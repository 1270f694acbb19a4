//! Functional calculus on symmetric matrices.
//!
//! Every matrix function goes through one symmetric eigendecomposition
//! `H = U Λ Uᵀ`, so matrices built from the same `H` share eigenvectors and
//! commute exactly. Dense storage only; the second-order samplers are meant
//! for `p` up to a couple of thousand.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{check_dim, Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;
/// Below this `|hλ|` the maps `(1 − e^{−hλ})/λ` switch to a Taylor series.
const SERIES_CUTOFF: f64 = 1e-4;

/// A dense symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    /// Accepts a square matrix symmetric to `1e−12` relative to its largest
    /// entry, and stores its exact symmetrization.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                actual: matrix.ncols(),
            });
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::NotSymmetric(f64::NAN));
        }
        let scale = matrix.amax().max(1.0);
        let asym = (&matrix - matrix.transpose()).amax() / scale;
        if asym > SYMMETRY_TOL {
            return Err(Error::NotSymmetric(asym));
        }
        let sym = (&matrix + matrix.transpose()) * 0.5;
        Ok(Self(sym))
    }

    pub fn from_diagonal(diag: &DVector<f64>) -> Self {
        Self(DMatrix::from_diagonal(diag))
    }

    pub fn identity(p: usize) -> Self {
        Self(DMatrix::identity(p, p))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.0 * v
    }

    pub fn eigen(&self) -> Result<Spectral> {
        let p = self.dim();
        let eig = SymmetricEigen::try_new(self.0.clone(), f64::EPSILON, 100 * p.max(10))
            .ok_or(Error::NotSymmetric(f64::NAN))?;
        Ok(Spectral {
            values: eig.eigenvalues,
            vectors: eig.eigenvectors,
        })
    }
}

/// Eigendecomposition `U Λ Uᵀ` of a [`SymMatrix`].
#[derive(Debug, Clone)]
pub struct Spectral {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl Spectral {
    /// `U φ(Λ) Uᵀ`
    pub fn map<F: Fn(f64) -> f64>(&self, phi: F) -> SymMatrix {
        let scaled = self.values.map(phi);
        let mut left = self.vectors.clone();
        for (mut col, s) in left.column_iter_mut().zip(scaled.iter()) {
            col *= *s;
        }
        let m = left * self.vectors.transpose();
        SymMatrix((&m + m.transpose()) * 0.5)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.values.min()
    }
}

/// `φ(H) = U φ(Λ) Uᵀ`.
pub fn sym_func<F: Fn(f64) -> f64>(h: &SymMatrix, phi: F) -> Result<SymMatrix> {
    Ok(h.eigen()?.map(phi))
}

/// `(1 − e^{−tλ})/λ`, continuous at `λ = 0` where it equals `t`.
pub fn one_minus_exp_over(t: f64, lambda: f64) -> f64 {
    let x = t * lambda;
    if x.abs() < SERIES_CUTOFF {
        // t·(1 − x/2 + x²/6 − x³/24); the next term is below 1e−17 relative.
        t * (1.0 - x / 2.0 * (1.0 - x / 3.0 * (1.0 - x / 4.0)))
    } else {
        -(-x).exp_m1() / lambda
    }
}

/// The three matrices of one LMCO transition, built from one eigendecomposition.
#[derive(Debug, Clone)]
pub struct LmcoMatrices {
    /// `(I − e^{−hH}) H⁻¹`
    pub drift: SymMatrix,
    /// `(I − e^{−2hH}) H⁻¹`
    pub cov: SymMatrix,
    /// Principal square root of `cov`.
    pub cov_sqrt: SymMatrix,
}

/// Step matrices of the Ozaki discretization for Hessian `h_mat` and step `h`.
pub fn lmco_matrices(h_mat: &SymMatrix, h: f64) -> Result<LmcoMatrices> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidParameter(format!("step must be positive, got {h}")));
    }
    let spec = h_mat.eigen()?;
    let lo = spec.min_eigenvalue();
    let scale = spec.values.amax().max(1.0);
    if lo < -1e-12 * scale {
        return Err(Error::NotPositive(lo));
    }
    // Clamp round-off negatives to zero: the maps are continuous there.
    let clamp = |l: f64| l.max(0.0);
    Ok(LmcoMatrices {
        drift: spec.map(|l| one_minus_exp_over(h, clamp(l))),
        cov: spec.map(|l| one_minus_exp_over(2.0 * h, clamp(l))),
        cov_sqrt: spec.map(|l| one_minus_exp_over(2.0 * h, clamp(l)).sqrt()),
    })
}

/// Draws the LMCO' stochastic term without a matrix square root:
/// `(I − ½hH)η + (√3/6) h H η′`.
///
/// For independent standard normal `η, η′` this has covariance
/// `I − hH + ⅓h²H²`. `hvp` computes `H v`; it is called twice.
pub fn lmco_prime_cov_factor_apply<F>(hvp: F, h: f64, eta: &DVector<f64>, eta_prime: &DVector<f64>) -> Result<DVector<f64>>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    check_dim(eta.len(), eta_prime.len())?;
    let h_eta = hvp(eta);
    let h_eta_prime = hvp(eta_prime);
    check_dim(eta.len(), h_eta.len())?;
    check_dim(eta.len(), h_eta_prime.len())?;
    Ok(eta - h_eta * (0.5 * h) + h_eta_prime * (3f64.sqrt() / 6.0 * h))
}
