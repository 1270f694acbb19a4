use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{FiniteSum, Target, TargetCertificate};
use crate::error::{Error, Result};

/// Ridge-penalized logistic regression potential
///
/// `f(θ) = Σᵢ log(1 + exp(−yᵢ xᵢᵀθ)) + (λ/2)‖θ‖²`
///
/// with labels `yᵢ ∈ {−1, +1}`. Constants are computed once at construction:
/// `m = λ`, `M = λ + ¼ λmax(XᵀX)` and `M2 = λmax(XᵀX)·maxᵢ‖xᵢ‖ / (6√3)`, the
/// last one from `|σ''| ≤ 1/(6√3)` for the logistic function `σ`.
#[derive(Debug, Clone)]
pub struct RidgeLogistic {
    features: DMatrix<f64>,
    labels: DVector<f64>,
    lambda: f64,
    certificate: TargetCertificate,
}

fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

impl RidgeLogistic {
    /// `features` holds one observation per row. Labels may be given as
    /// `{−1, +1}` or `{0, 1}`.
    pub fn new(features: DMatrix<f64>, labels: DVector<f64>, lambda: f64) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::Data(format!(
                "{} rows of features but {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        if features.nrows() == 0 || features.ncols() == 0 {
            return Err(Error::Data("empty dataset".into()));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidConstants(format!("ridge penalty must be positive, got {lambda}")));
        }
        let labels = labels
            .iter()
            .map(|&y| match y {
                y if y == 1.0 => Ok(1.0),
                y if y == 0.0 || y == -1.0 => Ok(-1.0),
                other => Err(Error::Data(format!("label {other} is not in {{-1, 0, 1}}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let gram = features.transpose() * &features;
        let top = SymmetricEigen::new(gram).eigenvalues.max().max(0.0);
        let max_row = features
            .row_iter()
            .map(|r| r.norm())
            .fold(0.0_f64, f64::max);
        let m2 = top * max_row / (6.0 * 3f64.sqrt());
        let certificate = TargetCertificate::new(lambda, lambda + 0.25 * top, Some(m2), features.ncols())?;
        Ok(Self {
            features,
            labels: DVector::from_vec(labels),
            lambda,
            certificate,
        })
    }

    /// Reads a CSV file with one observation per row and the label in the
    /// first column. A non-numeric first line is treated as a header.
    pub fn from_csv(path: impl AsRef<Path>, lambda: f64) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Data(format!("{}: {e}", path.as_ref().display())))?;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let parsed: std::result::Result<Vec<f64>, _> =
                line.split(',').map(|c| c.trim().parse::<f64>()).collect();
            match parsed {
                Ok(row) => rows.push(row),
                Err(_) if lineno == 0 => continue,
                Err(e) => return Err(Error::Data(format!("line {}: {e}", lineno + 1))),
            }
        }
        let width = rows.first().map(Vec::len).unwrap_or(0);
        if width < 2 {
            return Err(Error::Data("need a label column and at least one feature".into()));
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != width) {
            return Err(Error::Data(format!("row {} has {} columns, expected {width}", bad + 1, rows[bad].len())));
        }
        let labels = DVector::from_iterator(rows.len(), rows.iter().map(|r| r[0]));
        let features = DMatrix::from_fn(rows.len(), width - 1, |i, j| rows[i][j + 1]);
        Self::new(features, labels, lambda)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn n_observations(&self) -> usize {
        self.features.nrows()
    }

    fn margins(&self, theta: &DVector<f64>) -> DVector<f64> {
        (&self.features * theta).component_mul(&self.labels)
    }
}

impl Target for RidgeLogistic {
    fn certificate(&self) -> &TargetCertificate {
        &self.certificate
    }

    fn value(&self, theta: &DVector<f64>) -> f64 {
        let loss: f64 = self.margins(theta).iter().map(|&z| softplus(-z)).sum();
        loss + 0.5 * self.lambda * theta.norm_squared()
    }

    fn gradient(&self, theta: &DVector<f64>) -> DVector<f64> {
        let weights = self
            .margins(theta)
            .zip_map(&self.labels, |z, y| -y * sigmoid(-z));
        self.features.transpose() * weights + theta * self.lambda
    }

    fn hessian(&self, theta: &DVector<f64>) -> Option<DMatrix<f64>> {
        let z = &self.features * theta;
        let w = z.map(|t| {
            let s = sigmoid(t);
            s * (1.0 - s)
        });
        let mut scaled = self.features.clone();
        for (mut row, wi) in scaled.row_iter_mut().zip(w.iter()) {
            row *= *wi;
        }
        let p = self.features.ncols();
        Some(self.features.transpose() * scaled + DMatrix::identity(p, p) * self.lambda)
    }

    fn lower_bound(&self) -> Option<f64> {
        Some(0.0)
    }
}

impl FiniteSum for RidgeLogistic {
    fn n_terms(&self) -> usize {
        self.features.nrows()
    }

    /// `ℓᵢ(θ) = n·log(1 + exp(−yᵢxᵢᵀθ)) + (λ/2)‖θ‖²`, so that `f = (1/n)Σℓᵢ`.
    fn term_gradient(&self, i: usize, theta: &DVector<f64>) -> DVector<f64> {
        let x = self.features.row(i).transpose();
        let y = self.labels[i];
        let z = y * x.dot(theta);
        let n = self.features.nrows() as f64;
        x * (-n * y * sigmoid(-z)) + theta * self.lambda
    }
}
