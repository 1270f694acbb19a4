use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};
use crate::model::Target;

#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub mean: DVector<f64>,
    /// Unbiased per-coordinate variances.
    pub variances: DVector<f64>,
    /// Average of `‖∇f(θ)‖²` over the samples, when a target is given.
    pub grad_sq_norm: Option<f64>,
}

/// Sample mean, unbiased variances and, optionally, the mean squared
/// gradient norm. Needs at least two samples.
pub fn moment_report(samples: &[DVector<f64>], target: Option<&dyn Target>) -> Result<MomentReport> {
    if samples.len() < 2 {
        return Err(Error::InvalidParameter("moment estimates need at least two samples".into()));
    }
    let p = samples[0].len();
    for s in samples {
        check_dim(p, s.len())?;
    }
    let n = samples.len() as f64;
    let mean = samples.iter().fold(DVector::zeros(p), |acc, s| acc + s) / n;
    let variances = samples
        .iter()
        .fold(DVector::zeros(p), |acc: DVector<f64>, s| {
            let d = s - &mean;
            acc + d.component_mul(&d)
        })
        / (n - 1.0);
    let grad_sq_norm = match target {
        Some(t) => {
            check_dim(t.dim(), p)?;
            Some(samples.iter().map(|s| t.gradient(s).norm_squared()).sum::<f64>() / n)
        }
        None => None,
    };
    Ok(MomentReport {
        mean,
        variances,
        grad_sq_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn two_points() {
        let r = moment_report(&[dvector![-1.0], dvector![1.0]], None).unwrap();
        assert_eq!(r.mean[0], 0.0);
        assert_eq!(r.variances[0], 2.0);
    }

    #[test]
    fn constant_samples() {
        let r = moment_report(&vec![dvector![3.0, 1.0]; 5], None).unwrap();
        assert_eq!(r.variances, dvector![0.0, 0.0]);
        assert!(moment_report(&[dvector![1.0]], None).is_err());
    }
}
