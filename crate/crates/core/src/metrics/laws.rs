use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};
use crate::model::{DiagonalGaussian, Target};
use crate::noise::GaussianNoise;
use crate::samplers::StepSchedule;

/// `N(mean, diag(variances))`. Zero variances are allowed and mark a
/// degenerate (e.g. point-mass) coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianLaw {
    pub mean: DVector<f64>,
    pub variances: DVector<f64>,
}

impl GaussianLaw {
    pub fn new(mean: DVector<f64>, variances: DVector<f64>) -> Result<Self> {
        check_dim(mean.len(), variances.len())?;
        if variances.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidParameter("variances must be finite and non-negative".into()));
        }
        Ok(Self { mean, variances })
    }

    pub fn point_mass(theta: DVector<f64>) -> Self {
        let p = theta.len();
        Self {
            mean: theta,
            variances: DVector::zeros(p),
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// True when some coordinate has zero variance.
    pub fn is_degenerate(&self) -> bool {
        self.variances.iter().any(|&v| v == 0.0)
    }
}

/// The law `π = N(μ, diag(1/a))` of a diagonal Gaussian target.
pub fn target_law(target: &DiagonalGaussian) -> GaussianLaw {
    GaussianLaw {
        mean: target.mean().clone(),
        variances: target.variances(),
    }
}

fn quadratic<T: Target + ?Sized>(target: &T, initial: &GaussianLaw) -> Result<DiagonalGaussian> {
    let q = target
        .as_diagonal_gaussian()
        .ok_or_else(|| Error::InvalidParameter("closed-form laws need a diagonal quadratic target".into()))?;
    check_dim(q.mean().len(), initial.dim())?;
    Ok(q)
}

/// Iterates the per-coordinate affine map
/// `m ← c·m + s` (about the target mean), `v ← c²v + n` for `steps` steps,
/// where `(c, s, n)` may depend on the step index and the curvature.
fn push<F>(q: &DiagonalGaussian, initial: &GaussianLaw, steps: u64, coeffs: F) -> GaussianLaw
where
    F: Fn(u64, f64) -> (f64, f64, f64),
{
    let a = q.curvatures();
    let mut offset = &initial.mean - q.mean();
    let mut var = initial.variances.clone();
    for k in 0..steps {
        for i in 0..a.len() {
            let (c, shift, add) = coeffs(k, a[i]);
            offset[i] = c * offset[i] + shift;
            var[i] = c * c * var[i] + add;
        }
    }
    GaussianLaw {
        mean: q.mean() + offset,
        variances: var,
    }
}

/// Exact law after `iterations` LMC steps: per coordinate
/// `m ← (1 − h_k a)m`, `v ← (1 − h_k a)²v + 2h_k`.
pub fn lmc_pushforward<T: Target + ?Sized>(
    target: &T,
    initial: &GaussianLaw,
    schedule: &StepSchedule,
    iterations: u64,
) -> Result<GaussianLaw> {
    let q = quadratic(target, initial)?;
    Ok(push(&q, initial, iterations, |k, a| {
        let h = schedule.step(k);
        (1.0 - h * a, 0.0, 2.0 * h)
    }))
}

/// Exact law of noisy LMC with [`GaussianNoise`] `ζ = b + σ·N(0, I)`:
/// `m ← (1 − ha)m − hb`, `v ← (1 − ha)²v + h²σ² + 2h`.
pub fn nlmc_pushforward<T: Target + ?Sized>(
    target: &T,
    initial: &GaussianLaw,
    h: f64,
    iterations: u64,
    noise: &GaussianNoise,
) -> Result<GaussianLaw> {
    let q = quadratic(target, initial)?;
    check_dim(q.mean().len(), noise.bias().len())?;
    let a = q.curvatures();
    let b = noise.bias();
    let s2 = noise.sigma().powi(2);
    let mut offset = &initial.mean - q.mean();
    let mut var = initial.variances.clone();
    for _ in 0..iterations {
        for i in 0..a.len() {
            let c = 1.0 - h * a[i];
            offset[i] = c * offset[i] - h * b[i];
            var[i] = c * c * var[i] + h * h * s2 + 2.0 * h;
        }
    }
    Ok(GaussianLaw {
        mean: q.mean() + offset,
        variances: var,
    })
}

/// Exact law after `iterations` LMCO steps, i.e. the Ornstein-Uhlenbeck
/// transition: `m ← e^{−ha}m`, `v − 1/a ← e^{−2ha}(v − 1/a)`. Tracking the
/// variance as a deviation from `1/a` keeps a stationary start exactly
/// stationary.
pub fn lmco_pushforward<T: Target + ?Sized>(target: &T, initial: &GaussianLaw, h: f64, iterations: u64) -> Result<GaussianLaw> {
    let q = quadratic(target, initial)?;
    let a = q.curvatures();
    let stationary = q.variances();
    let mut offset = &initial.mean - q.mean();
    let mut dev = &initial.variances - &stationary;
    for _ in 0..iterations {
        for i in 0..a.len() {
            let c = (-h * a[i]).exp();
            offset[i] *= c;
            dev[i] *= c * c;
        }
    }
    Ok(GaussianLaw {
        mean: q.mean() + offset,
        variances: stationary + dev,
    })
}

/// Exact law after `iterations` LMCO' steps:
/// `m ← (1 − ha + h²a²/2)m`, `v ← (1 − ha + h²a²/2)²v + 2h(1 − ha + h²a²/3)`.
pub fn lmco_prime_pushforward<T: Target + ?Sized>(
    target: &T,
    initial: &GaussianLaw,
    h: f64,
    iterations: u64,
) -> Result<GaussianLaw> {
    let q = quadratic(target, initial)?;
    Ok(push(&q, initial, iterations, |_, a| {
        let ha = h * a;
        (1.0 - ha + 0.5 * ha * ha, 0.0, 2.0 * h * (1.0 - ha + ha * ha / 3.0))
    }))
}

/// `W2` between diagonal Gaussians:
/// `√(‖μA − μB‖² + Σᵢ(√vAᵢ − √vBᵢ)²)`.
pub fn gaussian_w2(a: &GaussianLaw, b: &GaussianLaw) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    let terms: Vec<f64> = (0..a.dim())
        .map(|i| a.mean[i] - b.mean[i])
        .chain((0..a.dim()).map(|i| a.variances[i].sqrt() - b.variances[i].sqrt()))
        .collect();
    // Scaled so that tiny distances do not underflow when squared.
    let scale = terms.iter().fold(0.0f64, |s, t| s.max(t.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return Ok(scale);
    }
    Ok(scale * terms.iter().map(|t| (t / scale).powi(2)).sum::<f64>().sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::IsotropicGaussian;
    use nalgebra::dvector;

    #[test]
    fn tiny_distances_do_not_underflow() {
        let a = GaussianLaw::point_mass(dvector![1e-200, 0.0]);
        let b = GaussianLaw::point_mass(dvector![0.0, 0.0]);
        assert_eq!(gaussian_w2(&a, &b).unwrap(), 1e-200);
    }

    #[test]
    fn zero_steps_is_the_start() {
        let t = IsotropicGaussian::centered(1.0, 2).unwrap();
        let start = GaussianLaw::point_mass(dvector![1.0, 2.0]);
        let law = lmc_pushforward(&t, &start, &StepSchedule::Constant { h: 0.1 }, 0).unwrap();
        assert_eq!(law, start);
        assert!(law.is_degenerate());
    }

    #[test]
    fn lmc_stationary_variance() {
        let (m, h) = (2.0, 0.1);
        let t = IsotropicGaussian::centered(m, 1).unwrap();
        let law = lmc_pushforward(&t, &GaussianLaw::point_mass(dvector![0.0]), &StepSchedule::Constant { h }, 5000)
            .unwrap();
        assert!((law.variances[0] - 2.0 / (2.0 * m - m * m * h)).abs() < 1e-12);
        let fine = lmc_pushforward(&t, &GaussianLaw::point_mass(dvector![0.0]), &StepSchedule::Constant { h: 1e-5 }, 3_000_000)
            .unwrap();
        assert!((fine.variances[0] - 1.0 / m).abs() < 1e-4);
    }

    #[test]
    fn lmco_one_step_and_limit() {
        let (a, h) = (3.0, 0.2);
        let t = IsotropicGaussian::centered(a, 1).unwrap();
        let start = GaussianLaw::point_mass(dvector![1.0]);
        let one = lmco_pushforward(&t, &start, h, 1).unwrap();
        assert!((one.variances[0] - (1.0 - (-2.0 * h * a).exp()) / a).abs() < 1e-15);
        let mut prev = 0.0;
        for k in 1..50 {
            let v = lmco_pushforward(&t, &start, h, k).unwrap().variances[0];
            assert!(v >= prev && v <= (1.0 / a) * (1.0 + 1e-14));
            prev = v;
        }
        let ou = lmco_pushforward(&t, &start, 1e-4, 10_000).unwrap();
        assert!((ou.variances[0] - (1.0 - (-2.0 * a).exp()) / a).abs() < 1e-12);
    }

    #[test]
    fn w2_examples() {
        let a = GaussianLaw::new(dvector![0.0], dvector![1.0]).unwrap();
        let b = GaussianLaw::new(dvector![0.0], dvector![4.0]).unwrap();
        assert_eq!(gaussian_w2(&a, &a).unwrap(), 0.0);
        assert_eq!(gaussian_w2(&a, &b).unwrap(), 1.0);
        let x = GaussianLaw::point_mass(dvector![0.0, 3.0]);
        let y = GaussianLaw::point_mass(dvector![4.0, 0.0]);
        assert_eq!(gaussian_w2(&x, &y).unwrap(), 5.0);
    }

    #[test]
    fn nlmc_bias_shifts_the_mean() {
        let (m, h, b) = (2.0, 0.05, 0.3);
        let t = IsotropicGaussian::centered(m, 1).unwrap();
        let noise = GaussianNoise::new(dvector![b], 0.0).unwrap();
        let law = nlmc_pushforward(&t, &GaussianLaw::point_mass(dvector![0.0]), h, 10_000, &noise).unwrap();
        assert!((law.mean[0] + b / m).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_quadratic() {
        let x = nalgebra::DMatrix::from_row_slice(2, 1, &[1.0, -1.0]);
        let t = crate::model::RidgeLogistic::new(x, dvector![1.0, 0.0], 1.0).unwrap();
        let start = GaussianLaw::point_mass(dvector![0.0]);
        assert!(lmco_pushforward(&t, &start, 0.1, 1).is_err());
    }
}
