#![allow(dead_code)]

use nalgebra::DVector;
use rayon::prelude::*;

use langevin_kit::rng::chain_seed;

/// Runs `n` independent chains with seeds derived from `base` and collects
/// their outputs.
pub fn many<F>(n: usize, base: u64, run: F) -> Vec<DVector<f64>>
where
    F: Fn(u64) -> DVector<f64> + Sync,
{
    (0..n as u64).into_par_iter().map(|i| run(chain_seed(base, i))).collect()
}

/// Sample mean and standard error of one coordinate.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Sample variance and its standard error, from the fourth central moment.
pub fn var_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    (var, ((m4 - var * var) / n).sqrt())
}

/// Sample covariance of two coordinates and its standard error.
pub fn cov_se(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let prods: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    let c = prods.iter().sum::<f64>() / (n - 1.0);
    let v = prods.iter().map(|q| (q - c).powi(2)).sum::<f64>() / (n - 1.0);
    (c, (v / n).sqrt())
}

pub fn coord(samples: &[DVector<f64>], j: usize) -> Vec<f64> {
    samples.iter().map(|s| s[j]).collect()
}
