use std::sync::Arc;

use langevin_kit::model::{FiniteSumQuadratic, RidgeLogistic};
use langevin_kit::noise::*;
use langevin_kit::rng::standard_normal;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn probes(p: usize, seed: u64) -> Vec<DVector<f64>> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..4).map(|_| standard_normal(&mut rng, p)).collect()
}

#[test]
fn builtin_models_meet_their_declarations() {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let quad = Arc::new(
        FiniteSumQuadratic::new(
            DMatrix::from_fn(8, 3, |i, j| 1.0 + 0.1 * (i + j) as f64),
            DMatrix::from_fn(8, 3, |_, _| standard_normal(&mut rng, 1)[0]),
        )
        .unwrap(),
    );
    let x = DMatrix::from_fn(12, 3, |_, _| standard_normal(&mut rng, 1)[0]);
    let y = DVector::from_fn(12, |i, _| if i % 3 == 0 { 1.0 } else { -1.0 });
    let logistic = Arc::new(RidgeLogistic::new(x, y, 0.3).unwrap());
    let pts = probes(3, 2);
    let models: Vec<Box<dyn NoiseModel>> = vec![
        Box::new(ZeroNoise),
        Box::new(GaussianNoise::new(DVector::from_vec(vec![0.1, -0.2, 0.0]), 0.7).unwrap()),
        Box::new(GaussianNoise::uniform_bias(3, 0.3, 1.0).unwrap()),
        Box::new(StateDependentBias::new(0.4).unwrap()),
        Box::new(SubsampledGradient::new(quad, 2, &pts).unwrap()),
        Box::new(SubsampledGradient::new(logistic, 3, &pts).unwrap()),
    ];
    for (i, model) in models.iter().enumerate() {
        let r = certify_condition_n(model.as_ref(), &pts, 4000, 10 + i as u64).unwrap();
        assert!(r.consistent, "model {i}: {r:?}");
    }
}

#[test]
fn gaussian_noise_is_recovered() {
    let (delta, p) = (0.25, 5);
    let model = GaussianNoise::uniform_bias(p, delta, 1.0).unwrap();
    let r = certify_condition_n(&model, &probes(p, 3)[..1], 20_000, 4).unwrap();
    assert!((r.delta_hat - delta).abs() < 3.0 * r.delta_se);
    assert!((r.sigma_hat - 1.0).abs() < 3.0 * r.sigma_se);
}

#[test]
fn subsampled_sigma_matches_enumeration() {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let quad = Arc::new(
        FiniteSumQuadratic::shared_curvature(
            DVector::from_vec(vec![1.0, 2.0]),
            DMatrix::from_fn(10, 2, |_, _| standard_normal(&mut rng, 1)[0]),
        )
        .unwrap(),
    );
    let theta = DVector::from_vec(vec![0.3, -0.4]);
    let exact = population_variance(quad.as_ref(), &theta);
    let model = SubsampledGradient::new(quad, 1, std::slice::from_ref(&theta)).unwrap();
    let r = certify_condition_n(&model, &[theta], 40_000, 6).unwrap();
    let sigma2 = r.sigma_hat.powi(2);
    let se2 = 2.0 * r.sigma_hat * r.sigma_se;
    assert!((sigma2 - exact / 2.0).abs() < 3.0 * se2, "{sigma2} vs {}", exact / 2.0);
    assert!(r.delta_hat < 3.0 * r.delta_se + 1e-12);
}
