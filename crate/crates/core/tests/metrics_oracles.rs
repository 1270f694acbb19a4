use langevin_kit::metrics::*;
use langevin_kit::model::{DiagonalGaussian, Target};
use langevin_kit::noise::GaussianNoise;
use langevin_kit::rng::standard_normal;
use langevin_kit::samplers::StepSchedule;
use nalgebra::{dvector, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for pos in 0..=rest.len() {
            let mut p = rest.clone();
            p.insert(pos, n - 1);
            out.push(p);
        }
    }
    out
}

#[test]
fn assignment_matches_brute_force() {
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    for n in 1..=6 {
        let perms = permutations(n);
        for _ in 0..40 {
            let cost: Vec<f64> = (0..n * n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let brute = perms
                .iter()
                .map(|p| p.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            let (cols, total) = assignment(n, &cost).unwrap();
            let mut seen = cols.clone();
            seen.sort_unstable();
            assert_eq!(seen, (0..n).collect::<Vec<_>>());
            let direct: f64 = cols.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum();
            assert!((direct - total).abs() < 1e-12);
            assert!((total - brute).abs() < 1e-12, "n={n}: {total} vs {brute}");
        }
    }
}

#[test]
fn one_dimensional_w2_is_the_sorted_coupling() {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    for n in [1usize, 2, 5, 50, 300] {
        let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let mut y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..6.0)).collect();
        let xs: Vec<DVector<f64>> = x.iter().map(|&v| dvector![v]).collect();
        let ys: Vec<DVector<f64>> = y.iter().map(|&v| dvector![v]).collect();
        x.sort_by(f64::total_cmp);
        y.sort_by(f64::total_cmp);
        let want = (x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / n as f64).sqrt();
        let got = empirical_w2(&xs, &ys).unwrap();
        assert!((got - want).abs() < 1e-12 * want.max(1.0), "n={n}");
    }
}

#[test]
fn empirical_w2_three_points_in_the_plane() {
    let x = [dvector![0.0, 0.0], dvector![1.0, 0.0], dvector![0.0, 2.0]];
    let y = [dvector![0.1, 2.0], dvector![1.0, 1.0], dvector![0.0, -0.5]];
    let brute = permutations(3)
        .iter()
        .map(|p| p.iter().enumerate().map(|(i, &j)| (&x[i] - &y[j]).norm_squared()).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    let got = empirical_w2(&x, &y).unwrap();
    assert!((got - (brute / 3.0).sqrt()).abs() < 1e-14);
}

#[test]
fn empirical_rejects_oversized_and_ragged_input() {
    let big = vec![dvector![0.0]; MAX_EMPIRICAL_SAMPLES + 1];
    assert!(empirical_w2(&big, &big).is_err());
    assert!(empirical_w2(&[dvector![0.0]], &[dvector![0.0, 1.0]]).is_err());
    assert!(empirical_w2(&[dvector![0.0]], &[]).is_err());
}

fn law(mean: Vec<f64>, var: Vec<f64>) -> GaussianLaw {
    GaussianLaw::new(DVector::from_vec(mean), DVector::from_vec(var)).unwrap()
}

proptest! {
    #[test]
    fn gaussian_w2_is_a_metric(
        abc in prop::collection::vec((-5.0f64..5.0, 0.0f64..4.0, -5.0f64..5.0, 0.0f64..4.0, -5.0f64..5.0, 0.0f64..4.0), 1..6)
    ) {
        let a = law(abc.iter().map(|t| t.0).collect(), abc.iter().map(|t| t.1).collect());
        let b = law(abc.iter().map(|t| t.2).collect(), abc.iter().map(|t| t.3).collect());
        let c = law(abc.iter().map(|t| t.4).collect(), abc.iter().map(|t| t.5).collect());
        let ab = gaussian_w2(&a, &b).unwrap();
        prop_assert_eq!(gaussian_w2(&a, &a).unwrap(), 0.0);
        prop_assert_eq!(ab, gaussian_w2(&b, &a).unwrap());
        prop_assert!(ab <= gaussian_w2(&a, &c).unwrap() + gaussian_w2(&c, &b).unwrap() + 1e-12);
    }

    #[test]
    fn pushforwards_compose(k1 in 0u64..40, k2 in 0u64..40, a0 in 0.5f64..3.0, a1 in 0.5f64..3.0, frac in 0.05f64..1.0) {
        let target = DiagonalGaussian::new(dvector![a0, a1], dvector![1.0, -1.0]).unwrap();
        let big_m = a0.max(a1);
        let h = frac / big_m;
        let init = law(vec![3.0, 0.0], vec![0.0, 2.0]);
        let sched = StepSchedule::constant(h).unwrap();
        let noise = GaussianNoise::new(dvector![0.1, -0.2], 0.4).unwrap();
        let pairs: [Box<dyn Fn(&GaussianLaw, u64) -> GaussianLaw>; 4] = [
            Box::new(|l, k| lmc_pushforward(&target, l, &sched, k).unwrap()),
            Box::new(|l, k| nlmc_pushforward(&target, l, h, k, &noise).unwrap()),
            Box::new(|l, k| lmco_pushforward(&target, l, h, k).unwrap()),
            Box::new(|l, k| lmco_prime_pushforward(&target, l, h, k).unwrap()),
        ];
        for push in pairs.iter() {
            let direct = push(&init, k1 + k2);
            let split = push(&push(&init, k1), k2);
            prop_assert!(gaussian_w2(&direct, &split).unwrap() < 1e-12);
        }
    }
}

#[test]
fn lmc_pushforward_stationary_law_is_biased() {
    let target = DiagonalGaussian::new(dvector![1.0, 4.0], dvector![0.0, 0.0]).unwrap();
    let h = 0.1;
    let stat = lmc_pushforward(&target, &target_law(&target), &StepSchedule::constant(h).unwrap(), 5000).unwrap();
    for (i, a) in [1.0f64, 4.0].iter().enumerate() {
        let want = 2.0 / (a * (2.0 - h * a));
        assert!((stat.variances[i] - want).abs() < 1e-12);
    }
    assert!(gaussian_w2(&stat, &target_law(&target)).unwrap() > 0.01);
}

#[test]
fn lmco_error_decays_while_lmc_stalls() {
    let target = DiagonalGaussian::new(dvector![1.0, 2.0, 5.0], DVector::zeros(3)).unwrap();
    let pi = target_law(&target);
    let init = GaussianLaw::point_mass(dvector![10.0, -5.0, 2.0]);
    let h = 0.1;
    let sched = StepSchedule::constant(h).unwrap();
    let mut last_lmco = f64::INFINITY;
    for k in [10u64, 100, 400, 1000] {
        let lmco = gaussian_w2(&lmco_pushforward(&target, &init, h, k).unwrap(), &pi).unwrap();
        assert!(lmco < last_lmco);
        last_lmco = lmco;
    }
    assert!(last_lmco < 1e-12);
    let floor = gaussian_w2(&lmc_pushforward(&target, &init, &sched, 1000).unwrap(), &pi).unwrap();
    let later = gaussian_w2(&lmc_pushforward(&target, &init, &sched, 2000).unwrap(), &pi).unwrap();
    assert!(floor > 0.05);
    assert!((floor - later).abs() < 1e-12);
}

#[test]
fn pushforward_rejects_dimension_mismatch_and_non_quadratics() {
    let target = DiagonalGaussian::new(dvector![1.0, 2.0], DVector::zeros(2)).unwrap();
    let init = GaussianLaw::point_mass(dvector![1.0]);
    assert!(lmco_pushforward(&target, &init, 0.1, 3).is_err());
    let logistic = langevin_kit::model::RidgeLogistic::new(
        nalgebra::DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]),
        dvector![1.0, -1.0],
        1.0,
    )
    .unwrap();
    let init = GaussianLaw::point_mass(dvector![0.0, 0.0]);
    assert!(lmco_pushforward(&logistic, &init, 0.1, 3).is_err());
}

#[test]
fn target_draws_have_gradient_moment_below_mp() {
    let curv = dvector![0.5, 1.0, 2.0, 3.0];
    let target = DiagonalGaussian::new(curv.clone(), dvector![1.0, 2.0, 3.0, 4.0]).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let sd = target.variances().map(f64::sqrt);
    let draws: Vec<DVector<f64>> = (0..20_000)
        .map(|_| target.mean() + standard_normal(&mut rng, 4).component_mul(&sd))
        .collect();
    let r = moment_report(&draws, Some(&target as &dyn Target)).unwrap();
    let g = r.grad_sq_norm.unwrap();
    let exact = curv.sum();
    assert!((g - exact).abs() < 0.05 * exact);
    assert!(g <= target.certificate().lipschitz * 4.0);
    for i in 0..4 {
        assert!((r.mean[i] - target.mean()[i]).abs() < 5.0 * (target.variances()[i] / 20_000.0).sqrt());
    }
}

#[test]
fn empirical_w2_of_equal_laws_shrinks_with_n() {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let mut sample = |n: usize| (0..n).map(|_| standard_normal(&mut rng, 2)).collect::<Vec<_>>();
    let small = empirical_w2(&sample(50), &sample(50)).unwrap();
    let large = empirical_w2(&sample(1500), &sample(1500)).unwrap();
    assert!(large < small);
    assert!(large < 0.25);
}
