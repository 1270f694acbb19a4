#![allow(dead_code)]

use langevin_kit::bounds::{BoundKind, Thm5Constants};
use langevin_kit::samplers::TauMode;
use langevin_kit_cli::config::*;
use langevin_kit_cli::ExperimentConfig;
use proptest::prelude::*;

fn real() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6f64..1e6, 1e-300f64..1e-3, Just(0.0), any::<f64>().prop_filter("finite", |x| x.is_finite())]
}

fn reals(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(real(), n)
}

fn model() -> impl Strategy<Value = ModelSpec> {
    (1usize..5).prop_flat_map(|p| {
        prop_oneof![
            (real(), reals(p)).prop_map(|(m, mean)| ModelSpec::IsotropicGaussian { m, mean }),
            (reals(p), reals(p)).prop_map(|(curvatures, mean)| ModelSpec::DiagonalGaussian { curvatures, mean }),
            ("[a-z]{1,8}\\.csv", real()).prop_map(|(d, lambda)| ModelSpec::RidgeLogistic { data: d.into(), lambda }),
            (prop::collection::vec(reals(p), 1..4), prop::collection::vec(reals(p), 1..4))
                .prop_map(|(curvatures, centers)| ModelSpec::FiniteSumQuadratic { curvatures, centers }),
            (reals(2), prop::collection::vec(reals(p), 2), reals(p)).prop_map(|(weights, means, curvatures)| {
                ModelSpec::GaussianMeanMixture { weights, means, curvatures }
            }),
        ]
    })
}

fn constants() -> impl Strategy<Value = Option<DeclaredConstants>> {
    prop::option::of((real(), real(), prop::option::of(real())).prop_map(|(m, big_m, m2)| DeclaredConstants { m, big_m, m2 }))
}

fn noise() -> impl Strategy<Value = NoiseSpec> {
    prop_oneof![
        Just(NoiseSpec::Zero),
        (reals(3), real()).prop_map(|(bias, sigma)| NoiseSpec::Gaussian { bias, sigma }),
        (real(), real()).prop_map(|(delta, sigma)| NoiseSpec::UniformBias { delta, sigma }),
        real().prop_map(|delta| NoiseSpec::StateDependentBias { delta }),
        (1usize..100).prop_map(|batch| NoiseSpec::Subsampled { batch }),
    ]
}

fn method() -> impl Strategy<Value = MethodSpec> {
    let schedule = prop_oneof![
        real().prop_map(|h| ScheduleSpec::Constant { h }),
        any::<u64>().prop_map(|k1| ScheduleSpec::Varying { k1 }),
        prop::option::of(real()).prop_map(|w2_0| ScheduleSpec::Theorem2 { w2_0 }),
    ];
    prop_oneof![
        schedule.prop_map(|schedule| MethodSpec::Lmc { schedule }),
        (real(), noise()).prop_map(|(h, noise)| MethodSpec::Nlmc { h, noise }),
        real().prop_map(|h| MethodSpec::Lmco { h }),
        real().prop_map(|h| MethodSpec::LmcoPrime { h }),
        real().prop_map(|w2_0| MethodSpec::Mlmc { w2_0 }),
        (real(), prop::bool::ANY, prop::option::of(real())).prop_map(|(tau, lmco, h)| MethodSpec::TauScaled {
            tau,
            mode: if lmco { TauMode::Lmco } else { TauMode::Lmc },
            h,
        }),
    ]
}

fn kind() -> impl Strategy<Value = BoundKind> {
    prop::sample::select(BoundKind::ALL.to_vec())
}

fn plain_constants() -> impl Strategy<Value = Option<Constants>> {
    prop::option::of(
        (real(), real(), prop::option::of(real()), 1usize..10_000).prop_map(|(m, big_m, m2, p)| Constants { m, big_m, m2, p }),
    )
}

pub fn config() -> impl Strategy<Value = ExperimentConfig> {
    let target = prop::option::of((model(), constants()).prop_map(|(model, constants)| TargetSpec { model, constants }));
    let sampler = prop::option::of((method(), any::<u64>(), any::<u64>(), reals(3), 1u64..100).prop_map(
        |(method, iterations, seed, theta0, stride)| SamplerSpec { method, iterations, seed, theta0, stride },
    ));
    let bound = prop::option::of(
        (
            kind(),
            plain_constants(),
            prop::option::of(real()),
            any::<u64>(),
            (real(), real(), real()),
            prop::bool::ANY,
            prop::option::of(any::<u64>()),
            prop::option::of(real()),
        )
            .prop_map(|(kind, constants, h, iterations, (w2_0, delta, sigma), proof, k1, w_high)| BoundSpec {
                kind,
                constants,
                h,
                iterations,
                w2_0,
                delta,
                sigma,
                thm5_constants: if proof { Thm5Constants::Proof } else { Thm5Constants::Statement },
                k1,
                w_high,
            }),
    );
    let plan = prop::option::of(
        (prop::collection::vec(kind(), 0..4), real(), plain_constants(), real(), real(), real()).prop_map(
            |(kinds, epsilon, constants, w2_0, delta, sigma)| PlanSpec { kinds, epsilon, constants, w2_0, delta, sigma },
        ),
    );
    let figure1 = prop::option::of((real(), real(), reals(3), prop::collection::vec(1usize..5000, 0..5)).prop_map(
        |(m, big_m, epsilons, p_grid)| Figure1Spec { m, big_m, epsilons, p_grid },
    ));
    let validate = prop::option::of(
        (prop::collection::vec(any::<u64>(), 0..5), 0usize..5000).prop_map(|(checkpoints, chains)| ValidateSpec { checkpoints, chains }),
    );
    let output = ("[a-z/]{1,12}", "[a-z_]{1,8}\\.csv").prop_map(|(dir, trace)| OutputSpec {
        dir: dir.into(),
        trace,
        ..OutputSpec::default()
    });
    (target, sampler, bound, plan, figure1, validate, output).prop_map(
        |(target, sampler, bound, plan, figure1, validate, output)| ExperimentConfig {
            target,
            sampler,
            bound,
            plan,
            figure1,
            validate,
            output,
        },
    )
}

