//! The subcommands. Each `cmd_*` returns its output in memory; [`write_outputs`]
//! puts it on disk.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use langevin_kit::bounds::{
    bound_dm, bound_prop_b, bound_thm1, bound_thm2, bound_thm3, bound_thm4, bound_thm5, BoundKind, BoundQuery,
    BoundValue, HypothesisFlag, SecondOrderVariant, Thm5Constants,
};
use langevin_kit::format::sig17;
use langevin_kit::metrics::{
    empirical_w2, gaussian_w2, lmc_pushforward, lmco_prime_pushforward, lmco_pushforward, nlmc_pushforward,
    target_law, GaussianLaw, MAX_EMPIRICAL_SAMPLES,
};
use langevin_kit::model::Target;
use langevin_kit::planner::{figure1_summary, figure1_table, min_iterations, Figure1Row, Figure1Summary, PlanParams, PlanResult};
use langevin_kit::rng::{chain_seed, standard_normal};
use langevin_kit::samplers::{
    compute_k1, lmc_run, lmco_prime_run, lmco_run, mlmc_run, nlmc_run, tau_scaled_run, ChainState, ChainTrace,
    HypothesisWarning, RunOptions,
};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{BuiltTarget, Constants, ExperimentConfig, MethodSpec, SamplerSpec, ScheduleSpec};
use crate::error::{CliError, CliResult};

fn resolve_constants(explicit: Option<Constants>, cfg: &ExperimentConfig) -> CliResult<Constants> {
    if let Some(c) = explicit {
        return Ok(c);
    }
    if cfg.target.is_none() {
        return Err(CliError::Config("give `constants` or a `target`".into()));
    }
    let cert = *cfg.target()?.target.certificate();
    Ok(Constants {
        m: cert.strong_convexity,
        big_m: cert.lipschitz,
        m2: cert.hessian_lipschitz,
        p: cert.dim,
    })
}

fn need<T>(value: Option<T>, what: &str, kind: BoundKind) -> CliResult<T> {
    value.ok_or_else(|| CliError::Config(format!("`{what}` is required for {kind}")))
}

/// Evaluates the configured bound.
pub fn cmd_bound(cfg: &ExperimentConfig) -> CliResult<BoundValue> {
    let spec = cfg
        .bound
        .as_ref()
        .ok_or_else(|| CliError::Config("`bound` section missing".into()))?;
    let c = resolve_constants(spec.constants, cfg)?;
    let kind = spec.kind;
    let query = |h: f64| {
        let q = BoundQuery::new(c.m, c.big_m, c.p, h, spec.iterations, spec.w2_0).with_noise(spec.delta, spec.sigma);
        match c.m2 {
            Some(m2) => q.with_m2(m2),
            None => q,
        }
    };
    let value = match kind {
        BoundKind::Thm1 => bound_thm1(&query(need(spec.h, "h", kind)?))?,
        BoundKind::Thm3 => bound_thm3(&query(need(spec.h, "h", kind)?))?,
        BoundKind::Thm4 => bound_thm4(&query(need(spec.h, "h", kind)?))?,
        BoundKind::Dm => bound_dm(&query(need(spec.h, "h", kind)?))?,
        BoundKind::Thm5Lmco => bound_thm5(&query(need(spec.h, "h", kind)?), SecondOrderVariant::Lmco, spec.thm5_constants)?,
        BoundKind::Thm5LmcoPrime => {
            bound_thm5(&query(need(spec.h, "h", kind)?), SecondOrderVariant::LmcoPrime, spec.thm5_constants)?
        }
        BoundKind::Thm2 => {
            let k1 = match spec.k1 {
                Some(k1) => k1,
                None => compute_k1(c.m, c.big_m, c.p, spec.w2_0)?,
            };
            bound_thm2(c.m, c.big_m, c.p, spec.iterations, k1)?
        }
        BoundKind::PropB => {
            let k = u32::try_from(spec.iterations)
                .map_err(|_| CliError::Config(format!("{} iterations is too many for prop_b", spec.iterations)))?;
            bound_prop_b(
                c.m,
                c.big_m,
                need(c.m2, "M2", kind)?,
                c.p,
                need(spec.h, "h", kind)?,
                k,
                need(spec.w_high, "w_high", kind)?,
            )?
        }
    };
    Ok(value)
}

/// Smallest iteration counts reaching `epsilon`, one per requested bound.
pub fn cmd_plan(cfg: &ExperimentConfig) -> CliResult<Vec<PlanResult>> {
    let spec = cfg
        .plan
        .as_ref()
        .ok_or_else(|| CliError::Config("`plan` section missing".into()))?;
    let c = resolve_constants(spec.constants, cfg)?;
    let mut params = PlanParams::new(c.m, c.big_m, c.p, spec.w2_0);
    params.m2 = c.m2;
    params.delta = spec.delta;
    params.sigma = spec.sigma;
    spec.kinds
        .iter()
        .map(|&kind| min_iterations(kind, spec.epsilon, &params).map_err(CliError::from))
        .collect()
}

/// Final iterate and run metadata written next to the trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalState {
    pub k: u64,
    pub seed: u64,
    pub theta: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<usize>,
    pub noise_draws: u64,
    pub mean_noise_sq_norm: f64,
    pub hypotheses: Vec<HypothesisFlag>,
    pub warnings: Vec<HypothesisWarning>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleOutput {
    pub trace_csv: String,
    pub final_state: FinalState,
}

/// Runs one chain of the configured sampler.
pub fn run_sampler(
    built: &BuiltTarget,
    sampler: &SamplerSpec,
    seed: u64,
    options: RunOptions,
) -> CliResult<(ChainState, ChainTrace, Option<usize>)> {
    let target: &dyn Target = built.target.as_ref();
    let theta0 = DVector::from_column_slice(&sampler.theta0);
    let k = sampler.iterations;
    let (state, trace) = match &sampler.method {
        MethodSpec::Lmc { schedule } => {
            let schedule = schedule.build(target, &theta0)?;
            lmc_run(target, theta0, &schedule, k, seed, options)?
        }
        MethodSpec::Nlmc { h, noise } => {
            let noise = noise.build(built, &theta0)?;
            nlmc_run(target, theta0, *h, k, noise.as_ref(), seed, options)?
        }
        MethodSpec::Lmco { h } => lmco_run(target, theta0, *h, k, seed, options)?,
        MethodSpec::LmcoPrime { h } => lmco_prime_run(target, theta0, *h, k, seed, options)?,
        MethodSpec::TauScaled { tau, mode, h } => tau_scaled_run(target, *tau, *mode, theta0, *h, k, seed, options)?,
        MethodSpec::Mlmc { w2_0 } => {
            let mix = built
                .mixture
                .as_ref()
                .ok_or_else(|| CliError::Config("mlmc needs a gaussian_mean_mixture target".into()))?;
            let (state, trace, label) = mlmc_run(mix.as_ref(), theta0, k, *w2_0, seed, options)?;
            return Ok((state, trace, Some(label)));
        }
    };
    Ok((state, trace, None))
}

/// Trace CSV and final state of one chain.
pub fn cmd_sample(cfg: &ExperimentConfig) -> CliResult<SampleOutput> {
    let sampler = cfg.sampler()?;
    let hypotheses = cfg.hypotheses()?;
    let built = cfg.target()?;
    let (state, trace, label) = run_sampler(&built, sampler, sampler.seed, RunOptions::every(sampler.stride))?;
    Ok(SampleOutput {
        trace_csv: trace.to_csv_string(),
        final_state: FinalState {
            k: state.k,
            seed: sampler.seed,
            theta: state.theta.iter().copied().collect(),
            label,
            noise_draws: trace.noise_draws,
            mean_noise_sq_norm: trace.mean_noise_sq_norm(),
            hypotheses,
            warnings: trace.warnings,
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure1Output {
    pub rows: Vec<Figure1Row>,
    pub summary: Vec<Figure1Summary>,
    pub csv: String,
}

/// CSV header of the iteration-count comparison.
pub const FIGURE1_HEADER: &str = "p,epsilon,logK_thm1,logK_thm2,logK_dm";

/// Iteration counts of the three guarantees over the `(ε, p)` grid.
pub fn cmd_figure1(cfg: &ExperimentConfig) -> CliResult<Figure1Output> {
    let spec = cfg.figure1.clone().unwrap_or_default();
    let rows = figure1_table(spec.m, spec.big_m, &spec.epsilons, &spec.p_grid)?;
    let mut csv = format!("{FIGURE1_HEADER}\n");
    for r in &rows {
        let (a, b, c) = r.log_k();
        writeln!(csv, "{},{},{},{},{}", r.p, sig17(r.epsilon), sig17(a), sig17(b), sig17(c)).unwrap();
    }
    Ok(Figure1Output {
        summary: figure1_summary(&rows),
        rows,
        csv,
    })
}

/// CSV header of the validation table.
pub const VALIDATE_HEADER: &str = "k,bound,exact_w2,empirical_w2";

#[derive(Debug, Clone, PartialEq)]
pub struct ValidateRow {
    pub k: u64,
    pub bound: Option<f64>,
    pub exact_w2: f64,
    pub empirical_w2: Option<f64>,
}

fn cell(x: Option<f64>) -> String {
    x.map(sig17).unwrap_or_default()
}

/// Bound value, exact `W2` of the chain's law and, optionally, the empirical
/// `W2` between chain samples and exact target draws, at each checkpoint.
/// Needs a diagonal Gaussian target and a chain started at a point.
pub fn cmd_validate(cfg: &ExperimentConfig) -> CliResult<(Vec<ValidateRow>, String)> {
    let spec = cfg
        .validate
        .as_ref()
        .ok_or_else(|| CliError::Config("`validate` section missing".into()))?;
    let sampler = cfg.sampler()?;
    cfg.hypotheses()?;
    let built = cfg.target()?;
    let target: &dyn Target = built.target.as_ref();
    let diag = target
        .as_diagonal_gaussian()
        .ok_or_else(|| CliError::Config("validate needs a quadratic target with diagonal curvature".into()))?;
    let cert = *target.certificate();
    let (m, big_m, p) = (cert.strong_convexity, cert.lipschitz, cert.dim);
    let theta0 = DVector::from_column_slice(&sampler.theta0);
    let init = GaussianLaw::point_mass(theta0.clone());
    let pi = target_law(&diag);
    let w2_0 = gaussian_w2(&init, &pi)?;
    if spec.chains > MAX_EMPIRICAL_SAMPLES {
        return Err(CliError::Config(format!("at most {MAX_EMPIRICAL_SAMPLES} chains")));
    }

    let law_at = |k: u64| -> CliResult<GaussianLaw> {
        Ok(match &sampler.method {
            MethodSpec::Lmc { schedule } => lmc_pushforward(target, &init, &schedule.build(target, &theta0)?, k)?,
            MethodSpec::Nlmc { h, noise } => {
                let g = noise
                    .gaussian(p)?
                    .ok_or_else(|| CliError::Config("validate supports zero or Gaussian noise only".into()))?;
                nlmc_pushforward(target, &init, *h, k, &g)?
            }
            MethodSpec::Lmco { h } => lmco_pushforward(target, &init, *h, k)?,
            MethodSpec::LmcoPrime { h } => lmco_prime_pushforward(target, &init, *h, k)?,
            _ => return Err(CliError::Config("validate supports lmc, nlmc, lmco and lmco_prime".into())),
        })
    };
    let bound_at = |k: u64| -> CliResult<Option<f64>> {
        let q = |h: f64| BoundQuery::new(m, big_m, p, h, k, w2_0).with_m2(cert.hessian_lipschitz.unwrap_or(0.0));
        Ok(match &sampler.method {
            MethodSpec::Lmc {
                schedule: ScheduleSpec::Constant { h },
            } => Some(bound_thm1(&q(*h))?.value),
            MethodSpec::Lmc { schedule } => {
                let k1 = match schedule.build(target, &theta0)? {
                    langevin_kit::samplers::StepSchedule::Varying { k1, .. } => k1,
                    _ => unreachable!("non-constant schedules are varying"),
                };
                (matches!(schedule, ScheduleSpec::Theorem2 { .. }) && k >= k1 && k1 >= compute_k1(m, big_m, p, w2_0)?)
                    .then(|| bound_thm2(m, big_m, p, k, k1).map(|b| b.value))
                    .transpose()?
            }
            MethodSpec::Nlmc { h, noise } => {
                let levels = noise.build(&built, &theta0)?.levels();
                Some(bound_thm3(&q(*h).with_noise(levels.delta, levels.sigma))?.value)
            }
            MethodSpec::Lmco { h } => {
                Some(bound_thm5(&q(*h), SecondOrderVariant::Lmco, Thm5Constants::Statement)?.value)
            }
            MethodSpec::LmcoPrime { h } => {
                Some(bound_thm5(&q(*h), SecondOrderVariant::LmcoPrime, Thm5Constants::Statement)?.value)
            }
            _ => None,
        })
    };

    let mut checkpoints = spec.checkpoints.clone();
    checkpoints.sort_unstable();
    checkpoints.dedup();
    let empirical = if spec.chains > 0 && !checkpoints.is_empty() {
        Some(empirical_columns(&built, sampler, &checkpoints, spec.chains, &diag)?)
    } else {
        None
    };

    let mut rows = Vec::with_capacity(checkpoints.len());
    for (i, &k) in checkpoints.iter().enumerate() {
        rows.push(ValidateRow {
            k,
            bound: bound_at(k)?,
            exact_w2: gaussian_w2(&law_at(k)?, &pi)?,
            empirical_w2: empirical.as_ref().map(|e| e[i]),
        });
    }
    let mut csv = format!("{VALIDATE_HEADER}\n");
    for r in &rows {
        writeln!(csv, "{},{},{},{}", r.k, cell(r.bound), sig17(r.exact_w2), cell(r.empirical_w2)).unwrap();
    }
    Ok((rows, csv))
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn empirical_columns(
    built: &BuiltTarget,
    sampler: &SamplerSpec,
    checkpoints: &[u64],
    chains: usize,
    diag: &langevin_kit::model::DiagonalGaussian,
) -> CliResult<Vec<f64>> {
    let last = *checkpoints.last().expect("checkpoints are non-empty");
    let stride = checkpoints.iter().fold(0, |g, &k| gcd(g, k)).max(1);
    let run = SamplerSpec {
        iterations: last,
        ..sampler.clone()
    };
    let samples: Vec<Vec<DVector<f64>>> = (0..chains as u64)
        .into_par_iter()
        .map(|i| -> CliResult<Vec<DVector<f64>>> {
            let (_, trace, _) = run_sampler(built, &run, chain_seed(sampler.seed, i), RunOptions::every(stride))?;
            Ok(checkpoints
                .iter()
                .map(|&k| {
                    trace
                        .records
                        .iter()
                        .find(|r| r.k == k)
                        .expect("checkpoints are multiples of the stride")
                        .theta
                        .clone()
                })
                .collect())
        })
        .collect::<CliResult<_>>()?;
    let sd = diag.variances().map(f64::sqrt);
    let p = sd.len();
    let reference: Vec<DVector<f64>> = (0..chains as u64)
        .map(|i| {
            let mut rng = ChaCha20Rng::seed_from_u64(chain_seed(!sampler.seed, i));
            diag.mean() + standard_normal(&mut rng, p).component_mul(&sd)
        })
        .collect();
    (0..checkpoints.len())
        .into_par_iter()
        .map(|j| {
            let at: Vec<DVector<f64>> = samples.iter().map(|s| s[j].clone()).collect();
            empirical_w2(&at, &reference).map_err(CliError::from)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Plan,
    Bound,
    Sample,
    Figure1,
    Validate,
}

fn write(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|source| CliError::Write {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Runs `command` and writes its outputs under `cfg.output.dir`. Returns the
/// written paths.
pub fn write_outputs(command: Command, cfg: &ExperimentConfig) -> CliResult<Vec<PathBuf>> {
    let out = &cfg.output;
    let dir = out.dir.as_path();
    Ok(match command {
        Command::Plan => vec![write(dir, &out.plan, &crate::json::to_string(&cmd_plan(cfg)?))?],
        Command::Bound => vec![write(dir, &out.bound, &crate::json::to_string(&cmd_bound(cfg)?))?],
        Command::Sample => {
            let s = cmd_sample(cfg)?;
            vec![
                write(dir, &out.trace, &s.trace_csv)?,
                write(dir, &out.final_state, &crate::json::to_string(&s.final_state))?,
            ]
        }
        Command::Figure1 => {
            let f = cmd_figure1(cfg)?;
            for s in &f.summary {
                log::info!(
                    "epsilon {}: mean K_dm/K_thm2 = {:.3}, mean K_dm/K_thm1 = {:.3}, ordering violations = {}",
                    s.epsilon,
                    s.mean_ratio_dm_thm2,
                    s.mean_ratio_dm_thm1,
                    s.ordering_violations
                );
            }
            vec![write(dir, &out.figure1, &f.csv)?]
        }
        Command::Validate => vec![write(dir, &out.validate, &cmd_validate(cfg)?.1)?],
    })
}
