//! Experiment configuration: one JSON document describing a target, a
//! sampler run, bound queries, planner requests and output locations.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use langevin_kit::bounds::{BoundKind, HypothesisFlag, Thm5Constants};
use langevin_kit::model::{
    initial_w2_bound, Declared, DiagonalGaussian, FiniteSum, FiniteSumQuadratic, GaussianMeanMixture,
    IsotropicGaussian, RidgeLogistic, Target, TargetCertificate,
};
use langevin_kit::noise::{GaussianNoise, NoiseModel, StateDependentBias, SubsampledGradient, ZeroNoise};
use langevin_kit::samplers::{StepSchedule, TauMode};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampler: Option<SamplerSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<BoundSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<PlanSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub figure1: Option<Figure1Spec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validate: Option<ValidateSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub model: ModelSpec,
    /// Replaces the built-in certificate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<DeclaredConstants>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    IsotropicGaussian {
        m: f64,
        mean: Vec<f64>,
    },
    DiagonalGaussian {
        curvatures: Vec<f64>,
        mean: Vec<f64>,
    },
    /// Dataset CSV: header row, label in the first column.
    RidgeLogistic {
        data: PathBuf,
        lambda: f64,
    },
    /// One row per term.
    FiniteSumQuadratic {
        curvatures: Vec<Vec<f64>>,
        centers: Vec<Vec<f64>>,
    },
    GaussianMeanMixture {
        weights: Vec<f64>,
        means: Vec<Vec<f64>>,
        curvatures: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeclaredConstants {
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
    #[serde(rename = "M2", default, skip_serializing_if = "Option::is_none")]
    pub m2: Option<f64>,
}

/// Constants for bound and planner queries made without a target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constants {
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
    #[serde(rename = "M2", default, skip_serializing_if = "Option::is_none")]
    pub m2: Option<f64>,
    pub p: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSpec {
    pub method: MethodSpec,
    pub iterations: u64,
    pub seed: u64,
    pub theta0: Vec<f64>,
    /// Trace checkpoint stride; `θ` is recorded at every multiple of it.
    #[serde(default = "one")]
    pub stride: u64,
}

fn one() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case", deny_unknown_fields)]
pub enum MethodSpec {
    Lmc {
        schedule: ScheduleSpec,
    },
    Nlmc {
        h: f64,
        noise: NoiseSpec,
    },
    Lmco {
        h: f64,
    },
    LmcoPrime {
        h: f64,
    },
    Mlmc {
        w2_0: f64,
    },
    TauScaled {
        tau: f64,
        mode: TauMode,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        h: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSpec {
    Constant {
        h: f64,
    },
    Varying {
        k1: u64,
    },
    /// Warm-up length from `w2_0`, or from the computable initial-distance
    /// bound at `theta0` when absent.
    Theorem2 {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        w2_0: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseSpec {
    Zero,
    Gaussian { bias: Vec<f64>, sigma: f64 },
    /// Bias `δ·(1, …, 1)`.
    UniformBias { delta: f64, sigma: f64 },
    StateDependentBias { delta: f64 },
    /// Minibatch gradients; needs a finite-sum target.
    Subsampled { batch: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundSpec {
    pub kind: BoundKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<Constants>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    pub iterations: u64,
    #[serde(default)]
    pub w2_0: f64,
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub sigma: f64,
    #[serde(default)]
    pub thm5_constants: Thm5Constants,
    /// Warm-up length for `thm2`; computed from `w2_0` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k1: Option<u64>,
    /// Initial distance to the mode for `prop_b`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_high: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSpec {
    pub kinds: Vec<BoundKind>,
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<Constants>,
    pub w2_0: f64,
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Figure1Spec {
    #[serde(default = "fig_m")]
    pub m: f64,
    #[serde(rename = "M", default = "fig_big_m")]
    pub big_m: f64,
    #[serde(default = "fig_eps")]
    pub epsilons: Vec<f64>,
    #[serde(default = "fig_p")]
    pub p_grid: Vec<usize>,
}

fn fig_m() -> f64 {
    10.0
}
fn fig_big_m() -> f64 {
    20.0
}
fn fig_eps() -> Vec<f64> {
    vec![0.001, 0.005, 0.02]
}
fn fig_p() -> Vec<usize> {
    (1..=40).map(|i| 25 * i).collect()
}

impl Default for Figure1Spec {
    fn default() -> Self {
        Self {
            m: fig_m(),
            big_m: fig_big_m(),
            epsilons: fig_eps(),
            p_grid: fig_p(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateSpec {
    pub checkpoints: Vec<u64>,
    /// Chains per checkpoint for the empirical `W2` column; 0 skips it.
    #[serde(default)]
    pub chains: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "names::trace")]
    pub trace: String,
    #[serde(default = "names::final_state")]
    pub final_state: String,
    #[serde(default = "names::bound")]
    pub bound: String,
    #[serde(default = "names::plan")]
    pub plan: String,
    #[serde(default = "names::figure1")]
    pub figure1: String,
    #[serde(default = "names::validate")]
    pub validate: String,
}

fn default_dir() -> PathBuf {
    PathBuf::from(".")
}

mod names {
    pub fn trace() -> String {
        "trace.csv".into()
    }
    pub fn final_state() -> String {
        "final_state.json".into()
    }
    pub fn bound() -> String {
        "bound.json".into()
    }
    pub fn plan() -> String {
        "plan.json".into()
    }
    pub fn figure1() -> String {
        "figure1.csv".into()
    }
    pub fn validate() -> String {
        "validate.csv".into()
    }
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            trace: names::trace(),
            final_state: names::final_state(),
            bound: names::bound(),
            plan: names::plan(),
            figure1: names::figure1(),
            validate: names::validate(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Canonical form: every float at 17 significant digits.
    pub fn to_json(&self) -> String {
        crate::json::to_string(self)
    }

    /// Reads a config file. Relative dataset paths resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::from_json(&text)?;
        if let Some(TargetSpec {
            model: ModelSpec::RidgeLogistic { data, .. },
            ..
        }) = cfg.target.as_mut()
        {
            if data.is_relative() {
                if let Some(parent) = path.parent() {
                    *data = parent.join(&*data);
                }
            }
        }
        Ok(cfg)
    }

    pub fn target(&self) -> CliResult<BuiltTarget> {
        self.target
            .as_ref()
            .ok_or_else(|| CliError::Config("this command needs a `target` section".into()))?
            .build()
    }

    pub fn sampler(&self) -> CliResult<&SamplerSpec> {
        self.sampler
            .as_ref()
            .ok_or_else(|| CliError::Config("this command needs a `sampler` section".into()))
    }

    /// Step-size hypotheses of the configured sampler against the target's
    /// certificate. A constant LMC step at or above `2/M` is an error.
    pub fn hypotheses(&self) -> CliResult<Vec<HypothesisFlag>> {
        let (Some(_), Some(sampler)) = (&self.target, &self.sampler) else {
            return Ok(Vec::new());
        };
        let built = self.target()?;
        let cert = *built.target.certificate();
        let (m, big_m) = (cert.strong_convexity, cert.lipschitz);
        let flag = |condition: &str, holds: bool| HypothesisFlag {
            condition: condition.to_string(),
            holds,
        };
        let first_order = |h: f64| -> CliResult<Vec<HypothesisFlag>> {
            if h >= 2.0 / big_m {
                return Err(langevin_kit::Error::StepHypothesis(format!("h = {h} is not below 2/M = {}", 2.0 / big_m)).into());
            }
            Ok(vec![flag("h < 2/M", true), flag("h <= 2/(m+M)", h <= 2.0 / (m + big_m))])
        };
        Ok(match &sampler.method {
            MethodSpec::Lmc {
                schedule: ScheduleSpec::Constant { h },
            } => first_order(*h)?,
            MethodSpec::Lmc { .. } | MethodSpec::Mlmc { .. } => vec![flag("h_0 = 2/(m+M)", true)],
            MethodSpec::Nlmc { h, .. } => first_order(*h)?,
            MethodSpec::Lmco { h } => vec![flag("h <= m/M^2", *h <= m / (big_m * big_m))],
            MethodSpec::LmcoPrime { h } => vec![flag("h <= 3m/(4M^2)", *h <= 0.75 * m / (big_m * big_m))],
            MethodSpec::TauScaled { .. } => Vec::new(),
        })
    }
}

/// A target built from its spec, with the views some commands need.
#[derive(Clone)]
pub struct BuiltTarget {
    pub target: Arc<dyn Target>,
    pub finite_sum: Option<Arc<dyn FiniteSum>>,
    pub mixture: Option<Arc<GaussianMeanMixture>>,
    pub diagonal: Option<DiagonalGaussian>,
}

fn vector(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

fn matrix(rows: &[Vec<f64>], what: &str) -> CliResult<DMatrix<f64>> {
    let n = rows.len();
    let p = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != p) {
        return Err(CliError::Config(format!("rows of `{what}` have different lengths")));
    }
    Ok(DMatrix::from_fn(n, p, |i, j| rows[i][j]))
}

impl TargetSpec {
    pub fn build(&self) -> CliResult<BuiltTarget> {
        let mut built = match &self.model {
            ModelSpec::IsotropicGaussian { m, mean } => {
                let t = IsotropicGaussian::new(*m, vector(mean))?;
                BuiltTarget {
                    diagonal: Some(t.to_diagonal()),
                    target: Arc::new(t),
                    finite_sum: None,
                    mixture: None,
                }
            }
            ModelSpec::DiagonalGaussian { curvatures, mean } => {
                let t = DiagonalGaussian::new(vector(curvatures), vector(mean))?;
                BuiltTarget {
                    diagonal: Some(t.clone()),
                    target: Arc::new(t),
                    finite_sum: None,
                    mixture: None,
                }
            }
            ModelSpec::RidgeLogistic { data, lambda } => {
                let t = Arc::new(RidgeLogistic::from_csv(data, *lambda)?);
                BuiltTarget {
                    target: t.clone(),
                    finite_sum: Some(t),
                    mixture: None,
                    diagonal: None,
                }
            }
            ModelSpec::FiniteSumQuadratic { curvatures, centers } => {
                let t = Arc::new(FiniteSumQuadratic::new(
                    matrix(curvatures, "curvatures")?,
                    matrix(centers, "centers")?,
                )?);
                BuiltTarget {
                    diagonal: t.as_diagonal_gaussian(),
                    target: t.clone(),
                    finite_sum: Some(t),
                    mixture: None,
                }
            }
            ModelSpec::GaussianMeanMixture {
                weights,
                means,
                curvatures,
            } => {
                let mix = GaussianMeanMixture::new(
                    weights.clone(),
                    means.iter().map(|m| vector(m)).collect(),
                    vector(curvatures),
                )?;
                let first = langevin_kit::model::MixtureTarget::component(&mix, &0)?;
                BuiltTarget {
                    target: Arc::from(first),
                    finite_sum: None,
                    mixture: Some(Arc::new(mix)),
                    diagonal: None,
                }
            }
        };
        if let Some(c) = self.constants {
            let cert = TargetCertificate::new(c.m, c.big_m, c.m2, built.target.dim())?;
            built.target = Arc::new(Declared::new(Box::new(ArcTarget(built.target.clone())) as Box<dyn Target>, cert)?);
        }
        Ok(built)
    }
}

/// Lets an `Arc<dyn Target>` sit behind [`Declared`].
struct ArcTarget(Arc<dyn Target>);

impl Target for ArcTarget {
    fn certificate(&self) -> &TargetCertificate {
        self.0.certificate()
    }
    fn value(&self, theta: &DVector<f64>) -> f64 {
        self.0.value(theta)
    }
    fn gradient(&self, theta: &DVector<f64>) -> DVector<f64> {
        self.0.gradient(theta)
    }
    fn hessian(&self, theta: &DVector<f64>) -> Option<DMatrix<f64>> {
        self.0.hessian(theta)
    }
    fn hessian_vector_product(&self, theta: &DVector<f64>, v: &DVector<f64>) -> Option<DVector<f64>> {
        self.0.hessian_vector_product(theta, v)
    }
    fn minimizer(&self) -> Option<DVector<f64>> {
        self.0.minimizer()
    }
    fn lower_bound(&self) -> Option<f64> {
        self.0.lower_bound()
    }
    fn as_diagonal_gaussian(&self) -> Option<DiagonalGaussian> {
        self.0.as_diagonal_gaussian()
    }
}

impl ScheduleSpec {
    pub fn build(&self, target: &dyn Target, theta0: &DVector<f64>) -> CliResult<StepSchedule> {
        let cert = target.certificate();
        Ok(match *self {
            Self::Constant { h } => StepSchedule::constant(h)?,
            Self::Varying { k1 } => StepSchedule::varying(cert.strong_convexity, cert.lipschitz, k1)?,
            Self::Theorem2 { w2_0 } => {
                let w = match w2_0 {
                    Some(w) => w,
                    None => initial_w2_bound(target, theta0)?,
                };
                StepSchedule::theorem2(cert.strong_convexity, cert.lipschitz, cert.dim, w)?
            }
        })
    }
}

impl NoiseSpec {
    pub fn build(&self, built: &BuiltTarget, theta0: &DVector<f64>) -> CliResult<Box<dyn NoiseModel>> {
        let p = built.target.dim();
        Ok(match self {
            Self::Zero => Box::new(ZeroNoise),
            Self::Gaussian { bias, sigma } => Box::new(GaussianNoise::new(vector(bias), *sigma)?),
            Self::UniformBias { delta, sigma } => Box::new(GaussianNoise::uniform_bias(p, *delta, *sigma)?),
            Self::StateDependentBias { delta } => Box::new(StateDependentBias::new(*delta)?),
            Self::Subsampled { batch } => {
                let fs = built
                    .finite_sum
                    .clone()
                    .ok_or_else(|| CliError::Config("subsampled noise needs a finite-sum target".into()))?;
                let mut probes = vec![theta0.clone()];
                probes.extend(built.target.minimizer());
                Box::new(SubsampledGradient::new(fs, *batch, &probes)?)
            }
        })
    }

    /// The noise as a Gaussian model, when it is one.
    pub fn gaussian(&self, p: usize) -> CliResult<Option<GaussianNoise>> {
        Ok(match self {
            Self::Zero => Some(GaussianNoise::new(DVector::zeros(p), 0.0)?),
            Self::Gaussian { bias, sigma } => Some(GaussianNoise::new(vector(bias), *sigma)?),
            Self::UniformBias { delta, sigma } => Some(GaussianNoise::uniform_bias(p, *delta, *sigma)?),
            _ => None,
        })
    }
}
