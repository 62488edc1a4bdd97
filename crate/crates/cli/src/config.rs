//! Experiment configuration: a JSON document with defaults for everything
//! but the experiment kind.
//!
//! ```json
//! {
//!   "experiment": "scaling",
//!   "problem": {
//!     "loss": { "kind": "reg_quadratic", "lambda": 1.0 },
//!     "domain": { "kind": "l2_ball", "center": [0.0], "radius": 10.0 },
//!     "distribution": { "kind": "finite_support",
//!                       "atoms": [ { "x": [-1.0], "p": 0.5 }, { "x": [1.0], "p": 0.5 } ] }
//!   },
//!   "algorithm": { "kind": "erm" },
//!   "n_grid": [100, 300, 1000, 3000, 10000],
//!   "reps": 2000,
//!   "delta": 0.05,
//!   "base_seed": 0,
//!   "parallelism": "auto"
//! }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use scolab::empirics::Parallelism;
use scolab::{Algorithm, Atom, ConvexDomain, DataDistribution, LossKind, Point, ProblemInstance, ProblemSpec, Steps};

use crate::bound::{BoundName, BoundParams};
use crate::error::{CliError, ConfigIssue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Stability,
    Bernstein,
    Scaling,
    Gap,
    Concentration,
    #[serde(rename = "bound-eval", alias = "bound_eval")]
    BoundEval,
}

/// The learning algorithm; `pgd_constant` takes `c_opt` from `constants`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlgorithmConfig {
    Erm {
        #[serde(default = "default_erm_tol")]
        tol: f64,
    },
    PgdDecaying {
        steps: Steps,
    },
    PgdConstant {
        steps: Steps,
    },
    Constant {
        w0: Point,
    },
}

impl AlgorithmConfig {
    pub fn resolve(&self, c_opt: f64) -> Algorithm {
        match self {
            AlgorithmConfig::Erm { tol } => Algorithm::Erm { tol: *tol },
            AlgorithmConfig::PgdDecaying { steps } => Algorithm::PgdDecaying { steps: *steps },
            AlgorithmConfig::PgdConstant { steps } => Algorithm::PgdConstant { steps: *steps, c_opt },
            AlgorithmConfig::Constant { w0 } => Algorithm::Constant { w0: w0.clone() },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constants {
    #[serde(default = "one")]
    pub c: f64,
    #[serde(default = "one", rename = "C")]
    pub c_abs: f64,
    #[serde(default = "one")]
    pub c_opt: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Constants {
            c: 1.0,
            c_abs: 1.0,
            c_opt: 1.0,
        }
    }
}

/// `"auto"` or a positive thread count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParallelismSetting {
    #[default]
    Auto,
    Threads(usize),
}

impl ParallelismSetting {
    pub fn to_lab(self) -> Parallelism {
        match self {
            ParallelismSetting::Auto => Parallelism::Auto,
            ParallelismSetting::Threads(n) => Parallelism::Threads(n),
        }
    }
}

impl std::str::FromStr for ParallelismSetting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(ParallelismSetting::Auto);
        }
        s.parse::<usize>()
            .map(ParallelismSetting::Threads)
            .map_err(|_| format!("expected \"auto\" or a thread count, got `{s}`"))
    }
}

impl Serialize for ParallelismSetting {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ParallelismSetting::Auto => s.serialize_str("auto"),
            ParallelismSetting::Threads(n) => s.serialize_u64(*n as u64),
        }
    }
}

impl<'de> Deserialize<'de> for ParallelismSetting {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(usize),
            Name(String),
        }
        match Raw::deserialize(d)? {
            Raw::Count(n) => Ok(ParallelismSetting::Threads(n)),
            Raw::Name(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseKind {
    #[default]
    AdditiveUniform,
    ErmSecondMoment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConcentrationSettings {
    #[serde(default)]
    pub case: CaseKind,
    /// Number of variables (additive case) or sample size (ERM case).
    #[serde(default = "default_case_n")]
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<Vec<f64>>,
}

impl Default for ConcentrationSettings {
    fn default() -> Self {
        ConcentrationSettings {
            case: CaseKind::default(),
            n: default_case_n(),
            t_grid: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundSettings {
    pub name: BoundName,
    #[serde(default)]
    pub params: BoundParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_problem")]
    pub problem: ProblemSpec,
    #[serde(default = "default_algorithm")]
    pub algorithm: AlgorithmConfig,
    #[serde(default = "default_grid")]
    pub n_grid: Vec<usize>,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "one")]
    pub eta: f64,
    #[serde(default)]
    pub constants: Constants,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub parallelism: ParallelismSetting,
    /// Probe points per replication for continuous distributions.
    #[serde(default = "default_probes")]
    pub probes: usize,
    #[serde(default = "default_w_samples")]
    pub n_w_samples: usize,
    /// Accuracy of `w*` and reference minimizers without a closed form.
    #[serde(default = "default_minimizer_tol")]
    pub minimizer_tol: f64,
    #[serde(default = "default_resamples")]
    pub bootstrap_resamples: usize,
    #[serde(default)]
    pub concentration: ConcentrationSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<BoundSettings>,
}

fn one() -> f64 {
    1.0
}
fn default_erm_tol() -> f64 {
    1e-6
}
fn default_case_n() -> usize {
    20
}
fn default_grid() -> Vec<usize> {
    vec![100, 300, 1000, 3000, 10_000]
}
fn default_reps() -> usize {
    2000
}
fn default_delta() -> f64 {
    0.05
}
fn default_probes() -> usize {
    64
}
fn default_w_samples() -> usize {
    1000
}
fn default_minimizer_tol() -> f64 {
    1e-6
}
fn default_resamples() -> usize {
    1000
}
fn default_algorithm() -> AlgorithmConfig {
    AlgorithmConfig::Erm { tol: default_erm_tol() }
}

/// Quadratic loss with λ = 1 on the ball of radius 10 in one dimension,
/// data ±1 with probability 1/2 each.
pub fn default_problem() -> ProblemSpec {
    let inst = ProblemInstance::new(
        LossKind::RegQuadratic,
        1.0,
        ConvexDomain::L2Ball {
            center: Point::from([0.0]),
            radius: 10.0,
        },
        DataDistribution::FiniteSupport {
            atoms: vec![Atom::new(Point::from([-1.0]), 0.5), Atom::new(Point::from([1.0]), 0.5)],
        },
    )
    .expect("default problem is valid");
    inst.spec().clone()
}

/// A validated configuration with its problem instance and algorithm built.
#[derive(Debug, Clone)]
pub struct ValidatedConfig {
    pub config: ExperimentConfig,
    pub instance: ProblemInstance,
    pub algorithm: Algorithm,
}

impl ExperimentConfig {
    /// Defaults for every field.
    pub fn new(experiment: ExperimentKind) -> Self {
        serde_json::from_value(serde_json::json!({ "experiment": experiment }))
            .expect("defaults deserialize")
    }

    /// Config fields that determine the outputs, serialized canonically.
    /// The output directory and the thread count are excluded.
    pub fn canonical_json(&self) -> String {
        let mut c = self.clone();
        c.output_dir = None;
        c.parallelism = ParallelismSetting::Auto;
        serde_json::to_string(&c).expect("config serializes")
    }

    /// Checks every range constraint and returns all violations at once.
    pub fn validate(self) -> Result<ValidatedConfig, CliError> {
        let mut issues = Vec::new();
        let mut issue = |p: &str, m: &str| issues.push(ConfigIssue::new(p, m));

        if !(self.delta > 0.0 && self.delta < 1.0) {
            issue("delta", "must lie in (0, 1)");
        }
        if !(self.eta.is_finite() && self.eta > 0.0) {
            issue("eta", "must be finite and > 0");
        }
        for (name, v) in [
            ("constants.c", self.constants.c),
            ("constants.C", self.constants.c_abs),
            ("constants.c_opt", self.constants.c_opt),
        ] {
            if !(v.is_finite() && v > 0.0) {
                issue(name, "must be finite and > 0");
            }
        }
        if self.reps == 0 {
            issue("reps", "must be at least 1");
        }
        if matches!(self.parallelism, ParallelismSetting::Threads(0)) {
            issue("parallelism", "must be \"auto\" or at least 1");
        }
        if !(self.minimizer_tol.is_finite() && self.minimizer_tol > 0.0) {
            issue("minimizer_tol", "must be finite and > 0");
        }
        let grid_needed = matches!(
            self.experiment,
            ExperimentKind::Stability | ExperimentKind::Scaling | ExperimentKind::Gap
        );
        if grid_needed {
            if self.n_grid.is_empty() {
                issue("n_grid", "must not be empty");
            } else if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
                issue("n_grid", "must be strictly increasing");
            }
            let min_n = if self.experiment == ExperimentKind::Stability { 2 } else { 1 };
            if self.n_grid.iter().any(|&n| n < min_n) {
                issue("n_grid", &format!("sizes must be at least {min_n}"));
            }
        }
        match self.experiment {
            ExperimentKind::Scaling | ExperimentKind::Gap => {
                if self.delta > 0.0 && (self.reps as f64) < 10.0 / self.delta {
                    issue("reps", &format!("must be at least 10/delta = {}", (10.0 / self.delta).ceil()));
                }
                if self.bootstrap_resamples == 0 {
                    issue("bootstrap_resamples", "must be at least 1");
                }
            }
            ExperimentKind::Bernstein if self.n_w_samples == 0 => issue("n_w_samples", "must be at least 1"),
            ExperimentKind::Concentration => {
                if self.concentration.n == 0 {
                    issue("concentration.n", "must be at least 1");
                }
                if let Some(ts) = &self.concentration.t_grid {
                    if ts.is_empty() || ts.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
                        issue("concentration.t_grid", "must hold finite values > 0");
                    }
                }
            }
            ExperimentKind::BoundEval if self.bound.is_none() => issue("bound", "required for bound-eval"),
            _ => {}
        }

        let instance = match ProblemInstance::from_spec(self.problem.clone()) {
            Ok(inst) => Some(inst),
            Err(e) => {
                issues.push(problem_issue(e));
                None
            }
        };
        let algorithm = self.algorithm.resolve(self.constants.c_opt);
        if let Some(inst) = &instance {
            if let Err(e) = algorithm.validate(inst) {
                issues.push(match e {
                    scolab::Error::InvalidParameter { name, reason } => ConfigIssue::new(name, reason),
                    other => ConfigIssue::new("algorithm", other.to_string()),
                });
            }
            let needs_atoms = matches!(
                self.experiment,
                ExperimentKind::Bernstein | ExperimentKind::Scaling | ExperimentKind::Gap
            ) || (self.experiment == ExperimentKind::Concentration
                && self.concentration.case == CaseKind::ErmSecondMoment);
            if needs_atoms && !inst.distribution.is_finite_support() {
                issues.push(ConfigIssue::new(
                    "problem.distribution",
                    "this experiment needs a finite_support distribution",
                ));
            }
            if self.experiment == ExperimentKind::Concentration
                && self.concentration.case == CaseKind::ErmSecondMoment
                && inst.loss.kind != LossKind::RegQuadratic
            {
                issues.push(ConfigIssue::new("problem.loss.kind", "the ERM case needs reg_quadratic"));
            }
        }

        match instance {
            Some(instance) if issues.is_empty() => Ok(ValidatedConfig {
                config: self,
                instance,
                algorithm,
            }),
            _ => Err(CliError::Config(issues)),
        }
    }
}

fn problem_issue(e: scolab::Error) -> ConfigIssue {
    match e {
        scolab::Error::InvalidParameter { name, reason } => ConfigIssue::new(format!("problem.{name}"), reason),
        other => ConfigIssue::new("problem", other.to_string()),
    }
}

/// Parses JSON text; schema errors carry the offending field path.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { String::new() } else { path };
        CliError::config(path, e.into_inner().to_string())
    })
}

/// Reads, parses and validates a configuration file.
pub fn parse_config(path: &Path) -> Result<ValidatedConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config("", format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text)?.validate()
}
