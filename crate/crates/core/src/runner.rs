//! Algorithm selection: one serializable description per searcher, resolved
//! against what is known about the problem (dimension, Lipschitz constant,
//! budget exponent, zooming dimension) and dispatched to an executor.

use serde::{Deserialize, Serialize};

use crate::baselines::{
    hyperband, random_search, successive_halving, uniform_search, HalvingConfig, HyperbandConfig, RandomPolicy,
    RandomSearchConfig, UniformSearchConfig,
};
use crate::error::{Error, Result};
use crate::executor::{BatchExecutor, InProcessExecutor};
use crate::geometry::EdgeLengthSchedule;
use crate::instances::Instance;
use crate::optimizer::{run_blie, BlieConfig};
use crate::trace::RunTrace;

/// Edge-length schedule request; ACE parameters are filled in at run time.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSpec {
    #[default]
    Doubling,
    Ace {
        /// Defaults to the problem's known zooming dimension.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        zooming_dim: Option<f64>,
    },
    Explicit {
        levels: Vec<u32>,
    },
}

fn default_eta() -> u64 {
    3
}

fn default_policy() -> RandomPolicy {
    RandomPolicy::Even
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlgorithmConfig {
    Blie {
        /// Defaults to `2L + 2`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha: Option<f64>,
        /// Defaults to the problem's budget exponent (2 if unknown).
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta: Option<f64>,
        #[serde(default)]
        schedule: ScheduleSpec,
    },
    Uniform {
        /// Grid level (`r = 2^-level`); defaults to `floor(log2 T / (d + beta))`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        level: Option<u32>,
    },
    Random {
        /// Defaults to `2^floor(log2 T * d / (d + beta))`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        arms: Option<u64>,
        #[serde(default = "default_policy")]
        policy: RandomPolicy,
    },
    Sh {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        arms: Option<u64>,
        #[serde(default = "default_eta")]
        eta: u64,
    },
    Hyperband {
        #[serde(default = "default_eta")]
        eta: u64,
        #[serde(default, skip_serializing_if = "Option::is_none", rename = "R")]
        max_budget: Option<u64>,
    },
}

impl AlgorithmConfig {
    pub fn blie_default() -> Self {
        AlgorithmConfig::Blie {
            alpha: None,
            beta: None,
            schedule: ScheduleSpec::Doubling,
        }
    }

    /// Parses a short name (`blie`, `blie-ace`, `uniform`, `random`, `sh`, `hyperband`)
    /// into its default configuration.
    pub fn from_name(name: &str) -> Result<Self> {
        Ok(match name {
            "blie" => Self::blie_default(),
            "blie-ace" => AlgorithmConfig::Blie {
                alpha: None,
                beta: None,
                schedule: ScheduleSpec::Ace { zooming_dim: None },
            },
            "uniform" => AlgorithmConfig::Uniform { level: None },
            "random" => AlgorithmConfig::Random {
                arms: None,
                policy: RandomPolicy::Even,
            },
            "sh" => AlgorithmConfig::Sh { arms: None, eta: 3 },
            "hyperband" => AlgorithmConfig::Hyperband {
                eta: 3,
                max_budget: None,
            },
            other => return Err(Error::Config(format!("unknown algorithm `{other}`"))),
        })
    }

    /// Label used in result tables.
    pub fn label(&self) -> String {
        match self {
            AlgorithmConfig::Blie { schedule, .. } => match schedule {
                ScheduleSpec::Doubling => "blie".into(),
                ScheduleSpec::Ace { .. } => "blie-ace".into(),
                ScheduleSpec::Explicit { .. } => "blie-explicit".into(),
            },
            AlgorithmConfig::Uniform { .. } => "uniform".into(),
            AlgorithmConfig::Random { .. } => "random".into(),
            AlgorithmConfig::Sh { .. } => "sh".into(),
            AlgorithmConfig::Hyperband { .. } => "hyperband".into(),
        }
    }
}

/// What the algorithms may know about a problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInfo {
    pub dim: usize,
    pub lipschitz: Option<f64>,
    pub beta: Option<f64>,
    pub zooming_dim: Option<f64>,
}

impl ProblemInfo {
    pub fn black_box(dim: usize) -> Self {
        Self {
            dim,
            lipschitz: None,
            beta: None,
            zooming_dim: None,
        }
    }

    pub fn of(instance: &Instance) -> Self {
        Self {
            dim: instance.dim(),
            lipschitz: Some(instance.lipschitz()),
            beta: Some(instance.beta()),
            zooming_dim: instance.zooming_dim(),
        }
    }

    fn beta_or_default(&self) -> f64 {
        self.beta.unwrap_or(2.0)
    }
}

/// `floor(log2 T * d / (d + beta))` as a power of two, clamped to `[1, T]`.
fn balanced_arm_count(info: &ProblemInfo, total_budget: u64) -> u64 {
    let d = info.dim as f64;
    let exp = ((total_budget as f64).log2() * d / (d + info.beta_or_default())).floor();
    let n = exp.exp2().min(total_budget as f64).max(1.0);
    n as u64
}

/// Resolves BLiE defaults into a concrete configuration.
pub fn blie_config(
    alpha: Option<f64>,
    beta: Option<f64>,
    schedule: &ScheduleSpec,
    info: &ProblemInfo,
    total_budget: u64,
    seed: u64,
) -> Result<BlieConfig> {
    let alpha = match (alpha, info.lipschitz) {
        (Some(a), _) => a,
        (None, Some(l)) => BlieConfig::theory_alpha(l),
        (None, None) => return Err(Error::Config("BLiE needs `alpha` when the Lipschitz constant is unknown".into())),
    };
    let beta = beta.or(info.beta).unwrap_or(2.0);
    let schedule = match schedule {
        ScheduleSpec::Doubling => EdgeLengthSchedule::doubling(),
        ScheduleSpec::Ace { zooming_dim } => {
            let dz = zooming_dim.or(info.zooming_dim).ok_or_else(|| {
                Error::Config("ACE schedule needs `zooming_dim` when it is not known for the problem".into())
            })?;
            EdgeLengthSchedule::ace(info.dim, dz, beta, total_budget)?
        }
        ScheduleSpec::Explicit { levels } => EdgeLengthSchedule::explicit(levels.clone())?,
    };
    Ok(BlieConfig::new(alpha, beta, schedule, total_budget, seed))
}

/// Runs `algorithm` through `executor`. Regret is left empty.
pub fn run_with(
    algorithm: &AlgorithmConfig,
    info: &ProblemInfo,
    total_budget: u64,
    seed: u64,
    executor: &mut dyn BatchExecutor,
) -> Result<RunTrace> {
    let dim = info.dim;
    let mut trace = match algorithm {
        AlgorithmConfig::Blie { alpha, beta, schedule } => {
            let cfg = blie_config(*alpha, *beta, schedule, info, total_budget, seed)?;
            run_blie(&cfg, dim, executor)?
        }
        AlgorithmConfig::Uniform { level } => {
            let level = level.unwrap_or_else(|| {
                ((total_budget as f64).log2() / (dim as f64 + info.beta_or_default())).floor() as u32
            });
            uniform_search(&UniformSearchConfig { level, total_budget, seed }, dim, executor)?
        }
        AlgorithmConfig::Random { arms, policy } => {
            let arms = arms.unwrap_or_else(|| balanced_arm_count(info, total_budget));
            random_search(
                &RandomSearchConfig {
                    arms,
                    policy: *policy,
                    total_budget,
                    seed,
                },
                dim,
                executor,
            )?
        }
        AlgorithmConfig::Sh { arms, eta } => {
            let arms = arms.unwrap_or_else(|| balanced_arm_count(info, total_budget).max(*eta));
            successive_halving(
                &HalvingConfig {
                    arms,
                    eta: *eta,
                    total_budget,
                    seed,
                },
                dim,
                executor,
            )?
        }
        AlgorithmConfig::Hyperband { eta, max_budget } => hyperband(
            &HyperbandConfig {
                eta: *eta,
                max_budget: *max_budget,
                total_budget,
                seed,
            },
            dim,
            executor,
        )?,
    };
    trace.algorithm = algorithm.label();
    Ok(trace)
}

/// Runs `algorithm` on a synthetic instance in-process and fills in regret.
pub fn run_algorithm(
    algorithm: &AlgorithmConfig,
    instance: &Instance,
    total_budget: u64,
    seed: u64,
    parallelism: usize,
) -> Result<RunTrace> {
    let mut executor = InProcessExecutor::new(instance, parallelism)?;
    let mut trace = run_with(algorithm, &ProblemInfo::of(instance), total_budget, seed, &mut executor)?;
    trace.attach_regret(instance);
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::ToyVariant;

    #[test]
    fn config_json_round_trip() {
        for json in [
            r#"{"name":"hyperband","eta":3,"R":81}"#,
            r#"{"name":"blie","alpha":0.01,"schedule":{"kind":"ace","zooming_dim":0.0}}"#,
            r#"{"name":"random","arms":16,"policy":{"kind":"sh","eta":2}}"#,
            r#"{"name":"uniform","level":3}"#,
            r#"{"name":"sh","arms":27}"#,
        ] {
            let cfg: AlgorithmConfig = serde_json::from_str(json).unwrap();
            let back: AlgorithmConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
            assert_eq!(cfg, back);
        }
        assert!(serde_json::from_str::<AlgorithmConfig>(r#"{"name":"blie","gamma":1}"#).is_err());
    }

    #[test]
    fn every_algorithm_runs_within_budget() {
        let inst = Instance::toy(ToyVariant::Mu2, 2, 0.1, 8).unwrap();
        for name in ["blie", "blie-ace", "uniform", "random", "sh", "hyperband"] {
            let algo = AlgorithmConfig::from_name(name).unwrap();
            let t = run_algorithm(&algo, &inst, 1 << 14, 3, 2).unwrap();
            assert!(t.total_spent <= 1 << 14, "{name}");
            assert!(t.simple_regret.unwrap() >= 0.0);
            assert_eq!(t.algorithm, name);
        }
    }

    #[test]
    fn blie_without_lipschitz_needs_alpha() {
        let info = ProblemInfo::black_box(2);
        assert!(matches!(
            blie_config(None, None, &ScheduleSpec::Doubling, &info, 1024, 0),
            Err(Error::Config(_))
        ));
        assert!(blie_config(Some(0.5), None, &ScheduleSpec::Doubling, &info, 1024, 0).is_ok());
    }
}
