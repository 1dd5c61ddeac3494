use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::executor::{EvaluatorSpec, DEFAULT_TIMEOUT_SECS};
use crate::instances::InstanceDescriptor;
use crate::runner::AlgorithmConfig;

fn one() -> usize {
    1
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

fn default_timeout() -> f64 {
    DEFAULT_TIMEOUT_SECS
}

/// External objective: the evaluator command plus the search-space dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluatorBlock {
    pub command: Vec<String>,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub working_dir: Option<PathBuf>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
}

impl EvaluatorBlock {
    pub fn spec(&self) -> EvaluatorSpec {
        EvaluatorSpec {
            command: self.command.clone(),
            working_dir: self.working_dir.clone(),
            timeout_secs: self.timeout_secs,
        }
    }
}

/// Single-file JSON description of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algorithm: AlgorithmConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<InstanceDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evaluator: Option<EvaluatorBlock>,
    /// Total budget `T`; ignored when `t_grid` is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub replicates: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<Vec<u64>>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parallelism: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.instance, &self.evaluator) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("give either `instance` or `evaluator`, not both".into()))
            }
            (None, None) => return Err(Error::Config("one of `instance` or `evaluator` is required".into())),
            (None, Some(ev)) => {
                ev.spec().validate().map_err(|e| Error::Config(e.to_string()))?;
                if ev.dim == 0 {
                    return Err(Error::Config("evaluator `dim` must be positive".into()));
                }
            }
            (Some(_), None) => {}
        }
        if self.replicates == 0 {
            return Err(Error::Config("`replicates` must be at least 1".into()));
        }
        if self.parallelism == Some(0) {
            return Err(Error::Config("`parallelism` must be positive".into()));
        }
        match (&self.t_grid, self.budget) {
            (Some(grid), _) => {
                if grid.is_empty() || grid[0] == 0 {
                    return Err(Error::Config("`t_grid` must be non-empty and positive".into()));
                }
                if grid.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Config("`t_grid` must be strictly increasing".into()));
                }
            }
            (None, Some(0)) | (None, None) => {
                return Err(Error::Config("a positive `budget` or a `t_grid` is required".into()))
            }
            (None, Some(_)) => {}
        }
        Ok(())
    }

    /// Budgets to run, in order.
    pub fn budgets(&self) -> Vec<u64> {
        match &self.t_grid {
            Some(grid) => grid.clone(),
            None => vec![self.budget.expect("validated")],
        }
    }
}
