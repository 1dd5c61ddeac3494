//! Full, serializable record of one optimization run.

use serde::{Deserialize, Serialize};

use crate::geometry::Cube;
use crate::instances::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BatchKind {
    /// One arm per active cube at a common budget.
    Play,
    /// Final top-up of the candidate arms.
    Cleanup,
    /// A generic evaluation round of a baseline.
    Round,
}

/// One evaluated arm inside a batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmRecord {
    /// The cube the arm was drawn from, when the algorithm works on cubes.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cube: Option<Cube>,
    pub point: Vec<f64>,
    pub prior_budget: u64,
    pub cumulative_budget: u64,
    pub loss: f64,
    /// Whether the arm (or its cube) was discarded after this batch.
    pub eliminated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchRecord {
    pub index: usize,
    pub kind: BatchKind,
    /// Dyadic level of the active cubes (`r = 2^-level`).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub level: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub edge: Option<f64>,
    /// Smallest loss observed in the batch.
    pub min_loss: f64,
    pub arms: Vec<ArmRecord>,
    /// Budget consumed by this batch.
    pub cost: u64,
    /// Cumulative budget consumed once this batch completes.
    pub grid_point: u64,
    /// Projected cumulative budget if the next batch were run.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub projected_next: Option<u64>,
}

impl BatchRecord {
    pub fn survivors(&self) -> impl Iterator<Item = &ArmRecord> {
        self.arms.iter().filter(|a| !a.eliminated)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cube: Option<Cube>,
    pub point: Vec<f64>,
    pub budget: u64,
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub algorithm: String,
    pub dim: usize,
    pub total_budget: u64,
    pub seed: u64,
    pub batches: Vec<BatchRecord>,
    pub total_spent: u64,
    /// Final candidate set with each arm's final cumulative budget and loss.
    pub candidates: Vec<Candidate>,
    /// Per-arm clean-up top-up (BLiE only; 0 otherwise).
    pub cleanup_budget: u64,
    /// Budget left unspent at the end of the run.
    pub leftover: u64,
    pub output: Vec<f64>,
    pub best_loss: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub simple_regret: Option<f64>,
    /// Free-form log of notable events (truncations, early exits).
    #[serde(default)]
    pub notes: Vec<String>,
}

impl RunTrace {
    /// Number of executor batches, clean-up included.
    pub fn batch_count(&self) -> usize {
        self.batches.len()
    }

    /// Number of batches that played a fresh edge length.
    pub fn play_batches(&self) -> usize {
        self.batches.iter().filter(|b| b.kind == BatchKind::Play).count()
    }

    /// Fills `simple_regret` from the instance's analytic optimum.
    pub fn attach_regret(&mut self, instance: &Instance) {
        self.simple_regret = instance.gap(&self.output).map(|g| g.max(0.0));
    }

    /// Sum of per-request budget increments across all batches.
    pub fn incremental_spend(&self) -> u64 {
        self.batches
            .iter()
            .flat_map(|b| &b.arms)
            .map(|a| a.cumulative_budget - a.prior_budget)
            .sum()
    }
}
