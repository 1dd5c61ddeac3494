//! Comparison searchers sharing the executor interface: uniform grid search,
//! random search, successive halving and Hyperband.

mod halving;
mod hyperband;
mod random;
mod uniform;

pub use halving::{successive_halving, HalvingConfig};
pub use hyperband::{bracket_table, hyperband, Bracket, HyperbandConfig};
pub use random::{random_search, RandomPolicy, RandomSearchConfig};
pub use uniform::{uniform_search, UniformSearchConfig};

use crate::error::Result;
use crate::executor::{BatchExecutor, EvalRequest};
use crate::geometry::Cube;
use crate::optimizer::argmin;
use crate::trace::{ArmRecord, BatchKind, BatchRecord, Candidate, RunTrace};

/// An arm with its evaluation history summarized.
#[derive(Debug, Clone)]
pub(crate) struct Arm {
    pub cube: Option<Cube>,
    pub point: Vec<f64>,
    pub budget: u64,
    pub loss: f64,
}

impl Arm {
    pub fn fresh(point: Vec<f64>, cube: Option<Cube>) -> Self {
        Self {
            cube,
            point,
            budget: 0,
            loss: f64::NAN,
        }
    }
}

/// Bookkeeping shared by the baselines: request ids, spend and the trace.
pub(crate) struct Session {
    pub trace: RunTrace,
    next_id: u64,
    // Arm indices of the most recent batch, in record order.
    last_played: Vec<usize>,
}

impl Session {
    pub fn new(algorithm: &str, dim: usize, total_budget: u64, seed: u64) -> Self {
        Self {
            trace: RunTrace {
                algorithm: algorithm.into(),
                dim,
                total_budget,
                seed,
                batches: Vec::new(),
                total_spent: 0,
                candidates: Vec::new(),
                cleanup_budget: 0,
                leftover: 0,
                output: Vec::new(),
                best_loss: f64::NAN,
                simple_regret: None,
                notes: Vec::new(),
            },
            next_id: 0,
            last_played: Vec::new(),
        }
    }

    pub fn remaining(&self) -> u64 {
        self.trace.total_budget - self.trace.total_spent
    }

    /// Brings every listed arm to cumulative budget `target` in one batch.
    /// Arms already at or beyond `target` are skipped.
    pub fn play(
        &mut self,
        executor: &mut dyn BatchExecutor,
        arms: &mut [Arm],
        selected: &[usize],
        target: u64,
        level: Option<u32>,
    ) -> Result<()> {
        let todo: Vec<usize> = selected.iter().copied().filter(|&i| arms[i].budget < target).collect();
        if todo.is_empty() {
            return Ok(());
        }
        let requests: Vec<EvalRequest> = todo
            .iter()
            .map(|&i| {
                self.next_id += 1;
                EvalRequest::new(self.next_id, arms[i].point.clone(), target, arms[i].budget)
            })
            .collect();
        let results = executor.run_batch(&requests)?;
        let cost: u64 = requests.iter().map(EvalRequest::increment).sum();
        let mut records = Vec::with_capacity(todo.len());
        for (&i, res) in todo.iter().zip(&results) {
            records.push(ArmRecord {
                cube: arms[i].cube.clone(),
                point: arms[i].point.clone(),
                prior_budget: arms[i].budget,
                cumulative_budget: target,
                loss: res.loss,
                eliminated: false,
            });
            arms[i].budget = target;
            arms[i].loss = res.loss;
        }
        self.trace.total_spent += cost;
        self.trace.batches.push(BatchRecord {
            index: self.trace.batches.len(),
            kind: BatchKind::Round,
            level,
            edge: level.map(crate::geometry::edge_length),
            min_loss: results.iter().map(|r| r.loss).fold(f64::INFINITY, f64::min),
            arms: records,
            cost,
            grid_point: self.trace.total_spent,
            projected_next: None,
        });
        self.last_played = todo;
        Ok(())
    }

    /// Marks arms dropped after the most recent batch.
    pub fn mark_dropped(&mut self, arms: &[Arm], kept: &[usize]) {
        let mut keep = vec![false; arms.len()];
        for &i in kept {
            keep[i] = true;
        }
        if let Some(batch) = self.trace.batches.last_mut() {
            for (rec, &i) in batch.arms.iter_mut().zip(&self.last_played) {
                rec.eliminated = !keep[i];
            }
        }
    }

    /// Outputs the argmin of the latest losses over `candidates` (ties to
    /// the earliest index).
    pub fn conclude(&mut self, arms: &[Arm], candidates: &[usize]) {
        let evaluated: Vec<usize> = candidates.iter().copied().filter(|&i| arms[i].budget > 0).collect();
        let losses: Vec<f64> = evaluated.iter().map(|&i| arms[i].loss).collect();
        if !evaluated.is_empty() {
            let best = evaluated[argmin(&losses)];
            self.trace.output = arms[best].point.clone();
            self.trace.best_loss = arms[best].loss;
        }
        self.trace.candidates = evaluated
            .iter()
            .map(|&i| Candidate {
                cube: arms[i].cube.clone(),
                point: arms[i].point.clone(),
                budget: arms[i].budget,
                loss: arms[i].loss,
            })
            .collect();
        self.trace.leftover = self.remaining();
    }

    pub fn finish(mut self, arms: &[Arm], candidates: &[usize]) -> RunTrace {
        self.conclude(arms, candidates);
        self.trace
    }
}

/// `floor(log_base(n))` in exact integer arithmetic.
pub(crate) fn ilog(n: u64, base: u64) -> u32 {
    n.ilog(base)
}

/// `ceil(log_base(n))` in exact integer arithmetic; 0 for `n <= 1`.
pub(crate) fn ceil_log(n: u64, base: u64) -> u32 {
    let mut k = 0;
    let mut p: u128 = 1;
    while p < n as u128 {
        p *= base as u128;
        k += 1;
    }
    k
}
