//! Batched evaluation dispatch.
//!
//! A batch is a set of `(arm, budget)` requests that is run to completion
//! before any loss becomes visible to the caller: [`BatchExecutor::run_batch`]
//! returns every result or an error, never a partial stream.

mod external;

use std::collections::HashSet;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use external::{ExternalEvaluator, EvaluatorSpec, DEFAULT_TIMEOUT_SECS};

use crate::error::{Error, PartialBatch, Result};
use crate::instances::Instance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRequest {
    pub request_id: u64,
    pub point: Vec<f64>,
    /// Total budget the arm will have received once this request completes.
    pub cumulative_budget: u64,
    /// Budget the arm had already received (0 for a fresh arm).
    pub prior_budget: u64,
}

impl EvalRequest {
    pub fn new(request_id: u64, point: Vec<f64>, cumulative_budget: u64, prior_budget: u64) -> Self {
        Self {
            request_id,
            point,
            cumulative_budget,
            prior_budget,
        }
    }

    /// Budget this request consumes.
    pub fn increment(&self) -> u64 {
        self.cumulative_budget - self.prior_budget
    }

    fn validate(&self) -> Result<()> {
        if self.cumulative_budget <= self.prior_budget {
            return Err(Error::invalid(format!(
                "request {}: cumulative budget {} must exceed prior budget {}",
                self.request_id, self.cumulative_budget, self.prior_budget
            )));
        }
        if self.point.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::invalid(format!(
                "request {}: point outside [0,1]^d",
                self.request_id
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub request_id: u64,
    pub loss: f64,
    pub wall_time_ms: u64,
}

pub trait BatchExecutor {
    /// Runs every request and returns results in request order.
    fn run_batch(&mut self, requests: &[EvalRequest]) -> Result<Vec<EvalResult>>;
}

/// Checks the shared preconditions of a batch.
pub(crate) fn validate_batch(requests: &[EvalRequest]) -> Result<()> {
    let mut seen = HashSet::with_capacity(requests.len());
    for r in requests {
        if !seen.insert(r.request_id) {
            return Err(Error::invalid(format!("duplicate request id {}", r.request_id)));
        }
        r.validate()?;
    }
    Ok(())
}

pub(crate) fn check_finite(request_id: u64, loss: f64) -> Result<f64> {
    if loss.is_finite() {
        Ok(loss)
    } else {
        Err(Error::InvalidLoss {
            source_name: format!("request {request_id}"),
            value: loss.to_string(),
        })
    }
}

/// Default worker count: the machine's logical cores.
pub fn default_parallelism() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Evaluates requests against a synthetic [`Instance`].
///
/// Losses depend only on the instance seed and the arm, never on the
/// scheduling of requests, so results are bit-identical at any parallelism.
pub struct InProcessExecutor<'a> {
    instance: &'a Instance,
    pool: Option<rayon::ThreadPool>,
    batches: usize,
}

impl<'a> InProcessExecutor<'a> {
    /// `parallelism == 1` evaluates on the calling thread.
    pub fn new(instance: &'a Instance, parallelism: usize) -> Result<Self> {
        if parallelism == 0 {
            return Err(Error::invalid("parallelism must be positive"));
        }
        let pool = if parallelism > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(parallelism)
                    .build()
                    .map_err(|e| Error::invalid(format!("thread pool: {e}")))?,
            )
        } else {
            None
        };
        Ok(Self {
            instance,
            pool,
            batches: 0,
        })
    }

    pub fn instance(&self) -> &Instance {
        self.instance
    }

    fn evaluate(&self, r: &EvalRequest) -> Result<EvalResult> {
        let start = Instant::now();
        let loss = self.instance.loss(&r.point, r.cumulative_budget)?;
        let loss = check_finite(r.request_id, loss)?;
        Ok(EvalResult {
            request_id: r.request_id,
            loss,
            wall_time_ms: start.elapsed().as_millis() as u64,
        })
    }
}

impl BatchExecutor for InProcessExecutor<'_> {
    fn run_batch(&mut self, requests: &[EvalRequest]) -> Result<Vec<EvalResult>> {
        validate_batch(requests)?;
        let batch = self.batches;
        self.batches += 1;
        let outcomes: Vec<Result<EvalResult>> = match &self.pool {
            Some(pool) => pool.install(|| requests.par_iter().map(|r| self.evaluate(r)).collect()),
            None => requests.iter().map(|r| self.evaluate(r)).collect(),
        };
        let completed = outcomes.iter().filter(|o| o.is_ok()).count();
        let mut results = Vec::with_capacity(requests.len());
        for outcome in outcomes {
            match outcome {
                Ok(r) => results.push(r),
                // Losses that fail validation keep their own kind.
                Err(e @ Error::InvalidLoss { .. }) => return Err(e),
                Err(e) => {
                    return Err(Error::BatchFailed {
                        batch,
                        partial: PartialBatch {
                            completed,
                            total: requests.len(),
                        },
                        source: Box::new(e),
                    })
                }
            }
        }
        Ok(results)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::ToyVariant;

    fn requests(n: u64) -> Vec<EvalRequest> {
        (0..n)
            .map(|i| {
                let x = (i as f64 + 0.5) / n as f64;
                EvalRequest::new(i, vec![x, 1.0 - x], 1 + i % 7, 0)
            })
            .collect()
    }

    #[test]
    fn empty_batch() {
        let inst = Instance::toy(ToyVariant::Mu1, 2, 0.1, 3).unwrap();
        let mut ex = InProcessExecutor::new(&inst, 4).unwrap();
        assert!(ex.run_batch(&[]).unwrap().is_empty());
    }

    #[test]
    fn parallelism_does_not_change_losses() {
        let a = Instance::toy(ToyVariant::Mu1, 2, 0.1, 3).unwrap();
        let b = Instance::toy(ToyVariant::Mu1, 2, 0.1, 3).unwrap();
        let reqs = requests(500);
        let one = InProcessExecutor::new(&a, 1).unwrap().run_batch(&reqs).unwrap();
        let eight = InProcessExecutor::new(&b, 8).unwrap().run_batch(&reqs).unwrap();
        for (x, y) in one.iter().zip(&eight) {
            assert_eq!(x.request_id, y.request_id);
            assert_eq!(x.loss.to_bits(), y.loss.to_bits());
        }
    }

    #[test]
    fn rerun_after_reset_is_identical() {
        let inst = Instance::toy(ToyVariant::Mu2, 2, 0.3, 9).unwrap();
        let reqs = requests(50);
        let first = InProcessExecutor::new(&inst, 2).unwrap().run_batch(&reqs).unwrap();
        inst.reset_paths();
        let again = InProcessExecutor::new(&inst, 2).unwrap().run_batch(&reqs).unwrap();
        assert_eq!(
            first.iter().map(|r| r.loss.to_bits()).collect::<Vec<_>>(),
            again.iter().map(|r| r.loss.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn rejects_bad_requests() {
        let inst = Instance::toy(ToyVariant::Mu1, 1, 0.1, 0).unwrap();
        let mut ex = InProcessExecutor::new(&inst, 1).unwrap();
        let dup = vec![EvalRequest::new(1, vec![0.1], 2, 0), EvalRequest::new(1, vec![0.2], 2, 0)];
        assert!(matches!(ex.run_batch(&dup), Err(Error::InvalidArgument(_))));
        let flat = vec![EvalRequest::new(1, vec![0.1], 2, 2)];
        assert!(matches!(ex.run_batch(&flat), Err(Error::InvalidArgument(_))));
        let wrong_dim = vec![EvalRequest::new(1, vec![0.1, 0.2], 2, 0)];
        assert!(matches!(ex.run_batch(&wrong_dim), Err(Error::BatchFailed { batch: 0, .. })));
    }
}
