//! Batched Lipschitz exploration (BLiE) for budget-constrained pure
//! exploration: dyadic-cube geometry, benchmark objectives, the batched
//! elimination optimizer, baseline searchers, and a batched evaluation layer
//! that runs in-process or against an external evaluator process.

pub mod baselines;
pub mod cli;
pub mod error;
pub mod executor;
pub mod geometry;
pub mod instances;
pub mod optimizer;
pub mod runner;
pub mod stats;
pub mod trace;

pub use error::{Error, Result};
pub use executor::{BatchExecutor, EvalRequest, EvalResult, ExternalEvaluator, EvaluatorSpec, InProcessExecutor};
pub use geometry::{Cube, EdgeLengthSchedule};
pub use instances::{Instance, InstanceDescriptor};
pub use optimizer::{run_blie, BlieConfig};
pub use runner::{run_algorithm, AlgorithmConfig};
pub use trace::RunTrace;
