use std::fs;
use std::time::Instant;

use super::config::ExperimentConfig;
use super::output::{run_id, write_results, write_trace, ResultRow};
use crate::error::Result;
use crate::executor::ExternalEvaluator;
use crate::runner::{run_algorithm, run_with, ProblemInfo};

/// Executes every (budget, replicate) run of a config, writing one trace per
/// run and `results.csv` into the output directory. Replicate `k` uses seed
/// `seed + k` for both the objective noise and the algorithm.
pub fn cmd_run(config: &ExperimentConfig, parallelism: usize) -> Result<Vec<ResultRow>> {
    config.validate()?;
    fs::create_dir_all(&config.output)?;
    let mut rows = Vec::new();
    for total_budget in config.budgets() {
        for k in 0..config.replicates as u64 {
            let seed = config.seed.wrapping_add(k);
            let start = Instant::now();
            let (label, trace) = match (&config.instance, &config.evaluator) {
                (Some(descriptor), _) => {
                    let instance = descriptor.build(seed)?;
                    let trace = run_algorithm(&config.algorithm, &instance, total_budget, seed, parallelism)?;
                    (descriptor.label(), trace)
                }
                (None, Some(block)) => {
                    let mut executor = ExternalEvaluator::new(block.spec(), parallelism)?;
                    let info = ProblemInfo::black_box(block.dim);
                    let trace = run_with(&config.algorithm, &info, total_budget, seed, &mut executor)?;
                    ("external".to_string(), trace)
                }
                (None, None) => unreachable!("validated"),
            };
            let elapsed = start.elapsed().as_millis() as u64;
            let id = run_id(&trace.algorithm, &label, total_budget, seed);
            let path = write_trace(&config.output, &id, &trace)?;
            log::info!(
                "{id}: best_loss={} regret={:?} batches={} -> {}",
                trace.best_loss,
                trace.simple_regret,
                trace.batch_count(),
                path.display()
            );
            rows.push(ResultRow::from_trace(id, &label, &trace, elapsed));
        }
    }
    write_results(&config.output.join("results.csv"), &rows)?;
    Ok(rows)
}
