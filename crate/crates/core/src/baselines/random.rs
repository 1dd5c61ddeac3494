use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::halving::halving_over;
use super::{Arm, Session};
use crate::error::{Error, Result};
use crate::executor::BatchExecutor;
use crate::trace::RunTrace;

/// How the budget is spread over the sampled arms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RandomPolicy {
    /// `floor(T / N)` units per arm in one batch, then argmin.
    Even,
    /// Successive halving over the sampled arms.
    Sh { eta: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomSearchConfig {
    pub arms: u64,
    pub policy: RandomPolicy,
    pub total_budget: u64,
    pub seed: u64,
}

/// Samples `N` arms uniformly on `[0,1]^d` and allocates the budget by `policy`.
pub fn random_search(config: &RandomSearchConfig, dim: usize, executor: &mut dyn BatchExecutor) -> Result<RunTrace> {
    if dim == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    if config.arms == 0 || config.arms > config.total_budget {
        return Err(Error::invalid(format!(
            "random search needs 1 <= N <= T (N={}, T={})",
            config.arms, config.total_budget
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let points: Vec<Vec<f64>> = (0..config.arms)
        .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
        .collect();
    let mut session = Session::new("random", dim, config.total_budget, config.seed);
    match config.policy {
        RandomPolicy::Even => {
            let mut arms: Vec<Arm> = points.into_iter().map(|p| Arm::fresh(p, None)).collect();
            let all: Vec<usize> = (0..arms.len()).collect();
            let per_arm = config.total_budget / config.arms;
            session.play(executor, &mut arms, &all, per_arm, None)?;
            Ok(session.finish(&arms, &all))
        }
        RandomPolicy::Sh { eta } => {
            halving_over(&mut session, points, eta, executor)?;
            Ok(session.trace)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::executor::InProcessExecutor;
    use crate::instances::{Instance, ToyVariant};

    fn run(arms: u64, total_budget: u64, policy: RandomPolicy) -> RunTrace {
        let inst = Instance::toy(ToyVariant::Mu1, 2, 0.1, 0).unwrap();
        let mut ex = InProcessExecutor::new(&inst, 1).unwrap();
        random_search(&RandomSearchConfig { arms, policy, total_budget, seed: 1 }, 2, &mut ex).unwrap()
    }

    #[test]
    fn single_arm_is_returned() {
        let t = run(1, 100, RandomPolicy::Even);
        assert_eq!(t.output, t.batches[0].arms[0].point);
        assert_eq!(t.total_spent, 100);
    }

    #[test]
    fn n_equals_t_gives_unit_budgets() {
        let t = run(64, 64, RandomPolicy::Even);
        assert!(t.batches[0].arms.iter().all(|a| a.cumulative_budget == 1));
        assert_eq!(t.batches.len(), 1);
    }

    #[test]
    fn sh_policy_runs_rounds() {
        let t = run(9, 900, RandomPolicy::Sh { eta: 3 });
        assert_eq!(t.batches.len(), 2);
        assert!(t.total_spent <= 900);
    }

    #[test]
    fn rejects_more_arms_than_budget() {
        let inst = Instance::toy(ToyVariant::Mu1, 2, 0.1, 0).unwrap();
        let mut ex = InProcessExecutor::new(&inst, 1).unwrap();
        let cfg = RandomSearchConfig { arms: 11, policy: RandomPolicy::Even, total_budget: 10, seed: 0 };
        assert!(random_search(&cfg, 2, &mut ex).is_err());
    }
}
