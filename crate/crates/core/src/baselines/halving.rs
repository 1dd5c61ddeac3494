use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ceil_log, Arm, Session};
use crate::error::{Error, Result};
use crate::executor::BatchExecutor;
use crate::trace::RunTrace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalvingConfig {
    pub arms: u64,
    pub eta: u64,
    pub total_budget: u64,
    pub seed: u64,
}

/// Successive halving over `arms` uniform samples: `ceil(log_eta N)` rounds,
/// round `k` keeps the best `ceil(N / eta^k)` arms and adds
/// `floor(T / (|S_k| * rounds))` units to each, one batch per round.
pub fn successive_halving(config: &HalvingConfig, dim: usize, executor: &mut dyn BatchExecutor) -> Result<RunTrace> {
    if dim == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let points: Vec<Vec<f64>> = (0..config.arms)
        .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
        .collect();
    let mut session = Session::new("sh", dim, config.total_budget, config.seed);
    halving_over(&mut session, points, config.eta, executor)?;
    Ok(session.trace)
}

/// Runs successive halving on the given arms inside an existing session;
/// leaves the output fields of the session trace filled in.
pub(crate) fn halving_over(
    session: &mut Session,
    points: Vec<Vec<f64>>,
    eta: u64,
    executor: &mut dyn BatchExecutor,
) -> Result<()> {
    let n = points.len() as u64;
    if eta < 2 {
        return Err(Error::invalid("halving factor must be at least 2"));
    }
    if n < eta {
        return Err(Error::invalid(format!("successive halving needs N >= eta (N={n}, eta={eta})")));
    }
    let rounds = ceil_log(n, eta) as u64;
    let total = session.trace.total_budget;
    let mut arms: Vec<Arm> = points.into_iter().map(|p| Arm::fresh(p, None)).collect();
    let mut survivors: Vec<usize> = (0..arms.len()).collect();
    let mut eta_k: u128 = 1;
    for k in 0..rounds {
        let keep = (n as u128).div_ceil(eta_k) as usize;
        if k > 0 {
            // Stable ranking by latest loss: ties keep the earlier arm.
            survivors.sort_by(|&a, &b| arms[a].loss.total_cmp(&arms[b].loss).then(a.cmp(&b)));
            survivors.truncate(keep);
            survivors.sort_unstable();
            session.mark_dropped(&arms, &survivors);
        }
        let increment = total / (survivors.len() as u64 * rounds);
        if increment == 0 {
            return Err(Error::BudgetTooSmall {
                required: survivors.len() as u64 * rounds,
                available: total,
            });
        }
        let target = arms[survivors[0]].budget + increment;
        session.play(executor, &mut arms, &survivors, target, None)?;
        eta_k *= eta as u128;
    }
    session.conclude(&arms, &survivors);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::executor::InProcessExecutor;
    use crate::instances::{Instance, LimitLoss, NoiseModel, ToyVariant};

    fn cfg(arms: u64, eta: u64, total_budget: u64) -> HalvingConfig {
        HalvingConfig { arms, eta, total_budget, seed: 4 }
    }

    #[test]
    fn round_structure() {
        let inst = Instance::toy(ToyVariant::Mu1, 2, 0.1, 0).unwrap();
        let mut ex = InProcessExecutor::new(&inst, 1).unwrap();
        let t = successive_halving(&cfg(8, 2, 240), 2, &mut ex).unwrap();
        let sizes: Vec<usize> = t.batches.iter().map(|b| b.arms.len()).collect();
        assert_eq!(sizes, vec![8, 4, 2]);
        // Increments 240/(8*3)=10, 240/(4*3)=20, 240/(2*3)=40 -> cumulative 10, 30, 70.
        let budgets: Vec<u64> = t.batches.iter().map(|b| b.arms[0].cumulative_budget).collect();
        assert_eq!(budgets, vec![10, 30, 70]);
        assert_eq!(t.total_spent, 240);
    }

    #[test]
    fn single_round_when_n_equals_eta() {
        let inst = Instance::toy(ToyVariant::Mu1, 1, 0.1, 0).unwrap();
        let mut ex = InProcessExecutor::new(&inst, 1).unwrap();
        let t = successive_halving(&cfg(3, 3, 30), 1, &mut ex).unwrap();
        assert_eq!(t.batches.len(), 1);
        assert_eq!(t.batches[0].arms.len(), 3);
    }

    #[test]
    fn exact_losses_return_best_sample() {
        let inst = Instance::new("mu1", 2, LimitLoss::SupNormPower { exponent: 1.0, offset: 0.0 }, NoiseModel::exact(), 2.0, 0).unwrap();
        let mut ex = InProcessExecutor::new(&inst, 1).unwrap();
        let t = successive_halving(&cfg(27, 3, 10_000), 2, &mut ex).unwrap();
        let best = t.batches[0].arms.iter().map(|a| inst.limit_loss(&a.point)).fold(f64::INFINITY, f64::min);
        assert_eq!(inst.limit_loss(&t.output), best);
    }

    #[test]
    fn zero_increment_is_an_error() {
        let inst = Instance::toy(ToyVariant::Mu1, 1, 0.1, 0).unwrap();
        let mut ex = InProcessExecutor::new(&inst, 1).unwrap();
        assert!(matches!(successive_halving(&cfg(8, 2, 20), 1, &mut ex), Err(Error::BudgetTooSmall { .. })));
    }
}
