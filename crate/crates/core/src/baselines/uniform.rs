use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Arm, Session};
use crate::error::{Error, Result};
use crate::executor::BatchExecutor;
use crate::geometry::Cube;
use crate::trace::RunTrace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformSearchConfig {
    /// Grid edge `r = 2^-level`.
    pub level: u32,
    pub total_budget: u64,
    pub seed: u64,
}

/// Splits `[0,1]^d` into `N = r^-d` cubes, plays one uniformly sampled arm
/// per cube with `floor(T / N)` units in a single batch, and returns the arm
/// with the smallest loss.
pub fn uniform_search(config: &UniformSearchConfig, dim: usize, executor: &mut dyn BatchExecutor) -> Result<RunTrace> {
    if dim == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    let bits = config.level as u64 * dim as u64;
    let cubes = if bits < 64 { 1u64 << bits } else { u64::MAX };
    let per_arm = config.total_budget / cubes;
    if per_arm == 0 {
        return Err(Error::BudgetTooSmall {
            required: cubes,
            available: config.total_budget,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut arms: Vec<Arm> = Cube::all_at_level(dim, config.level)?
        .map(|c| Arm::fresh(c.sample_point(&mut rng), Some(c)))
        .collect();
    let mut session = Session::new("uniform", dim, config.total_budget, config.seed);
    let all: Vec<usize> = (0..arms.len()).collect();
    session.play(executor, &mut arms, &all, per_arm, Some(config.level))?;
    Ok(session.finish(&arms, &all))
}
