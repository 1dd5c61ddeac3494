//! Batched Lipschitz exploration (BLiE).
//!
//! Each batch plays one freshly sampled arm per active cube at the common
//! budget `n_m = ceil(r_m^-beta)`, eliminates every cube whose loss exceeds
//! the batch minimum by more than `alpha * r_m`, and splits the survivors into
//! the next edge length. When the projected cost of the next batch would reach
//! the total budget `T`, the survivors' arms form the candidate set; a final
//! clean-up batch tops each of them up evenly and the arm with the smallest
//! loss is returned.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::executor::{BatchExecutor, EvalRequest};
use crate::geometry::{edge_length, Cube, EdgeLengthSchedule, MAX_CUBES};
use crate::trace::{ArmRecord, BatchKind, BatchRecord, Candidate, RunTrace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlieConfig {
    /// Elimination width; `2L + 2` is the value the guarantees are stated for.
    pub alpha: f64,
    /// Budget exponent: a cube of edge `r` is played with `ceil(r^-beta)` units.
    pub beta: f64,
    pub schedule: EdgeLengthSchedule,
    pub total_budget: u64,
    /// Seeds the arm sampling inside cubes.
    pub seed: u64,
}

impl BlieConfig {
    pub fn new(alpha: f64, beta: f64, schedule: EdgeLengthSchedule, total_budget: u64, seed: u64) -> Self {
        Self {
            alpha,
            beta,
            schedule,
            total_budget,
            seed,
        }
    }

    /// Theory preset `alpha = 2L + 2`.
    pub fn theory_alpha(lipschitz: f64) -> f64 {
        2.0 * lipschitz + 2.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::invalid(format!("alpha {} must be positive", self.alpha)));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::invalid(format!("beta {} must be positive", self.beta)));
        }
        if self.total_budget == 0 {
            return Err(Error::invalid("total budget must be positive"));
        }
        if self.schedule.levels().next().is_none() {
            return Err(Error::invalid("edge-length schedule is empty"));
        }
        Ok(())
    }
}

/// `ceil(r^-beta)` for `r = 2^-level`, or `None` when it exceeds `u64`.
pub fn budget_per_cube(level: u32, beta: f64) -> Option<u64> {
    let n = (level as f64 * beta).exp2().ceil();
    // 2^64 is exactly representable; anything at or above it overflows.
    if n.is_finite() && n < 18_446_744_073_709_551_616.0 {
        Some((n as u64).max(1))
    } else {
        None
    }
}

/// Survivor flags for one batch: cube `i` survives iff
/// `losses[i] - min(losses) <= alpha * r`.
pub fn eliminate(losses: &[f64], alpha: f64, r: f64) -> Result<Vec<bool>> {
    if losses.is_empty() {
        return Err(Error::invalid("elimination needs at least one loss"));
    }
    if let Some(i) = losses.iter().position(|l| !l.is_finite()) {
        return Err(Error::InvalidLoss {
            source_name: format!("cube #{i}"),
            value: losses[i].to_string(),
        });
    }
    let min = losses.iter().copied().fold(f64::INFINITY, f64::min);
    let width = alpha * r;
    Ok(losses.iter().map(|&l| l - min <= width).collect())
}

/// Projected cumulative budget `t + (r_m / r_next)^d * survivors * n_next`
/// for dyadic levels `level < next_level`.
pub fn next_grid_point(t: u64, level: u32, next_level: u32, dim: usize, survivors: u64, n_next: u64) -> Result<u64> {
    if next_level <= level {
        return Err(Error::invalid("next edge length must be strictly smaller"));
    }
    if survivors == 0 {
        return Err(Error::invalid("at least one survivor is required"));
    }
    let shift = (next_level - level) as u64 * dim as u64;
    if shift >= 64 {
        return Err(Error::Overflow("grid point"));
    }
    (1u64 << shift)
        .checked_mul(survivors)
        .and_then(|v| v.checked_mul(n_next))
        .and_then(|v| v.checked_add(t))
        .ok_or(Error::Overflow("grid point"))
}

/// Index of the smallest loss; ties go to the earliest entry.
pub(crate) fn argmin(losses: &[f64]) -> usize {
    let mut best = 0;
    for (i, &l) in losses.iter().enumerate() {
        if l < losses[best] {
            best = i;
        }
    }
    best
}

/// Runs BLiE on a `dim`-dimensional problem through `executor`.
///
/// Regret is not filled in; see [`RunTrace::attach_regret`].
pub fn run_blie(config: &BlieConfig, dim: usize, executor: &mut dyn BatchExecutor) -> Result<RunTrace> {
    config.validate()?;
    if dim == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    let total = config.total_budget;
    let mut levels = config.schedule.levels();
    let first = levels.next().expect("validated non-empty");

    let n1 = budget_per_cube(first, config.beta);
    let bits = first as u64 * dim as u64;
    let cost1: Option<u128> = match n1 {
        Some(n) if bits < 64 => Some((1u128 << bits) * n as u128),
        _ => None,
    };
    match cost1 {
        Some(c) if c <= total as u128 => {}
        _ => {
            let required = cost1.map_or(u64::MAX, |c| u64::try_from(c).unwrap_or(u64::MAX));
            return Err(Error::BudgetTooSmall {
                required,
                available: total,
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut trace = RunTrace {
        algorithm: "blie".into(),
        dim,
        total_budget: total,
        seed: config.seed,
        batches: Vec::new(),
        total_spent: 0,
        candidates: Vec::new(),
        cleanup_budget: 0,
        leftover: 0,
        output: Vec::new(),
        best_loss: f64::NAN,
        simple_regret: None,
        notes: Vec::new(),
    };

    let mut level = first;
    let mut n = n1.expect("checked above");
    let mut active: Vec<Cube> = Cube::all_at_level(dim, first)?.collect();
    let mut next_id = 0u64;
    let mut spent = 0u64;
    // Candidate arms: (cube, point, budget, loss), lexicographic by cube.
    let candidates: Vec<(Cube, Vec<f64>, u64, f64)>;

    loop {
        let points: Vec<Vec<f64>> = active.iter().map(|c| c.sample_point(&mut rng)).collect();
        let requests: Vec<EvalRequest> = points
            .iter()
            .map(|p| {
                next_id += 1;
                EvalRequest::new(next_id, p.clone(), n, 0)
            })
            .collect();
        let results = executor.run_batch(&requests)?;
        let losses: Vec<f64> = results.iter().map(|r| r.loss).collect();
        let cost = active.len() as u64 * n;
        spent += cost;

        let r = edge_length(level);
        let keep = eliminate(&losses, config.alpha, r)?;
        let survivors: Vec<usize> = (0..active.len()).filter(|&i| keep[i]).collect();

        // Decide whether another batch fits.
        let mut projected = None;
        let mut next = None;
        match levels.next() {
            None => trace.notes.push(format!("schedule exhausted after level {level}")),
            Some(next_level) => match budget_per_cube(next_level, config.beta) {
                None => trace.notes.push(format!("budget for level {next_level} overflows")),
                Some(n_next) => {
                    match next_grid_point(spent, level, next_level, dim, survivors.len() as u64, n_next) {
                        Ok(t_next) => {
                            projected = Some(t_next);
                            if t_next < total {
                                next = Some((next_level, n_next));
                            }
                        }
                        // Beyond u64 is beyond any representable T.
                        Err(Error::Overflow(_)) => {}
                        Err(e) => return Err(e),
                    }
                }
            },
        }

        trace.batches.push(BatchRecord {
            index: trace.batches.len(),
            kind: BatchKind::Play,
            level: Some(level),
            edge: Some(r),
            min_loss: losses.iter().copied().fold(f64::INFINITY, f64::min),
            arms: active
                .iter()
                .zip(&points)
                .zip(&losses)
                .zip(&keep)
                .map(|(((c, p), &l), &k)| ArmRecord {
                    cube: Some(c.clone()),
                    point: p.clone(),
                    prior_budget: 0,
                    cumulative_budget: n,
                    loss: l,
                    eliminated: !k,
                })
                .collect(),
            cost,
            grid_point: spent,
            projected_next: projected,
        });

        match next {
            Some((next_level, n_next)) => {
                let mut children = Vec::new();
                for &i in &survivors {
                    children.extend(active[i].partition(next_level)?);
                    if children.len() as u128 > MAX_CUBES {
                        return Err(Error::ResourceLimit {
                            needed: children.len() as u128,
                            limit: MAX_CUBES,
                        });
                    }
                }
                children.sort();
                active = children;
                level = next_level;
                n = n_next;
            }
            None => {
                candidates = survivors
                    .iter()
                    .map(|&i| (active[i].clone(), points[i].clone(), n, losses[i]))
                    .collect();
                break;
            }
        }
    }

    // Clean-up: spread what is left evenly over the candidates.
    let remaining = total - spent;
    let n_f = remaining / candidates.len() as u64;
    let mut finals = candidates;
    if n_f > 0 {
        let requests: Vec<EvalRequest> = finals
            .iter()
            .map(|(_, p, b, _)| {
                next_id += 1;
                EvalRequest::new(next_id, p.clone(), b + n_f, *b)
            })
            .collect();
        let results = executor.run_batch(&requests)?;
        let cost = finals.len() as u64 * n_f;
        spent += cost;
        let mut arms = Vec::with_capacity(finals.len());
        for (cand, res) in finals.iter_mut().zip(&results) {
            arms.push(ArmRecord {
                cube: Some(cand.0.clone()),
                point: cand.1.clone(),
                prior_budget: cand.2,
                cumulative_budget: cand.2 + n_f,
                loss: res.loss,
                eliminated: false,
            });
            cand.2 += n_f;
            cand.3 = res.loss;
        }
        trace.batches.push(BatchRecord {
            index: trace.batches.len(),
            kind: BatchKind::Cleanup,
            level: None,
            edge: None,
            min_loss: results.iter().map(|r| r.loss).fold(f64::INFINITY, f64::min),
            arms,
            cost,
            grid_point: spent,
            projected_next: None,
        });
    }

    let final_losses: Vec<f64> = finals.iter().map(|c| c.3).collect();
    let best = argmin(&final_losses);
    trace.output = finals[best].1.clone();
    trace.best_loss = finals[best].3;
    trace.cleanup_budget = n_f;
    trace.total_spent = spent;
    trace.leftover = total - spent;
    if trace.leftover > 0 {
        trace.notes.push(format!("{} budget units left unspent", trace.leftover));
    }
    trace.candidates = finals
        .into_iter()
        .map(|(cube, point, budget, loss)| Candidate {
            cube: Some(cube),
            point,
            budget,
            loss,
        })
        .collect();
    Ok(trace)
}
