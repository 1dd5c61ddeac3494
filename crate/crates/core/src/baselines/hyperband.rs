use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ilog, Arm, Session};
use crate::error::{Error, Result};
use crate::executor::BatchExecutor;
use crate::trace::RunTrace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperbandConfig {
    pub eta: u64,
    /// Largest per-arm budget `R`; `None` picks the largest power of `eta`
    /// whose full bracket pass fits in `T`.
    #[serde(default, skip_serializing_if = "Option::is_none", rename = "R")]
    pub max_budget: Option<u64>,
    pub total_budget: u64,
    pub seed: u64,
}

/// One Hyperband bracket: successive halving over `arms` fresh samples,
/// starting at `min_budget` units per arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub s: u32,
    pub arms: u64,
    pub min_budget: f64,
    /// `(arms kept, cumulative budget per arm)` for each rung.
    pub rungs: Vec<(u64, u64)>,
}

impl Bracket {
    /// Budget used by a full run of the bracket.
    pub fn cost(&self) -> u128 {
        let mut prev = 0u64;
        let mut total = 0u128;
        for &(n, b) in &self.rungs {
            total += n as u128 * (b.saturating_sub(prev)) as u128;
            prev = b;
        }
        total
    }
}

/// Bracket structure for `(R, eta)`: `s_max = floor(log_eta R)`, bracket `s`
/// samples `n_s = ceil((s_max + 1) eta^s / (s + 1))` arms at `R eta^-s` units,
/// and rung `i` keeps `floor(n_s eta^-i)` arms at `R eta^(i-s)` units.
pub fn bracket_table(max_budget: u64, eta: u64) -> Result<Vec<Bracket>> {
    if eta < 2 {
        return Err(Error::invalid("Hyperband needs eta >= 2"));
    }
    if max_budget < eta {
        return Err(Error::invalid(format!("Hyperband needs R >= eta (R={max_budget}, eta={eta})")));
    }
    let s_max = ilog(max_budget, eta);
    let pow = |k: u32| (eta as u128).pow(k);
    let mut out = Vec::with_capacity(s_max as usize + 1);
    for s in (0..=s_max).rev() {
        let n_s = ((s_max as u128 + 1) * pow(s)).div_ceil(s as u128 + 1);
        let rungs = (0..=s)
            .map(|i| {
                let n_i = (n_s / pow(i)).max(1) as u64;
                let r_i = ((max_budget as u128 * pow(i)) / pow(s)).max(1) as u64;
                (n_i, r_i)
            })
            .collect();
        out.push(Bracket {
            s,
            arms: n_s as u64,
            min_budget: max_budget as f64 / pow(s) as f64,
            rungs,
        });
    }
    Ok(out)
}

/// Largest power of `eta` whose full pass over all brackets costs at most `T`
/// (at least `eta`).
pub fn default_max_budget(eta: u64, total_budget: u64) -> u64 {
    let mut best = eta;
    let mut r = eta as u128;
    while r <= total_budget as u128 {
        let cost: u128 = bracket_table(r as u64, eta)
            .map(|t| t.iter().map(Bracket::cost).sum())
            .unwrap_or(u128::MAX);
        if cost > total_budget as u128 {
            break;
        }
        best = r as u64;
        r *= eta as u128;
    }
    best
}

/// Hyperband with a hard total budget: brackets `s_max..0` are cycled while
/// budget remains; the rung that would overshoot is truncated to what is
/// left, split evenly over its arms, and the run stops there. The output is
/// the arm with the smallest latest loss among everything evaluated.
pub fn hyperband(config: &HyperbandConfig, dim: usize, executor: &mut dyn BatchExecutor) -> Result<RunTrace> {
    if dim == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    let max_budget = config
        .max_budget
        .unwrap_or_else(|| default_max_budget(config.eta, config.total_budget));
    if max_budget > config.total_budget {
        return Err(Error::BudgetTooSmall {
            required: max_budget,
            available: config.total_budget,
        });
    }
    let table = bracket_table(max_budget, config.eta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut session = Session::new("hyperband", dim, config.total_budget, config.seed);
    session
        .trace
        .notes
        .push(format!("R={max_budget} eta={} brackets={}", config.eta, table.len()));
    let mut arms: Vec<Arm> = Vec::new();
    let mut pass = 0u64;
    'outer: loop {
        for bracket in &table {
            let start = arms.len();
            for _ in 0..bracket.arms {
                let p: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
                arms.push(Arm::fresh(p, None));
            }
            let mut survivors: Vec<usize> = (start..arms.len()).collect();
            for (i, &(keep, target)) in bracket.rungs.iter().enumerate() {
                if i > 0 {
                    survivors.sort_by(|&a, &b| arms[a].loss.total_cmp(&arms[b].loss).then(a.cmp(&b)));
                    survivors.truncate(keep as usize);
                    survivors.sort_unstable();
                    session.mark_dropped(&arms, &survivors);
                }
                let prior = arms[survivors[0]].budget;
                let cost = (target - prior) as u128 * survivors.len() as u128;
                let remaining = session.remaining();
                if cost > remaining as u128 {
                    let increment = remaining / survivors.len() as u64;
                    if increment > 0 {
                        session.play(executor, &mut arms, &survivors, prior + increment, None)?;
                    }
                    session.trace.notes.push(format!(
                        "pass {pass}, bracket s={}, rung {i}: truncated to {increment} extra units per arm for {} arms",
                        bracket.s,
                        survivors.len()
                    ));
                    break 'outer;
                }
                session.play(executor, &mut arms, &survivors, target, None)?;
            }
        }
        pass += 1;
        if session.remaining() == 0 {
            break;
        }
    }
    // Drop arms that never received budget (sampled in a truncated bracket).
    let evaluated: Vec<usize> = (0..arms.len()).filter(|&i| arms[i].budget > 0).collect();
    log::debug!("hyperband finished after {pass} full passes, {} arms evaluated", evaluated.len());
    Ok(session.finish(&arms, &evaluated))
}
