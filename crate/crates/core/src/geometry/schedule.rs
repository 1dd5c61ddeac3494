use serde::{Deserialize, Serialize};

use super::edge_length;
use crate::error::{Error, Result};

/// Coarsest-to-finest dyadic levels cap; `2^-1023` is still a normal f64.
const LEVEL_CAP: u32 = 1000;
const ACE_MAX_TERMS: usize = 100_000;

/// Parameters of the combined (floor/ceil interleaved) schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AceParams {
    pub dim: usize,
    pub zooming_dim: f64,
    pub beta: f64,
    pub total_budget: u64,
}

/// Sequence of edge lengths `r_1 > r_2 > ...`, stored as dyadic levels
/// (`r_m = 2^-level_m`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EdgeLengthSchedule {
    /// `r_m = 2^-m`.
    Doubling,
    /// Combined schedule with skipped batches already removed.
    Ace { params: AceParams, levels: Vec<u32> },
    Explicit { levels: Vec<u32> },
}

impl EdgeLengthSchedule {
    pub fn doubling() -> Self {
        EdgeLengthSchedule::Doubling
    }

    /// Builds the combined sequence. With `s_k` the partial sums of
    /// `c_1 = (d_z+b-1) / ((d_z+b)(d+b)) * log2 T`, `c_{i+1} = eta * c_i`,
    /// `eta = (d+1-d_z)/(d+b)`, odd terms are `min(r_prev, 2^-floor(s_k))`
    /// and even terms `2^-ceil(s_k)`; repeats are dropped.
    pub fn ace(dim: usize, zooming_dim: f64, beta: f64, total_budget: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("ACE schedule needs d >= 1"));
        }
        if !zooming_dim.is_finite() || zooming_dim < 0.0 || zooming_dim > dim as f64 {
            return Err(Error::invalid(format!(
                "zooming dimension {zooming_dim} must lie in [0, {dim}]"
            )));
        }
        if !beta.is_finite() || beta <= 0.0 {
            return Err(Error::invalid(format!("beta {beta} must be positive")));
        }
        if zooming_dim + beta <= 1.0 {
            return Err(Error::invalid(format!(
                "ACE schedule needs d_z + beta > 1 (got {})",
                zooming_dim + beta
            )));
        }
        if total_budget < 2 {
            return Err(Error::invalid("ACE schedule needs T >= 2"));
        }
        let d = dim as f64;
        let log_t = (total_budget as f64).log2();
        let mut c = (zooming_dim + beta - 1.0) / ((zooming_dim + beta) * (d + beta)) * log_t;
        let eta = (d + 1.0 - zooming_dim) / (d + beta);

        let mut levels = Vec::new();
        let mut prev = 0u32; // r_0 = 1
        let mut sum = 0.0;
        for _ in 0..ACE_MAX_TERMS {
            sum += c;
            c *= eta;
            let lo = sum.floor() as u32;
            let hi = sum.ceil() as u32;
            if hi > LEVEL_CAP {
                return Err(Error::invalid("ACE schedule reaches levels beyond 2^-1000"));
            }
            // Odd term: min(r_prev, 2^-floor) is the larger of the two levels.
            for level in [prev.max(lo), hi] {
                if level > prev {
                    levels.push(level);
                    prev = level;
                }
            }
            if c < 1e-12 {
                break;
            }
        }
        Ok(EdgeLengthSchedule::Ace {
            params: AceParams {
                dim,
                zooming_dim,
                beta,
                total_budget,
            },
            levels,
        })
    }

    pub fn explicit(levels: Vec<u32>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::invalid("explicit schedule must not be empty"));
        }
        if levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid(
                "explicit schedule must be strictly decreasing in edge length",
            ));
        }
        if levels[levels.len() - 1] > LEVEL_CAP {
            return Err(Error::invalid("explicit schedule level too fine"));
        }
        Ok(EdgeLengthSchedule::Explicit { levels })
    }

    /// Lazily emitted levels; restartable.
    pub fn levels(&self) -> Levels<'_> {
        match self {
            EdgeLengthSchedule::Doubling => Levels::Doubling(1),
            EdgeLengthSchedule::Ace { levels, .. } | EdgeLengthSchedule::Explicit { levels } => {
                Levels::Listed(levels.iter())
            }
        }
    }

    pub fn edge_lengths(&self) -> impl Iterator<Item = f64> + '_ {
        self.levels().map(edge_length)
    }

    pub fn name(&self) -> &'static str {
        match self {
            EdgeLengthSchedule::Doubling => "doubling",
            EdgeLengthSchedule::Ace { .. } => "ace",
            EdgeLengthSchedule::Explicit { .. } => "explicit",
        }
    }
}

/// Number of leading terms needed before some `r_m <= threshold` (inclusive).
pub fn terms_to_reach(schedule: &EdgeLengthSchedule, threshold: f64) -> Option<usize> {
    schedule
        .edge_lengths()
        .take(LEVEL_CAP as usize)
        .position(|r| r <= threshold)
        .map(|i| i + 1)
}

#[derive(Debug, Clone)]
pub enum Levels<'a> {
    Doubling(u32),
    Listed(std::slice::Iter<'a, u32>),
}

impl Iterator for Levels<'_> {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        match self {
            Levels::Doubling(next) => {
                if *next > LEVEL_CAP {
                    return None;
                }
                let level = *next;
                *next += 1;
                Some(level)
            }
            Levels::Listed(it) => it.next().copied(),
        }
    }
}
