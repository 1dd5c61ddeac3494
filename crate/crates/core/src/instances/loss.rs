use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How `l(x, n)` deviates from `mu(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum NoiseModel {
    /// Mean of `n` i.i.d. draws from `N(mu(x), sigma^2)`.
    GaussianMean { sigma: f64 },
    /// `mu(x) + s n^(-1/beta)` with `s` chosen by the adversary.
    Certified(Adversary),
    /// Region-split signs of the uniform-search lower-bound construction.
    Adversarial(SplitAdversary),
}

impl NoiseModel {
    pub fn exact() -> Self {
        NoiseModel::Certified(Adversary::Zero)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        match self {
            NoiseModel::GaussianMean { sigma } if !(sigma.is_finite() && *sigma >= 0.0) => {
                Err(Error::invalid(format!("sigma {sigma} must be finite and >= 0")))
            }
            NoiseModel::Adversarial(s) if s.k0 == 0 => {
                Err(Error::invalid("split adversary needs k0 >= 1"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Adversary {
    /// `l = mu`.
    Zero,
    WorstUp,
    WorstDown,
    /// Sign fixed per arm by a seeded hash of its coordinates.
    RandomSign,
}

impl Adversary {
    pub fn as_str(&self) -> &'static str {
        match self {
            Adversary::Zero => "zero",
            Adversary::WorstUp => "worst_up",
            Adversary::WorstDown => "worst_down",
            Adversary::RandomSign => "random_sign",
        }
    }

    pub(crate) fn sign(&self, seed: u64, x: &[f64]) -> f64 {
        match self {
            Adversary::Zero => 0.0,
            Adversary::WorstUp => 1.0,
            Adversary::WorstDown => -1.0,
            Adversary::RandomSign => {
                if arm_seed(seed ^ 0x5bd1_e995_0000_0001, x) & 1 == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }
}

/// `+` on grid cubes of edge `2^-level` lying inside `[0, k0 2^-level]^d`,
/// `-` elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitAdversary {
    pub level: u32,
    pub k0: u64,
}

impl SplitAdversary {
    pub fn in_inner_region(&self, x: &[f64]) -> bool {
        let side = (1u64 << self.level) as f64;
        let last = (1u64 << self.level) - 1;
        x.iter()
            .all(|&v| ((v * side).floor() as u64).min(last) < self.k0)
    }

    pub(crate) fn sign(&self, x: &[f64]) -> f64 {
        if self.in_inner_region(x) {
            1.0
        } else {
            -1.0
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub(crate) fn mix(a: u64, b: u64) -> u64 {
    splitmix64(a ^ splitmix64(b))
}

/// Stable per-arm seed derived from the instance seed and coordinate bits.
pub(crate) fn arm_seed(seed: u64, x: &[f64]) -> u64 {
    x.iter().fold(splitmix64(seed), |h, v| mix(h, v.to_bits()))
}

/// Memoized partial sums `S_n` of one arm's draws, `S_n = n mu + sigma W_n`.
///
/// Budgets past the last memoized one extend the walk; budgets in between
/// two memoized ones are filled by the Gaussian bridge, so every query is
/// consistent with a single underlying path.
#[derive(Debug, Default, Clone)]
pub(crate) struct SamplePath {
    sums: BTreeMap<u64, f64>,
}

impl SamplePath {
    pub(crate) fn mean_at(&mut self, n: u64, mu: f64, sigma: f64, arm_seed: u64) -> f64 {
        if let Some(s) = self.sums.get(&n) {
            return s / n as f64;
        }
        let (a, s_a) = self
            .sums
            .range(..n)
            .next_back()
            .map(|(&k, &v)| (k, v))
            .unwrap_or((0, 0.0));
        let upper = self.sums.range(n..).next().map(|(&k, &v)| (k, v));
        let b = upper.map_or(0, |(k, _)| k);
        let mut rng = ChaCha8Rng::seed_from_u64(mix(mix(arm_seed, n), mix(a, b)));
        let z: f64 = StandardNormal.sample(&mut rng);
        let gap = (n - a) as f64;
        let s_n = match upper {
            None => s_a + gap * mu + sigma * gap.sqrt() * z,
            Some((b, s_b)) => {
                let span = (b - a) as f64;
                let mean = s_a + gap / span * (s_b - s_a);
                let var = sigma * sigma * gap * (b - n) as f64 / span;
                mean + var.sqrt() * z
            }
        };
        self.sums.insert(n, s_n);
        s_n / n as f64
    }
}
