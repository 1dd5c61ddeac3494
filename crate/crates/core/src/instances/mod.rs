//! Objectives: an analytic limit loss `mu` on `[0,1]^d`, a loss process
//! `l(x, n)` observed after spending `n` budget units on arm `x`, and the
//! metadata (Lipschitz constant, optimum, zooming dimension) the algorithms
//! and invariant checks rely on.

mod descriptor;
mod limit;
mod loss;
mod zooming;

use std::collections::HashMap;
use std::sync::Mutex;

pub use descriptor::{InstanceDescriptor, ToyVariant};
pub use limit::{CustomLoss, LimitLoss};
pub use loss::{Adversary, NoiseModel, SplitAdversary};
pub use zooming::{
    fit_zooming_dimension, near_optimal_measure, zooming_number, MeasureEstimate, ZoomCount,
    ZoomRow, ZoomingStats, ZOOM_ENUMERATION_LIMIT,
};

use crate::error::{Error, Result};
use crate::geometry::Cube;
use loss::SamplePath;

/// Known minimizer and minimum of the limit loss.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub point: Vec<f64>,
    pub value: f64,
}

pub struct Instance {
    name: String,
    dim: usize,
    lipschitz: f64,
    beta: f64,
    limit: LimitLoss,
    noise: NoiseModel,
    seed: u64,
    optimum: Option<Optimum>,
    zooming_dim: Option<f64>,
    // Per-arm partial sums, keyed by the arm's coordinate bit patterns.
    paths: Mutex<HashMap<Vec<u64>, SamplePath>>,
}

impl std::fmt::Debug for Instance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Instance")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("lipschitz", &self.lipschitz)
            .field("beta", &self.beta)
            .field("noise", &self.noise)
            .field("seed", &self.seed)
            .finish_non_exhaustive()
    }
}

impl Instance {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        limit: LimitLoss,
        noise: NoiseModel,
        beta: f64,
        seed: u64,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("instance dimension must be positive"));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::invalid(format!("beta {beta} must be positive")));
        }
        noise.validate()?;
        limit.validate(dim)?;
        let lipschitz = limit.lipschitz();
        let optimum = limit.optimum(dim);
        let zooming_dim = limit.zooming_dimension(dim);
        Ok(Self {
            name: name.into(),
            dim,
            lipschitz,
            beta,
            limit,
            noise,
            seed,
            optimum,
            zooming_dim,
            paths: Mutex::new(HashMap::new()),
        })
    }

    /// `mu_1(x) = |x|_inf` (`variant = Mu1`) or `mu_2(x) = |x|_inf^1.5`, with
    /// losses equal to the mean of `n` Gaussian draws of standard deviation
    /// `sigma` around `mu(x)`.
    pub fn toy(variant: ToyVariant, dim: usize, sigma: f64, seed: u64) -> Result<Self> {
        let limit = match variant {
            ToyVariant::Mu1 => LimitLoss::SupNormPower { exponent: 1.0, offset: 0.0 },
            ToyVariant::Mu2 => LimitLoss::SupNormPower { exponent: 1.5, offset: 0.0 },
        };
        Self::new(
            format!("toy-{}-d{dim}", variant.as_str()),
            dim,
            limit,
            NoiseModel::GaussianMean { sigma },
            2.0,
            seed,
        )
    }

    /// Same limit loss as `base`, with the certified loss process
    /// `l(x, n) = mu(x) + s n^(-1/beta)` chosen by `adversary`.
    pub fn certified(base: &Instance, adversary: Adversary, seed: u64) -> Result<Self> {
        Self::new(
            format!("certified-{}-{}", adversary.as_str(), base.name),
            base.dim,
            base.limit.clone(),
            NoiseModel::Certified(adversary),
            base.beta,
            seed,
        )
    }

    /// Worst case for uniform search with grid edge `2^-level` at budget `T`:
    /// `mu(x) = 1 + |x|_inf`, exact losses when the grid is coarser than
    /// `T^(-1/(d+beta))`, otherwise losses pushed up by `n^(-1/beta)` on the
    /// grid cubes inside `[0, k0 r]^d` and down everywhere else.
    pub fn uniform_search_adversary(dim: usize, beta: f64, total_budget: u64, level: u32) -> Result<Self> {
        if dim == 0 || !(beta.is_finite() && beta > 0.0) {
            return Err(Error::invalid("adversary needs d >= 1 and beta > 0"));
        }
        let cells = (dim as u128) * (level as u128);
        if cells >= 64 || (1u128 << cells) > total_budget as u128 {
            return Err(Error::invalid(format!(
                "grid of 2^({dim}*{level}) cubes exceeds the budget {total_budget}"
            )));
        }
        let tau = adversary_scale(dim, beta, total_budget);
        let r = crate::geometry::edge_length(level);
        let noise = if r >= tau {
            NoiseModel::Certified(Adversary::Zero)
        } else {
            let k0 = (tau / r).floor() as u64;
            let g = k0 as f64 * r;
            if k0 == 0 || k0 > (1u64 << level) || g < 0.5 * tau || g > tau {
                return Err(Error::ConstructionInfeasible(format!(
                    "no grid index k0 with tau/2 <= k0*r <= tau for tau={tau}, r={r}"
                )));
            }
            NoiseModel::Adversarial(SplitAdversary { level, k0 })
        };
        Self::new(
            format!("adversary-d{dim}-T{total_budget}-l{level}"),
            dim,
            LimitLoss::SupNormPower { exponent: 1.0, offset: 1.0 },
            noise,
            beta,
            0,
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn limit(&self) -> &LimitLoss {
        &self.limit
    }

    pub fn optimum(&self) -> Option<&Optimum> {
        self.optimum.as_ref()
    }

    /// Zooming dimension when known analytically.
    pub fn zooming_dim(&self) -> Option<f64> {
        self.zooming_dim
    }

    /// Limit loss `mu(x)`.
    pub fn limit_loss(&self, x: &[f64]) -> f64 {
        self.limit.value(x)
    }

    /// Optimality gap `mu(x) - mu*`, when the optimum is known.
    pub fn gap(&self, x: &[f64]) -> Option<f64> {
        self.optimum.as_ref().map(|o| self.limit.value(x) - o.value)
    }

    /// Exact `(inf, sup)` of `mu` over the closed cube, for analytic losses.
    pub fn cube_range(&self, cube: &Cube) -> Option<(f64, f64)> {
        self.limit.cube_range(cube)
    }

    /// Observed loss after a cumulative budget of `n` units on `x`.
    ///
    /// Gaussian losses follow one memoized random walk per arm, so any
    /// sequence of budgets on the same arm sees a single coherent path.
    pub fn loss(&self, x: &[f64], n: u64) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::invalid(format!(
                "point has dimension {}, instance expects {}",
                x.len(),
                self.dim
            )));
        }
        if x.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::invalid(format!("point {x:?} outside [0,1]^d")));
        }
        if n == 0 {
            return Err(Error::invalid("loss requires a positive budget"));
        }
        let mu = self.limit.value(x);
        let value = match &self.noise {
            NoiseModel::GaussianMean { sigma } => {
                if *sigma == 0.0 {
                    mu
                } else {
                    let key: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
                    let mut paths = self.paths.lock().expect("sample path table poisoned");
                    let path = paths.entry(key).or_default();
                    let seed = loss::arm_seed(self.seed, x);
                    path.mean_at(n, mu, *sigma, seed)
                }
            }
            NoiseModel::Certified(adv) => {
                mu + adv.sign(self.seed, x) * (n as f64).powf(-1.0 / self.beta)
            }
            NoiseModel::Adversarial(split) => {
                mu + split.sign(x) * (n as f64).powf(-1.0 / self.beta)
            }
        };
        Ok(value)
    }

    /// Drops memoized sample paths.
    pub fn reset_paths(&self) {
        self.paths.lock().expect("sample path table poisoned").clear();
    }
}

/// Deterministic 64-bit mix of two values, for deriving paired seeds.
pub fn mix_seed(a: u64, b: u64) -> u64 {
    loss::mix(a, b)
}

/// `T^(-1/(d+beta))`, computed through log2 so powers of two stay exact.
pub fn adversary_scale(dim: usize, beta: f64, total_budget: u64) -> f64 {
    (-(total_budget as f64).log2() / (dim as f64 + beta)).exp2()
}
