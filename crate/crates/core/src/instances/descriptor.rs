use serde::{Deserialize, Serialize};

use super::{Adversary, Instance, LimitLoss, NoiseModel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToyVariant {
    Mu1,
    Mu2,
}

impl ToyVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            ToyVariant::Mu1 => "mu1",
            ToyVariant::Mu2 => "mu2",
        }
    }
}

fn default_sigma() -> f64 {
    0.1
}

fn default_beta() -> f64 {
    2.0
}

/// Serializable recipe for an [`Instance`]; the noise seed is supplied at
/// build time so paired runs can share it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceDescriptor {
    Toy {
        variant: ToyVariant,
        d: usize,
        #[serde(default = "default_sigma")]
        sigma: f64,
    },
    Certified {
        base: Box<InstanceDescriptor>,
        adversary: Adversary,
    },
    /// Uniform-search lower-bound instance for grid edge `2^-level`.
    Adversary {
        d: usize,
        #[serde(default = "default_beta")]
        beta: f64,
        budget: u64,
        level: u32,
    },
    /// `mu(x) = mean(x)`; exact losses unless `sigma` is given.
    Linear {
        d: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sigma: Option<f64>,
    },
    Constant {
        d: usize,
        value: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sigma: Option<f64>,
    },
}

impl InstanceDescriptor {
    pub fn dim(&self) -> usize {
        match self {
            InstanceDescriptor::Toy { d, .. }
            | InstanceDescriptor::Adversary { d, .. }
            | InstanceDescriptor::Linear { d, .. }
            | InstanceDescriptor::Constant { d, .. } => *d,
            InstanceDescriptor::Certified { base, .. } => base.dim(),
        }
    }

    pub fn build(&self, seed: u64) -> Result<Instance> {
        let noise = |sigma: &Option<f64>| match sigma {
            Some(s) => NoiseModel::GaussianMean { sigma: *s },
            None => NoiseModel::exact(),
        };
        match self {
            InstanceDescriptor::Toy { variant, d, sigma } => Instance::toy(*variant, *d, *sigma, seed),
            InstanceDescriptor::Certified { base, adversary } => {
                let base = base.build(seed)?;
                Instance::certified(&base, *adversary, seed)
            }
            InstanceDescriptor::Adversary { d, beta, budget, level } => {
                Instance::uniform_search_adversary(*d, *beta, *budget, *level)
            }
            InstanceDescriptor::Linear { d, sigma } => Instance::new(
                format!("linear-d{d}"),
                *d,
                LimitLoss::Linear,
                noise(sigma),
                2.0,
                seed,
            ),
            InstanceDescriptor::Constant { d, value, sigma } => Instance::new(
                format!("constant-d{d}"),
                *d,
                LimitLoss::Constant(*value),
                noise(sigma),
                2.0,
                seed,
            ),
        }
    }

    pub fn label(&self) -> String {
        match self {
            InstanceDescriptor::Toy { variant, d, .. } => format!("toy-{}-d{d}", variant.as_str()),
            InstanceDescriptor::Certified { base, adversary } => {
                format!("certified-{}-{}", adversary.as_str(), base.label())
            }
            InstanceDescriptor::Adversary { d, budget, level, .. } => {
                format!("adversary-d{d}-T{budget}-l{level}")
            }
            InstanceDescriptor::Linear { d, .. } => format!("linear-d{d}"),
            InstanceDescriptor::Constant { d, .. } => format!("constant-d{d}"),
        }
    }

    pub fn parse(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::Config(format!("instance descriptor: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_toy_descriptor() {
        let d = InstanceDescriptor::parse(r#"{"kind": "toy", "variant": "mu1", "d": 2, "sigma": 0.1}"#).unwrap();
        assert_eq!(d, InstanceDescriptor::Toy { variant: ToyVariant::Mu1, d: 2, sigma: 0.1 });
        let inst = d.build(3).unwrap();
        assert_eq!(inst.name(), d.label());
    }

    #[test]
    fn sigma_defaults_to_point_one() {
        let d = InstanceDescriptor::parse(r#"{"kind": "toy", "variant": "mu2", "d": 8}"#).unwrap();
        assert!(matches!(d, InstanceDescriptor::Toy { sigma, .. } if sigma == 0.1));
    }

    #[test]
    fn nested_certified_descriptor() {
        let d = InstanceDescriptor::parse(
            r#"{"kind": "certified", "adversary": "worst_down", "base": {"kind": "toy", "variant": "mu1", "d": 3}}"#,
        )
        .unwrap();
        let inst = d.build(0).unwrap();
        assert_eq!(inst.dim(), 3);
        assert_eq!(inst.loss(&[0.5, 0.0, 0.0], 4).unwrap(), 0.0);
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(InstanceDescriptor::parse(r#"{"kind": "toy", "variant": "mu1", "d": 2, "sigmaa": 1}"#).is_err());
        assert!(InstanceDescriptor::parse(r#"{"kind": "bogus", "d": 2}"#).is_err());
    }
}
