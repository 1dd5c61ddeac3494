use std::fmt;
use std::sync::Arc;

use super::Optimum;
use crate::error::{Error, Result};
use crate::geometry::{sup_norm, Cube};

/// Shared, thread-safe objective function.
pub type LossFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// User-supplied limit loss without an analytic cube range.
#[derive(Clone)]
pub struct CustomLoss {
    pub function: LossFn,
    pub lipschitz: f64,
    pub optimum: Option<Optimum>,
}

impl fmt::Debug for CustomLoss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomLoss")
            .field("lipschitz", &self.lipschitz)
            .field("optimum", &self.optimum)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum LimitLoss {
    /// `offset + |x|_inf^exponent`, exponent >= 1.
    SupNormPower { exponent: f64, offset: f64 },
    /// Mean of the coordinates; `mu(x) = x` in one dimension.
    Linear,
    Constant(f64),
    Custom(CustomLoss),
}

impl LimitLoss {
    pub(crate) fn validate(&self, _dim: usize) -> Result<()> {
        match self {
            LimitLoss::SupNormPower { exponent, offset } => {
                if !(exponent.is_finite() && *exponent >= 1.0 && offset.is_finite()) {
                    return Err(Error::invalid(format!(
                        "sup-norm power needs a finite exponent >= 1, got {exponent}"
                    )));
                }
            }
            LimitLoss::Constant(c) if !c.is_finite() => {
                return Err(Error::invalid("constant loss must be finite"));
            }
            LimitLoss::Custom(c) if !(c.lipschitz.is_finite() && c.lipschitz > 0.0) => {
                return Err(Error::invalid("custom loss needs a positive Lipschitz constant"));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            LimitLoss::SupNormPower { exponent, offset } => offset + sup_norm(x).powf(*exponent),
            LimitLoss::Linear => x.iter().sum::<f64>() / x.len() as f64,
            LimitLoss::Constant(c) => *c,
            LimitLoss::Custom(c) => (c.function)(x),
        }
    }

    /// Sup-norm Lipschitz constant. The sup-norm power uses the tight value
    /// `exponent` (derivative bound of `t^p` on `[0,1]`); a constant loss
    /// reports 1 so that `2L+2` style presets stay meaningful.
    pub fn lipschitz(&self) -> f64 {
        match self {
            LimitLoss::SupNormPower { exponent, .. } => *exponent,
            LimitLoss::Linear => 1.0,
            LimitLoss::Constant(_) => 1.0,
            LimitLoss::Custom(c) => c.lipschitz,
        }
    }

    pub fn optimum(&self, dim: usize) -> Option<Optimum> {
        let origin = vec![0.0; dim];
        match self {
            LimitLoss::SupNormPower { offset, .. } => Some(Optimum { point: origin, value: *offset }),
            LimitLoss::Linear => Some(Optimum { point: origin, value: 0.0 }),
            LimitLoss::Constant(c) => Some(Optimum { point: origin, value: *c }),
            LimitLoss::Custom(c) => c.optimum.clone(),
        }
    }

    pub fn zooming_dimension(&self, dim: usize) -> Option<f64> {
        let d = dim as f64;
        match self {
            // |{x : |x|^p <= c r}| covers ~ (r^(1/p) / r)^d cubes of edge r.
            LimitLoss::SupNormPower { exponent, .. } => Some(d * (1.0 - 1.0 / exponent)),
            LimitLoss::Linear => Some(0.0),
            LimitLoss::Constant(_) => Some(d),
            LimitLoss::Custom(_) => None,
        }
    }

    /// `(inf, sup)` of the loss over the closed cube, when known in closed form.
    pub fn cube_range(&self, cube: &Cube) -> Option<(f64, f64)> {
        match self {
            LimitLoss::SupNormPower { exponent, offset } => Some((
                offset + cube.min_sup_norm().powf(*exponent),
                offset + cube.max_sup_norm().powf(*exponent),
            )),
            LimitLoss::Linear => {
                let d = cube.dim() as f64;
                let lo: f64 = (0..cube.dim()).map(|j| cube.lower(j)).sum::<f64>() / d;
                let hi: f64 = (0..cube.dim()).map(|j| cube.upper(j)).sum::<f64>() / d;
                Some((lo, hi))
            }
            LimitLoss::Constant(c) => Some((*c, *c)),
            LimitLoss::Custom(_) => None,
        }
    }

    /// Probe-based sup over the closed cube: every point of the
    /// `{lower, center, upper}^d` lattice. Exact for the analytic kinds.
    pub fn probed_sup(&self, cube: &Cube) -> f64 {
        if let Some((_, hi)) = self.cube_range(cube) {
            return hi;
        }
        let d = cube.dim();
        let mut best = f64::NEG_INFINITY;
        let mut point = vec![0.0; d];
        for flat in 0..3usize.pow(d as u32) {
            let mut rest = flat;
            for (j, p) in point.iter_mut().enumerate() {
                let lo = cube.lower(j);
                *p = match rest % 3 {
                    0 => lo,
                    1 => lo + 0.5 * cube.edge(),
                    _ => cube.upper(j),
                };
                rest /= 3;
            }
            best = best.max(self.value(&point));
        }
        best
    }
}
