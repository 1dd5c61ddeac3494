use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Instance;
use crate::error::{Error, Result};
use crate::geometry::{edge_length, Cube};
use crate::stats::least_squares;

/// Largest number of cubes a single zooming count will enumerate.
pub const ZOOM_ENUMERATION_LIMIT: u128 = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZoomCount {
    pub level: u32,
    pub count: u64,
    /// False when the cube sup came from probing rather than a closed form;
    /// the count is then an upper-bound estimate.
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoomRow {
    pub level: u32,
    pub r: f64,
    pub n_r: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoomingStats {
    pub rows: Vec<ZoomRow>,
    pub fitted_d_z: f64,
    /// `2^intercept` of the log-log fit.
    pub fitted_c_z: f64,
    /// Smallest `a` with `N_r <= a r^(-fitted_d_z)` over the sampled scales.
    pub envelope_c_z: f64,
    pub exact: bool,
}

/// Number of edge-`2^-level` standard cubes whose closed box lies in the
/// near-optimal set `{x : mu(x) - mu* <= (8L+8) r}`.
pub fn zooming_number(instance: &Instance, level: u32) -> Result<ZoomCount> {
    let optimum = instance
        .optimum()
        .ok_or_else(|| Error::invalid("zooming number needs a known optimum"))?
        .value;
    let dim = instance.dim();
    let bits = dim as u128 * level as u128;
    if bits >= 127 || (1u128 << bits) > ZOOM_ENUMERATION_LIMIT {
        return Err(Error::ResourceLimit {
            needed: if bits >= 127 { u128::MAX } else { 1u128 << bits },
            limit: ZOOM_ENUMERATION_LIMIT,
        });
    }
    let threshold = (8.0 * instance.lipschitz() + 8.0) * edge_length(level);
    // Relative slack absorbs rounding in non-dyadic powers.
    let cutoff = threshold * (1.0 + 1e-12);
    let exact = instance.limit().cube_range(&Cube::root(dim)).is_some();
    let mut count = 0u64;
    for cube in Cube::all_at_level(dim, level)? {
        let sup = instance.limit().probed_sup(&cube);
        if sup - optimum <= cutoff {
            count += 1;
        }
    }
    Ok(ZoomCount { level, count, exact })
}

/// Least-squares fit of `log2 N_r` against `-log2 r`: the slope (clamped
/// to `[0, d]`) estimates the zooming dimension and `2^intercept` the constant.
pub fn fit_zooming_dimension(instance: &Instance, levels: &[u32]) -> Result<ZoomingStats> {
    let mut distinct = levels.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::invalid("zooming fit needs at least three distinct scales"));
    }
    let mut rows = Vec::with_capacity(distinct.len());
    let mut exact = true;
    for &level in &distinct {
        let c = zooming_number(instance, level)?;
        exact &= c.exact;
        rows.push(ZoomRow {
            level,
            r: edge_length(level),
            n_r: c.count,
        });
    }
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.n_r > 0)
        .map(|r| (r.level as f64, (r.n_r as f64).log2()))
        .collect();
    if points.is_empty() {
        return Err(Error::FitFailed("every zooming number is zero".into()));
    }
    if points.len() < 2 {
        return Err(Error::FitFailed("fewer than two non-zero zooming numbers".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let (slope, _) = least_squares(&xs, &ys).ok_or_else(|| Error::FitFailed("degenerate scales".into()))?;
    let d_z = slope.clamp(0.0, instance.dim() as f64);
    let mean_x = xs.iter().sum::<f64>() / xs.len() as f64;
    let mean_y = ys.iter().sum::<f64>() / ys.len() as f64;
    let intercept = mean_y - d_z * mean_x;
    let envelope = rows
        .iter()
        .map(|r| r.n_r as f64 * r.r.powf(d_z))
        .fold(0.0, f64::max);
    Ok(ZoomingStats {
        rows,
        fitted_d_z: d_z,
        fitted_c_z: intercept.exp2(),
        envelope_c_z: envelope,
        exact,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureEstimate {
    pub epsilon: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub samples: u64,
}

/// Monte-Carlo estimate of the Lebesgue measure of `{x : mu(x) - mu* < eps}`.
pub fn near_optimal_measure(instance: &Instance, epsilon: f64, samples: u64, seed: u64) -> Result<MeasureEstimate> {
    if samples == 0 {
        return Err(Error::invalid("need at least one sample"));
    }
    let optimum = instance
        .optimum()
        .ok_or_else(|| Error::invalid("measure estimate needs a known optimum"))?
        .value;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0; instance.dim()];
    let mut hits = 0u64;
    for _ in 0..samples {
        x.iter_mut().for_each(|v| *v = rng.random::<f64>());
        if instance.limit_loss(&x) - optimum < epsilon {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    Ok(MeasureEstimate {
        epsilon,
        estimate: p,
        std_error: (p * (1.0 - p) / samples as f64).sqrt(),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{CustomLoss, LimitLoss, NoiseModel, Optimum, ToyVariant};
    use std::sync::Arc;

    fn linear_1d() -> Instance {
        Instance::new("lin", 1, LimitLoss::Linear, NoiseModel::exact(), 2.0, 0).unwrap()
    }

    #[test]
    fn linear_worked_example() {
        assert_eq!(zooming_number(&linear_1d(), 4).unwrap().count, 16);
    }

    #[test]
    fn constant_counts_every_cube() {
        let inst = Instance::new("c", 1, LimitLoss::Constant(0.3), NoiseModel::exact(), 2.0, 0).unwrap();
        assert_eq!(zooming_number(&inst, 3).unwrap().count, 8);
    }

    #[test]
    fn mu2_d2_matches_brute_force() {
        // Independent enumeration over the 32x32 grid:
        // sup over cube (i,j) is (max(i,j)+1)/32; keep when sup^1.5 <= 20/32.
        let inst = Instance::toy(ToyVariant::Mu2, 2, 0.1, 0).unwrap();
        assert_eq!(zooming_number(&inst, 5).unwrap().count, 529);
    }

    #[test]
    fn guard_trips() {
        let inst = Instance::toy(ToyVariant::Mu1, 4, 0.1, 0).unwrap();
        assert!(matches!(zooming_number(&inst, 7), Err(Error::ResourceLimit { .. })));
    }

    #[test]
    fn fit_linear_is_flat() {
        let s = fit_zooming_dimension(&linear_1d(), &[4, 5, 6, 7, 8]).unwrap();
        assert!(s.rows.iter().all(|r| r.n_r == 16));
        assert_eq!(s.fitted_d_z, 0.0);
        assert_eq!(s.fitted_c_z, 16.0);
    }

    #[test]
    fn fit_mu1_d2_near_zero() {
        // Brute-force N_r at four scales is 256 each (16 cubes per axis).
        let inst = Instance::toy(ToyVariant::Mu1, 2, 0.1, 0).unwrap();
        let s = fit_zooming_dimension(&inst, &[4, 5, 6, 7]).unwrap();
        assert!(s.fitted_d_z.abs() < 0.2);
        assert_eq!(s.envelope_c_z, 256.0);
    }

    #[test]
    fn fit_mu2_d2_near_two_thirds() {
        // Offline oracle: N_r = 529, 841, 1369, 2116 for levels 5..8,
        // log-log slope 0.6703.
        let inst = Instance::toy(ToyVariant::Mu2, 2, 0.1, 0).unwrap();
        let s = fit_zooming_dimension(&inst, &[5, 6, 7, 8]).unwrap();
        let counts: Vec<u64> = s.rows.iter().map(|r| r.n_r).collect();
        assert_eq!(counts, vec![529, 841, 1369, 2116]);
        assert!((s.fitted_d_z - 2.0 / 3.0).abs() < 0.3);
        assert!((s.fitted_d_z - 0.67029447).abs() < 1e-6);
    }

    #[test]
    fn fit_needs_three_scales() {
        assert!(matches!(fit_zooming_dimension(&linear_1d(), &[4, 4, 5]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn fit_fails_when_everything_is_far() {
        // Optimum claimed far below the actual values: no cube qualifies.
        let custom = CustomLoss {
            function: Arc::new(|_x: &[f64]| 100.0),
            lipschitz: 1.0,
            optimum: Some(Optimum { point: vec![0.0], value: 0.0 }),
        };
        let inst = Instance::new("far", 1, LimitLoss::Custom(custom), NoiseModel::exact(), 2.0, 0).unwrap();
        assert!(matches!(fit_zooming_dimension(&inst, &[3, 4, 5]), Err(Error::FitFailed(_))));
    }

    #[test]
    fn probing_estimate_for_custom_loss() {
        let custom = CustomLoss {
            function: Arc::new(|x: &[f64]| x[0]),
            lipschitz: 1.0,
            optimum: Some(Optimum { point: vec![0.0], value: 0.0 }),
        };
        let inst = Instance::new("probe", 1, LimitLoss::Custom(custom), NoiseModel::exact(), 2.0, 0).unwrap();
        let c = zooming_number(&inst, 5).unwrap();
        assert!(!c.exact);
        assert_eq!(c.count, 16);
    }

    #[test]
    fn packing_sanity() {
        // N_r never exceeds the number of cubes and shrinks with the threshold.
        for variant in [ToyVariant::Mu1, ToyVariant::Mu2] {
            for d in 1..=3usize {
                let inst = Instance::toy(variant, d, 0.1, 0).unwrap();
                for level in 0..=(18 / d as u32).min(6) {
                    let n = zooming_number(&inst, level).unwrap().count;
                    assert!(n as u128 <= 1u128 << (d as u32 * level));
                }
            }
        }
        let big_l = Instance::toy(ToyVariant::Mu2, 2, 0.1, 0).unwrap();
        let small_l = Instance::toy(ToyVariant::Mu1, 2, 0.1, 0).unwrap();
        // Same level, mu1 <= mu2 pointwise on [0,1]: larger set for the larger threshold.
        assert!(zooming_number(&big_l, 6).unwrap().count >= zooming_number(&small_l, 6).unwrap().count);
    }

    #[test]
    fn measure_matches_closed_form() {
        let inst = Instance::toy(ToyVariant::Mu1, 2, 0.1, 0).unwrap();
        let m = near_optimal_measure(&inst, 0.25, 200_000, 1).unwrap();
        assert!((m.estimate - 0.0625).abs() < 4.0 * m.std_error);
    }
}
