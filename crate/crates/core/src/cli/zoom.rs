use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::MAX_LEVEL;
use crate::instances::{fit_zooming_dimension, InstanceDescriptor, ZoomingStats};

#[derive(Debug, Clone, Serialize)]
pub struct ZoomReport {
    pub instance: String,
    pub lipschitz: f64,
    /// Analytic zooming dimension, when known.
    pub analytic_d_z: Option<f64>,
    pub stats: ZoomingStats,
}

impl ZoomReport {
    pub fn table(&self) -> String {
        let mut out = format!("instance {} (L = {})\n", self.instance, self.lipschitz);
        out.push_str(&format!("{:>12} {:>6} {:>14}\n", "r", "level", "N_r"));
        for row in &self.stats.rows {
            out.push_str(&format!("{:>12} {:>6} {:>14}\n", format!("2^-{}", row.level), row.level, row.n_r));
        }
        out.push_str(&format!(
            "fitted d_z = {:.6}, fitted C_z = {:.6}, envelope C_z = {:.6}{}\n",
            self.stats.fitted_d_z,
            self.stats.fitted_c_z,
            self.stats.envelope_c_z,
            if self.stats.exact { "" } else { " (probe estimate)" }
        ));
        out
    }
}

/// Zooming numbers and the fitted zooming dimension over dyadic scales.
pub fn cmd_zoom(descriptor: &InstanceDescriptor, levels: &[u32]) -> Result<ZoomReport> {
    let instance = descriptor.build(0)?;
    let stats = fit_zooming_dimension(&instance, levels)?;
    Ok(ZoomReport {
        instance: descriptor.label(),
        lipschitz: instance.lipschitz(),
        analytic_d_z: instance.zooming_dim(),
        stats,
    })
}

/// Parses a comma-separated list of dyadic scales into levels. Items are
/// `2^-k`, a decimal power of two such as `0.0625`, or a range `2^-4..2^-10`.
pub fn parse_r_list(text: &str) -> Result<Vec<u32>> {
    let mut levels = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((a, b)) = item.split_once("..") {
            let (lo, hi) = (parse_r(a)?, parse_r(b)?);
            let (lo, hi) = (lo.min(hi), lo.max(hi));
            levels.extend(lo..=hi);
        } else {
            levels.push(parse_r(item)?);
        }
    }
    if levels.is_empty() {
        return Err(Error::Config("empty r list".into()));
    }
    Ok(levels)
}

fn parse_r(item: &str) -> Result<u32> {
    let item = item.trim();
    let bad = || Error::Config(format!("`{item}` is not a dyadic edge length 2^-k"));
    let level = if let Some(exp) = item.strip_prefix("2^") {
        let k: i64 = exp.trim_matches(|c| c == '(' || c == ')').parse().map_err(|_| bad())?;
        if k > 0 {
            return Err(bad());
        }
        (-k) as u32
    } else {
        let r: f64 = item.parse().map_err(|_| bad())?;
        if !(r > 0.0 && r <= 1.0) {
            return Err(bad());
        }
        let k = -r.log2();
        if k.fract() != 0.0 {
            return Err(bad());
        }
        k as u32
    };
    if level > MAX_LEVEL {
        return Err(bad());
    }
    Ok(level)
}
