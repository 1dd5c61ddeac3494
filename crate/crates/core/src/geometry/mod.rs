//! Dyadic cubes on `[0,1]^d` under the sup-norm and the edge-length
//! schedules that set the batch structure of the optimizer.

mod cube;
mod schedule;

pub use cube::{Cube, CubeIter, MAX_CUBES, MAX_LEVEL};
pub use schedule::{terms_to_reach, AceParams, EdgeLengthSchedule, Levels};

/// Edge length `2^-level`.
pub fn edge_length(level: u32) -> f64 {
    (-(level as f64)).exp2()
}

/// Sup-norm distance between two points of equal dimension.
pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn sup_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).fold(0.0, f64::max)
}
