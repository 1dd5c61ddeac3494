use rand::Rng;
use serde::{Deserialize, Serialize};

use super::edge_length;
use crate::error::{Error, Result};

/// Finest supported level. Lattice corners stay exactly representable in f64.
pub const MAX_LEVEL: u32 = 52;

/// Upper bound on the number of cubes materialized by a single call.
pub const MAX_CUBES: u128 = 1 << 26;

/// A standard (dyadic) cube of edge `2^-level`.
///
/// The cube covers `prod_j [c_j 2^-level, (c_j + 1) 2^-level)`, with the
/// upper face closed when `c_j` is the last lattice index, so the cubes of
/// one level tile `[0,1]^d` exactly.
///
/// Ordering is by level first, then lexicographic by coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cube {
    level: u32,
    coords: Vec<u64>,
}

impl Cube {
    pub fn new(level: u32, coords: Vec<u64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid("cube dimension must be positive"));
        }
        if level > MAX_LEVEL {
            return Err(Error::invalid(format!(
                "cube level {level} exceeds the finest supported level {MAX_LEVEL}"
            )));
        }
        let side = 1u64 << level;
        if let Some(c) = coords.iter().find(|&&c| c >= side) {
            return Err(Error::invalid(format!(
                "coordinate {c} out of range for level {level}"
            )));
        }
        Ok(Self { level, coords })
    }

    /// The whole space `[0,1]^dim`.
    pub fn root(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        Self {
            level: 0,
            coords: vec![0; dim],
        }
    }

    /// The level-`level` cube holding `point`.
    pub fn containing(point: &[f64], level: u32) -> Result<Self> {
        if level > MAX_LEVEL {
            return Err(Error::invalid(format!("level {level} too fine")));
        }
        let side = 1u64 << level;
        let mut coords = Vec::with_capacity(point.len());
        for &x in point {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::invalid(format!("point coordinate {x} outside [0,1]")));
            }
            // x * 2^level is exact for dyadic scaling.
            let c = (x * side as f64).floor() as u64;
            coords.push(c.min(side - 1));
        }
        Self::new(level, coords)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn edge(&self) -> f64 {
        edge_length(self.level)
    }

    pub fn volume(&self) -> f64 {
        edge_length(self.level).powi(self.dim() as i32)
    }

    pub fn lower(&self, axis: usize) -> f64 {
        self.coords[axis] as f64 * self.edge()
    }

    pub fn upper(&self, axis: usize) -> f64 {
        (self.coords[axis] + 1) as f64 * self.edge()
    }

    pub fn lower_corner(&self) -> Vec<f64> {
        (0..self.dim()).map(|j| self.lower(j)).collect()
    }

    pub fn center(&self) -> Vec<f64> {
        let half = 0.5 * self.edge();
        (0..self.dim()).map(|j| self.lower(j) + half).collect()
    }

    /// Largest sup-norm over the closed cube.
    pub fn max_sup_norm(&self) -> f64 {
        (0..self.dim()).map(|j| self.upper(j)).fold(0.0, f64::max)
    }

    /// Smallest sup-norm over the closed cube.
    pub fn min_sup_norm(&self) -> f64 {
        (0..self.dim()).map(|j| self.lower(j)).fold(0.0, f64::max)
    }

    /// Membership under the half-open convention (closed on the outer boundary).
    pub fn contains(&self, point: &[f64]) -> bool {
        if point.len() != self.dim() {
            return false;
        }
        let last = (1u64 << self.level) - 1;
        point.iter().enumerate().all(|(j, &x)| {
            let lo = self.lower(j);
            let hi = self.upper(j);
            if self.coords[j] == last {
                lo <= x && x <= hi
            } else {
                lo <= x && x < hi
            }
        })
    }

    /// True when `other` lies inside `self` (same dimension, finer or equal level).
    pub fn encloses(&self, other: &Cube) -> bool {
        if other.dim() != self.dim() || other.level < self.level {
            return false;
        }
        let shift = other.level - self.level;
        other
            .coords
            .iter()
            .zip(&self.coords)
            .all(|(&c, &p)| c >> shift == p)
    }

    /// Ancestor at a coarser level.
    pub fn ancestor(&self, level: u32) -> Option<Cube> {
        if level > self.level {
            return None;
        }
        let shift = self.level - level;
        Some(Cube {
            level,
            coords: self.coords.iter().map(|c| c >> shift).collect(),
        })
    }

    /// Split into the `2^(d * (target_level - level))` descendants at
    /// `target_level`, in lexicographic coordinate order.
    pub fn partition(&self, target_level: u32) -> Result<Vec<Cube>> {
        if target_level <= self.level {
            return Err(Error::invalid(format!(
                "target level {target_level} must be finer than cube level {}",
                self.level
            )));
        }
        if target_level > MAX_LEVEL {
            return Err(Error::invalid(format!("level {target_level} too fine")));
        }
        let jump = target_level - self.level;
        let count = children_count(self.dim(), jump)?;
        let per_axis = 1u64 << jump;
        let base: Vec<u64> = self.coords.iter().map(|c| c << jump).collect();
        let mut out = Vec::with_capacity(count as usize);
        let mut offset = vec![0u64; self.dim()];
        loop {
            out.push(Cube {
                level: target_level,
                coords: base.iter().zip(&offset).map(|(b, o)| b + o).collect(),
            });
            if !advance(&mut offset, per_axis) {
                break;
            }
        }
        Ok(out)
    }

    /// Uniform draw from the cube's box; every coordinate stays strictly
    /// below the upper face.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let edge = self.edge();
        (0..self.dim())
            .map(|j| {
                let lo = self.lower(j);
                let hi = self.upper(j);
                let x = lo + rng.random::<f64>() * edge;
                if x >= hi {
                    hi.next_down().max(lo)
                } else {
                    x
                }
            })
            .collect()
    }

    /// Every cube of the given level, lexicographic order.
    pub fn all_at_level(dim: usize, level: u32) -> Result<CubeIter> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        if level > MAX_LEVEL {
            return Err(Error::invalid(format!("level {level} too fine")));
        }
        let total = children_count(dim, level)?;
        Ok(CubeIter {
            level,
            next: Some(vec![0; dim]),
            side: 1u64 << level,
            remaining: total as usize,
        })
    }
}

fn children_count(dim: usize, jump: u32) -> Result<u128> {
    let bits = dim as u128 * jump as u128;
    if bits >= 127 || (1u128 << bits) > MAX_CUBES {
        let needed = if bits >= 127 { u128::MAX } else { 1u128 << bits };
        return Err(Error::ResourceLimit {
            needed,
            limit: MAX_CUBES,
        });
    }
    Ok(1u128 << bits)
}

// Odometer increment, last axis fastest. Returns false after wrapping.
fn advance(digits: &mut [u64], base: u64) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// Iterator over all cubes of one level.
#[derive(Debug, Clone)]
pub struct CubeIter {
    level: u32,
    next: Option<Vec<u64>>,
    side: u64,
    remaining: usize,
}

impl Iterator for CubeIter {
    type Item = Cube;

    fn next(&mut self) -> Option<Cube> {
        let coords = self.next.take()?;
        let mut following = coords.clone();
        if advance(&mut following, self.side) {
            self.next = Some(following);
        }
        self.remaining -= 1;
        Some(Cube {
            level: self.level,
            coords,
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining, Some(self.remaining))
    }
}

impl ExactSizeIterator for CubeIter {}
