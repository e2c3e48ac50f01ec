use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::geometry::Placed;
use crate::{Error, Result};

/// Occupied bins of a regular grid.
///
/// In planar worlds the third index is always zero and obstacle spheres use
/// the circumscribing-circle radius of a square bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoxelMap {
    pub origin: [f64; 3],
    pub side: f64,
    pub planar: bool,
    pub occupied: BTreeSet<[i64; 3]>,
}

impl VoxelMap {
    pub fn empty(origin: [f64; 3], side: f64, planar: bool) -> Self {
        Self { origin, side, planar, occupied: BTreeSet::new() }
    }

    /// Bin containing `p`; points on a bin boundary belong to the higher bin.
    pub fn index_of(&self, p: &[f64; 3]) -> [i64; 3] {
        let mut idx = [0i64; 3];
        let axes = if self.planar { 2 } else { 3 };
        for a in 0..axes {
            idx[a] = ((p[a] - self.origin[a]) / self.side).floor() as i64;
        }
        idx
    }

    pub fn center(&self, idx: &[i64; 3]) -> [f64; 3] {
        let mut c = [0.0; 3];
        for a in 0..3 {
            c[a] =
                if self.planar && a == 2 { self.origin[2] } else { self.origin[a] + (idx[a] as f64 + 0.5) * self.side };
        }
        c
    }

    /// Radius of the sphere circumscribing one bin.
    pub fn sphere_radius(&self) -> f64 {
        if self.planar {
            self.side * std::f64::consts::SQRT_2 / 2.0
        } else {
            self.side * 3f64.sqrt() / 2.0
        }
    }

    pub fn len(&self) -> usize {
        self.occupied.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupied.is_empty()
    }

    /// Obstacle spheres centered at the occupied bins.
    pub fn obstacles(&self) -> Vec<Placed> {
        let r = self.sphere_radius();
        self.occupied.iter().map(|idx| Placed::sphere(self.center(idx), r)).collect()
    }
}

/// Bins every point of the cloud; a bin is occupied iff it holds a point.
pub fn voxelize_point_cloud(points: &[[f64; 3]], side: f64, origin: [f64; 3], planar: bool) -> Result<VoxelMap> {
    if !(side > 0.0 && side.is_finite()) {
        return Err(Error::InvalidParameter(format!("bin side must be positive, got {side}")));
    }
    let mut map = VoxelMap::empty(origin, side, planar);
    for p in points {
        let idx = map.index_of(p);
        map.occupied.insert(idx);
    }
    Ok(map)
}
