//! Dynamic roadmaps: a probabilistic roadmap built once in the obstacle-free
//! scene, plus a voxel to node lookup that prunes it online when a voxelized
//! observation arrives.

mod build;
mod ik;
mod io;
mod search;

use nalgebra::Isometry3;
use serde::{Deserialize, Serialize};

use crate::world::{collides, CollisionChecker, Placed, VoxelMap, World};
use crate::{Configuration, Error, Result};

pub use build::{build_drm, DrmBuildParams};
pub use ik::{solve_ik, IkOptions, IkWeights};
pub use io::{decode_drm, encode_drm, DRM_MAGIC, DRM_VERSION};
pub use search::{astar_lazy, eager_dijkstra, shortcut, RoadmapPath, SearchOptions};

/// Fixed voxel grid the collision map is indexed by.
///
/// A grid with a single layer along z is planar: its voxels are squares in
/// the xy-plane and their obstacle spheres are circumscribing circles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub origin: [f64; 3],
    pub side: f64,
    pub extents: [u32; 3],
}

impl Grid {
    pub fn new(origin: [f64; 3], side: f64, extents: [u32; 3]) -> Result<Self> {
        if !(side > 0.0 && side.is_finite()) || origin.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("bad grid origin {origin:?} or side {side}")));
        }
        if extents.contains(&0) {
            return Err(Error::InvalidParameter(format!("grid extents must be positive, got {extents:?}")));
        }
        Ok(Self { origin, side, extents })
    }

    /// Smallest planar grid with bins of `side` covering `[lower, upper]` in xy.
    pub fn planar_covering(lower: [f64; 2], upper: [f64; 2], side: f64) -> Result<Self> {
        let n = |a: usize| ((upper[a] - lower[a]) / side).ceil().max(1.0) as u32;
        Self::new([lower[0], lower[1], 0.0], side, [n(0), n(1), 1])
    }

    /// Smallest grid with bins of `side` covering the box `[lower, upper]`,
    /// with at least two layers so that it is not mistaken for a planar grid.
    pub fn covering(lower: [f64; 3], upper: [f64; 3], side: f64) -> Result<Self> {
        let n = |a: usize| ((upper[a] - lower[a]) / side).ceil().max(2.0) as u32;
        Self::new(lower, side, [n(0), n(1), n(2)])
    }

    pub fn planar(&self) -> bool {
        self.extents[2] == 1
    }

    pub fn len(&self) -> usize {
        self.extents.iter().map(|&e| e as usize).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major voxel id, x fastest; `None` outside the grid.
    pub fn voxel_id(&self, idx: [i64; 3]) -> Option<usize> {
        let mut id = 0usize;
        for a in (0..3).rev() {
            let e = self.extents[a] as i64;
            if idx[a] < 0 || idx[a] >= e {
                return None;
            }
            id = id * e as usize + idx[a] as usize;
        }
        Some(id)
    }

    pub fn voxel_index(&self, id: usize) -> [i64; 3] {
        let nx = self.extents[0] as usize;
        let ny = self.extents[1] as usize;
        [(id % nx) as i64, ((id / nx) % ny) as i64, (id / (nx * ny)) as i64]
    }

    /// The voxel map this grid would produce, with no bins occupied.
    pub fn empty_map(&self) -> VoxelMap {
        VoxelMap::empty(self.origin, self.side, self.planar())
    }

    pub fn sphere(&self, id: usize) -> Placed {
        let map = self.empty_map();
        Placed::sphere(map.center(&self.voxel_index(id)), map.sphere_radius())
    }

    /// Index offset that maps bins of `map` onto this grid.
    pub fn offset_of(&self, map: &VoxelMap) -> Result<[i64; 3]> {
        if map.planar != self.planar() {
            return Err(Error::GridMismatch(format!(
                "voxel map planar={} but roadmap grid planar={}",
                map.planar,
                self.planar()
            )));
        }
        if (map.side - self.side).abs() > 1e-12 * self.side {
            return Err(Error::GridMismatch(format!("bin side {} differs from grid side {}", map.side, self.side)));
        }
        let axes = if self.planar() { 2 } else { 3 };
        let mut offset = [0i64; 3];
        for (a, off) in offset.iter_mut().enumerate().take(axes) {
            let shift = (map.origin[a] - self.origin[a]) / self.side;
            let rounded = shift.round();
            if (shift - rounded).abs() > 1e-6 {
                return Err(Error::GridMismatch(format!("origins differ by a fractional bin on axis {a}")));
            }
            *off = rounded as i64;
        }
        Ok(offset)
    }
}

/// A roadmap with its voxel collision lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct Drm {
    pub(crate) dof: usize,
    pub(crate) nodes: Vec<Configuration>,
    pub(crate) adjacency: Vec<Vec<u32>>,
    pub(crate) collision_map: Vec<Vec<u32>>,
    pub(crate) poses: Vec<Isometry3<f64>>,
    pub(crate) grid: Grid,
}

impl Drm {
    pub fn dof(&self) -> usize {
        self.dof
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, i: usize) -> &Configuration {
        &self.nodes[i]
    }

    pub fn nodes(&self) -> &[Configuration] {
        &self.nodes
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.adjacency[i]
    }

    pub fn pose(&self, i: usize) -> &Isometry3<f64> {
        &self.poses[i]
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Nodes whose robot geometry touches the sphere of voxel `id`.
    pub fn voxel_nodes(&self, id: usize) -> &[u32] {
        &self.collision_map[id]
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn is_symmetric(&self) -> bool {
        self.adjacency
            .iter()
            .enumerate()
            .all(|(i, nbrs)| nbrs.iter().all(|&j| self.adjacency[j as usize].binary_search(&(i as u32)).is_ok()))
    }
}

/// Roadmap nodes ruled out by the current observation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollisionSet {
    blocked: Vec<bool>,
    count: usize,
}

impl CollisionSet {
    pub fn empty(n_nodes: usize) -> Self {
        Self { blocked: vec![false; n_nodes], count: 0 }
    }

    pub fn block(&mut self, i: usize) {
        if !self.blocked[i] {
            self.blocked[i] = true;
            self.count += 1;
        }
    }

    pub fn is_blocked(&self, i: usize) -> bool {
        self.blocked[i]
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn capacity(&self) -> usize {
        self.blocked.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocked.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i)
    }
}

/// Union of the collision-map entries of every occupied voxel.
///
/// Bins outside the roadmap grid are ignored: the grid is required to cover
/// everything the robot can reach.
pub fn collision_set(drm: &Drm, vmap: &VoxelMap) -> Result<CollisionSet> {
    let offset = drm.grid.offset_of(vmap)?;
    let mut cs = CollisionSet::empty(drm.len());
    let mut outside = 0usize;
    for idx in &vmap.occupied {
        let global = [idx[0] + offset[0], idx[1] + offset[1], idx[2] + offset[2]];
        match drm.grid.voxel_id(global) {
            Some(id) => {
                for &n in &drm.collision_map[id] {
                    cs.block(n as usize);
                }
            }
            None => outside += 1,
        }
    }
    if outside > 0 {
        log::debug!("{outside} occupied bins lie outside the roadmap grid");
    }
    Ok(cs)
}

/// Collision set computed directly: every node checked against every
/// occupied voxel sphere, ignoring the lookup table.
pub fn collision_set_brute_force(drm: &Drm, robot_world: &World, vmap: &VoxelMap) -> Result<CollisionSet> {
    let spheres = vmap.obstacles();
    let mut cs = CollisionSet::empty(drm.len());
    for (i, q) in drm.nodes.iter().enumerate() {
        let placed = robot_world.robot.placed_geometry(q.as_slice())?;
        if spheres.iter().any(|s| placed.iter().any(|g| collides(g, s))) {
            cs.block(i);
        }
    }
    Ok(cs)
}

/// A piecewise-linear path through configuration space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PwlPath {
    #[serde(with = "crate::serde_config::list")]
    knots: Vec<Configuration>,
}

impl PwlPath {
    /// Drops repeated consecutive knots; at least two distinct knots must remain.
    pub fn new(knots: Vec<Configuration>) -> Result<Self> {
        let dim = knots.first().map_or(0, |k| k.len());
        let mut kept: Vec<Configuration> = Vec::with_capacity(knots.len());
        for k in knots {
            Error::check_dim(dim, k.len())?;
            if k.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter("path knot is not finite".into()));
            }
            if kept.last() != Some(&k) {
                kept.push(k);
            }
        }
        if kept.len() < 2 {
            return Err(Error::Precondition("a path needs two distinct knots".into()));
        }
        Ok(Self { knots: kept })
    }

    pub fn knots(&self) -> &[Configuration] {
        &self.knots
    }

    pub fn dim(&self) -> usize {
        self.knots[0].len()
    }

    pub fn num_segments(&self) -> usize {
        self.knots.len() - 1
    }

    pub fn segment(&self, k: usize) -> crate::eizo::Segment {
        crate::eizo::Segment { v1: self.knots[k].clone(), v2: self.knots[k + 1].clone() }
    }

    pub fn length(&self) -> f64 {
        self.knots.windows(2).map(|w| (&w[1] - &w[0]).norm()).sum()
    }

    pub fn start(&self) -> &Configuration {
        &self.knots[0]
    }

    pub fn end(&self) -> &Configuration {
        self.knots.last().expect("paths have at least two knots")
    }

    pub fn is_free<C: CollisionChecker + ?Sized>(&self, checker: &C, step: f64) -> bool {
        self.knots.windows(2).all(|w| checker.segment_free(w[0].as_slice(), w[1].as_slice(), step))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn voxel_ids_are_x_fastest() {
        let g = Grid::new([0.0; 3], 1.0, [3, 4, 5]).unwrap();
        assert_eq!(g.voxel_id([1, 0, 0]), Some(1));
        assert_eq!(g.voxel_id([0, 1, 0]), Some(3));
        assert_eq!(g.voxel_id([0, 0, 1]), Some(12));
        assert_eq!(g.voxel_id([3, 0, 0]), None);
        assert_eq!(g.voxel_id([-1, 0, 0]), None);
        for id in 0..g.len() {
            assert_eq!(g.voxel_id(g.voxel_index(id)), Some(id));
        }
    }

    #[test]
    fn offset_requires_whole_bins() {
        let g = Grid::new([0.0; 3], 0.5, [4, 4, 4]).unwrap();
        let ok = VoxelMap::empty([1.0, -0.5, 0.0], 0.5, false);
        assert_eq!(g.offset_of(&ok).unwrap(), [2, -1, 0]);
        let bad = VoxelMap::empty([0.2, 0.0, 0.0], 0.5, false);
        assert!(matches!(g.offset_of(&bad), Err(Error::GridMismatch(_))));
        let side = VoxelMap::empty([0.0; 3], 0.25, false);
        assert!(matches!(g.offset_of(&side), Err(Error::GridMismatch(_))));
        let planar = VoxelMap::empty([0.0; 3], 0.5, true);
        assert!(matches!(g.offset_of(&planar), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn path_drops_repeated_knots() {
        let k = |x: f64| Configuration::from_vec(vec![x, 0.0]);
        let p = PwlPath::new(vec![k(0.0), k(0.0), k(1.0), k(3.0)]).unwrap();
        assert_eq!(p.knots().len(), 3);
        assert_eq!(p.length(), 3.0);
        assert!(PwlPath::new(vec![k(1.0), k(1.0)]).is_err());
    }
}
