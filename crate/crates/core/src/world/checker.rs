use rayon::prelude::*;

use super::geometry::{collides, Placed};
use super::kinematics::RobotModel;
use super::voxel::VoxelMap;
use crate::{Configuration, Error, Result};

/// Configuration-space collision oracle.
///
/// Implementations must be pure: the answer for a configuration may not
/// depend on evaluation order or on other queries.
pub trait CollisionChecker: Sync {
    fn dof(&self) -> usize;

    /// True iff `q` is collision-free. `q.len()` must equal [`Self::dof`].
    fn is_free(&self, q: &[f64]) -> bool;

    fn batch_free(&self, qs: &[Configuration]) -> Vec<bool> {
        qs.par_iter().map(|q| self.is_free(q.as_slice())).collect()
    }

    /// True iff every sample along `[a, b]` at arc-length spacing at most
    /// `step` is free, both endpoints included.
    fn segment_free(&self, a: &[f64], b: &[f64], step: f64) -> bool {
        segment_samples(a, b, step).all(|q| self.is_free(&q))
    }
}

/// Evenly spaced samples on `[a, b]` with spacing at most `step`.
pub fn segment_samples<'a>(a: &'a [f64], b: &'a [f64], step: f64) -> impl Iterator<Item = Vec<f64>> + 'a {
    let len = a.iter().zip(b).map(|(x, y)| (y - x) * (y - x)).sum::<f64>().sqrt();
    let n = if len > 0.0 { (len / step).ceil().max(1.0) as usize } else { 0 };
    (0..=n).map(move |i| {
        let t = if n == 0 { 0.0 } else { i as f64 / n as f64 };
        a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
    })
}

/// A robot together with the static scene and transient obstacles.
#[derive(Debug, Clone)]
pub struct World {
    pub robot: RobotModel,
    /// Permanent scene geometry such as a table.
    pub static_geometry: Vec<Placed>,
    /// Environment obstacles, e.g. voxel spheres from perception.
    pub obstacles: Vec<Placed>,
}

impl World {
    pub fn new(robot: RobotModel, static_geometry: Vec<Placed>) -> Self {
        Self { robot, static_geometry, obstacles: Vec::new() }
    }

    pub fn with_obstacles(mut self, obstacles: Vec<Placed>) -> Self {
        self.obstacles = obstacles;
        self
    }

    pub fn with_voxels(mut self, map: &VoxelMap) -> Self {
        self.obstacles.extend(map.obstacles());
        self
    }

    /// The same robot and static geometry without environment obstacles.
    pub fn base(&self) -> World {
        World::new(self.robot.clone(), self.static_geometry.clone())
    }

    pub fn check_config(&self, q: &[f64]) -> Result<bool> {
        Error::check_dim(self.robot.dof(), q.len())?;
        Ok(self.is_free(q))
    }

    pub fn check_config_batch(&self, qs: &[Configuration]) -> Result<Vec<bool>> {
        for q in qs {
            Error::check_dim(self.robot.dof(), q.len())?;
        }
        Ok(self.batch_free(qs))
    }

    pub fn check_segment(&self, a: &[f64], b: &[f64], step: f64) -> Result<bool> {
        Error::check_dim(self.robot.dof(), a.len())?;
        Error::check_dim(self.robot.dof(), b.len())?;
        if !(step > 0.0) {
            return Err(Error::InvalidParameter(format!("segment step must be positive, got {step}")));
        }
        Ok(self.segment_free(a, b, step))
    }

    /// Whether the placed robot geometry collides with itself or the scene.
    pub fn placed_free(&self, placed: &[Placed]) -> bool {
        for &(i, j) in self.robot.self_pairs() {
            if collides(&placed[i], &placed[j]) {
                return false;
            }
        }
        let env = self.static_geometry.iter().chain(&self.obstacles);
        for obstacle in env {
            for g in placed {
                if collides(g, obstacle) {
                    return false;
                }
            }
        }
        true
    }
}

impl CollisionChecker for World {
    fn dof(&self) -> usize {
        self.robot.dof()
    }

    fn is_free(&self, q: &[f64]) -> bool {
        match self.robot.placed_geometry(q) {
            Ok(placed) => self.placed_free(&placed),
            Err(_) => false,
        }
    }
}
