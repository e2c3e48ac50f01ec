use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cpoly::HPolytope;
use crate::drm::Grid;
use crate::world::{voxelize_point_cloud, Placed, RobotModel, VoxelMap, World};
use crate::Result;

pub const FOREST_HALF_SIDE: f64 = 5.0;
/// Obstacle centers are drawn from the centered square of this half side.
pub const FOREST_CENTER_HALF_SIDE: f64 = 3.5;
pub const FOREST_OBSTACLES: usize = 15;
pub const FOREST_RADIUS: f64 = 0.35;
/// Roadmap grid bin side for Forest scenes.
pub const FOREST_BIN: f64 = 0.06;
pub const FOREST_START: [f64; 2] = [-4.0, -3.4];
pub const FOREST_GOAL: [f64; 2] = [4.0, 3.4];

/// Discs scattered over the middle of a square, traversed by a point robot
/// from the bottom-left to the top-right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestScene {
    pub seed: u64,
    pub centers: Vec<[f64; 2]>,
    pub radius: f64,
}

/// Deterministic in `seed`; obstacles may overlap.
pub fn gen_forest(seed: u64) -> ForestScene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = FOREST_CENTER_HALF_SIDE;
    let centers = (0..FOREST_OBSTACLES).map(|_| [rng.random_range(-h..=h), rng.random_range(-h..=h)]).collect();
    ForestScene { seed, centers, radius: FOREST_RADIUS }
}

pub fn forest_robot() -> RobotModel {
    let h = FOREST_HALF_SIDE;
    RobotModel::point_robot(&[-h, -h], &[h, h]).expect("valid point robot")
}

pub fn forest_domain() -> HPolytope {
    let h = FOREST_HALF_SIDE;
    HPolytope::from_box(&[-h, -h], &[h, h]).expect("valid box")
}

pub fn forest_grid() -> Grid {
    let h = FOREST_HALF_SIDE;
    Grid::planar_covering([-h, -h], [h, h], FOREST_BIN).expect("valid grid")
}

/// The obstacle-free Forest world the roadmaps are built in.
pub fn forest_base_world() -> World {
    World::new(forest_robot(), Vec::new())
}

impl ForestScene {
    pub fn obstacles(&self) -> Vec<Placed> {
        self.centers.iter().map(|c| Placed::sphere([c[0], c[1], 0.0], self.radius)).collect()
    }

    /// Robot and the true discs.
    pub fn world(&self) -> World {
        forest_base_world().with_obstacles(self.obstacles())
    }

    /// A synthetic observation: points on a square lattice of the given
    /// spacing inside each disc plus a ring on each boundary.
    pub fn point_cloud(&self, spacing: f64) -> Vec<[f64; 3]> {
        let mut pts = Vec::new();
        let r = self.radius;
        let steps = (r / spacing).ceil() as i64;
        let ring = ((2.0 * std::f64::consts::PI * r) / spacing).ceil().max(8.0) as usize;
        for c in &self.centers {
            for i in -steps..=steps {
                for j in -steps..=steps {
                    let (dx, dy) = (i as f64 * spacing, j as f64 * spacing);
                    if dx * dx + dy * dy <= r * r {
                        pts.push([c[0] + dx, c[1] + dy, 0.0]);
                    }
                }
            }
            for k in 0..ring {
                let t = k as f64 / ring as f64 * std::f64::consts::TAU;
                pts.push([c[0] + r * t.cos(), c[1] + r * t.sin(), 0.0]);
            }
        }
        pts
    }

    /// Voxelized observation on the roadmap grid.
    pub fn voxel_map(&self, grid: &Grid) -> Result<VoxelMap> {
        voxelize_point_cloud(&self.point_cloud(grid.side / 3.0), grid.side, grid.origin, grid.planar())
    }
}
