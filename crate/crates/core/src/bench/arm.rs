use std::f64::consts::PI;

use nalgebra::Isometry3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cpoly::HPolytope;
use crate::drm::Grid;
use crate::world::{voxelize_point_cloud, CollisionChecker, JointLimits, Placed, RobotModel, Shape, VoxelMap, World};
use crate::{Configuration, Error, Result};

pub const ARM_LINKS: [f64; 3] = [0.5, 0.4, 0.3];
pub const ARM_RADIUS: f64 = 0.04;
pub const ARM_BIN: f64 = 0.04;

pub fn arm_robot() -> RobotModel {
    let limits = JointLimits { lower: vec![-PI; 3], upper: vec![PI; 3] };
    RobotModel::planar_arm(&ARM_LINKS, ARM_RADIUS, 3, limits).expect("valid arm")
}

/// Table top the arm is mounted on; its surface is the line `y = -0.05`.
pub fn arm_table() -> Placed {
    Placed::new(Shape::Box { half_extents: [1.6, 0.1, 0.5] }, Isometry3::translation(0.0, -0.15, 0.0))
}

pub fn arm_base_world() -> World {
    World::new(arm_robot(), vec![arm_table()])
}

pub fn arm_domain() -> HPolytope {
    HPolytope::from_box(&[-PI; 3], &[PI; 3]).expect("valid box")
}

pub fn arm_grid() -> Grid {
    Grid::planar_covering([-1.4, -1.4], [1.4, 1.4], ARM_BIN).expect("valid grid")
}

/// A planar table-top scene for the three-link arm.
#[derive(Debug, Clone)]
pub struct ArmScene {
    pub seed: u64,
    /// Disc objects on the table as (center, radius).
    pub objects: Vec<([f64; 2], f64)>,
    pub vmap: VoxelMap,
    /// Arm, table and the voxel spheres of the observation.
    pub world: World,
    pub start: Configuration,
    pub goal_pose: Isometry3<f64>,
    /// A collision-free configuration realizing `goal_pose`.
    pub goal_witness: Configuration,
}

fn sample_disc_cloud(center: [f64; 2], r: f64, spacing: f64) -> Vec<[f64; 3]> {
    let steps = (r / spacing).ceil() as i64;
    let mut pts = Vec::new();
    for i in -steps..=steps {
        for j in -steps..=steps {
            let (dx, dy) = (i as f64 * spacing, j as f64 * spacing);
            if dx * dx + dy * dy <= r * r {
                pts.push([center[0] + dx, center[1] + dy, 0.0]);
            }
        }
    }
    pts
}

/// Random objects above the table, a start with the tip on the right and
/// a goal pose reached by a configuration with the tip on the left.
pub fn gen_arm_scene(seed: u64) -> Result<ArmScene> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = arm_grid();
    let mut objects = Vec::new();
    while objects.len() < 3 {
        let c: [f64; 2] = [rng.random_range(-0.9..0.9), rng.random_range(0.2..0.95)];
        let r: f64 = rng.random_range(0.06..0.12);
        if (c[0] * c[0] + c[1] * c[1]).sqrt() > 0.35 + r {
            objects.push((c, r));
        }
    }
    let cloud: Vec<[f64; 3]> = objects.iter().flat_map(|(c, r)| sample_disc_cloud(*c, *r, grid.side / 3.0)).collect();
    let vmap = voxelize_point_cloud(&cloud, grid.side, grid.origin, true)?;
    let world = arm_base_world().with_voxels(&vmap);

    let mut pick = |right: bool| -> Result<Configuration> {
        for _ in 0..100_000 {
            let q = Configuration::from_iterator(3, (0..3).map(|_| rng.random_range(-PI..PI)));
            let tip = world.robot.end_effector_pose(q.as_slice())?.translation.vector;
            let side_ok = if right { tip.x > 0.4 } else { tip.x < -0.4 };
            if side_ok && tip.y > 0.1 && world.is_free(q.as_slice()) {
                return Ok(q);
            }
        }
        Err(Error::SamplingExhausted { attempts: 100_000 })
    };
    let start = pick(true)?;
    let goal_witness = pick(false)?;
    let goal_pose = world.robot.end_effector_pose(goal_witness.as_slice())?;
    Ok(ArmScene { seed, objects, vmap, world, start, goal_pose, goal_witness })
}
