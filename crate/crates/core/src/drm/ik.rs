use nalgebra::{Isometry3, Matrix6, Vector6};
use serde::{Deserialize, Serialize};

use super::{CollisionSet, Drm};
use crate::world::{CollisionChecker, World};
use crate::{Configuration, Error, Result};

/// Weights of translation and rotation error when ranking roadmap nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IkWeights {
    pub w_t: f64,
    pub w_r: f64,
}

impl Default for IkWeights {
    fn default() -> Self {
        Self { w_t: 1.0, w_r: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IkOptions {
    pub weights: IkWeights,
    /// Roadmap nodes used as warm starts.
    pub candidates: usize,
    pub damping: f64,
    pub max_iters: usize,
    /// Translation (m) and rotation (rad) tolerance for success.
    pub tol: f64,
}

impl Default for IkOptions {
    fn default() -> Self {
        Self { weights: IkWeights::default(), candidates: 5, damping: 1e-2, max_iters: 100, tol: 1e-3 }
    }
}

/// Translation error followed by rotation error (axis times angle), both in
/// the world frame, taking `pose` to `goal`.
fn pose_error(pose: &Isometry3<f64>, goal: &Isometry3<f64>) -> Vector6<f64> {
    let t = goal.translation.vector - pose.translation.vector;
    let r = (goal.rotation * pose.rotation.inverse()).scaled_axis();
    Vector6::new(t.x, t.y, t.z, r.x, r.y, r.z)
}

/// Inverse kinematics warm-started from the roadmap.
///
/// Unblocked nodes are ranked by weighted pose distance to `goal`; the best
/// few are refined by damped least squares with joint-limit clamping. Of the
/// refined configurations that reach the tolerance collision-free in
/// `world`, the one with the smallest pose error is returned.
pub fn solve_ik(
    drm: &Drm,
    cs: &CollisionSet,
    goal: &Isometry3<f64>,
    opts: &IkOptions,
    world: &World,
) -> Result<Configuration> {
    if drm.is_empty() {
        return Err(Error::IkFailed("roadmap is empty".into()));
    }
    Error::check_dim(world.robot.dof(), drm.dof())?;
    let mut ranked: Vec<(f64, usize)> = (0..drm.len())
        .filter(|&i| !cs.is_blocked(i))
        .map(|i| {
            let p = drm.pose(i);
            let dt = (goal.translation.vector - p.translation.vector).norm();
            let dr = goal.rotation.angle_to(&p.rotation);
            (opts.weights.w_t * dt + opts.weights.w_r * dr, i)
        })
        .collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut best: Option<(f64, Configuration)> = None;
    for &(_, i) in ranked.iter().take(opts.candidates) {
        let (q, err) = refine(drm.node(i).clone(), goal, opts, world)?;
        let t_err = err.fixed_rows::<3>(0).norm();
        let r_err = err.fixed_rows::<3>(3).norm();
        if t_err > opts.tol || r_err > opts.tol {
            continue;
        }
        if !world.robot.within_limits(q.as_slice()) || !world.is_free(q.as_slice()) {
            continue;
        }
        let e = err.norm();
        if best.as_ref().is_none_or(|(b, _)| e < *b) {
            best = Some((e, q));
        }
    }
    best.map(|(_, q)| q).ok_or_else(|| {
        Error::IkFailed(format!(
            "none of {} warm starts reached the goal collision-free",
            ranked.len().min(opts.candidates)
        ))
    })
}

fn refine(
    mut q: Configuration,
    goal: &Isometry3<f64>,
    opts: &IkOptions,
    world: &World,
) -> Result<(Configuration, Vector6<f64>)> {
    let robot = &world.robot;
    let limits = robot.limits();
    let lambda2 = opts.damping * opts.damping;
    let mut err = pose_error(&robot.end_effector_pose(q.as_slice())?, goal);
    for _ in 0..opts.max_iters {
        if err.norm() < 1e-12 {
            break;
        }
        let jac = robot.jacobian(q.as_slice())?;
        let jjt = &jac * jac.transpose() + Matrix6::identity() * lambda2;
        let Some(y) = jjt.lu().solve(&err) else { break };
        let dq = jac.transpose() * y;
        let mut next = &q + dq;
        for (j, v) in next.iter_mut().enumerate() {
            *v = v.clamp(limits.lower[j], limits.upper[j]);
        }
        let next_err = pose_error(&robot.end_effector_pose(next.as_slice())?, goal);
        let stalled = (&next - &q).norm() < 1e-15;
        q = next;
        err = next_err;
        if stalled {
            break;
        }
    }
    Ok((q, err))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drm::{build_drm, DrmBuildParams, Grid};
    use crate::world::{JointLimits, Placed, RobotModel};
    use nalgebra::{Translation3, UnitQuaternion};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn point_setup() -> (World, Drm) {
        let world = World::new(RobotModel::point_robot(&[-5.0, -5.0], &[5.0, 5.0]).unwrap(), vec![]);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let grid = Grid::planar_covering([-5.0, -5.0], [5.0, 5.0], 0.5).unwrap();
        let params = DrmBuildParams { n_nodes: 50, ..Default::default() };
        let drm = build_drm(&world, &[-5.0, -5.0], &[5.0, 5.0], &params, grid, &mut rng).unwrap();
        (world, drm)
    }

    #[test]
    fn point_robot_ik_is_identity() {
        let (world, drm) = point_setup();
        let goal = Isometry3::translation(2.3, -1.7, 0.0);
        let q = solve_ik(&drm, &CollisionSet::empty(drm.len()), &goal, &IkOptions::default(), &world).unwrap();
        assert!((q[0] - 2.3).abs() < 1e-12 && (q[1] + 1.7).abs() < 1e-12);
    }

    #[test]
    fn node_pose_returns_node() {
        let (world, drm) = point_setup();
        let goal = *drm.pose(7);
        let q = solve_ik(&drm, &CollisionSet::empty(drm.len()), &goal, &IkOptions::default(), &world).unwrap();
        assert_eq!(&q, drm.node(7));
    }

    #[test]
    fn goal_inside_obstacle_fails() {
        let (world, drm) = point_setup();
        let world = world.with_obstacles(vec![Placed::sphere([1.0, 1.0, 0.0], 0.5)]);
        let goal = Isometry3::translation(1.0, 1.0, 0.0);
        let r = solve_ik(&drm, &CollisionSet::empty(drm.len()), &goal, &IkOptions::default(), &world);
        assert!(matches!(r, Err(Error::IkFailed(_))));
    }

    #[test]
    fn two_link_arm_reaches_target() {
        let pi = std::f64::consts::PI;
        let robot =
            RobotModel::planar_arm(&[1.0, 1.0], 0.05, 2, JointLimits { lower: vec![-pi; 2], upper: vec![pi; 2] })
                .unwrap();
        let world = World::new(robot, vec![]);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let grid = Grid::planar_covering([-2.5, -2.5], [2.5, 2.5], 0.1).unwrap();
        let params = DrmBuildParams { n_nodes: 100, ..Default::default() };
        let drm = build_drm(&world, &[-pi, -pi], &[pi, pi], &params, grid, &mut rng).unwrap();
        let goal = world.robot.end_effector_pose(&[0.7, -1.1]).unwrap();
        let target = Isometry3::from_parts(
            Translation3::from(goal.translation.vector),
            UnitQuaternion::from_euler_angles(0.0, 0.0, -0.4),
        );
        let q = solve_ik(&drm, &CollisionSet::empty(drm.len()), &target, &IkOptions::default(), &world).unwrap();
        let reached = world.robot.end_effector_pose(q.as_slice()).unwrap();
        assert!((reached.translation.vector - target.translation.vector).norm() < 1e-3);
        assert!(reached.rotation.angle_to(&target.rotation) < 1e-3);
    }
}
