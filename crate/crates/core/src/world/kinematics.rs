//! Serial-chain robot models and forward kinematics.

use nalgebra::{Isometry3, Matrix6xX, Translation3, Unit, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use super::geometry::{Placed, Shape};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointType {
    Revolute,
    Prismatic,
    Fixed,
}

/// A joint attaching link `index + 1` to `parent`.
#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    pub kind: JointType,
    pub axis: Unit<Vector3<f64>>,
    pub parent: usize,
    /// Transform from the parent link frame to the joint frame at zero motion.
    pub offset: Isometry3<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub shape: Shape,
    pub local_pose: Isometry3<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Link {
    pub geometries: Vec<Geometry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointLimits {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// A kinematic tree (in practice a chain) with collision geometry.
///
/// Link 0 is the fixed base; joint `j` creates link `j + 1`.
#[derive(Debug, Clone)]
pub struct RobotModel {
    joints: Vec<Joint>,
    links: Vec<Link>,
    limits: JointLimits,
    self_pairs: Vec<(usize, usize)>,
    ee_link: usize,
    ee_offset: Isometry3<f64>,
    // Flattened geometry table: (link, index within link).
    geometry_owner: Vec<(usize, usize)>,
    dof: usize,
}

/// Output of forward kinematics.
#[derive(Debug, Clone, PartialEq)]
pub struct Kinematics {
    /// World pose of every collision geometry in flattened order.
    pub geometry_poses: Vec<Isometry3<f64>>,
    pub end_effector: Isometry3<f64>,
}

impl RobotModel {
    pub fn new(
        joints: Vec<Joint>,
        links: Vec<Link>,
        limits: JointLimits,
        self_pairs: Vec<(usize, usize)>,
    ) -> Result<Self> {
        if links.len() != joints.len() + 1 {
            return Err(Error::InvalidModel(format!(
                "expected {} links for {} joints, got {}",
                joints.len() + 1,
                joints.len(),
                links.len()
            )));
        }
        for (j, joint) in joints.iter().enumerate() {
            if joint.parent > j {
                return Err(Error::InvalidModel(format!(
                    "joint {j} has parent link {} which is not yet defined",
                    joint.parent
                )));
            }
        }
        let dof = joints.iter().filter(|j| j.kind != JointType::Fixed).count();
        if limits.lower.len() != dof || limits.upper.len() != dof {
            return Err(Error::InvalidModel(format!("joint limits must have length {dof}")));
        }
        for (lo, hi) in limits.lower.iter().zip(&limits.upper) {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidModel(format!("invalid joint limit [{lo}, {hi}]")));
            }
        }
        let mut geometry_owner = Vec::new();
        for (l, link) in links.iter().enumerate() {
            for (g, geom) in link.geometries.iter().enumerate() {
                geom.shape.validate().map_err(Error::InvalidModel)?;
                geometry_owner.push((l, g));
            }
        }
        for &(a, b) in &self_pairs {
            let (Some(oa), Some(ob)) = (geometry_owner.get(a), geometry_owner.get(b)) else {
                return Err(Error::InvalidModel(format!("self pair ({a}, {b}) out of range")));
            };
            if oa.0 == ob.0 {
                return Err(Error::InvalidModel(format!("self pair ({a}, {b}) lies on a single link")));
            }
        }
        let ee_link = links.len() - 1;
        Ok(Self { joints, links, limits, self_pairs, ee_link, ee_offset: Isometry3::identity(), geometry_owner, dof })
    }

    /// Places the end effector at `offset` relative to `link`.
    pub fn with_end_effector(mut self, link: usize, offset: Isometry3<f64>) -> Result<Self> {
        if link >= self.links.len() {
            return Err(Error::InvalidModel(format!("end-effector link {link} out of range")));
        }
        self.ee_link = link;
        self.ee_offset = offset;
        Ok(self)
    }

    /// A point robot: one prismatic joint per axis and a single zero-radius sphere.
    pub fn point_robot(lower: &[f64], upper: &[f64]) -> Result<Self> {
        let dims = lower.len();
        if dims == 0 || dims > 3 || upper.len() != dims {
            return Err(Error::InvalidModel("point robots have 1 to 3 dimensions".into()));
        }
        let joints = (0..dims)
            .map(|i| Joint {
                kind: JointType::Prismatic,
                axis: Vector3::ith_axis(i),
                parent: i,
                offset: Isometry3::identity(),
            })
            .collect();
        let mut links = vec![Link::default(); dims + 1];
        links[dims]
            .geometries
            .push(Geometry { shape: Shape::Sphere { radius: 0.0 }, local_pose: Isometry3::identity() });
        Self::new(joints, links, JointLimits { lower: lower.to_vec(), upper: upper.to_vec() }, vec![])
    }

    /// A planar arm rotating about z with links along the local x axis.
    ///
    /// Each link carries `spheres_per_link` spheres of `radius` spread along
    /// it. Self-collision pairs cover every pair of links that are not
    /// adjacent.
    pub fn planar_arm(link_lengths: &[f64], radius: f64, spheres_per_link: usize, limits: JointLimits) -> Result<Self> {
        let n = link_lengths.len();
        let mut joints = Vec::with_capacity(n);
        let mut links = vec![Link::default(); n + 1];
        for (i, &len) in link_lengths.iter().enumerate() {
            let offset =
                if i == 0 { Isometry3::identity() } else { Isometry3::translation(link_lengths[i - 1], 0.0, 0.0) };
            joints.push(Joint { kind: JointType::Revolute, axis: Vector3::z_axis(), parent: i, offset });
            for s in 0..spheres_per_link {
                let x = len * (s as f64 + 0.5) / spheres_per_link as f64;
                links[i + 1].geometries.push(Geometry {
                    shape: Shape::Sphere { radius },
                    local_pose: Isometry3::translation(x, 0.0, 0.0),
                });
            }
        }
        let per = spheres_per_link;
        let mut self_pairs = Vec::new();
        for a in 0..n {
            for b in (a + 2)..n {
                for i in 0..per {
                    for j in 0..per {
                        self_pairs.push((a * per + i, b * per + j));
                    }
                }
            }
        }
        let last = *link_lengths.last().unwrap_or(&0.0);
        Self::new(joints, links, limits, self_pairs)?.with_end_effector(n, Isometry3::translation(last, 0.0, 0.0))
    }

    pub fn dof(&self) -> usize {
        self.dof
    }

    pub fn joints(&self) -> &[Joint] {
        &self.joints
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn limits(&self) -> &JointLimits {
        &self.limits
    }

    pub fn self_pairs(&self) -> &[(usize, usize)] {
        &self.self_pairs
    }

    pub fn end_effector(&self) -> (usize, Isometry3<f64>) {
        (self.ee_link, self.ee_offset)
    }

    pub fn geometry_count(&self) -> usize {
        self.geometry_owner.len()
    }

    /// Shape of flattened geometry `index`.
    pub fn geometry(&self, index: usize) -> &Geometry {
        let (l, g) = self.geometry_owner[index];
        &self.links[l].geometries[g]
    }

    pub fn within_limits(&self, q: &[f64]) -> bool {
        q.iter().zip(self.limits.lower.iter().zip(&self.limits.upper)).all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }

    /// World frame of every link.
    pub fn link_frames(&self, q: &[f64]) -> Result<Vec<Isometry3<f64>>> {
        Error::check_dim(self.dof, q.len())?;
        let mut frames = Vec::with_capacity(self.links.len());
        frames.push(Isometry3::identity());
        let mut qi = 0;
        for joint in &self.joints {
            let motion = match joint.kind {
                JointType::Revolute => {
                    let m = Isometry3::from_parts(
                        Translation3::identity(),
                        UnitQuaternion::from_axis_angle(&joint.axis, q[qi]),
                    );
                    qi += 1;
                    m
                }
                JointType::Prismatic => {
                    let m = Isometry3::from_parts(
                        Translation3::from(joint.axis.into_inner() * q[qi]),
                        UnitQuaternion::identity(),
                    );
                    qi += 1;
                    m
                }
                JointType::Fixed => Isometry3::identity(),
            };
            frames.push(frames[joint.parent] * joint.offset * motion);
        }
        Ok(frames)
    }

    pub fn forward_kinematics(&self, q: &[f64]) -> Result<Kinematics> {
        let frames = self.link_frames(q)?;
        let geometry_poses =
            self.geometry_owner.iter().map(|&(l, g)| frames[l] * self.links[l].geometries[g].local_pose).collect();
        Ok(Kinematics { geometry_poses, end_effector: frames[self.ee_link] * self.ee_offset })
    }

    /// Placed collision geometry for configuration `q`.
    pub fn placed_geometry(&self, q: &[f64]) -> Result<Vec<Placed>> {
        let fk = self.forward_kinematics(q)?;
        Ok(fk
            .geometry_poses
            .into_iter()
            .enumerate()
            .map(|(i, pose)| Placed::new(self.geometry(i).shape, pose))
            .collect())
    }

    pub fn end_effector_pose(&self, q: &[f64]) -> Result<Isometry3<f64>> {
        let frames = self.link_frames(q)?;
        Ok(frames[self.ee_link] * self.ee_offset)
    }

    /// Geometric Jacobian of the end effector (linear rows first, then angular).
    pub fn jacobian(&self, q: &[f64]) -> Result<Matrix6xX<f64>> {
        let frames = self.link_frames(q)?;
        let ee = (frames[self.ee_link] * self.ee_offset).translation.vector;
        // A joint moves the end effector only if its child link is an ancestor
        // of (or equal to) the end-effector link.
        let mut on_path = vec![false; self.links.len()];
        let mut l = self.ee_link;
        loop {
            on_path[l] = true;
            if l == 0 {
                break;
            }
            l = self.joints[l - 1].parent;
        }
        let mut jac = Matrix6xX::zeros(self.dof);
        let mut col = 0;
        for (j, joint) in self.joints.iter().enumerate() {
            if joint.kind == JointType::Fixed {
                continue;
            }
            if on_path[j + 1] {
                let frame = frames[joint.parent] * joint.offset;
                let axis = frame.rotation * joint.axis.into_inner();
                match joint.kind {
                    JointType::Revolute => {
                        let lin = axis.cross(&(ee - frame.translation.vector));
                        jac.fixed_view_mut::<3, 1>(0, col).copy_from(&lin);
                        jac.fixed_view_mut::<3, 1>(3, col).copy_from(&axis);
                    }
                    JointType::Prismatic => {
                        jac.fixed_view_mut::<3, 1>(0, col).copy_from(&axis);
                    }
                    JointType::Fixed => unreachable!(),
                }
            }
            col += 1;
        }
        Ok(jac)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn arm(lengths: &[f64]) -> RobotModel {
        let n = lengths.len();
        RobotModel::planar_arm(lengths, 0.05, 1, JointLimits { lower: vec![-3.2; n], upper: vec![3.2; n] }).unwrap()
    }

    #[test]
    fn point_robot_identity() {
        let robot = RobotModel::point_robot(&[-5.0, -5.0], &[5.0, 5.0]).unwrap();
        let ee = robot.end_effector_pose(&[1.0, 2.0]).unwrap();
        assert_eq!(ee.translation.vector, Vector3::new(1.0, 2.0, 0.0));
    }

    #[test]
    fn one_link_tip() {
        let ee = arm(&[1.0]).end_effector_pose(&[0.0]).unwrap();
        assert_abs_diff_eq!(ee.translation.vector, Vector3::new(1.0, 0.0, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn two_link_elbow() {
        // Symbolic FK: x = cos q1 + cos(q1+q2), y = sin q1 + sin(q1+q2) -> (1, 1).
        let ee = arm(&[1.0, 1.0]).end_effector_pose(&[FRAC_PI_2, -FRAC_PI_2]).unwrap();
        assert_abs_diff_eq!(ee.translation.vector, Vector3::new(1.0, 1.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(
            arm(&[1.0, 1.0]).forward_kinematics(&[0.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn fk_is_bitwise_deterministic() {
        let robot = arm(&[1.0, 0.7, 0.4]);
        let q = [0.3, -1.1, 2.0];
        assert_eq!(robot.forward_kinematics(&q).unwrap(), robot.forward_kinematics(&q).unwrap());
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let robot = arm(&[1.0, 0.7, 0.4]);
        let q = [0.3, -1.1, 2.0];
        let jac = robot.jacobian(&q).unwrap();
        let h = 1e-6;
        for i in 0..3 {
            let mut qp = q;
            let mut qm = q;
            qp[i] += h;
            qm[i] -= h;
            let d = (robot.end_effector_pose(&qp).unwrap().translation.vector
                - robot.end_effector_pose(&qm).unwrap().translation.vector)
                / (2.0 * h);
            assert_abs_diff_eq!(jac.fixed_view::<3, 1>(0, i).into_owned(), d, epsilon = 1e-7);
        }
    }

    #[test]
    fn rejects_same_link_self_pair() {
        let mut links = vec![Link::default(), Link::default()];
        for _ in 0..2 {
            links[1]
                .geometries
                .push(Geometry { shape: Shape::Sphere { radius: 0.1 }, local_pose: Isometry3::identity() });
        }
        let joints = vec![Joint {
            kind: JointType::Revolute,
            axis: Vector3::z_axis(),
            parent: 0,
            offset: Isometry3::identity(),
        }];
        let limits = JointLimits { lower: vec![-1.0], upper: vec![1.0] };
        assert!(RobotModel::new(joints, links, limits, vec![(0, 1)]).is_err());
    }
}
