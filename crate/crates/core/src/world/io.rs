//! Scene documents and point-cloud files.
//!
//! Scene JSON:
//!
//! ```json
//! {
//!   "robot": {
//!     "joints": [{"type": "revolute", "axis": [0,0,1], "parent": 0, "offset": {"xyz": [0,0,0], "rpy": [0,0,0]}}],
//!     "links": [{"geometries": []}, {"geometries": [{"shape": {"type": "sphere", "radius": 0.1}, "pose": {"xyz": [0.5,0,0]}}]}],
//!     "limits": {"lower": [-3.14], "upper": [3.14]},
//!     "self_pairs": [],
//!     "end_effector": {"link": 1, "offset": {"xyz": [1,0,0]}}
//!   },
//!   "static": [{"shape": {"type": "box", "half_extents": [1,1,0.1]}, "pose": {"xyz": [0,0,-0.2]}}],
//!   "domain": {"lower": [-3.14], "upper": [3.14]}
//! }
//! ```
//!
//! Point clouds are whitespace separated XYZ text, or binary: the magic
//! `PCB1`, a little-endian `u64` point count and four pad bytes, followed by
//! little-endian `f32` triples.

use nalgebra::{Isometry3, Translation3, Unit, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use super::geometry::{Placed, Shape};
use super::kinematics::{Geometry, Joint, JointLimits, JointType, Link, RobotModel};
use super::World;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct PoseSpec {
    #[serde(default)]
    pub xyz: [f64; 3],
    #[serde(default)]
    pub rpy: [f64; 3],
}

impl PoseSpec {
    pub fn to_isometry(&self) -> Isometry3<f64> {
        Isometry3::from_parts(
            Translation3::new(self.xyz[0], self.xyz[1], self.xyz[2]),
            UnitQuaternion::from_euler_angles(self.rpy[0], self.rpy[1], self.rpy[2]),
        )
    }

    pub fn from_isometry(iso: &Isometry3<f64>) -> Self {
        let (r, p, y) = iso.rotation.euler_angles();
        let t = iso.translation.vector;
        Self { xyz: [t.x, t.y, t.z], rpy: [r, p, y] }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JointSpec {
    #[serde(rename = "type")]
    pub kind: JointType,
    #[serde(default = "default_axis")]
    pub axis: [f64; 3],
    pub parent: usize,
    #[serde(default)]
    pub offset: PoseSpec,
}

fn default_axis() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeometrySpec {
    pub shape: Shape,
    #[serde(default)]
    pub pose: PoseSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct LinkSpec {
    #[serde(default)]
    pub geometries: Vec<GeometrySpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundsSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EndEffectorSpec {
    pub link: usize,
    #[serde(default)]
    pub offset: PoseSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RobotSpec {
    pub joints: Vec<JointSpec>,
    pub links: Vec<LinkSpec>,
    pub limits: BoundsSpec,
    #[serde(default)]
    pub self_pairs: Vec<(usize, usize)>,
    #[serde(default)]
    pub end_effector: Option<EndEffectorSpec>,
}

/// The scene document as stored on disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneSpec {
    pub robot: RobotSpec,
    #[serde(default, rename = "static")]
    pub static_geometry: Vec<GeometrySpec>,
    pub domain: BoundsSpec,
    /// Task-space box for roadmap voxel grids; derived from samples if absent.
    #[serde(default)]
    pub workspace: Option<BoundsSpec>,
    /// Whether task space is the xy-plane.
    #[serde(default)]
    pub planar: bool,
}

/// A validated scene.
#[derive(Debug, Clone)]
pub struct Scene {
    pub world: World,
    pub domain_lower: Vec<f64>,
    pub domain_upper: Vec<f64>,
    pub workspace: Option<([f64; 3], [f64; 3])>,
    pub planar: bool,
}

impl RobotSpec {
    pub fn build(&self) -> Result<RobotModel> {
        let joints = self
            .joints
            .iter()
            .map(|j| {
                let axis = Vector3::from(j.axis);
                if !(axis.norm() > 1e-12) || axis.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidModel(format!("invalid joint axis {:?}", j.axis)));
                }
                Ok(Joint {
                    kind: j.kind,
                    axis: Unit::new_normalize(axis),
                    parent: j.parent,
                    offset: j.offset.to_isometry(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let links = self
            .links
            .iter()
            .map(|l| Link {
                geometries: l
                    .geometries
                    .iter()
                    .map(|g| Geometry { shape: g.shape, local_pose: g.pose.to_isometry() })
                    .collect(),
            })
            .collect();
        let limits = JointLimits { lower: self.limits.lower.clone(), upper: self.limits.upper.clone() };
        let robot = RobotModel::new(joints, links, limits, self.self_pairs.clone())?;
        match &self.end_effector {
            Some(ee) => robot.with_end_effector(ee.link, ee.offset.to_isometry()),
            None => Ok(robot),
        }
    }
}

impl SceneSpec {
    pub fn build(&self) -> Result<Scene> {
        let robot = self.robot.build()?;
        let dof = robot.dof();
        Error::check_dim(dof, self.domain.lower.len())?;
        Error::check_dim(dof, self.domain.upper.len())?;
        for (lo, hi) in self.domain.lower.iter().zip(&self.domain.upper) {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::Parse(format!("invalid domain interval [{lo}, {hi}]")));
            }
        }
        let mut static_geometry = Vec::with_capacity(self.static_geometry.len());
        for g in &self.static_geometry {
            g.shape.validate().map_err(Error::Parse)?;
            static_geometry.push(Placed::new(g.shape, g.pose.to_isometry()));
        }
        let workspace = match &self.workspace {
            Some(ws) => {
                if ws.lower.len() != 3 || ws.upper.len() != 3 {
                    return Err(Error::Parse("workspace bounds must be 3-vectors".into()));
                }
                Some(([ws.lower[0], ws.lower[1], ws.lower[2]], [ws.upper[0], ws.upper[1], ws.upper[2]]))
            }
            None => None,
        };
        Ok(Scene {
            world: World::new(robot, static_geometry),
            domain_lower: self.domain.lower.clone(),
            domain_upper: self.domain.upper.clone(),
            workspace,
            planar: self.planar,
        })
    }
}

pub fn parse_scene_json(text: &str) -> Result<Scene> {
    let spec: SceneSpec = serde_json::from_str(text)?;
    spec.build()
}

pub const PCB_MAGIC: &[u8; 4] = b"PCB1";

/// Parses either point-cloud encoding, chosen by the leading magic.
pub fn parse_point_cloud(bytes: &[u8]) -> Result<Vec<[f64; 3]>> {
    if bytes.starts_with(PCB_MAGIC) {
        parse_point_cloud_binary(bytes)
    } else {
        let text = std::str::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))?;
        parse_point_cloud_text(text)
    }
}

/// Whitespace separated coordinates, three per point. `#` starts a comment.
pub fn parse_point_cloud_text(text: &str) -> Result<Vec<[f64; 3]>> {
    let mut values = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| Error::Parse(format!("bad coordinate {tok:?}")))?;
            if !v.is_finite() {
                return Err(Error::Parse(format!("non-finite coordinate {tok:?}")));
            }
            values.push(v);
        }
    }
    if values.len() % 3 != 0 {
        return Err(Error::Parse(format!("{} coordinates is not a multiple of 3", values.len())));
    }
    Ok(values.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect())
}

pub fn parse_point_cloud_binary(bytes: &[u8]) -> Result<Vec<[f64; 3]>> {
    if bytes.len() < 16 || &bytes[..4] != PCB_MAGIC {
        return Err(Error::Parse("missing PCB1 header".into()));
    }
    let count = u64::from_le_bytes(bytes[4..12].try_into().unwrap());
    let body = &bytes[16..];
    let expected = count
        .checked_mul(12)
        .filter(|&n| n == body.len() as u64)
        .ok_or_else(|| Error::Parse(format!("header declares {count} points but body has {} bytes", body.len())))?;
    debug_assert_eq!(expected as usize, body.len());
    let mut out = Vec::with_capacity(count as usize);
    for chunk in body.chunks_exact(12) {
        let mut p = [0.0; 3];
        for (k, v) in p.iter_mut().enumerate() {
            let f = f32::from_le_bytes(chunk[4 * k..4 * k + 4].try_into().unwrap());
            if !f.is_finite() {
                return Err(Error::Parse("non-finite coordinate".into()));
            }
            *v = f as f64;
        }
        out.push(p);
    }
    Ok(out)
}

pub fn encode_point_cloud_binary(points: &[[f64; 3]]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 12 * points.len());
    out.extend_from_slice(PCB_MAGIC);
    out.extend_from_slice(&(points.len() as u64).to_le_bytes());
    out.extend_from_slice(&[0u8; 4]);
    for p in points {
        for v in p {
            out.extend_from_slice(&(*v as f32).to_le_bytes());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::CollisionChecker;

    const ARM: &str = r#"{
      "robot": {
        "joints": [
          {"type": "revolute", "axis": [0,0,1], "parent": 0},
          {"type": "revolute", "axis": [0,0,1], "parent": 1, "offset": {"xyz": [1,0,0]}}
        ],
        "links": [
          {},
          {"geometries": [{"shape": {"type": "sphere", "radius": 0.1}, "pose": {"xyz": [0.5,0,0]}}]},
          {"geometries": [{"shape": {"type": "box", "half_extents": [0.4,0.05,0.05]}, "pose": {"xyz": [0.5,0,0]}}]}
        ],
        "limits": {"lower": [-3, -3], "upper": [3, 3]},
        "end_effector": {"link": 2, "offset": {"xyz": [1,0,0]}}
      },
      "static": [{"shape": {"type": "box", "half_extents": [3,0.2,0.2]}, "pose": {"xyz": [0,-0.5,0]}}],
      "domain": {"lower": [-3, -3], "upper": [3, 3]},
      "planar": true
    }"#;

    #[test]
    fn parses_arm_scene() {
        let scene = parse_scene_json(ARM).unwrap();
        assert_eq!(scene.world.robot.dof(), 2);
        assert!(scene.planar);
        let ee = scene.world.robot.end_effector_pose(&[0.0, 0.0]).unwrap();
        assert!((ee.translation.vector.x - 2.0).abs() < 1e-12);
        // Arm pointing down hits the table.
        assert!(!scene.world.is_free(&[-std::f64::consts::FRAC_PI_2, 0.0]));
        assert!(scene.world.is_free(&[std::f64::consts::FRAC_PI_2, 0.0]));
    }

    #[test]
    fn rejects_bad_domain() {
        let bad = ARM.replace(r#""domain": {"lower": [-3, -3]"#, r#""domain": {"lower": [3, -3]"#);
        assert!(parse_scene_json(&bad).is_err());
        assert!(parse_scene_json("{}").is_err());
    }

    #[test]
    fn text_cloud() {
        let pts = parse_point_cloud(b"0 0 0\n1 2 3 # comment\n\n4 5 6").unwrap();
        assert_eq!(pts, vec![[0.0; 3], [1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]);
        assert!(parse_point_cloud(b"1 2").is_err());
        assert!(parse_point_cloud(b"1 2 nan").is_err());
    }

    #[test]
    fn binary_cloud() {
        let pts = vec![[0.5, -1.25, 2.0], [3.0, 4.0, 5.0]];
        let bytes = encode_point_cloud_binary(&pts);
        assert_eq!(bytes.len(), 16 + 24);
        assert_eq!(parse_point_cloud(&bytes).unwrap(), pts);
        assert!(parse_point_cloud(&bytes[..bytes.len() - 1]).is_err());
        let mut huge = bytes.clone();
        huge[4..12].copy_from_slice(&u64::MAX.to_le_bytes());
        assert!(parse_point_cloud(&huge).is_err());
    }
}
