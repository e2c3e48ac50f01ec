//! Robot and scene representation, forward kinematics, voxelized obstacles
//! and collision checking.

mod checker;
pub mod geometry;
pub mod io;
pub mod kinematics;
pub mod voxel;

pub use checker::{segment_samples, CollisionChecker, World};
pub use geometry::{collides, Placed, Shape};
pub use io::{
    encode_point_cloud_binary, parse_point_cloud, parse_point_cloud_binary, parse_point_cloud_text, parse_scene_json,
    PoseSpec, Scene, SceneSpec, PCB_MAGIC,
};
pub use kinematics::{Geometry, Joint, JointLimits, JointType, Kinematics, Link, RobotModel};
pub use voxel::{voxelize_point_cloud, VoxelMap};
