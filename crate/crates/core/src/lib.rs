//! Motion planning through sequences of convex sets.
//!
//! The crate turns collision-free piecewise-linear paths in configuration
//! space into sequences of probabilistically collision-free polytopes and
//! optimizes shortest paths through them:
//!
//! - [`world`]: robot models, forward kinematics, voxel maps and collision checking.
//! - [`cpoly`]: H-representation polytopes and hit-and-run sampling.
//! - [`eizo`]: zero-order inflation of a line segment into a polytope.
//! - [`drm`]: dynamic roadmaps with voxel collision lookup, lazy A* and roadmap IK.
//! - [`scsopt`]: shortest piecewise-linear path through a sequence of convex sets.
//! - [`planner`]: the end-to-end pipeline with collision recovery.
//! - [`bench`]: Forest scenes, planar arm scenes, the benchmark harness and SVG output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod cpoly;
pub mod drm;
pub mod eizo;
mod error;
pub mod planner;
pub mod scsopt;
pub mod seed;
pub mod serde_config;
pub mod world;

pub use error::{Error, Result};

/// A point in configuration space.
pub type Configuration = nalgebra::DVector<f64>;

/// Number of worker threads requested through `CORRIDOR_THREADS`, if set.
pub fn configured_threads() -> Option<usize> {
    std::env::var("CORRIDOR_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&n| n > 0)
}
