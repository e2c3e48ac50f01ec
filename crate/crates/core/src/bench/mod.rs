//! Forest scenes, planar-arm scenes, the randomized benchmark harness and
//! SVG rendering.

mod arm;
mod forest;
mod harness;
mod svg;

pub use arm::{
    arm_base_world, arm_domain, arm_grid, arm_robot, arm_table, gen_arm_scene, ArmScene, ARM_BIN, ARM_LINKS, ARM_RADIUS,
};
pub use forest::{
    forest_base_world, forest_domain, forest_grid, forest_robot, gen_forest, ForestScene, FOREST_BIN,
    FOREST_CENTER_HALF_SIDE, FOREST_GOAL, FOREST_HALF_SIDE, FOREST_OBSTACLES, FOREST_RADIUS, FOREST_START,
};
pub use harness::{
    drm_instance_seed, env_instance_seed, plan_instance_seed, run_benchmark, sig6, summarize, write_csv, BenchConfig,
    BenchOutput, BenchRecord, BenchSummary, MeanStd, CSV_HEADER,
};
pub use svg::{render_svg, SvgInput};
