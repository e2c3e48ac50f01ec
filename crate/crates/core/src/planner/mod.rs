//! The end-to-end pipeline: roadmap search, path inflation, shortest path
//! through the sets, and collision recovery by set refinement.

mod extra;
mod stages;

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cpoly::HPolytope;
use crate::drm::{astar_lazy, collision_set, shortcut, solve_ik, Drm, IkOptions, PwlPath, SearchOptions};
use crate::eizo::EizoParams;
use crate::scsopt::{lscs_shortest_path, LscsOptions, Scs, ScsPath};
use crate::world::{CollisionChecker, PoseSpec, VoxelMap, World};
use crate::{Configuration, Error, Result};

pub use extra::{inflate_extra_paths, ExtraPath};
pub use stages::{find_path_collisions, inflate_path, refine_sets, PathCollision, SetStats};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Goal {
    /// End-effector pose, solved with roadmap IK.
    Pose(PoseSpec),
    Configuration(Vec<f64>),
}

fn default_step() -> f64 {
    0.1
}

fn default_rounds() -> usize {
    20
}

/// A planning query. Scene and roadmap are supplied separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRequest {
    pub start: Vec<f64>,
    pub goal: Goal,
    #[serde(default)]
    pub eizo: EizoParams,
    /// Step for segment checks; optimized paths are re-checked at a tenth of it.
    #[serde(default = "default_step")]
    pub check_step: f64,
    #[serde(default = "default_rounds")]
    pub max_recovery_rounds: usize,
    #[serde(default)]
    pub n_extra_paths: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub ik: IkOptions,
    #[serde(default)]
    pub lscs: LscsOptions,
    #[serde(default = "default_k_connect")]
    pub k_connect: usize,
}

fn default_k_connect() -> usize {
    10
}

impl PlanRequest {
    pub fn new(start: Vec<f64>, goal: Goal) -> Self {
        Self {
            start,
            goal,
            eizo: EizoParams::default(),
            check_step: default_step(),
            max_recovery_rounds: default_rounds(),
            n_extra_paths: 0,
            seed: 0,
            ik: IkOptions::default(),
            lscs: LscsOptions::default(),
            k_connect: default_k_connect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let req: Self = serde_json::from_str(text)?;
        req.validate()?;
        Ok(req)
    }

    pub fn validate(&self) -> Result<()> {
        self.eizo.validate()?;
        if !(self.check_step > 0.0 && self.check_step.is_finite()) {
            return Err(Error::InvalidParameter(format!("check step must be positive, got {}", self.check_step)));
        }
        if self.max_recovery_rounds == 0 {
            return Err(Error::InvalidParameter("at least one recovery round is required".into()));
        }
        if self.k_connect == 0 {
            return Err(Error::InvalidParameter("k_connect must be positive".into()));
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        let goal_ok = match &self.goal {
            Goal::Pose(p) => finite(&p.xyz) && finite(&p.rpy),
            Goal::Configuration(q) => finite(q),
        };
        if !finite(&self.start) || !goal_ok {
            return Err(Error::InvalidParameter("start and goal must be finite".into()));
        }
        Ok(())
    }

    fn search_options(&self) -> SearchOptions {
        SearchOptions { step: self.check_step, k_connect: self.k_connect }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanStatus {
    Ok,
    /// No roadmap path between start and goal.
    DrmFailed,
    IkFailed,
    /// A seed segment was found in collision while inflating or refining.
    InflationFailed,
    /// The shortest-path program rejected the set sequence.
    OptimizationFailed,
    RecoveryExhausted,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimings {
    pub collision_set_ms: f64,
    pub ik_ms: f64,
    pub search_ms: f64,
    pub inflate_ms: f64,
    pub optimize_ms: f64,
    pub recovery_ms: f64,
}

impl PhaseTimings {
    pub fn total_ms(&self) -> f64 {
        self.collision_set_ms + self.ik_ms + self.search_ms + self.inflate_ms + self.optimize_ms + self.recovery_ms
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanStats {
    pub timings: PhaseTimings,
    pub recovery_rounds: usize,
    pub sets: SetStats,
    pub blocked_nodes: usize,
    pub edge_checks: usize,
    /// Length of the roadmap path before shortcutting.
    pub roadmap_len: Option<f64>,
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub status: PlanStatus,
    pub path: Option<ScsPath>,
    pub scs: Option<Scs>,
    pub seed_path: Option<PwlPath>,
    #[serde(with = "crate::serde_config::option")]
    pub goal: Option<Configuration>,
    pub extra: Vec<ExtraPath>,
    pub stats: PlanStats,
}

impl PlanResult {
    fn failed(status: PlanStatus, stats: PlanStats, message: String) -> Self {
        let stats = PlanStats { message: Some(message), ..stats };
        Self { status, path: None, scs: None, seed_path: None, goal: None, extra: Vec::new(), stats }
    }
}

/// What a query plans against.
#[derive(Debug, Clone, Copy)]
pub struct PlanContext<'a> {
    /// Robot, static scene and the true obstacles used for checking.
    pub world: &'a World,
    pub domain: &'a HPolytope,
    pub drm: &'a Drm,
    /// Observation used to prune the roadmap.
    pub vmap: &'a VoxelMap,
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

/// Runs the full pipeline. Planning failures are reported through
/// [`PlanResult::status`]; malformed input is an error.
pub fn plan(req: &PlanRequest, ctx: &PlanContext) -> Result<PlanResult> {
    req.validate()?;
    let world = ctx.world;
    let dof = world.robot.dof();
    Error::check_dim(dof, req.start.len())?;
    Error::check_dim(dof, ctx.domain.dim())?;
    Error::check_dim(dof, ctx.drm.dof())?;
    let start = Configuration::from_vec(req.start.clone());
    if !world.is_free(start.as_slice()) {
        return Err(Error::InfeasibleEndpoint);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(req.seed);
    let mut stats = PlanStats::default();

    let t = Instant::now();
    let cs = collision_set(ctx.drm, ctx.vmap)?;
    stats.blocked_nodes = cs.len();
    stats.timings.collision_set_ms = ms(t);

    let t = Instant::now();
    let goal = match &req.goal {
        Goal::Configuration(q) => {
            Error::check_dim(dof, q.len())?;
            Configuration::from_vec(q.clone())
        }
        Goal::Pose(p) => match solve_ik(ctx.drm, &cs, &p.to_isometry(), &req.ik, world) {
            Ok(q) => q,
            Err(e) => return Ok(PlanResult::failed(PlanStatus::IkFailed, stats, e.to_string())),
        },
    };
    stats.timings.ik_ms = ms(t);

    let t = Instant::now();
    let fine_step = req.check_step / 10.0;
    let mut search = req.search_options();
    let (found, seed_path) = loop {
        let found = match astar_lazy(ctx.drm, &cs, &start, &goal, world, &search) {
            Ok(f) => f,
            Err(Error::AlreadyAtGoal) => return Err(Error::AlreadyAtGoal),
            Err(e) => return Ok(PlanResult::failed(PlanStatus::DrmFailed, stats, e.to_string())),
        };
        stats.edge_checks += found.edge_checks;
        let seed_path = shortcut(&found.path, world, search.step);
        // A corner clipped between check samples would make inflation fail; redo the search at the fine step.
        if search.step <= fine_step || seed_path.is_free(world, fine_step) {
            break (found, seed_path);
        }
        search.step = fine_step;
    };
    stats.roadmap_len = Some(found.path.length());
    stats.timings.search_ms = ms(t);

    let t = Instant::now();
    let (mut scs, built) = match inflate_path(&seed_path, ctx.domain, &req.eizo, world, &mut rng) {
        Ok(r) => r,
        Err(e) => {
            let mut res = PlanResult::failed(PlanStatus::InflationFailed, stats, e.to_string());
            res.seed_path = Some(seed_path);
            return Ok(res);
        }
    };
    stats.sets.add(&built);
    stats.timings.inflate_ms = ms(t);

    let mut status = PlanStatus::RecoveryExhausted;
    let mut path = None;
    loop {
        let t = Instant::now();
        let opt = match lscs_shortest_path(&scs, &start, &goal, &req.lscs) {
            Ok(p) => p,
            Err(e) => {
                stats.message = Some(e.to_string());
                status = PlanStatus::OptimizationFailed;
                break;
            }
        };
        stats.timings.optimize_ms += ms(t);

        let t = Instant::now();
        let mut collisions = find_path_collisions(&opt, &scs, world, fine_step)?;
        if collisions.is_empty() {
            collisions = find_path_collisions(&opt, &scs, world, req.check_step)?;
        }
        path = Some(opt);
        if collisions.is_empty() {
            stats.timings.recovery_ms += ms(t);
            status = PlanStatus::Ok;
            break;
        }
        if stats.recovery_rounds >= req.max_recovery_rounds {
            stats.message =
                Some(format!("{} colliding samples after {} rounds", collisions.len(), stats.recovery_rounds));
            break;
        }
        stats.recovery_rounds += 1;
        match refine_sets(&mut scs, &collisions, ctx.domain, &req.eizo, world, &mut rng) {
            Ok(s) => stats.sets.add(&s),
            Err(e) => {
                stats.message = Some(e.to_string());
                status = PlanStatus::InflationFailed;
                break;
            }
        }
        stats.timings.recovery_ms += ms(t);
    }
    if status != PlanStatus::Ok {
        path = None;
    }

    let mut extra = Vec::new();
    if status == PlanStatus::Ok && req.n_extra_paths > 0 {
        extra = inflate_extra_paths(
            ctx.drm,
            &cs,
            &scs,
            &start,
            &goal,
            req.n_extra_paths,
            &mut rng,
            &extra::ExtraContext { world, domain: ctx.domain, params: &req.eizo, search: req.search_options() },
        );
    }

    Ok(PlanResult { status, path, scs: Some(scs), seed_path: Some(seed_path), goal: Some(goal), extra, stats })
}

#[cfg(test)]
mod tests;
