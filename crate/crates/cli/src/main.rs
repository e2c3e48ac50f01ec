use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use corridor::bench::{render_svg, run_benchmark, write_csv, BenchConfig, SvgInput};
use corridor::cpoly::HPolytope;
use corridor::drm::{build_drm, decode_drm, encode_drm, DrmBuildParams, Grid, PwlPath};
use corridor::eizo::EizoParams;
use corridor::planner::{inflate_path, plan, Goal, PlanContext, PlanRequest, PlanStatus};
use corridor::world::{parse_point_cloud, parse_scene_json, voxelize_point_cloud, PoseSpec, Scene, VoxelMap};
use corridor::{configured_threads, Error};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const EXIT_PLANNING: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(name = "corridor", version, about = "Roadmap planning through inflated convex corridors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a dynamic roadmap in the static scene and write it in binary form.
    BuildDrm(BuildDrmArgs),
    /// Plan a query against a roadmap and an observed point cloud.
    Plan(PlanArgs),
    /// Inflate every segment of a given path into convex sets.
    Inflate(InflateArgs),
    /// Run the randomized Forest benchmark.
    Bench(BenchArgs),
}

#[derive(Args)]
struct BuildDrmArgs {
    #[arg(long)]
    scene: PathBuf,
    #[arg(long, default_value_t = 400)]
    nodes: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Neighbours per node before symmetrization.
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 10.0)]
    d_cs: f64,
    #[arg(long, default_value_t = 10.0)]
    d_ts: f64,
    /// Voxel side of the occupancy grid.
    #[arg(long, default_value_t = 0.06)]
    bin: f64,
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    scene: PathBuf,
    #[arg(long)]
    drm: PathBuf,
    /// Full request as JSON; command-line start, goal and parameters are ignored.
    #[arg(long)]
    request: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    start: Option<Vec<f64>>,
    /// Goal configuration.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, conflicts_with = "goal_pose")]
    goal: Option<Vec<f64>>,
    /// Goal end-effector pose as x,y,z,roll,pitch,yaw.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    goal_pose: Option<Vec<f64>>,
    /// Observed obstacles (text or PCB1 point cloud).
    #[arg(long)]
    cloud: Option<PathBuf>,
    /// Inflation parameters (TOML or JSON).
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.1)]
    check_step: f64,
    #[arg(long, default_value_t = 0)]
    extra_paths: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct InflateArgs {
    #[arg(long)]
    scene: PathBuf,
    /// Path as JSON: {"knots": [[...], ...]}.
    #[arg(long)]
    path: PathBuf,
    #[arg(long)]
    cloud: Option<PathBuf>,
    /// Voxel side used for the point cloud.
    #[arg(long, default_value_t = 0.06)]
    bin: f64,
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Benchmark configuration; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    summary: Option<PathBuf>,
}

/// Why a command did not succeed.
enum Failure {
    Planning(anyhow::Error),
    Input(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        let planning = e.chain().filter_map(|c| c.downcast_ref::<Error>()).any(|c| {
            matches!(
                c,
                Error::NoPath
                    | Error::IkFailed(_)
                    | Error::SegmentInCollision { .. }
                    | Error::SamplingExhausted { .. }
                    | Error::InfeasibleTransition(_)
                    | Error::EmptyChord { .. }
                    | Error::SeedOutside { .. }
            )
        });
        if planning {
            Failure::Planning(e)
        } else {
            Failure::Input(e)
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(n) = configured_threads() {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
    let run = match cli.command {
        Command::BuildDrm(a) => build_drm_cmd(a),
        Command::Plan(a) => plan_cmd(a),
        Command::Inflate(a) => inflate_cmd(a),
        Command::Bench(a) => bench_cmd(a),
    };
    match run {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Planning(e)) => {
            eprintln!("planning failed: {e:#}");
            ExitCode::from(EXIT_PLANNING)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn load_scene(path: &Path) -> Result<Scene> {
    parse_scene_json(&read_text(path)?).with_context(|| format!("parsing scene {}", path.display()))
}

fn load_params(path: &Path) -> Result<EizoParams> {
    let text = read_text(path)?;
    let parsed = match path.extension().and_then(|e| e.to_str()) {
        Some("json") => EizoParams::from_json(&text),
        _ => EizoParams::from_toml(&text),
    };
    parsed.with_context(|| format!("parsing parameters {}", path.display()))
}

fn load_cloud(path: &Path, grid_origin: [f64; 3], side: f64, planar: bool) -> Result<VoxelMap> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let points = parse_point_cloud(&bytes).with_context(|| format!("parsing point cloud {}", path.display()))?;
    Ok(voxelize_point_cloud(&points, side, grid_origin, planar)?)
}

fn scene_domain(scene: &Scene) -> Result<HPolytope> {
    Ok(HPolytope::from_box(&scene.domain_lower, &scene.domain_upper)?)
}

fn scene_grid(scene: &Scene, side: f64) -> Result<Grid> {
    let (lo, hi) =
        scene.workspace.ok_or_else(|| anyhow!("the scene needs workspace bounds to lay out the voxel grid"))?;
    let grid = if scene.planar {
        Grid::planar_covering([lo[0], lo[1]], [hi[0], hi[1]], side)?
    } else {
        Grid::covering(lo, hi, side)?
    };
    Ok(grid)
}

fn build_drm_cmd(a: BuildDrmArgs) -> Result<(), Failure> {
    let scene = load_scene(&a.scene)?;
    let grid = scene_grid(&scene, a.bin)?;
    let params = DrmBuildParams { n_nodes: a.nodes, k: a.k, d_cs: a.d_cs, d_ts: a.d_ts };
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let drm = build_drm(&scene.world, &scene.domain_lower, &scene.domain_upper, &params, grid, &mut rng)?;
    write_file(&a.out, encode_drm(&drm))?;
    log::info!("roadmap with {} nodes and {} edges over {} voxels", drm.len(), drm.num_edges(), grid.len());
    Ok(())
}

fn plan_request(a: &PlanArgs) -> Result<PlanRequest> {
    if let Some(path) = &a.request {
        return PlanRequest::from_json(&read_text(path)?)
            .with_context(|| format!("parsing request {}", path.display()));
    }
    let start = a.start.clone().ok_or_else(|| anyhow!("--start or --request is required"))?;
    let goal = match (&a.goal, &a.goal_pose) {
        (Some(q), None) => Goal::Configuration(q.clone()),
        (None, Some(p)) if p.len() == 6 => Goal::Pose(PoseSpec { xyz: [p[0], p[1], p[2]], rpy: [p[3], p[4], p[5]] }),
        (None, Some(p)) => bail!("--goal-pose takes 6 values, got {}", p.len()),
        _ => bail!("one of --goal or --goal-pose is required"),
    };
    let mut req = PlanRequest::new(start, goal);
    if let Some(p) = &a.params {
        req.eizo = load_params(p)?;
    }
    req.seed = a.seed;
    req.check_step = a.check_step;
    req.n_extra_paths = a.extra_paths;
    req.validate()?;
    Ok(req)
}

fn plan_cmd(a: PlanArgs) -> Result<(), Failure> {
    let scene = load_scene(&a.scene)?;
    let bytes = fs::read(&a.drm).with_context(|| format!("reading {}", a.drm.display()))?;
    let drm = decode_drm(&bytes).with_context(|| format!("decoding roadmap {}", a.drm.display()))?;
    let req = plan_request(&a)?;
    let grid = *drm.grid();
    let vmap = match &a.cloud {
        Some(c) => load_cloud(c, grid.origin, grid.side, grid.planar())?,
        None => grid.empty_map(),
    };
    let world = scene.world.clone().with_voxels(&vmap);
    let domain = scene_domain(&scene)?;
    let res = plan(&req, &PlanContext { world: &world, domain: &domain, drm: &drm, vmap: &vmap })?;
    write_file(&a.out, serde_json::to_string_pretty(&res).context("serializing plan")?)?;
    if let Some(svg) = &a.svg {
        let obstacles: Vec<_> = world.static_geometry.iter().chain(&world.obstacles).cloned().collect();
        let input = SvgInput {
            domain: &domain,
            obstacles: &obstacles,
            scs: res.scs.as_ref(),
            seed_path: res.seed_path.as_ref(),
            path: res.path.as_ref(),
        };
        write_file(svg, render_svg(&input)?)?;
    }
    match (&res.status, &res.path) {
        (PlanStatus::Ok, Some(p)) => {
            log::info!(
                "ok: cost {:.4}, {} sets, {} recovery rounds, {:.1} ms",
                p.cost,
                res.scs.as_ref().map_or(0, |s| s.len()),
                res.stats.recovery_rounds,
                res.stats.timings.total_ms()
            );
            Ok(())
        }
        (status, _) => Err(Failure::Planning(anyhow!(
            "status {status:?}: {}",
            res.stats.message.as_deref().unwrap_or("no detail")
        ))),
    }
}

fn inflate_cmd(a: InflateArgs) -> Result<(), Failure> {
    let scene = load_scene(&a.scene)?;
    let text = read_text(&a.path)?;
    let raw: PwlPath = serde_json::from_str(&text).with_context(|| format!("parsing path {}", a.path.display()))?;
    let path = PwlPath::new(raw.knots().to_vec())?;
    let params = match &a.params {
        Some(p) => load_params(p)?,
        None => EizoParams::default(),
    };
    let world = match &a.cloud {
        Some(c) => {
            let origin = scene.workspace.map_or([0.0; 3], |(lo, _)| lo);
            let vmap = load_cloud(c, origin, a.bin, scene.planar)?;
            scene.world.clone().with_voxels(&vmap)
        }
        None => scene.world.clone(),
    };
    let domain = scene_domain(&scene)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let (scs, stats) = inflate_path(&path, &domain, &params, &world, &mut rng)?;
    write_file(&a.out, serde_json::to_string_pretty(&scs).context("serializing sets")?)?;
    log::info!("{} sets, {} hyperplanes, {} collision checks", scs.len(), stats.hyperplanes, stats.collision_checks);
    Ok(())
}

fn bench_cmd(a: BenchArgs) -> Result<(), Failure> {
    let cfg = match &a.config {
        Some(p) => BenchConfig::from_toml(&read_text(p)?).with_context(|| format!("parsing {}", p.display()))?,
        None => BenchConfig::default(),
    };
    let out = run_benchmark(&cfg)?;
    let file = fs::File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    write_csv(&out.records, std::io::BufWriter::new(file))?;
    if let Some(p) = &a.summary {
        write_file(p, serde_json::to_string_pretty(&out.summary).context("serializing summary")?)?;
    }
    let s = &out.summary;
    log::info!(
        "{} instances: DRM SR {:.2}, LSCS SR {:.2}, CFR {:.2}, {:.1} s",
        s.instances,
        s.drm_success_rate,
        s.lscs_success_rate,
        s.collision_free_rate,
        s.wall_time_s
    );
    Ok(())
}
