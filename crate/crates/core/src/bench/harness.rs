use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::forest::{forest_base_world, forest_domain, forest_grid, gen_forest, FOREST_GOAL, FOREST_START};
use crate::cpoly::MEMBERSHIP_TOL;
use crate::drm::{build_drm, Drm, DrmBuildParams};
use crate::eizo::EizoParams;
use crate::planner::{plan, Goal, PlanContext, PlanRequest, PlanStatus};
use crate::seed::derive_seed;
use crate::world::CollisionChecker;
use crate::{Error, Result};

const ENV_TAG: u64 = 0x656e76;
const DRM_TAG: u64 = 0x64726d;

fn default_env_seeds() -> Vec<u64> {
    (0..10).collect()
}

fn default_drm_seeds() -> Vec<u64> {
    (0..5).collect()
}

fn default_sizes() -> Vec<usize> {
    vec![400]
}

fn default_step() -> f64 {
    0.1
}

fn default_rounds() -> usize {
    20
}

/// Benchmark description, usually read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_env_seeds")]
    pub env_seeds: Vec<u64>,
    #[serde(default = "default_drm_seeds")]
    pub drm_seeds: Vec<u64>,
    #[serde(default = "default_sizes")]
    pub sizes: Vec<usize>,
    #[serde(default = "EizoParams::forest")]
    pub eizo: EizoParams,
    #[serde(default)]
    pub drm: DrmBuildParams,
    #[serde(default = "default_step")]
    pub check_step: f64,
    #[serde(default = "default_rounds")]
    pub max_recovery_rounds: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            master_seed: 0,
            env_seeds: default_env_seeds(),
            drm_seeds: default_drm_seeds(),
            sizes: default_sizes(),
            eizo: EizoParams::forest(),
            drm: DrmBuildParams::default(),
            check_step: default_step(),
            max_recovery_rounds: default_rounds(),
        }
    }
}

impl BenchConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.eizo.validate()?;
        if self.env_seeds.is_empty() || self.drm_seeds.is_empty() || self.sizes.is_empty() {
            return Err(Error::InvalidParameter("benchmark needs at least one env seed, drm seed and size".into()));
        }
        if self.sizes.iter().any(|s| !(2..=1_000_000).contains(s)) {
            return Err(Error::InvalidParameter("roadmap sizes must lie in [2, 1e6]".into()));
        }
        if !(self.check_step > 0.0 && self.check_step.is_finite()) || self.max_recovery_rounds == 0 {
            return Err(Error::InvalidParameter("check step and recovery rounds must be positive".into()));
        }
        Ok(())
    }
}

/// One benchmark instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub env_seed: u64,
    pub drm_seed: u64,
    pub drm_size: usize,
    pub drm_success: bool,
    pub drm_path_len: Option<f64>,
    pub lscs_success: bool,
    pub lscs_cost: Option<f64>,
    pub n_sets: Option<usize>,
    pub n_segments: Option<usize>,
    pub recovery_rounds: usize,
    /// Ok and the optimized path passed a re-check at a tenth of the step.
    pub collision_free: bool,
    /// Every set contains the segment it was inflated from.
    pub seeds_contained: bool,
    pub drm_build_ms: f64,
    pub search_ms: f64,
    pub inflate_ms: f64,
    pub optimize_ms: f64,
    pub recovery_ms: f64,
    pub status: PlanStatus,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self { mean: f64::NAN, std: f64::NAN, n };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        Self { mean, std: var.sqrt(), n }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub instances: usize,
    pub drm_success_rate: f64,
    pub lscs_success_rate: f64,
    /// Share of successful optimized paths that pass the fine re-check.
    pub collision_free_rate: f64,
    /// Share of instances that needed at least one recovery round.
    pub recovery_rate: f64,
    pub columns: BTreeMap<String, MeanStd>,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchOutput {
    pub records: Vec<BenchRecord>,
    pub summary: BenchSummary,
}

/// Roadmap seed for a (master, drm seed, size) triple.
pub fn drm_instance_seed(master: u64, drm_seed: u64, size: usize) -> u64 {
    derive_seed(&[master, DRM_TAG, drm_seed, size as u64])
}

/// Scene seed for an environment seed.
pub fn env_instance_seed(master: u64, env_seed: u64) -> u64 {
    derive_seed(&[master, ENV_TAG, env_seed])
}

/// Planner seed for one instance of the cross product.
pub fn plan_instance_seed(master: u64, env_seed: u64, drm_seed: u64, size: usize) -> u64 {
    derive_seed(&[master, env_seed, drm_seed, size as u64])
}

fn pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = crate::configured_threads() {
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))
}

/// Runs the Forest minimum-distance benchmark over the full cross product
/// of environment seeds, roadmap seeds and roadmap sizes.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchOutput> {
    cfg.validate()?;
    let started = std::time::Instant::now();
    pool()?.install(|| run_inner(cfg)).map(|records| {
        let summary = summarize(&records, started.elapsed().as_secs_f64());
        BenchOutput { records, summary }
    })
}

fn run_inner(cfg: &BenchConfig) -> Result<Vec<BenchRecord>> {
    let base = forest_base_world();
    let domain = forest_domain();
    let grid = forest_grid();
    let lo = domain_box(&base);
    let roadmaps: Vec<((u64, usize), Drm, f64)> = cfg
        .drm_seeds
        .iter()
        .flat_map(|&d| cfg.sizes.iter().map(move |&s| (d, s)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(d, size)| {
            let t = std::time::Instant::now();
            let mut rng = crate::seed::stream_rng(drm_instance_seed(cfg.master_seed, d, size), 0);
            let params = DrmBuildParams { n_nodes: size, ..cfg.drm.clone() };
            let drm = build_drm(&base, &lo.0, &lo.1, &params, grid, &mut rng)?;
            Ok(((d, size), drm, t.elapsed().as_secs_f64() * 1e3))
        })
        .collect::<Result<_>>()?;

    let mut jobs = Vec::new();
    for &env in &cfg.env_seeds {
        for r in &roadmaps {
            jobs.push((env, r));
        }
    }
    let mut records: Vec<BenchRecord> = jobs
        .into_par_iter()
        .map(|(env, ((drm_seed, size), drm, build_ms))| {
            run_instance(cfg, env, *drm_seed, *size, drm, *build_ms, &domain)
        })
        .collect::<Result<_>>()?;
    records.sort_by_key(|r| (r.env_seed, r.drm_seed, r.drm_size));
    Ok(records)
}

fn domain_box(world: &crate::world::World) -> (Vec<f64>, Vec<f64>) {
    let l = world.robot.limits();
    (l.lower.clone(), l.upper.clone())
}

fn run_instance(
    cfg: &BenchConfig,
    env: u64,
    drm_seed: u64,
    size: usize,
    drm: &Drm,
    build_ms: f64,
    domain: &crate::cpoly::HPolytope,
) -> Result<BenchRecord> {
    let scene = gen_forest(env_instance_seed(cfg.master_seed, env));
    let world = scene.world();
    let vmap = scene.voxel_map(drm.grid())?;
    let mut req = PlanRequest::new(FOREST_START.to_vec(), Goal::Configuration(FOREST_GOAL.to_vec()));
    req.eizo = cfg.eizo.clone();
    req.check_step = cfg.check_step;
    req.max_recovery_rounds = cfg.max_recovery_rounds;
    req.seed = plan_instance_seed(cfg.master_seed, env, drm_seed, size);
    let res = plan(&req, &PlanContext { world: &world, domain, drm, vmap: &vmap })?;
    let ok = res.status == PlanStatus::Ok;
    let fine = cfg.check_step / 10.0;
    let collision_free = ok
        && res
            .path
            .as_ref()
            .is_some_and(|p| p.knots.windows(2).all(|w| world.segment_free(w[0].as_slice(), w[1].as_slice(), fine)));
    let seeds_contained = res.scs.as_ref().is_none_or(|scs| {
        scs.sets
            .iter()
            .zip(&scs.seeds)
            .all(|(p, seg)| p.contains_segment(seg.v1.as_slice(), seg.v2.as_slice(), MEMBERSHIP_TOL).unwrap_or(false))
    });
    let t = &res.stats.timings;
    Ok(BenchRecord {
        env_seed: env,
        drm_seed,
        drm_size: size,
        drm_success: res.seed_path.is_some(),
        drm_path_len: res.seed_path.as_ref().map(|p| p.length()),
        lscs_success: ok,
        lscs_cost: res.path.as_ref().map(|p| p.cost),
        n_sets: res.scs.as_ref().map(|s| s.len()),
        n_segments: res.seed_path.as_ref().map(|p| p.num_segments()),
        recovery_rounds: res.stats.recovery_rounds,
        collision_free,
        seeds_contained,
        drm_build_ms: build_ms,
        search_ms: t.collision_set_ms + t.search_ms,
        inflate_ms: t.inflate_ms,
        optimize_ms: t.optimize_ms,
        recovery_ms: t.recovery_ms,
        status: res.status,
    })
}

pub fn summarize(records: &[BenchRecord], wall_time_s: f64) -> BenchSummary {
    let n = records.len();
    let rate = |k: usize, of: usize| if of == 0 { 0.0 } else { k as f64 / of as f64 };
    let drm_ok = records.iter().filter(|r| r.drm_success).count();
    let lscs_ok = records.iter().filter(|r| r.lscs_success).count();
    let cf = records.iter().filter(|r| r.collision_free).count();
    let recovered = records.iter().filter(|r| r.recovery_rounds > 0).count();
    let mut columns = BTreeMap::new();
    let mut col = |name: &str, f: &dyn Fn(&BenchRecord) -> Option<f64>| {
        let v: Vec<f64> = records.iter().filter_map(f).collect();
        columns.insert(name.to_string(), MeanStd::of(&v));
    };
    col("drm_path_len", &|r| r.drm_path_len);
    col("lscs_cost", &|r| r.lscs_cost.filter(|_| r.lscs_success));
    col("n_sets", &|r| r.n_sets.filter(|_| r.lscs_success).map(|v| v as f64));
    col("n_segments", &|r| r.n_segments.map(|v| v as f64));
    col("recovery_rounds", &|r| Some(r.recovery_rounds as f64));
    col("drm_build_ms", &|r| Some(r.drm_build_ms));
    col("search_ms", &|r| Some(r.search_ms));
    col("inflate_ms", &|r| Some(r.inflate_ms));
    col("optimize_ms", &|r| Some(r.optimize_ms));
    col("recovery_ms", &|r| Some(r.recovery_ms));
    BenchSummary {
        instances: n,
        drm_success_rate: rate(drm_ok, n),
        lscs_success_rate: rate(lscs_ok, n),
        collision_free_rate: rate(cf, lscs_ok),
        recovery_rate: rate(recovered, n),
        columns,
        wall_time_s,
    }
}

/// `x` with six significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

pub const CSV_HEADER: [&str; 18] = [
    "env_seed",
    "drm_seed",
    "drm_size",
    "drm_success",
    "drm_path_len",
    "lscs_success",
    "lscs_cost",
    "n_sets",
    "n_segments",
    "recovery_rounds",
    "collision_free",
    "seeds_contained",
    "drm_build_ms",
    "search_ms",
    "inflate_ms",
    "optimize_ms",
    "recovery_ms",
    "status",
];

pub fn write_csv<W: Write>(records: &[BenchRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    let opt = |v: Option<f64>| v.map(sig6).unwrap_or_default();
    for r in records {
        let status = serde_json::to_value(r.status)?.as_str().unwrap_or_default().to_string();
        w.write_record([
            r.env_seed.to_string(),
            r.drm_seed.to_string(),
            r.drm_size.to_string(),
            r.drm_success.to_string(),
            opt(r.drm_path_len),
            r.lscs_success.to_string(),
            opt(r.lscs_cost),
            r.n_sets.map(|v| v.to_string()).unwrap_or_default(),
            r.n_segments.map(|v| v.to_string()).unwrap_or_default(),
            r.recovery_rounds.to_string(),
            r.collision_free.to_string(),
            r.seeds_contained.to_string(),
            sig6(r.drm_build_ms),
            sig6(r.search_ms),
            sig6(r.inflate_ms),
            sig6(r.optimize_ms),
            sig6(r.recovery_ms),
            status,
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(10.770123456), "10.7701");
        assert_eq!(sig6(0.00123456789), "0.00123457");
        assert_eq!(sig6(123456.7), "123457");
        assert_eq!(sig6(0.0), "0");
    }

    #[test]
    fn config_defaults_from_toml() {
        let cfg = BenchConfig::from_toml("master_seed = 3\nsizes = [200]\n").unwrap();
        assert_eq!(cfg.env_seeds.len(), 10);
        assert_eq!(cfg.drm_seeds.len(), 5);
        assert_eq!(cfg.sizes, vec![200]);
        assert_eq!(cfg.eizo, EizoParams::forest());
        assert!(BenchConfig::from_toml("sizes = []").is_err());
        assert!(BenchConfig::from_toml("check_step = -1.0").is_err());
    }

    #[test]
    fn single_instance() {
        let cfg = BenchConfig { env_seeds: vec![1], drm_seeds: vec![1], sizes: vec![200], ..Default::default() };
        let out = run_benchmark(&cfg).unwrap();
        assert_eq!(out.records.len(), 1);
        let mut buf = Vec::new();
        write_csv(&out.records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with("env_seed,drm_seed,drm_size"));
    }
}
