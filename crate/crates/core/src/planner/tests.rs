use nalgebra::Isometry3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::cpoly::config;
use crate::drm::{build_drm, DrmBuildParams, Grid};
use crate::eizo::Segment;
use crate::world::{Placed, RobotModel, Shape};

fn domain() -> HPolytope {
    HPolytope::from_box(&[-5.0, -5.0], &[5.0, 5.0]).unwrap()
}

fn point_world(obstacles: Vec<Placed>) -> World {
    World::new(RobotModel::point_robot(&[-5.0, -5.0], &[5.0, 5.0]).unwrap(), vec![]).with_obstacles(obstacles)
}

fn path(points: &[[f64; 2]]) -> PwlPath {
    PwlPath::new(points.iter().map(|p| config(p)).collect()).unwrap()
}

fn roadmap(world: &World, n: usize, seed: u64) -> Drm {
    let grid = Grid::planar_covering([-5.0, -5.0], [5.0, 5.0], 0.06).unwrap();
    let params = DrmBuildParams { n_nodes: n, ..Default::default() };
    build_drm(world, &[-5.0, -5.0], &[5.0, 5.0], &params, grid, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

#[test]
fn straight_path_in_empty_world_is_one_domain_set() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let p = path(&[[-4.0, 0.0], [4.0, 1.0]]);
    let (scs, stats) = inflate_path(&p, &domain(), &EizoParams::forest(), &point_world(vec![]), &mut rng).unwrap();
    assert_eq!(scs.sets, vec![domain()]);
    assert_eq!(scs.coverage, vec![0]);
    assert_eq!(stats.sets_built, 1);
}

#[test]
fn later_segment_reuses_first_set() {
    let world = point_world(vec![Placed::sphere([0.0, 2.0, 0.0], 1.0)]);
    let p = path(&[[-4.0, 0.0], [-2.0, 0.0], [0.0, 0.0], [3.0, 3.0]]);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (scs, _) = inflate_path(&p, &domain(), &EizoParams::forest(), &world, &mut rng).unwrap();
    assert!(scs.sets[0].contains_segment(&[-2.0, 0.0], &[0.0, 0.0], 1e-9).unwrap());
    assert_eq!(scs.coverage, vec![0, 0, 1]);
    assert_eq!(scs.len(), 2);
    scs.validate().unwrap();
}

#[test]
fn colliding_segment_is_reported() {
    let world = point_world(vec![Placed::sphere([0.0, 0.0, 0.0], 0.5)]);
    let p = path(&[[-2.0, 0.0], [2.0, 0.0]]);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let r = inflate_path(&p, &domain(), &EizoParams::forest(), &world, &mut rng);
    assert!(matches!(r, Err(Error::SegmentInCollision { .. })));
}

fn manual_scs(sets: Vec<HPolytope>, seeds: Vec<Segment>, coverage: Vec<usize>, p: PwlPath) -> Scs {
    Scs { sets, seeds, coverage, path: p }
}

fn straight(knots: &[[f64; 2]], sequence: Vec<usize>) -> ScsPath {
    let knots: Vec<Configuration> = knots.iter().map(|k| config(k)).collect();
    ScsPath { cost: crate::scsopt::path_length(&knots), knots, sequence, sweeps: 0, converged: true }
}

#[test]
fn path_collisions_are_attributed() {
    let p = path(&[[-4.0, 0.0], [4.0, 0.0]]);
    let scs = manual_scs(vec![domain()], vec![p.segment(0)], vec![0], p);
    let free = straight(&[[-4.0, 0.0], [4.0, 0.0]], vec![0]);
    assert!(find_path_collisions(&free, &scs, &point_world(vec![]), 0.01).unwrap().is_empty());
    let world = point_world(vec![Placed::sphere([0.0, 0.0, 0.0], 0.3)]);
    let hits = find_path_collisions(&free, &scs, &world, 0.01).unwrap();
    assert!(!hits.is_empty());
    assert!(hits.iter().all(|h| h.set == 0));
}

#[test]
fn boundary_sample_goes_to_both_sets() {
    let left = HPolytope::from_box(&[-5.0, -5.0], &[0.0, 5.0]).unwrap();
    let right = HPolytope::from_box(&[0.0, -5.0], &[5.0, 5.0]).unwrap();
    let p = path(&[[-1.0, 0.0], [0.0, 0.0], [1.0, 0.0]]);
    let scs = manual_scs(vec![left, right], vec![p.segment(0), p.segment(1)], vec![0, 1], p);
    let world = point_world(vec![Placed::sphere([0.0, 0.0, 0.0], 0.0)]);
    let sp = straight(&[[-1.0, 0.0], [0.0, 0.0], [1.0, 0.0]], vec![0, 1]);
    let hits = find_path_collisions(&sp, &scs, &world, 0.5).unwrap();
    let mut sets: Vec<usize> = hits.iter().map(|h| h.set).collect();
    sets.sort();
    assert_eq!(sets, vec![0, 1]);
}

#[test]
fn refinement_excludes_collision_and_keeps_seed() {
    let world = point_world(vec![Placed::sphere([0.0, 2.0, 0.0], 0.5)]);
    let p = path(&[[-2.0, 0.0], [2.0, 0.0]]);
    let mut scs = manual_scs(vec![domain()], vec![p.segment(0)], vec![0], p);
    let c = config(&[0.1, 2.1]);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    refine_sets(
        &mut scs,
        &[PathCollision { set: 0, config: c.clone() }],
        &domain(),
        &EizoParams::forest(),
        &world,
        &mut rng,
    )
    .unwrap();
    assert!(scs.sets[0].max_violation(c.as_slice()) > 0.0);
    assert!(scs.sets[0].contains_segment(&[-2.0, 0.0], &[2.0, 0.0], 1e-9).unwrap());
    assert_eq!(scs.len(), 1);
}

#[test]
fn refinement_reinflates_evicted_segment() {
    let world = point_world(vec![Placed::sphere([0.6, 2.0, 0.0], 0.5)]);
    let p = path(&[[-4.0, 0.0], [0.0, 0.0], [0.0, 4.0]]);
    let mut scs = manual_scs(vec![domain()], vec![p.segment(0)], vec![0, 0], p);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let stats = refine_sets(
        &mut scs,
        &[PathCollision { set: 0, config: config(&[0.5, 2.0]) }],
        &domain(),
        &EizoParams::forest(),
        &world,
        &mut rng,
    )
    .unwrap();
    assert!(scs.sets[0].max_violation(&[0.5, 2.0]) > 0.0);
    assert_eq!(stats.sets_built, 1);
    assert_eq!(scs.coverage, vec![0, 1]);
    scs.validate().unwrap();
}

#[test]
fn refinement_needs_collisions() {
    let p = path(&[[-2.0, 0.0], [2.0, 0.0]]);
    let mut scs = manual_scs(vec![domain()], vec![p.segment(0)], vec![0], p);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let r = refine_sets(&mut scs, &[], &domain(), &EizoParams::forest(), &point_world(vec![]), &mut rng);
    assert!(matches!(r, Err(Error::Precondition(_))));
}

#[test]
fn empty_world_plan_is_straight() {
    let world = point_world(vec![]);
    let drm = roadmap(&world, 100, 1);
    let vmap = drm.grid().empty_map();
    let req = PlanRequest::new(vec![-4.0, -3.0], Goal::Configuration(vec![4.0, 3.0]));
    let ctx = PlanContext { world: &world, domain: &domain(), drm: &drm, vmap: &vmap };
    let res = plan(&req, &ctx).unwrap();
    assert_eq!(res.status, PlanStatus::Ok);
    let path = res.path.unwrap();
    assert_eq!(path.knots.len(), 2);
    assert!((path.cost - 10.0).abs() < 1e-12);
    assert_eq!(res.scs.unwrap().len(), 1);
    assert_eq!(res.stats.recovery_rounds, 0);
}

#[test]
fn unreachable_goal_pose_fails_ik() {
    let world = point_world(vec![Placed::sphere([2.0, 2.0, 0.0], 0.5)]);
    let drm = roadmap(&world, 100, 1);
    let vmap = drm.grid().empty_map();
    let goal = Goal::Pose(PoseSpec { xyz: [2.0, 2.0, 0.0], rpy: [0.0; 3] });
    let req = PlanRequest::new(vec![-4.0, -3.0], goal);
    let ctx = PlanContext { world: &world, domain: &domain(), drm: &drm, vmap: &vmap };
    assert_eq!(plan(&req, &ctx).unwrap().status, PlanStatus::IkFailed);
}

#[test]
fn plans_around_wall_and_is_reproducible() {
    let wall = Placed::new(Shape::Box { half_extents: [0.5, 3.0, 1.0] }, Isometry3::translation(0.0, 0.0, 0.0));
    let world = point_world(vec![wall]);
    let drm = roadmap(&world, 300, 2);
    let vmap = drm.grid().empty_map();
    let mut req = PlanRequest::new(vec![-4.0, 0.0], Goal::Configuration(vec![4.0, 0.0]));
    req.seed = 9;
    req.n_extra_paths = 2;
    let d = domain();
    let ctx = PlanContext { world: &world, domain: &d, drm: &drm, vmap: &vmap };
    let a = plan(&req, &ctx).unwrap();
    assert_eq!(a.status, PlanStatus::Ok);
    let path = a.path.as_ref().unwrap();
    for w in path.knots.windows(2) {
        assert!(world.segment_free(w[0].as_slice(), w[1].as_slice(), 0.01));
    }
    let b = plan(&req, &ctx).unwrap();
    assert_eq!(a.path, b.path);
    assert_eq!(a.scs, b.scs);
    assert_eq!(a.stats.sets, b.stats.sets);
    for e in &a.extra {
        for &n in &e.nodes {
            assert!(e.blocked_set.max_violation(drm.node(n).as_slice()) > 1e-9);
        }
    }
}

#[test]
fn no_eligible_set_means_no_extra_paths() {
    let world = point_world(vec![]);
    let drm = roadmap(&world, 50, 3);
    let p = path(&[[-4.0, 0.0], [4.0, 0.0]]);
    let scs = manual_scs(vec![domain()], vec![p.segment(0)], vec![0], p);
    let d = domain();
    let params = EizoParams::forest();
    let ctx = extra::ExtraContext { world: &world, domain: &d, params: &params, search: SearchOptions::default() };
    let cs = crate::drm::CollisionSet::empty(drm.len());
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let out = inflate_extra_paths(&drm, &cs, &scs, &config(&[-4.0, 0.0]), &config(&[4.0, 0.0]), 3, &mut rng, &ctx);
    assert!(out.is_empty());
}
