use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use super::{CollisionSet, Drm, PwlPath};
use crate::world::CollisionChecker;
use crate::{Configuration, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchOptions {
    /// Discretization step of segment checks.
    pub step: f64,
    /// Nearest unblocked nodes tried when attaching start and goal.
    pub k_connect: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { step: 0.1, k_connect: 10 }
    }
}

/// A roadmap path from start to goal.
#[derive(Debug, Clone, PartialEq)]
pub struct RoadmapPath {
    pub path: PwlPath,
    /// Roadmap nodes visited between start and goal.
    pub nodes: Vec<usize>,
    /// Sum of the edge lengths in path order.
    pub cost: f64,
    /// Edge segments checked during the search.
    pub edge_checks: usize,
    /// Edges found in collision and removed.
    pub invalidated: usize,
}

struct Graph<'a> {
    drm: &'a Drm,
    cs: &'a CollisionSet,
    start: &'a Configuration,
    goal: &'a Configuration,
    start_anchor: usize,
    goal_anchor: usize,
}

impl Graph<'_> {
    fn n(&self) -> usize {
        self.drm.len()
    }

    fn start_id(&self) -> usize {
        self.n()
    }

    fn goal_id(&self) -> usize {
        self.n() + 1
    }

    fn config(&self, v: usize) -> &Configuration {
        if v == self.start_id() {
            self.start
        } else if v == self.goal_id() {
            self.goal
        } else {
            self.drm.node(v)
        }
    }

    fn weight(&self, a: usize, b: usize) -> f64 {
        (self.config(a) - self.config(b)).norm()
    }

    fn neighbors(&self, v: usize, out: &mut Vec<usize>) {
        out.clear();
        if v == self.start_id() {
            out.push(self.start_anchor);
            return;
        }
        if v == self.goal_id() {
            out.push(self.goal_anchor);
            return;
        }
        out.extend(self.drm.neighbors(v).iter().map(|&j| j as usize).filter(|&j| !self.cs.is_blocked(j)));
        if v == self.start_anchor {
            out.push(self.start_id());
        }
        if v == self.goal_anchor {
            out.push(self.goal_id());
        }
    }

    /// Edges to the start and goal anchors were validated when attaching.
    fn prevalidated(&self, a: usize, b: usize) -> bool {
        a >= self.n() || b >= self.n()
    }
}

#[derive(PartialEq)]
struct Open {
    f: f64,
    v: usize,
}

impl Eq for Open {}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        other.f.total_cmp(&self.f).then(other.v.cmp(&self.v))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Best-first search from start to goal skipping edges marked invalid.
/// With `use_heuristic` false this is Dijkstra's algorithm.
fn best_first(g: &Graph, invalid: &HashMap<(usize, usize), bool>, use_heuristic: bool) -> Option<(f64, Vec<usize>)> {
    let total = g.n() + 2;
    let h = |v: usize| if use_heuristic { (g.config(v) - g.goal).norm() } else { 0.0 };
    let mut dist = vec![f64::INFINITY; total];
    let mut parent = vec![usize::MAX; total];
    let mut heap = BinaryHeap::new();
    dist[g.start_id()] = 0.0;
    heap.push(Open { f: h(g.start_id()), v: g.start_id() });
    let mut nbrs = Vec::new();
    while let Some(Open { f, v }) = heap.pop() {
        if f > dist[v] + h(v) {
            continue;
        }
        if v == g.goal_id() {
            let mut seq = vec![v];
            let mut u = v;
            while u != g.start_id() {
                u = parent[u];
                seq.push(u);
            }
            seq.reverse();
            return Some((dist[v], seq));
        }
        g.neighbors(v, &mut nbrs);
        for &u in &nbrs {
            if invalid.get(&edge_key(u, v)) == Some(&false) {
                continue;
            }
            let cand = dist[v] + g.weight(v, u);
            if cand < dist[u] {
                dist[u] = cand;
                parent[u] = v;
                heap.push(Open { f: cand + h(u), v: u });
            }
        }
    }
    None
}

fn attach<C: CollisionChecker + ?Sized>(
    drm: &Drm,
    cs: &CollisionSet,
    q: &Configuration,
    checker: &C,
    opts: &SearchOptions,
    checks: &mut usize,
) -> Result<usize> {
    let mut ranked: Vec<(f64, usize)> =
        (0..drm.len()).filter(|&i| !cs.is_blocked(i)).map(|i| ((drm.node(i) - q).norm(), i)).collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    for &(_, i) in ranked.iter().take(opts.k_connect) {
        *checks += 1;
        if checker.segment_free(q.as_slice(), drm.node(i).as_slice(), opts.step) {
            return Ok(i);
        }
    }
    Err(Error::NoPath)
}

fn prepare<'a, C: CollisionChecker + ?Sized>(
    drm: &'a Drm,
    cs: &'a CollisionSet,
    start: &'a Configuration,
    goal: &'a Configuration,
    checker: &C,
    opts: &SearchOptions,
    checks: &mut usize,
) -> Result<Graph<'a>> {
    Error::check_dim(drm.dof(), start.len())?;
    Error::check_dim(drm.dof(), goal.len())?;
    Error::check_dim(checker.dof(), start.len())?;
    if !(opts.step > 0.0) {
        return Err(Error::InvalidParameter(format!("check step must be positive, got {}", opts.step)));
    }
    if start == goal {
        return Err(Error::AlreadyAtGoal);
    }
    if !checker.is_free(start.as_slice()) || !checker.is_free(goal.as_slice()) {
        return Err(Error::InfeasibleEndpoint);
    }
    let start_anchor = attach(drm, cs, start, checker, opts, checks)?;
    let goal_anchor = attach(drm, cs, goal, checker, opts, checks)?;
    Ok(Graph { drm, cs, start, goal, start_anchor, goal_anchor })
}

fn finish(g: &Graph, cost: f64, seq: Vec<usize>, edge_checks: usize, invalidated: usize) -> Result<RoadmapPath> {
    let knots = seq.iter().map(|&v| g.config(v).clone()).collect();
    let nodes = seq.into_iter().filter(|&v| v < g.n()).collect();
    Ok(RoadmapPath { path: PwlPath::new(knots)?, nodes, cost, edge_checks, invalidated })
}

/// A* on the pruned roadmap with lazy edge validation.
///
/// Start and goal are attached to the first of their nearest unblocked
/// nodes with a free connecting segment. Each candidate path has its
/// unchecked edges validated; colliding edges are removed and the search
/// runs again until a path survives validation.
pub fn astar_lazy<C: CollisionChecker + ?Sized>(
    drm: &Drm,
    cs: &CollisionSet,
    start: &Configuration,
    goal: &Configuration,
    checker: &C,
    opts: &SearchOptions,
) -> Result<RoadmapPath> {
    let mut checks = 0;
    let g = prepare(drm, cs, start, goal, checker, opts, &mut checks)?;
    let mut known: HashMap<(usize, usize), bool> = HashMap::new();
    let mut invalidated = 0;
    loop {
        let (cost, seq) = best_first(&g, &known, true).ok_or(Error::NoPath)?;
        let mut clean = true;
        for w in seq.windows(2) {
            let key = edge_key(w[0], w[1]);
            if g.prevalidated(w[0], w[1]) || known.contains_key(&key) {
                continue;
            }
            checks += 1;
            let free = checker.segment_free(g.config(w[0]).as_slice(), g.config(w[1]).as_slice(), opts.step);
            known.insert(key, free);
            if !free {
                invalidated += 1;
                clean = false;
            }
        }
        if clean {
            return finish(&g, cost, seq, checks, invalidated);
        }
    }
}

/// Dijkstra on the roadmap after checking every unblocked edge up front.
/// Reference for [`astar_lazy`]; uses the same start and goal attachment.
pub fn eager_dijkstra<C: CollisionChecker + ?Sized>(
    drm: &Drm,
    cs: &CollisionSet,
    start: &Configuration,
    goal: &Configuration,
    checker: &C,
    opts: &SearchOptions,
) -> Result<RoadmapPath> {
    let mut checks = 0;
    let g = prepare(drm, cs, start, goal, checker, opts, &mut checks)?;
    let mut known = HashMap::new();
    let mut invalidated = 0;
    for i in 0..drm.len() {
        for &j in drm.neighbors(i) {
            let j = j as usize;
            if j <= i || cs.is_blocked(i) || cs.is_blocked(j) {
                continue;
            }
            checks += 1;
            let free = checker.segment_free(drm.node(i).as_slice(), drm.node(j).as_slice(), opts.step);
            if !free {
                invalidated += 1;
            }
            known.insert((i, j), free);
        }
    }
    let (cost, seq) = best_first(&g, &known, false).ok_or(Error::NoPath)?;
    finish(&g, cost, seq, checks, invalidated)
}

/// Greedy shortcutting: from each knot jump to the farthest later knot that
/// is visible along a free segment.
pub fn shortcut<C: CollisionChecker + ?Sized>(path: &PwlPath, checker: &C, step: f64) -> PwlPath {
    let knots = path.knots();
    let last = knots.len() - 1;
    let mut out = vec![knots[0].clone()];
    let mut i = 0;
    while i < last {
        let mut j = last;
        while j > i + 1 && !checker.segment_free(knots[i].as_slice(), knots[j].as_slice(), step) {
            j -= 1;
        }
        out.push(knots[j].clone());
        i = j;
    }
    PwlPath::new(out).expect("shortcut keeps distinct endpoints")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cpoly::config;
    use crate::drm::{build_drm, collision_set, DrmBuildParams, Grid};
    use crate::world::{voxelize_point_cloud, Placed, RobotModel, World};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn point_world() -> World {
        World::new(RobotModel::point_robot(&[-5.0, -5.0], &[5.0, 5.0]).unwrap(), vec![])
    }

    fn roadmap(seed: u64, n: usize) -> Drm {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = Grid::planar_covering([-5.0, -5.0], [5.0, 5.0], 0.1).unwrap();
        let params = DrmBuildParams { n_nodes: n, ..Default::default() };
        build_drm(&point_world(), &[-5.0, -5.0], &[5.0, 5.0], &params, grid, &mut rng).unwrap()
    }

    #[test]
    fn same_start_and_goal() {
        let drm = roadmap(1, 50);
        let q = config(&[0.0, 0.0]);
        let r = astar_lazy(&drm, &CollisionSet::empty(50), &q, &q, &point_world(), &SearchOptions::default());
        assert!(matches!(r, Err(Error::AlreadyAtGoal)));
    }

    #[test]
    fn empty_world_shortcuts_to_straight_line() {
        let drm = roadmap(2, 100);
        let world = point_world();
        let (s, g) = (config(&[-4.0, -3.0]), config(&[4.0, 3.0]));
        let found = astar_lazy(&drm, &CollisionSet::empty(100), &s, &g, &world, &SearchOptions::default()).unwrap();
        let short = shortcut(&found.path, &world, 0.1);
        assert_eq!(short.knots(), &[s, g]);
        assert!((short.length() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn lazy_matches_eager_dijkstra() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut compared = 0;
        for case in 0..30 {
            let drm = roadmap(100 + case, 150);
            let discs: Vec<Placed> = (0..8)
                .map(|_| Placed::sphere([rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), 0.0], 0.5))
                .collect();
            let cloud: Vec<[f64; 3]> = discs
                .iter()
                .take(4)
                .map(|d| {
                    let c = d.center();
                    [c.x, c.y, 0.0]
                })
                .collect();
            let vmap = voxelize_point_cloud(&cloud, 0.1, [-5.0, -5.0, 0.0], true).unwrap();
            let cs = collision_set(&drm, &vmap).unwrap();
            let world = point_world().with_obstacles(discs);
            let (s, g) = (config(&[-4.5, -4.0]), config(&[4.5, 4.0]));
            let lazy = astar_lazy(&drm, &cs, &s, &g, &world, &SearchOptions::default());
            let eager = eager_dijkstra(&drm, &cs, &s, &g, &world, &SearchOptions::default());
            match (lazy, eager) {
                (Ok(a), Ok(b)) => {
                    assert_eq!(a.cost, b.cost);
                    assert!(a.path.is_free(&world, 0.1));
                    assert!(a.edge_checks <= b.edge_checks);
                    compared += 1;
                }
                (Err(Error::NoPath), Err(Error::NoPath)) => {}
                (a, b) => panic!("lazy {a:?} vs eager {b:?}"),
            }
        }
        assert!(compared >= 20);
    }

    #[test]
    fn shortcut_collinear() {
        let p = PwlPath::new(vec![config(&[0.0, 0.0]), config(&[1.0, 0.0]), config(&[2.0, 0.0])]).unwrap();
        let s = shortcut(&p, &point_world(), 0.1);
        assert_eq!(s.knots().len(), 2);
        let two = PwlPath::new(vec![config(&[0.0, 0.0]), config(&[1.0, 1.0])]).unwrap();
        assert_eq!(shortcut(&two, &point_world(), 0.1), two);
    }

    #[test]
    fn shortcut_never_lengthens() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let world = point_world().with_obstacles(vec![Placed::sphere([0.0, 0.0, 0.0], 1.0)]);
        for _ in 0..100 {
            let knots = vec![
                config(&[-3.0, rng.random_range(-3.0..-1.5)]),
                config(&[rng.random_range(-2.0..2.0), -2.5]),
                config(&[3.0, rng.random_range(-3.0..-1.5)]),
                config(&[rng.random_range(1.5..3.0), rng.random_range(1.5..3.0)]),
            ];
            let p = PwlPath::new(knots).unwrap();
            if !p.is_free(&world, 0.05) {
                continue;
            }
            let s = shortcut(&p, &world, 0.05);
            assert!(s.length() <= p.length() + 1e-12);
            assert!(s.is_free(&world, 0.05));
        }
    }
}
