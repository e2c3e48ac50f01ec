use rand::Rng;
use serde::{Deserialize, Serialize};

use super::stages::inflate_path;
use crate::cpoly::{HPolytope, MEMBERSHIP_TOL};
use crate::drm::{astar_lazy, shortcut, CollisionSet, Drm, SearchOptions};
use crate::eizo::EizoParams;
use crate::scsopt::Scs;
use crate::world::World;
use crate::Configuration;

/// A further set sequence found after blocking the roadmap inside one set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtraPath {
    pub scs: Scs,
    /// Roadmap nodes of the path before shortcutting.
    pub nodes: Vec<usize>,
    /// The set whose roadmap nodes were blocked before searching.
    pub blocked_set: HPolytope,
}

/// Everything besides the roadmap that the extra searches need.
#[derive(Debug, Clone, Copy)]
pub struct ExtraContext<'a> {
    pub world: &'a World,
    pub domain: &'a HPolytope,
    pub params: &'a EizoParams,
    pub search: SearchOptions,
}

fn eligible(scs: &Scs, start: &Configuration, goal: &Configuration) -> Vec<HPolytope> {
    scs.sets
        .iter()
        .filter(|p| {
            p.max_violation(start.as_slice()) > MEMBERSHIP_TOL && p.max_violation(goal.as_slice()) > MEMBERSHIP_TOL
        })
        .cloned()
        .collect()
}

/// Searches for up to `n_extra` further set sequences.
///
/// Each round draws a not yet used set that contains neither start nor
/// goal, blocks every roadmap node inside it, and searches, shortcuts and
/// inflates again. The first failure ends the procedure.
#[allow(clippy::too_many_arguments)]
pub fn inflate_extra_paths<R: Rng + ?Sized>(
    drm: &Drm,
    cs: &CollisionSet,
    scs: &Scs,
    start: &Configuration,
    goal: &Configuration,
    n_extra: usize,
    rng: &mut R,
    ctx: &ExtraContext,
) -> Vec<ExtraPath> {
    let mut pool = eligible(scs, start, goal);
    let mut blocked = cs.clone();
    let mut out = Vec::new();
    for _ in 0..n_extra {
        if pool.is_empty() {
            break;
        }
        let pick = pool.swap_remove(rng.random_range(0..pool.len()));
        for i in 0..drm.len() {
            if pick.max_violation(drm.node(i).as_slice()) <= MEMBERSHIP_TOL {
                blocked.block(i);
            }
        }
        let Ok(found) = astar_lazy(drm, &blocked, start, goal, ctx.world, &ctx.search) else { break };
        let seed = shortcut(&found.path, ctx.world, ctx.search.step);
        let Ok((next, _)) = inflate_path(&seed, ctx.domain, ctx.params, ctx.world, rng) else { break };
        pool.extend(eligible(&next, start, goal));
        out.push(ExtraPath { scs: next, nodes: found.nodes, blocked_set: pick });
    }
    out
}
