use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Drm, Grid};
use crate::world::{collides, CollisionChecker, World};
use crate::{Configuration, Error, Result};

/// Roadmap construction parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DrmBuildParams {
    pub n_nodes: usize,
    /// Outgoing edges kept per node before symmetrization.
    pub k: usize,
    /// Maximum configuration-space edge length.
    pub d_cs: f64,
    /// Maximum end-effector displacement along an edge.
    pub d_ts: f64,
}

impl Default for DrmBuildParams {
    fn default() -> Self {
        Self { n_nodes: 400, k: 10, d_cs: 10.0, d_ts: 10.0 }
    }
}

/// Builds a roadmap in the obstacle-free scene of `world`.
///
/// Nodes are uniform samples of the box `[lower, upper]` that are free of
/// self collisions and static geometry. Environment obstacles in `world`
/// are ignored; they are expected to arrive later as voxels.
pub fn build_drm<R: Rng + ?Sized>(
    world: &World,
    lower: &[f64],
    upper: &[f64],
    params: &DrmBuildParams,
    grid: Grid,
    rng: &mut R,
) -> Result<Drm> {
    let dof = world.robot.dof();
    Error::check_dim(dof, lower.len())?;
    Error::check_dim(dof, upper.len())?;
    if params.n_nodes < 2 || params.n_nodes > u32::MAX as usize {
        return Err(Error::InvalidParameter(format!("roadmap size {} out of range", params.n_nodes)));
    }
    if params.k == 0 || !(params.d_cs > 0.0) || !(params.d_ts > 0.0) {
        return Err(Error::InvalidParameter("k, d_cs and d_ts must be positive".into()));
    }
    if lower.iter().zip(upper).any(|(l, u)| !(l < u) || !l.is_finite() || !u.is_finite()) {
        return Err(Error::InvalidParameter("sampling box must have lower < upper".into()));
    }

    let base = world.base();
    let nodes = sample_nodes(&base, lower, upper, params.n_nodes, rng)?;
    let poses = nodes.iter().map(|q| world.robot.end_effector_pose(q.as_slice())).collect::<Result<Vec<_>>>()?;
    let adjacency = connect(&nodes, &poses, params);
    let collision_map = voxel_lookup(&base, &nodes, &grid)?;
    Ok(Drm { dof, nodes, adjacency, collision_map, poses, grid })
}

fn sample_nodes<R: Rng + ?Sized>(
    base: &World,
    lower: &[f64],
    upper: &[f64],
    n: usize,
    rng: &mut R,
) -> Result<Vec<Configuration>> {
    let budget = 1000 * n;
    let mut attempts = 0;
    let mut nodes = Vec::with_capacity(n);
    while nodes.len() < n {
        if attempts >= budget {
            return Err(Error::SamplingExhausted { attempts });
        }
        let batch = (2 * (n - nodes.len())).clamp(16, budget - attempts);
        let candidates: Vec<Configuration> = (0..batch)
            .map(|_| {
                Configuration::from_iterator(
                    lower.len(),
                    lower.iter().zip(upper).map(|(l, u)| rng.random_range(*l..*u)),
                )
            })
            .collect();
        attempts += batch;
        let free = base.batch_free(&candidates);
        nodes.extend(candidates.into_iter().zip(free).filter(|(_, f)| *f).map(|(q, _)| q).take(n - nodes.len()));
    }
    Ok(nodes)
}

fn connect(nodes: &[Configuration], poses: &[nalgebra::Isometry3<f64>], params: &DrmBuildParams) -> Vec<Vec<u32>> {
    let outgoing: Vec<Vec<u32>> = (0..nodes.len())
        .into_par_iter()
        .map(|i| {
            let mut cands: Vec<(f64, u32)> = (0..nodes.len())
                .filter(|&j| j != i)
                .filter_map(|j| {
                    let d = (&nodes[j] - &nodes[i]).norm();
                    let dt = (poses[j].translation.vector - poses[i].translation.vector).norm();
                    (d <= params.d_cs && dt <= params.d_ts).then_some((d, j as u32))
                })
                .collect();
            cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            cands.truncate(params.k);
            cands.into_iter().map(|(_, j)| j).collect()
        })
        .collect();
    let mut adjacency = outgoing.clone();
    for (i, out) in outgoing.iter().enumerate() {
        for &j in out {
            adjacency[j as usize].push(i as u32);
        }
    }
    for nbrs in &mut adjacency {
        nbrs.sort_unstable();
        nbrs.dedup();
    }
    adjacency
}

/// For each voxel, the nodes whose geometry touches its circumscribing sphere.
fn voxel_lookup(base: &World, nodes: &[Configuration], grid: &Grid) -> Result<Vec<Vec<u32>>> {
    let map = grid.empty_map();
    let radius = map.sphere_radius();
    let axes = if grid.planar() { 2 } else { 3 };
    let per_node = nodes
        .par_iter()
        .map(|q| -> Result<Vec<usize>> {
            let placed = base.robot.placed_geometry(q.as_slice())?;
            let mut hits = Vec::new();
            for g in &placed {
                let c = g.center();
                let reach = g.shape.bounding_radius() + radius;
                let mut lo = [0i64; 3];
                let mut hi = [0i64; 3];
                for a in 0..axes {
                    lo[a] = (((c[a] - reach - grid.origin[a]) / grid.side).floor() as i64 - 1).max(0);
                    hi[a] = (((c[a] + reach - grid.origin[a]) / grid.side).floor() as i64 + 1)
                        .min(grid.extents[a] as i64 - 1);
                }
                for z in lo[2]..=hi[2] {
                    for y in lo[1]..=hi[1] {
                        for x in lo[0]..=hi[0] {
                            let Some(id) = grid.voxel_id([x, y, z]) else { continue };
                            if collides(g, &grid.sphere(id)) {
                                hits.push(id);
                            }
                        }
                    }
                }
            }
            hits.sort_unstable();
            hits.dedup();
            Ok(hits)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut lookup = vec![Vec::new(); grid.len()];
    for (node, hits) in per_node.iter().enumerate() {
        for &id in hits {
            lookup[id].push(node as u32);
        }
    }
    Ok(lookup)
}
