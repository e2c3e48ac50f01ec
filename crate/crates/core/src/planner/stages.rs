use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;

use crate::cpoly::HPolytope;
use crate::drm::PwlPath;
use crate::eizo::{domain_diagonal, exclude_collisions, inflate_edge, EizoParams, Termination};
use crate::scsopt::{Scs, ScsPath, KNOT_TOL};
use crate::world::{segment_samples, CollisionChecker};
use crate::{Configuration, Error, Result};

/// Work counters accumulated while building and refining sets.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SetStats {
    pub sets_built: usize,
    pub hyperplanes: usize,
    pub collision_checks: usize,
    /// Inflations stopped by the iteration cap rather than the test.
    pub capped_inflations: usize,
}

impl SetStats {
    pub fn add(&mut self, other: &SetStats) {
        self.sets_built += other.sets_built;
        self.hyperplanes += other.hyperplanes;
        self.collision_checks += other.collision_checks;
        self.capped_inflations += other.capped_inflations;
    }
}

fn inflate_into<C: CollisionChecker + ?Sized, R: Rng + ?Sized>(
    scs: &mut Scs,
    k: usize,
    domain: &HPolytope,
    params: &EizoParams,
    checker: &C,
    rng: &mut R,
    stats: &mut SetStats,
) -> Result<usize> {
    let seg = scs.path.segment(k);
    let report = inflate_edge(&seg, domain, params, checker, rng)?;
    stats.sets_built += 1;
    stats.hyperplanes += report.hyperplanes_added;
    stats.collision_checks += report.collision_checks;
    if report.terminated_by == Termination::MaxIterations {
        stats.capped_inflations += 1;
    }
    scs.sets.push(report.polytope);
    scs.seeds.push(seg);
    Ok(scs.sets.len() - 1)
}

/// Inflates the segments of `path` in order, skipping every segment that a
/// set built earlier already contains.
pub fn inflate_path<C: CollisionChecker + ?Sized, R: Rng + ?Sized>(
    path: &PwlPath,
    domain: &HPolytope,
    params: &EizoParams,
    checker: &C,
    rng: &mut R,
) -> Result<(Scs, SetStats)> {
    let mut scs = Scs::empty(path.clone());
    let mut stats = SetStats::default();
    for k in 0..path.num_segments() {
        let covered = scs.covering_set(k, scs.coverage.last().copied());
        let set = match covered {
            Some(i) => i,
            None => inflate_into(&mut scs, k, domain, params, checker, rng, &mut stats)?,
        };
        scs.coverage.push(set);
    }
    Ok((scs, stats))
}

/// A colliding configuration on the optimized path and a set it lies in.
#[derive(Debug, Clone, PartialEq)]
pub struct PathCollision {
    pub set: usize,
    pub config: Configuration,
}

/// Colliding samples along the optimized path at spacing `fine_step`.
///
/// Each sample is reported once for every set that contains it, or for the
/// set of its piece if it sits marginally outside all of them.
pub fn find_path_collisions<C: CollisionChecker + ?Sized>(
    path: &ScsPath,
    scs: &Scs,
    checker: &C,
    fine_step: f64,
) -> Result<Vec<PathCollision>> {
    if !(fine_step > 0.0) {
        return Err(Error::InvalidParameter(format!("fine step must be positive, got {fine_step}")));
    }
    let mut samples: Vec<(usize, Configuration)> = Vec::new();
    for (i, w) in path.knots.windows(2).enumerate() {
        let skip = usize::from(i > 0);
        samples.extend(
            segment_samples(w[0].as_slice(), w[1].as_slice(), fine_step)
                .skip(skip)
                .map(|q| (i, Configuration::from_vec(q))),
        );
    }
    let hits: Vec<bool> = samples.par_iter().map(|(_, q)| !checker.is_free(q.as_slice())).collect();
    let mut out = Vec::new();
    for ((piece, q), hit) in samples.into_iter().zip(hits) {
        if !hit {
            continue;
        }
        let mut sets = scs.sets_containing(q.as_slice(), KNOT_TOL);
        if sets.is_empty() {
            sets.push(path.sequence[piece]);
        }
        for set in sets {
            out.push(PathCollision { set, config: q.clone() });
        }
    }
    Ok(out)
}

/// Cuts the reported collisions out of their sets, then restores total
/// coverage of the seed path by re-assigning or inflating segments whose
/// set no longer contains them.
///
/// Collisions are separated from the segment each set was inflated from.
/// Every reported configuration ends up strictly outside its set.
pub fn refine_sets<C: CollisionChecker + ?Sized, R: Rng + ?Sized>(
    scs: &mut Scs,
    collisions: &[PathCollision],
    domain: &HPolytope,
    params: &EizoParams,
    checker: &C,
    rng: &mut R,
) -> Result<SetStats> {
    if collisions.is_empty() {
        return Err(Error::Precondition("refine_sets needs at least one collision".into()));
    }
    let mut grouped: BTreeMap<usize, Vec<Configuration>> = BTreeMap::new();
    for c in collisions {
        if c.set >= scs.sets.len() {
            return Err(Error::Precondition(format!("collision attributed to unknown set {}", c.set)));
        }
        grouped.entry(c.set).or_default().push(c.config.clone());
    }
    let mut stats = SetStats::default();
    for (set, points) in grouped {
        let seed = scs.seeds[set].clone();
        let n_b = params.bisection_steps(domain_diagonal(domain, &seed));
        let ex = exclude_collisions(&mut scs.sets[set], &seed, &points, params, n_b, checker, None)?;
        stats.hyperplanes += ex.hyperplanes;
        stats.collision_checks += ex.collision_checks;
    }

    for k in 0..scs.coverage.len() {
        let seg = scs.path.segment(k);
        let current = scs.coverage[k];
        if scs.sets[current].contains_segment(seg.v1.as_slice(), seg.v2.as_slice(), crate::cpoly::MEMBERSHIP_TOL)? {
            continue;
        }
        let prefer = if k > 0 { Some(scs.coverage[k - 1]) } else { None };
        scs.coverage[k] = match scs.covering_set(k, prefer) {
            Some(i) => i,
            None => inflate_into(scs, k, domain, params, checker, rng, &mut stats)?,
        };
    }
    Ok(stats)
}
