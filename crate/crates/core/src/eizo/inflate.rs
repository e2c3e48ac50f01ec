use rand::Rng;
use rayon::prelude::*;

use super::{dist_to_segment, project_to_segment, unadaptive_test, EizoParams, InflationReport, Segment, Termination};
use crate::cpoly::{dot, hit_and_run_sample, HPolytope, MEMBERSHIP_TOL};
use crate::world::CollisionChecker;
use crate::{Configuration, Error, Result};

/// Moves a colliding point toward its projection on the segment.
///
/// Runs `n_b` bisection steps on the chord between the projection (free) and
/// `c_col` (colliding), keeping the colliding end. Performs exactly `n_b`
/// collision checks.
pub fn bisection_update<C: CollisionChecker + ?Sized>(
    c_col: &[f64],
    seg: &Segment,
    n_b: usize,
    checker: &C,
) -> Result<Configuration> {
    let proj = project_to_segment(c_col, seg)?;
    let mut free = proj.point;
    let mut hit = Configuration::from_column_slice(c_col);
    for _ in 0..n_b {
        let mid = (&free + &hit) * 0.5;
        if checker.is_free(mid.as_slice()) {
            free = mid;
        } else {
            hit = mid;
        }
    }
    Ok(hit)
}

/// Step back for the face `a x <= b_raw - delta` so that both segment
/// vertices stay inside: the maximum step back, reduced by the violation
/// `r = max(a v1, a v2) - b_raw + delta_max` when that is positive.
pub fn compute_step_back(a: &[f64], b_raw: f64, seg: &Segment, delta_max: f64) -> f64 {
    let reach = dot(a, seg.v1.as_slice()).max(dot(a, seg.v2.as_slice()));
    let r = reach - b_raw + delta_max;
    if r > 0.0 {
        delta_max - r
    } else {
        delta_max
    }
}

/// Work done by [`exclude_collisions`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExclusionStats {
    pub hyperplanes: usize,
    pub collision_checks: usize,
}

struct Candidate {
    point: Configuration,
    dist: f64,
    index: usize,
}

/// Separates colliding configurations from the segment with hyperplanes.
///
/// Every collision is pulled toward the segment by bisection; the resulting
/// candidates are visited closest first, and each candidate still inside
/// `poly` gets a face tangent to the distance level set through it, stepped
/// back toward the segment. At most `max_faces` faces are added when a cap is
/// given. Without a cap every input collision ends up outside `poly`.
pub fn exclude_collisions<C: CollisionChecker + ?Sized>(
    poly: &mut HPolytope,
    seg: &Segment,
    collisions: &[Configuration],
    params: &EizoParams,
    n_b: usize,
    checker: &C,
    max_faces: Option<usize>,
) -> Result<ExclusionStats> {
    let mut candidates = collisions
        .par_iter()
        .enumerate()
        .map(|(index, c)| {
            let proj = project_to_segment(c.as_slice(), seg)?;
            if proj.dist <= params.t_col || !checker.is_free(proj.point.as_slice()) {
                return Err(Error::SegmentInCollision { distance: proj.dist });
            }
            let point = bisection_update(c.as_slice(), seg, n_b, checker)?;
            let dist = dist_to_segment(point.as_slice(), seg)?;
            if dist <= params.t_col {
                return Err(Error::SegmentInCollision { distance: dist });
            }
            Ok(Candidate { point, dist, index })
        })
        .collect::<Result<Vec<_>>>()?;
    candidates.sort_by(|x, y| x.dist.total_cmp(&y.dist).then(x.index.cmp(&y.index)));

    let mut stats = ExclusionStats { hyperplanes: 0, collision_checks: collisions.len() * (1 + n_b) };
    for cand in &candidates {
        if max_faces.is_some_and(|cap| stats.hyperplanes >= cap) {
            break;
        }
        let c = cand.point.as_slice();
        if poly.max_violation(c) > MEMBERSHIP_TOL {
            continue;
        }
        let proj = project_to_segment(c, seg)?;
        let a = (&cand.point - &proj.point) / proj.dist;
        let b_raw = a.dot(&cand.point);
        let step_back = compute_step_back(a.as_slice(), b_raw, seg, params.delta_max);
        poly.add_halfspace(a.as_slice(), b_raw - step_back)?;
        stats.hyperplanes += 1;
    }
    Ok(stats)
}

/// Inflates a collision-free segment into a polytope inside `domain`.
///
/// The returned polytope always contains the segment. When the report says
/// the test accepted, the colliding fraction of its volume exceeds `eps`
/// with probability at most `delta`.
pub fn inflate_edge<C: CollisionChecker + ?Sized, R: Rng + ?Sized>(
    seg: &Segment,
    domain: &HPolytope,
    params: &EizoParams,
    checker: &C,
    rng: &mut R,
) -> Result<InflationReport> {
    params.validate()?;
    Error::check_dim(domain.dim(), seg.dim())?;
    Error::check_dim(checker.dof(), seg.dim())?;
    if !domain.contains_segment(seg.v1.as_slice(), seg.v2.as_slice(), MEMBERSHIP_TOL)? {
        return Err(Error::SeedOutsideDomain);
    }
    if !checker.is_free(seg.v1.as_slice()) || !checker.is_free(seg.v2.as_slice()) {
        return Err(Error::SegmentInCollision { distance: 0.0 });
    }
    let n_b = params.bisection_steps(domain_diagonal(domain, seg));

    let mut poly = domain.clone();
    let mut hyperplanes = 0;
    let mut checks = 2;
    let mut k = 1;
    loop {
        let outcome_m = super::batch_size(k, params);
        let count = outcome_m.max(params.n_p);
        let seeds: Vec<Configuration> = (0..count).map(|_| seg.point_at(rng.random::<f64>())).collect();
        let batch = hit_and_run_sample(&poly, &seeds, count, params.n_ms, rng.random())?;
        let free = checker.batch_free(&batch.points);
        checks += count;

        let in_first_m = free[..outcome_m].iter().filter(|f| !**f).count();
        if unadaptive_test(in_first_m, k, params).accept {
            return Ok(InflationReport {
                polytope: poly,
                iterations: k,
                hyperplanes_added: hyperplanes,
                collision_checks: checks,
                terminated_by: Termination::TestAccepted,
            });
        }

        let colliding: Vec<Configuration> =
            batch.points.into_iter().zip(&free).filter(|(_, f)| !**f).map(|(p, _)| p).take(params.n_p).collect();
        let stats = exclude_collisions(&mut poly, seg, &colliding, params, n_b, checker, Some(params.n_f))?;
        hyperplanes += stats.hyperplanes;
        checks += stats.collision_checks;
        log::trace!("iteration {k}: {} collisions, {} faces", colliding.len(), stats.hyperplanes);

        if params.n_it.is_some_and(|cap| k >= cap) {
            return Ok(InflationReport {
                polytope: poly,
                iterations: k,
                hyperplanes_added: hyperplanes,
                collision_checks: checks,
                terminated_by: Termination::MaxIterations,
            });
        }
        k += 1;
    }
}

/// Rough size of the domain used for the bisection rule of thumb: the
/// diagonal of the box spanned by the segment and the domain faces along
/// the coordinate axes.
pub(crate) fn domain_diagonal(domain: &HPolytope, seg: &Segment) -> f64 {
    let dim = domain.dim();
    let mut sum = 0.0;
    for axis in 0..dim {
        let mut hi = f64::INFINITY;
        let mut lo = f64::NEG_INFINITY;
        for (row, b) in domain.rows() {
            let others = row.iter().enumerate().all(|(i, v)| i == axis || v.abs() < 1e-12);
            if others && row[axis] > 0.0 {
                hi = hi.min(b / row[axis]);
            } else if others && row[axis] < 0.0 {
                lo = lo.max(b / row[axis]);
            }
        }
        let extent =
            if hi.is_finite() && lo.is_finite() { hi - lo } else { (seg.v2[axis] - seg.v1[axis]).abs().max(1.0) };
        sum += extent * extent;
    }
    sum.sqrt()
}
