//! Shortest piecewise-linear path through a sequence of convex sets.
//!
//! Knot `v_i` (for `1 < i <= M`) must lie in both set `i - 1` and set `i`;
//! the first and last knots are the fixed endpoints. The total length is
//! minimized by block coordinate descent over the interior knots. Each
//! block step is a majorize-minimize (Weiszfeld) step toward the two
//! neighbouring knots followed by a Dykstra projection onto the
//! intersection of the two sets. The length is smoothed by `mu`, which is
//! driven to zero by continuation so that coincident knots cannot stall
//! the descent.

mod scs;

use serde::{Deserialize, Serialize};

use crate::cpoly::HPolytope;
use crate::{Configuration, Error, Result};

pub use scs::Scs;

/// Membership tolerance of optimized knots.
pub const KNOT_TOL: f64 = 1e-7;
const PROJECTION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LscsOptions {
    /// Stop once a sweep at the final smoothing level gains less than this.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Initial smoothing relative to the endpoint distance.
    pub mu_start: f64,
    /// Smoothing level at which continuation stops.
    pub mu_final: f64,
}

impl Default for LscsOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_sweeps: 5000, mu_start: 1e-2, mu_final: 1e-10 }
    }
}

/// Optimized knots through a set sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScsPath {
    #[serde(with = "crate::serde_config::list")]
    pub knots: Vec<Configuration>,
    pub cost: f64,
    /// Set index (into [`Scs::sets`]) containing each piece.
    pub sequence: Vec<usize>,
    pub sweeps: usize,
    /// False when the sweep budget ran out before the tolerance was met.
    pub converged: bool,
}

impl ScsPath {
    pub fn num_pieces(&self) -> usize {
        self.knots.len() - 1
    }
}

pub fn path_length(knots: &[Configuration]) -> f64 {
    knots.windows(2).map(|w| (&w[1] - &w[0]).norm()).sum()
}

fn smoothed_length(knots: &[Configuration], mu: f64) -> f64 {
    knots.windows(2).map(|w| ((&w[1] - &w[0]).norm_squared() + mu * mu).sqrt()).sum()
}

/// Euclidean projection onto the intersection of polytopes by Dykstra's
/// alternating projections over their halfspaces. Returns `None` if the
/// iteration does not reach a feasible point.
pub fn project_onto_intersection(sets: &[&HPolytope], x: &Configuration) -> Option<Configuration> {
    let faces: Vec<(&[f64], f64)> = sets.iter().flat_map(|p| p.rows()).collect();
    let violation = |y: &Configuration| {
        faces.iter().map(|(a, b)| crate::cpoly::dot(a, y.as_slice()) - b).fold(f64::NEG_INFINITY, f64::max)
    };
    if violation(x) <= 0.0 {
        return Some(x.clone());
    }
    let mut y = x.clone();
    let mut incr = vec![Configuration::zeros(x.len()); faces.len()];
    for _ in 0..20_000 {
        let before = y.clone();
        for (j, (a, b)) in faces.iter().enumerate() {
            let mut z = &y + &incr[j];
            let over = crate::cpoly::dot(a, z.as_slice()) - b;
            let prev = z.clone();
            if over > 0.0 {
                for (zi, ai) in z.iter_mut().zip(a.iter()) {
                    *zi -= over * ai;
                }
            }
            incr[j] = prev - &z;
            y = z;
        }
        if violation(&y) <= PROJECTION_TOL && (&y - &before).norm() <= 1e-13 {
            break;
        }
    }
    (violation(&y) <= PROJECTION_TOL).then_some(y)
}

/// Shortest path from `s` to `g` through `sets` in order.
///
/// `warm` supplies feasible interior knots (one per transition); without
/// it, or if it is infeasible, the straight line from `s` to `g` is
/// projected onto each transition instead.
pub fn lscs_on_sequence(
    sets: &[&HPolytope],
    s: &Configuration,
    g: &Configuration,
    warm: Option<&[Configuration]>,
    opts: &LscsOptions,
) -> Result<(Vec<Configuration>, usize, bool)> {
    let m = sets.len();
    if m == 0 {
        return Err(Error::Precondition("empty set sequence".into()));
    }
    for p in sets {
        Error::check_dim(p.dim(), s.len())?;
    }
    Error::check_dim(s.len(), g.len())?;
    if !sets[0].contains(s.as_slice(), KNOT_TOL)? || !sets[m - 1].contains(g.as_slice(), KNOT_TOL)? {
        return Err(Error::InfeasibleEndpoint);
    }

    let pair = |i: usize| [sets[i - 1], sets[i]];
    let feasible = |i: usize, v: &Configuration| pair(i).iter().all(|p| p.max_violation(v.as_slice()) <= KNOT_TOL);

    let mut knots = Vec::with_capacity(m + 1);
    knots.push(s.clone());
    for i in 1..m {
        let given = warm.and_then(|w| w.get(i - 1)).filter(|v| feasible(i, v));
        let v = match given {
            Some(v) => v.clone(),
            None => {
                let t = i as f64 / m as f64;
                let guess = s + (g - s) * t;
                project_onto_intersection(&pair(i), &guess).ok_or(Error::InfeasibleTransition(i))?
            }
        };
        knots.push(v);
    }
    knots.push(g.clone());

    let scale = (g - s).norm().max(1e-3);
    let mut mu = opts.mu_start * scale;
    let mu_final = opts.mu_final * scale;
    let mut best = knots.clone();
    let mut best_cost = path_length(&knots);
    let mut level = smoothed_length(&knots, mu);
    let mut sweeps = 0;
    let mut converged = m == 1;
    while !converged && sweeps < opts.max_sweeps {
        sweeps += 1;
        for i in 1..m {
            let wa = 1.0 / ((&knots[i] - &knots[i - 1]).norm_squared() + mu * mu).sqrt();
            let wb = 1.0 / ((&knots[i] - &knots[i + 1]).norm_squared() + mu * mu).sqrt();
            let target = (&knots[i - 1] * wa + &knots[i + 1] * wb) / (wa + wb);
            let Some(cand) = project_onto_intersection(&pair(i), &target) else { continue };
            let local = |v: &Configuration| {
                ((v - &knots[i - 1]).norm_squared() + mu * mu).sqrt()
                    + ((v - &knots[i + 1]).norm_squared() + mu * mu).sqrt()
            };
            if local(&cand) <= local(&knots[i]) {
                knots[i] = cand;
            }
        }
        let cost = path_length(&knots);
        if cost < best_cost {
            best_cost = cost;
            best.clone_from(&knots);
        }
        let next = smoothed_length(&knots, mu);
        let gain = level - next;
        level = next;
        if gain < opts.tol {
            if mu <= mu_final {
                converged = true;
            } else {
                mu = (mu * 0.1).max(mu_final);
                level = smoothed_length(&knots, mu);
            }
        }
    }
    Ok((best, sweeps, converged))
}

/// Shortest path through the set sequence of `scs` warm-started at the
/// knots where its seed path changes set.
pub fn lscs_shortest_path(scs: &Scs, s: &Configuration, g: &Configuration, opts: &LscsOptions) -> Result<ScsPath> {
    let sequence = scs.sequence();
    let sets: Vec<&HPolytope> = sequence.iter().map(|&i| &scs.sets[i]).collect();
    let warm = scs.transition_knots();
    let (knots, sweeps, converged) = lscs_on_sequence(&sets, s, g, Some(&warm), opts)?;
    if !converged {
        log::warn!("shortest path stopped after {sweeps} sweeps without meeting the tolerance");
    }
    let cost = path_length(&knots);
    Ok(ScsPath { knots, cost, sequence, sweeps, converged })
}
