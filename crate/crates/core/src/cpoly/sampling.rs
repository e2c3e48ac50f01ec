use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{dot, HPolytope, MEMBERSHIP_TOL};
use crate::seed::stream_rng;
use crate::{Configuration, Error, Result};

/// Points drawn by independent hit-and-run walks.
#[derive(Debug, Clone)]
pub struct SampleBatch {
    pub points: Vec<Configuration>,
    /// Master seed of the per-walk streams; reproduces the batch.
    pub seed: u64,
}

/// Draws `count` points, each the final state of its own walk of `mixing_steps`
/// hit-and-run steps.
///
/// Walk `i` starts at `seeds[i % seeds.len()]` and draws from stream `i` of
/// `seed`, so the batch does not depend on how walks are spread over threads.
/// A step picks a direction uniformly on the unit sphere, intersects the
/// line with the polytope and moves to a uniform point of that chord.
pub fn hit_and_run_sample(
    poly: &HPolytope,
    seeds: &[Configuration],
    count: usize,
    mixing_steps: usize,
    seed: u64,
) -> Result<SampleBatch> {
    if count == 0 {
        return Ok(SampleBatch { points: Vec::new(), seed });
    }
    if seeds.is_empty() {
        return Err(Error::InvalidParameter("hit-and-run needs at least one seed".into()));
    }
    if mixing_steps == 0 {
        return Err(Error::InvalidParameter("mixing steps must be at least 1".into()));
    }
    for s in seeds {
        Error::check_dim(poly.dim(), s.len())?;
        let violation = poly.max_violation(s.as_slice());
        if violation > MEMBERSHIP_TOL {
            return Err(Error::SeedOutside { violation });
        }
    }
    let points = (0..count)
        .into_par_iter()
        .map(|walk| {
            let mut rng = stream_rng(seed, walk as u64);
            let mut x = seeds[walk % seeds.len()].clone();
            let mut dir = Configuration::zeros(poly.dim());
            for _ in 0..mixing_steps {
                random_direction(&mut rng, &mut dir);
                let (lo, hi) = chord(poly, x.as_slice(), dir.as_slice()).ok_or(Error::UnboundedChord)?;
                if lo > hi {
                    return Err(Error::EmptyChord { walk });
                }
                let t = if hi > lo { rng.random_range(lo..=hi) } else { lo };
                x.axpy(t, &dir, 1.0);
            }
            Ok(x)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SampleBatch { points, seed })
}

fn random_direction<R: Rng>(rng: &mut R, dir: &mut Configuration) {
    loop {
        for v in dir.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let n = dir.norm();
        if n > 1e-12 {
            *dir /= n;
            return;
        }
    }
}

/// Parameter interval `[lo, hi]` with `x + t d` inside the polytope.
/// `None` if the line is unbounded in either direction.
fn chord(poly: &HPolytope, x: &[f64], d: &[f64]) -> Option<(f64, f64)> {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for (row, b) in poly.rows() {
        let ad = dot(row, d);
        // Points on a face may sit a rounding error outside it.
        let slack = (b - dot(row, x)).max(0.0);
        if ad > 1e-15 {
            hi = hi.min(slack / ad);
        } else if ad < -1e-15 {
            lo = lo.max(slack / ad);
        }
    }
    (lo.is_finite() && hi.is_finite()).then_some((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cpoly::config;

    fn unit_square() -> HPolytope {
        HPolytope::from_box(&[0.0, 0.0], &[1.0, 1.0]).unwrap()
    }

    #[test]
    fn zero_count_is_empty() {
        let b = hit_and_run_sample(&unit_square(), &[config(&[0.5, 0.5])], 0, 30, 1).unwrap();
        assert!(b.points.is_empty());
    }

    #[test]
    fn seed_outside_rejected() {
        let r = hit_and_run_sample(&unit_square(), &[config(&[1.5, 0.5])], 3, 30, 1);
        assert!(matches!(r, Err(Error::SeedOutside { .. })));
    }

    #[test]
    fn unbounded_rejected() {
        let half = HPolytope::new(2, &[vec![1.0, 0.0]], &[0.0]).unwrap();
        let r = hit_and_run_sample(&half, &[config(&[-1.0, 0.0])], 3, 5, 1);
        assert!(matches!(r, Err(Error::UnboundedChord)));
    }

    #[test]
    fn outputs_are_members() {
        let p = HPolytope::from_box(&[-1.0, -1.0], &[1.0, 1.0]).unwrap();
        let b = hit_and_run_sample(&p, &[config(&[0.0, 0.0])], 100_000, 30, 3).unwrap();
        assert_eq!(b.points.len(), 100_000);
        assert!(b.points.iter().all(|x| p.max_violation(x.as_slice()) <= 1e-9));
    }

    #[test]
    fn boundary_seed_is_accepted() {
        let p = unit_square();
        let b = hit_and_run_sample(&p, &[config(&[0.0, 0.5])], 100, 10, 3).unwrap();
        assert!(b.points.iter().all(|x| p.max_violation(x.as_slice()) <= 1e-9));
    }

    #[test]
    fn grid_frequencies_are_uniform() {
        // Exact cell probability is 1/16 on a 4x4 grid of the unit square.
        let b = hit_and_run_sample(&unit_square(), &[config(&[0.5, 0.5])], 100_000, 30, 17).unwrap();
        let mut counts = [0usize; 16];
        for x in &b.points {
            let i = ((x[0] * 4.0) as usize).min(3);
            let j = ((x[1] * 4.0) as usize).min(3);
            counts[4 * i + j] += 1;
        }
        for c in counts {
            let freq = c as f64 / 100_000.0;
            assert!((freq - 1.0 / 16.0).abs() <= 0.15 / 16.0, "cell frequency {freq}");
        }
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let p = unit_square();
        let seeds = [config(&[0.2, 0.3]), config(&[0.7, 0.6])];
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| hit_and_run_sample(&p, &seeds, 500, 20, 99).unwrap());
        let b = four.install(|| hit_and_run_sample(&p, &seeds, 500, 20, 99).unwrap());
        assert_eq!(a.points, b.points);
    }
}
