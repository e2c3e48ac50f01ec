use serde::{Deserialize, Serialize};

use crate::cpoly::{HPolytope, MEMBERSHIP_TOL};
use crate::drm::PwlPath;
use crate::eizo::Segment;
use crate::{Configuration, Error, Result};

/// Polytopes built along a seed path, with the bookkeeping needed to refine
/// them later.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scs {
    pub sets: Vec<HPolytope>,
    /// Segment each set was inflated from.
    pub seeds: Vec<Segment>,
    /// For each segment of `path`, the set that contains it.
    pub coverage: Vec<usize>,
    pub path: PwlPath,
}

impl Scs {
    pub fn empty(path: PwlPath) -> Self {
        Self { sets: Vec::new(), seeds: Vec::new(), coverage: Vec::new(), path }
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Set indices visited by the seed path, consecutive repeats merged.
    pub fn sequence(&self) -> Vec<usize> {
        let mut seq: Vec<usize> = Vec::new();
        for &c in &self.coverage {
            if seq.last() != Some(&c) {
                seq.push(c);
            }
        }
        seq
    }

    /// Seed path knots at which the covering set changes; each lies in both
    /// adjacent sets.
    pub fn transition_knots(&self) -> Vec<Configuration> {
        (1..self.coverage.len())
            .filter(|&k| self.coverage[k] != self.coverage[k - 1])
            .map(|k| self.path.knots()[k].clone())
            .collect()
    }

    /// A set containing segment `k`, preferring `prefer` when it qualifies,
    /// otherwise the lowest index.
    pub fn covering_set(&self, k: usize, prefer: Option<usize>) -> Option<usize> {
        let seg = self.path.segment(k);
        let holds = |i: usize| {
            self.sets[i].contains_segment(seg.v1.as_slice(), seg.v2.as_slice(), MEMBERSHIP_TOL).unwrap_or(false)
        };
        if let Some(p) = prefer.filter(|&p| p < self.sets.len() && holds(p)) {
            return Some(p);
        }
        (0..self.sets.len()).find(|&i| holds(i))
    }

    /// Checks that coverage is total and every covered segment lies in its set.
    pub fn validate(&self) -> Result<()> {
        if self.coverage.len() != self.path.num_segments() || self.seeds.len() != self.sets.len() {
            return Err(Error::Precondition("coverage or seeds do not match the path and sets".into()));
        }
        for (k, &c) in self.coverage.iter().enumerate() {
            let seg = self.path.segment(k);
            let ok = c < self.sets.len()
                && self.sets[c].contains_segment(seg.v1.as_slice(), seg.v2.as_slice(), MEMBERSHIP_TOL)?;
            if !ok {
                return Err(Error::Precondition(format!("segment {k} is not contained in its set {c}")));
            }
        }
        Ok(())
    }

    /// Sets containing configuration `q`.
    pub fn sets_containing(&self, q: &[f64], tol: f64) -> Vec<usize> {
        (0..self.sets.len()).filter(|&i| self.sets[i].max_violation(q) <= tol).collect()
    }
}
