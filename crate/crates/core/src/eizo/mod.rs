//! Zero-order inflation of a collision-free line segment into a
//! probabilistically collision-free polytope that contains the segment.
//!
//! Each iteration samples the current polytope, stops once a statistical
//! test bounds the colliding volume fraction, and otherwise pulls colliding
//! samples toward the segment by bisection and walls them off with
//! hyperplanes tangent to the level sets of the distance to the segment.

mod distance;
mod inflate;

use serde::{Deserialize, Serialize};

use crate::cpoly::HPolytope;
use crate::{Configuration, Error, Result};

pub use distance::{dist_gradient, dist_to_segment, project_to_segment, Projection};
pub(crate) use inflate::domain_diagonal;
pub use inflate::{bisection_update, compute_step_back, exclude_collisions, inflate_edge, ExclusionStats};
pub use test::{batch_size, unadaptive_test, TestOutcome};

/// The segment `conv{v1, v2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    #[serde(with = "crate::serde_config")]
    pub v1: Configuration,
    #[serde(with = "crate::serde_config")]
    pub v2: Configuration,
}

impl Segment {
    pub fn new(v1: Configuration, v2: Configuration) -> Result<Self> {
        Error::check_dim(v1.len(), v2.len())?;
        Ok(Self { v1, v2 })
    }

    pub fn from_slices(v1: &[f64], v2: &[f64]) -> Result<Self> {
        Self::new(Configuration::from_column_slice(v1), Configuration::from_column_slice(v2))
    }

    pub fn dim(&self) -> usize {
        self.v1.len()
    }

    pub fn length(&self) -> f64 {
        (&self.v2 - &self.v1).norm()
    }

    pub fn point_at(&self, t: f64) -> Configuration {
        &self.v1 + (&self.v2 - &self.v1) * t
    }
}

/// Inflation parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EizoParams {
    /// Admissible uncertainty of the volume guarantee.
    pub delta: f64,
    /// Admissible fraction of the volume in collision.
    pub eps: f64,
    /// Decision threshold of the statistical test.
    pub tau: f64,
    /// Maximum step back of a hyperplane from its collision.
    pub delta_max: f64,
    /// Maximum number of colliding samples updated per iteration.
    pub n_p: usize,
    /// Maximum number of faces added per iteration.
    pub n_f: usize,
    /// Bisection steps; derived from the domain size when unset.
    pub n_b: Option<usize>,
    /// Hit-and-run mixing steps per sample.
    pub n_ms: usize,
    /// Candidates this close to the segment abort the inflation.
    pub t_col: f64,
    /// Optional iteration cap. Reaching it voids the volume guarantee.
    pub n_it: Option<usize>,
}

impl Default for EizoParams {
    fn default() -> Self {
        Self::forest()
    }
}

impl EizoParams {
    /// Settings used for the planar Forest benchmark.
    pub fn forest() -> Self {
        Self {
            delta: 0.05,
            eps: 0.01,
            tau: 0.5,
            delta_max: 0.01,
            n_p: 1000,
            n_f: 10,
            n_b: None,
            n_ms: 30,
            t_col: 1e-4,
            n_it: None,
        }
    }

    /// Settings used for seven-joint arms.
    pub fn arm7() -> Self {
        Self { delta: 0.005, eps: 0.005, n_p: 10_000, n_ms: 60, ..Self::forest() }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let p: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must lie in (0, 1), got {v}")))
            }
        };
        unit("delta", self.delta)?;
        unit("eps", self.eps)?;
        unit("tau", self.tau)?;
        if !(self.delta_max > 0.0 && self.delta_max.is_finite()) {
            return Err(Error::InvalidParameter("delta_max must be positive".into()));
        }
        if !(self.t_col >= 0.0 && self.t_col < self.delta_max) {
            return Err(Error::InvalidParameter("t_col must lie in [0, delta_max)".into()));
        }
        let counts = [
            ("n_p", Some(self.n_p)),
            ("n_f", Some(self.n_f)),
            ("n_ms", Some(self.n_ms)),
            ("n_b", self.n_b),
            ("n_it", self.n_it),
        ];
        for (name, v) in counts {
            if v == Some(0) {
                return Err(Error::InvalidParameter(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }

    /// Bisection steps for a domain: `ceil(log2(diagonal / delta_max))`.
    pub fn bisection_steps(&self, domain_diagonal: f64) -> usize {
        self.n_b.unwrap_or_else(|| {
            let n = (domain_diagonal / self.delta_max).log2().ceil();
            if n.is_finite() && n >= 1.0 {
                n as usize
            } else {
                1
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    TestAccepted,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct InflationReport {
    pub polytope: HPolytope,
    pub iterations: usize,
    pub hyperplanes_added: usize,
    pub collision_checks: usize,
    pub terminated_by: Termination,
}

impl InflationReport {
    /// Whether the probabilistic volume guarantee applies to the polytope.
    pub fn guarantee_holds(&self) -> bool {
        self.terminated_by == Termination::TestAccepted
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_from_text() {
        let p = EizoParams::from_toml("eps = 0.02\nn_it = 5\n").unwrap();
        assert_eq!(p.eps, 0.02);
        assert_eq!(p.n_it, Some(5));
        assert_eq!(p.n_p, EizoParams::forest().n_p);
        assert_eq!(EizoParams::from_json(r#"{"tau":0.4}"#).unwrap().tau, 0.4);
        assert!(EizoParams::from_json(r#"{"eps":1.5}"#).is_err());
        assert!(EizoParams::from_toml("n_f = 0").is_err());
        assert!(EizoParams::from_toml("eps = ").is_err());
    }

    #[test]
    fn defaults_validate() {
        EizoParams::forest().validate().unwrap();
        EizoParams::arm7().validate().unwrap();
        let bad = EizoParams { t_col: 0.02, ..EizoParams::forest() };
        assert!(bad.validate().is_err());
        let bad = EizoParams { n_it: Some(0), ..EizoParams::forest() };
        assert!(bad.validate().is_err());
        let bad = EizoParams { tau: 1.0, ..EizoParams::forest() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn bisection_rule_of_thumb() {
        // Forest domain diagonal 10*sqrt(2): log2(1414.2) = 10.47.
        let p = EizoParams::forest();
        assert_eq!(p.bisection_steps(10.0 * 2f64.sqrt()), 11);
        assert_eq!(EizoParams { n_b: Some(4), ..p }.bisection_steps(100.0), 4);
    }

    #[test]
    fn params_from_toml_fill_defaults() {
        let p: EizoParams = toml::from_str("eps = 0.02\nn_it = 3").unwrap();
        assert_eq!(p.eps, 0.02);
        assert_eq!(p.n_it, Some(3));
        assert_eq!(p.n_p, 1000);
    }
}
