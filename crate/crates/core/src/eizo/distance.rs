use crate::{Configuration, Error, Result};

use super::Segment;

/// Closest point of a segment to a query point.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub point: Configuration,
    /// Position along the segment, clamped to `[0, 1]`.
    pub alpha: f64,
    pub dist: f64,
}

pub fn project_to_segment(c: &[f64], seg: &Segment) -> Result<Projection> {
    Error::check_dim(seg.dim(), c.len())?;
    let c = Configuration::from_column_slice(c);
    let dir = &seg.v2 - &seg.v1;
    let len2 = dir.norm_squared();
    let (point, alpha) = if len2 == 0.0 {
        (seg.v1.clone(), 0.0)
    } else {
        let alpha = ((&c - &seg.v1).dot(&dir) / len2).clamp(0.0, 1.0);
        (&seg.v1 * (1.0 - alpha) + &seg.v2 * alpha, alpha)
    };
    let dist = (&c - &point).norm();
    Ok(Projection { point, alpha, dist })
}

pub fn dist_to_segment(c: &[f64], seg: &Segment) -> Result<f64> {
    Ok(project_to_segment(c, seg)?.dist)
}

/// Unit gradient of the distance to the segment, `(c - proj) / |c - proj|`.
pub fn dist_gradient(c: &[f64], seg: &Segment) -> Result<Configuration> {
    let proj = project_to_segment(c, seg)?;
    if proj.dist <= 1e-12 {
        return Err(Error::GradientUndefined);
    }
    Ok((Configuration::from_column_slice(c) - proj.point) / proj.dist)
}
