use std::fmt::Write as _;

use crate::cpoly::HPolytope;
use crate::drm::PwlPath;
use crate::scsopt::{Scs, ScsPath};
use crate::world::{Placed, Shape};
use crate::{Error, Result};

const CANVAS: f64 = 800.0;
const PALETTE: [&str; 6] = ["#4e79a7", "#f28e2b", "#59a14f", "#b07aa1", "#76b7b2", "#edc948"];

/// What to draw; only the first two configuration coordinates are used.
#[derive(Debug, Clone, Copy)]
pub struct SvgInput<'a> {
    pub domain: &'a HPolytope,
    pub obstacles: &'a [Placed],
    pub scs: Option<&'a Scs>,
    pub seed_path: Option<&'a PwlPath>,
    pub path: Option<&'a ScsPath>,
}

struct Frame {
    lo: [f64; 2],
    scale: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        (v - self.lo[0]) * self.scale
    }

    fn y(&self, v: f64) -> f64 {
        CANVAS - (v - self.lo[1]) * self.scale
    }

    fn points(&self, pts: impl Iterator<Item = [f64; 2]>) -> String {
        pts.map(|p| format!("{:.3},{:.3}", self.x(p[0]), self.y(p[1]))).collect::<Vec<_>>().join(" ")
    }
}

/// Renders a planar scene: domain, sets clipped to the domain, obstacles,
/// the seed path (dashed) and the optimized path.
pub fn render_svg(input: &SvgInput) -> Result<String> {
    if input.domain.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: input.domain.dim() });
    }
    let corners = input.domain.vertices_2d(1e-9)?;
    if corners.is_empty() {
        return Err(Error::InvalidParameter("domain has no vertices".into()));
    }
    let lo = [
        corners.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min),
        corners.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min),
    ];
    let hi = [
        corners.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max),
        corners.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max),
    ];
    let f = Frame { lo, scale: CANVAS / (hi[0] - lo[0]).max(hi[1] - lo[1]) };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS}" height="{CANVAS}" viewBox="0 0 {CANVAS} {CANVAS}">"#
    );
    let _ = writeln!(
        s,
        r##"<polygon class="domain" points="{}" fill="#ffffff" stroke="#000000"/>"##,
        f.points(corners.into_iter())
    );
    if let Some(scs) = input.scs {
        for (i, set) in scs.sets.iter().enumerate() {
            let mut clipped = set.clone();
            for (row, b) in input.domain.rows() {
                clipped.add_halfspace(row, b)?;
            }
            let verts = clipped.vertices_2d(1e-9)?;
            let color = PALETTE[i % PALETTE.len()];
            let _ = writeln!(
                s,
                r#"<polygon class="set" points="{}" fill="{color}" fill-opacity="0.25" stroke="{color}"/>"#,
                f.points(verts.into_iter())
            );
        }
    }
    for o in input.obstacles {
        let c = o.center();
        match o.shape {
            Shape::Sphere { radius } => {
                let _ = writeln!(
                    s,
                    r##"<circle class="obstacle" cx="{:.3}" cy="{:.3}" r="{:.3}" fill="#444444"/>"##,
                    f.x(c.x),
                    f.y(c.y),
                    radius * f.scale
                );
            }
            Shape::Box { half_extents } => {
                let (_, _, yaw) = o.pose.rotation.euler_angles();
                let _ = writeln!(
                    s,
                    r##"<rect class="obstacle" x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" transform="rotate({:.3} {:.3} {:.3})" fill="#444444"/>"##,
                    f.x(c.x - half_extents[0]),
                    f.y(c.y + half_extents[1]),
                    2.0 * half_extents[0] * f.scale,
                    2.0 * half_extents[1] * f.scale,
                    -yaw.to_degrees(),
                    f.x(c.x),
                    f.y(c.y)
                );
            }
        }
    }
    let line = |knots: &[crate::Configuration]| f.points(knots.iter().map(|k| [k[0], k[1]]));
    if let Some(p) = input.seed_path {
        let _ = writeln!(
            s,
            r##"<polyline class="seed" points="{}" fill="none" stroke="#888888" stroke-dasharray="6 4" stroke-width="2"/>"##,
            line(p.knots())
        );
    }
    if let Some(p) = input.path {
        let _ = writeln!(
            s,
            r##"<polyline class="path" points="{}" fill="none" stroke="#d62728" stroke-width="3"/>"##,
            line(&p.knots)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}
