//! H-representation polytopes `{x | A x <= b}` and uniform sampling inside them.

mod sampling;

use serde::{Deserialize, Serialize};

use crate::{Configuration, Error, Result};

pub use sampling::{hit_and_run_sample, SampleBatch};

/// Absolute membership tolerance on unit-normal rows.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Intersection of halfspaces with unit-norm face normals.
///
/// Rows are stored row-major. Normals are normalized on insertion so that
/// `b_i - a_i x` is the Euclidean distance of `x` to face `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct HPolytope {
    dim: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl HPolytope {
    /// Builds a polytope from rows of `A` and the offsets `b`.
    pub fn new(dim: usize, rows: &[Vec<f64>], b: &[f64]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("polytope dimension must be positive".into()));
        }
        if rows.len() != b.len() {
            return Err(Error::InvalidParameter(format!("{} rows but {} offsets", rows.len(), b.len())));
        }
        let mut p = Self { dim, a: Vec::with_capacity(rows.len() * dim), b: Vec::with_capacity(b.len()) };
        for (row, &rhs) in rows.iter().zip(b) {
            p.push_row(row, rhs)?;
        }
        Ok(p)
    }

    /// The axis-aligned box `lower <= x <= upper`.
    pub fn from_box(lower: &[f64], upper: &[f64]) -> Result<Self> {
        Error::check_dim(lower.len(), upper.len())?;
        let dim = lower.len();
        let mut rows = Vec::with_capacity(2 * dim);
        let mut b = Vec::with_capacity(2 * dim);
        for i in 0..dim {
            if !(lower[i] < upper[i]) {
                return Err(Error::InvalidParameter(format!("empty box interval [{}, {}]", lower[i], upper[i])));
            }
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            rows.push(e.clone());
            b.push(upper[i]);
            e[i] = -1.0;
            rows.push(e);
            b.push(-lower[i]);
        }
        Self::new(dim, &rows, &b)
    }

    fn push_row(&mut self, row: &[f64], rhs: f64) -> Result<()> {
        Error::check_dim(self.dim, row.len())?;
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 1e-300) || !norm.is_finite() || !rhs.is_finite() {
            return Err(Error::InvalidParameter("face normal must be finite and nonzero".into()));
        }
        self.a.extend(row.iter().map(|v| v / norm));
        self.b.push(rhs / norm);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_faces(&self) -> usize {
        self.b.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.dim..(i + 1) * self.dim]
    }

    pub fn offsets(&self) -> &[f64] {
        &self.b
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.a.chunks_exact(self.dim).zip(self.b.iter().copied())
    }

    /// `max_i (a_i x - b_i)`; non-positive inside the polytope.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        self.rows().map(|(row, b)| dot(row, x) - b).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool> {
        Error::check_dim(self.dim, x.len())?;
        Ok(self.max_violation(x) <= tol)
    }

    /// Both endpoints inside implies the whole segment is inside.
    pub fn contains_segment(&self, v1: &[f64], v2: &[f64], tol: f64) -> Result<bool> {
        Ok(self.contains(v1, tol)? && self.contains(v2, tol)?)
    }

    /// Appends the face `a x <= rhs`. Redundant faces are kept.
    pub fn add_halfspace(&mut self, a: &[f64], rhs: f64) -> Result<()> {
        self.push_row(a, rhs)
    }

    pub fn intersect_halfspace(&self, a: &[f64], rhs: f64) -> Result<HPolytope> {
        let mut p = self.clone();
        p.add_halfspace(a, rhs)?;
        Ok(p)
    }

    /// Drops faces dominated by a parallel face with a tighter offset.
    ///
    /// Only exact parallel duplicates are detected; general redundancy would
    /// need a linear program per face.
    pub fn prune_parallel(&self, tol: f64) -> HPolytope {
        let m = self.num_faces();
        let mut keep = vec![true; m];
        for i in 0..m {
            if !keep[i] {
                continue;
            }
            for j in (i + 1)..m {
                if !keep[j] {
                    continue;
                }
                let cos = dot(self.row(i), self.row(j));
                if cos > 1.0 - tol {
                    if self.b[j] < self.b[i] {
                        keep[i] = false;
                        break;
                    } else {
                        keep[j] = false;
                    }
                }
            }
        }
        let mut out = HPolytope { dim: self.dim, a: Vec::new(), b: Vec::new() };
        for (i, k) in keep.iter().enumerate() {
            if *k {
                out.a.extend_from_slice(self.row(i));
                out.b.push(self.b[i]);
            }
        }
        out
    }

    /// Vertices of a 2-D polytope in counter-clockwise order.
    ///
    /// Computed by intersecting every pair of faces and keeping the points
    /// inside all faces.
    pub fn vertices_2d(&self, tol: f64) -> Result<Vec<[f64; 2]>> {
        Error::check_dim(2, self.dim)?;
        let mut pts: Vec<[f64; 2]> = Vec::new();
        let m = self.num_faces();
        for i in 0..m {
            for j in (i + 1)..m {
                let (r, s) = (self.row(i), self.row(j));
                let det = r[0] * s[1] - r[1] * s[0];
                if det.abs() < 1e-12 {
                    continue;
                }
                let x = (self.b[i] * s[1] - r[1] * self.b[j]) / det;
                let y = (r[0] * self.b[j] - self.b[i] * s[0]) / det;
                if self.max_violation(&[x, y]) <= tol
                    && !pts.iter().any(|p| (p[0] - x).abs() < tol && (p[1] - y).abs() < tol)
                {
                    pts.push([x, y]);
                }
            }
        }
        if pts.is_empty() {
            return Ok(pts);
        }
        let cx = pts.iter().map(|p| p[0]).sum::<f64>() / pts.len() as f64;
        let cy = pts.iter().map(|p| p[1]).sum::<f64>() / pts.len() as f64;
        pts.sort_by(|p, q| {
            let ap = (p[1] - cy).atan2(p[0] - cx);
            let aq = (q[1] - cy).atan2(q[0] - cx);
            ap.total_cmp(&aq)
        });
        Ok(pts)
    }

    pub fn to_spec(&self) -> PolytopeSpec {
        PolytopeSpec {
            dim: self.dim,
            a: self.a.chunks_exact(self.dim).map(|r| r.to_vec()).collect(),
            b: self.b.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_spec()).expect("polytope serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: PolytopeSpec = serde_json::from_str(text)?;
        spec.build()
    }
}

/// JSON form: `{"dim": n, "A": [[...], ...], "b": [...]}` with rows of `A`
/// in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolytopeSpec {
    pub dim: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

impl PolytopeSpec {
    pub fn build(&self) -> Result<HPolytope> {
        HPolytope::new(self.dim, &self.a, &self.b)
    }
}

impl Serialize for HPolytope {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_spec().serialize(s)
    }
}

impl<'de> Deserialize<'de> for HPolytope {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        PolytopeSpec::deserialize(d)?.build().map_err(serde::de::Error::custom)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Convenience for building configurations from slices.
pub fn config(values: &[f64]) -> Configuration {
    Configuration::from_column_slice(values)
}
