//! Sphere and box primitives with conservative overlap tests.
//!
//! All tests treat contact as collision: two shapes are separated only if
//! the gap between them is strictly positive.

use nalgebra::{Isometry3, Point3, Vector3};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Shape {
    Sphere { radius: f64 },
    Box { half_extents: [f64; 3] },
}

impl Shape {
    /// Radius of a sphere about the shape origin enclosing the shape.
    pub fn bounding_radius(&self) -> f64 {
        match *self {
            Shape::Sphere { radius } => radius,
            Shape::Box { half_extents: h } => (h[0] * h[0] + h[1] * h[1] + h[2] * h[2]).sqrt(),
        }
    }

    pub(crate) fn validate(&self) -> Result<(), String> {
        match *self {
            Shape::Sphere { radius } if !(radius >= 0.0 && radius.is_finite()) => {
                Err(format!("sphere radius must be finite and non-negative, got {radius}"))
            }
            Shape::Box { half_extents } if half_extents.iter().any(|h| !(*h > 0.0 && h.is_finite())) => {
                Err(format!("box half extents must be positive, got {half_extents:?}"))
            }
            _ => Ok(()),
        }
    }
}

/// A shape placed by a rigid transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placed {
    pub shape: Shape,
    pub pose: Isometry3<f64>,
}

impl Placed {
    pub fn new(shape: Shape, pose: Isometry3<f64>) -> Self {
        Self { shape, pose }
    }

    pub fn sphere(center: [f64; 3], radius: f64) -> Self {
        Self::new(Shape::Sphere { radius }, Isometry3::translation(center[0], center[1], center[2]))
    }

    pub fn center(&self) -> Point3<f64> {
        Point3::from(self.pose.translation.vector)
    }
}

/// True when the two placed shapes touch or overlap.
pub fn collides(a: &Placed, b: &Placed) -> bool {
    let ca = a.pose.translation.vector;
    let cb = b.pose.translation.vector;
    let reach = a.shape.bounding_radius() + b.shape.bounding_radius();
    if (ca - cb).norm_squared() > reach * reach {
        return false;
    }
    match (a.shape, b.shape) {
        (Shape::Sphere { radius: ra }, Shape::Sphere { radius: rb }) => (ca - cb).norm() <= ra + rb,
        (Shape::Sphere { radius }, Shape::Box { half_extents }) => sphere_box(&ca, radius, &b.pose, &half_extents),
        (Shape::Box { half_extents }, Shape::Sphere { radius }) => sphere_box(&cb, radius, &a.pose, &half_extents),
        (Shape::Box { half_extents: ha }, Shape::Box { half_extents: hb }) => box_box(&a.pose, &ha, &b.pose, &hb),
    }
}

fn sphere_box(center: &Vector3<f64>, radius: f64, box_pose: &Isometry3<f64>, h: &[f64; 3]) -> bool {
    let local = box_pose.inverse_transform_point(&Point3::from(*center));
    let mut d2 = 0.0;
    for i in 0..3 {
        let excess = local[i].abs() - h[i];
        if excess > 0.0 {
            d2 += excess * excess;
        }
    }
    d2 <= radius * radius
}

/// Separating-axis test over the 15 candidate axes of two oriented boxes.
fn box_box(pa: &Isometry3<f64>, ha: &[f64; 3], pb: &Isometry3<f64>, hb: &[f64; 3]) -> bool {
    let ra = pa.rotation.to_rotation_matrix();
    let rb = pb.rotation.to_rotation_matrix();
    let axes_a: [Vector3<f64>; 3] =
        [ra.matrix().column(0).into(), ra.matrix().column(1).into(), ra.matrix().column(2).into()];
    let axes_b: [Vector3<f64>; 3] =
        [rb.matrix().column(0).into(), rb.matrix().column(1).into(), rb.matrix().column(2).into()];
    let t = pb.translation.vector - pa.translation.vector;

    let separated_on = |axis: &Vector3<f64>| -> bool {
        let n2 = axis.norm_squared();
        if n2 < 1e-18 {
            return false;
        }
        let proj_a: f64 = (0..3).map(|i| ha[i] * axes_a[i].dot(axis).abs()).sum();
        let proj_b: f64 = (0..3).map(|i| hb[i] * axes_b[i].dot(axis).abs()).sum();
        t.dot(axis).abs() > proj_a + proj_b
    };

    for axis in axes_a.iter().chain(axes_b.iter()) {
        if separated_on(axis) {
            return false;
        }
    }
    for u in &axes_a {
        for v in &axes_b {
            if separated_on(&u.cross(v)) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Translation3, UnitQuaternion};

    fn cube(center: [f64; 3], half: f64) -> Placed {
        Placed::new(Shape::Box { half_extents: [half; 3] }, Isometry3::translation(center[0], center[1], center[2]))
    }

    #[test]
    fn sphere_contact_counts() {
        let a = Placed::sphere([0.0, 0.0, 0.0], 0.0);
        let b = Placed::sphere([1.0, 0.0, 0.0], 1.0);
        assert!(collides(&a, &b));
        let c = Placed::sphere([1.0 + 1e-9, 0.0, 0.0], 1.0);
        assert!(!collides(&a, &c));
    }

    #[test]
    fn sphere_box_corner() {
        let b = cube([0.0; 3], 1.0);
        // Nearest box point is the edge point (1,1,0); distance 5 exactly.
        assert!(collides(&Placed::sphere([4.0, 5.0, 0.0], 5.0), &b));
        assert!(!collides(&Placed::sphere([4.0, 5.0, 0.0], 5.0 - 1e-9), &b));
    }

    #[test]
    fn box_box_face_touching_collides() {
        assert!(collides(&cube([0.0; 3], 1.0), &cube([2.0, 0.0, 0.0], 1.0)));
        assert!(!collides(&cube([0.0; 3], 1.0), &cube([2.0 + 1e-9, 0.0, 0.0], 1.0)));
    }

    #[test]
    fn rotated_box_separated_by_cross_axis() {
        // A 45 degree rotated box whose corner points toward the other box.
        let rot = UnitQuaternion::from_euler_angles(0.0, 0.0, std::f64::consts::FRAC_PI_4);
        let a = Placed::new(
            Shape::Box { half_extents: [1.0; 3] },
            Isometry3::from_parts(Translation3::new(0.0, 0.0, 0.0), rot),
        );
        let reach = 2f64.sqrt();
        assert!(collides(&a, &cube([reach + 1.0 - 1e-9, 0.0, 0.0], 1.0)));
        assert!(!collides(&a, &cube([reach + 1.0 + 1e-6, 0.0, 0.0], 1.0)));
    }
}
