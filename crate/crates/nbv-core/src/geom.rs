//! Small shared geometry helpers on top of nalgebra.

use nalgebra::Vector3;

pub type Vec3 = Vector3<f64>;

/// Unit-length check tolerance used across the crate.
pub const UNIT_TOL: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum GeomError {
    #[error("direction vector is zero or non-finite")]
    DegenerateDirection,
    #[error("points coincide")]
    CoincidentPoints,
}

/// A sensor placement: position plus a unit orientation vector pointing from
/// the sensor toward what it observes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct View {
    pub position: Vec3,
    pub orientation: Vec3,
}

impl View {
    /// Builds a view, normalizing `orientation`. Zero or non-finite
    /// directions are rejected.
    pub fn new(position: Vec3, orientation: Vec3) -> Result<Self, GeomError> {
        let n = orientation.norm();
        if !n.is_finite() || n == 0.0 || !position.iter().all(|c| c.is_finite()) {
            return Err(GeomError::DegenerateDirection);
        }
        Ok(Self { position, orientation: orientation / n })
    }

    /// View at `position` oriented toward `target`.
    pub fn looking_at(position: Vec3, target: Vec3) -> Result<Self, GeomError> {
        if (target - position).norm() == 0.0 {
            return Err(GeomError::CoincidentPoints);
        }
        Self::new(position, target - position)
    }
}

/// Returns a unit vector perpendicular to `v`.
///
/// Deterministic: picks the world axis least aligned with `v` and projects it.
/// `v` must be nonzero.
pub fn any_perpendicular(v: &Vec3) -> Vec3 {
    let a = v.x.abs();
    let b = v.y.abs();
    let c = v.z.abs();
    let axis = if a <= b && a <= c {
        Vec3::new(1.0, 0.0, 0.0)
    } else if b <= c {
        Vec3::new(0.0, 1.0, 0.0)
    } else {
        Vec3::new(0.0, 0.0, 1.0)
    };
    let p = axis - v * (axis.dot(v) / v.norm_squared());
    p.normalize()
}

/// Rotates `v` about the axis `axis` (need not be unit) by `angle` radians.
pub fn rotate_about(v: &Vec3, axis: &Vec3, angle: f64) -> Vec3 {
    let u = nalgebra::Unit::new_normalize(*axis);
    nalgebra::Rotation3::from_axis_angle(&u, angle) * v
}

/// Angle in radians between two nonzero vectors, clamped against rounding.
pub fn angle_between(a: &Vec3, b: &Vec3) -> f64 {
    let c = a.dot(b) / (a.norm() * b.norm());
    c.clamp(-1.0, 1.0).acos()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perpendicular_is_unit_and_orthogonal() {
        let cases = [
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(1.0, 2.0, 3.0),
            Vec3::new(-0.3, 0.9, -0.1),
            Vec3::new(1e-8, -2e-7, 5e-9),
        ];
        for v in cases {
            let p = any_perpendicular(&v);
            assert!((p.norm() - 1.0).abs() < UNIT_TOL);
            assert!(p.dot(&v).abs() < 1e-9 * v.norm().max(1.0));
        }
    }

    #[test]
    fn rotation_matches_rodrigues_formula() {
        // Independent check: v' = v cosθ + (k×v) sinθ + k (k·v)(1−cosθ).
        let v = Vec3::new(0.2, -1.1, 0.7);
        let k = Vec3::new(1.0, 1.0, -0.5).normalize();
        let th: f64 = 0.83;
        let want = v * th.cos() + k.cross(&v) * th.sin() + k * (k.dot(&v)) * (1.0 - th.cos());
        let got = rotate_about(&v, &Vec3::new(2.0, 2.0, -1.0), th);
        assert!((want - got).norm() < 1e-12);
    }

    #[test]
    fn angle_between_axes() {
        let x = Vec3::new(1.0, 0.0, 0.0);
        let y = Vec3::new(0.0, 2.0, 0.0);
        assert!((angle_between(&x, &y) - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!(angle_between(&x, &x) < 1e-9);
        assert!((angle_between(&x, &-x) - std::f64::consts::PI).abs() < 1e-12);
    }
}
