//! Depth-camera simulation: pinhole rays against a triangle mesh with
//! Gaussian range noise.

mod io;
mod mesh;
mod teapot;
mod teapot_data;

pub use io::{load_mesh, write_obj};
pub use mesh::{MeshError, RayHit, SceneMesh};
pub use teapot::teapot_mesh;

use crate::geom::{Vec3, View};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

#[derive(Debug, thiserror::Error)]
pub enum SensorError {
    #[error("invalid sensor model: {0}")]
    BadModel(String),
}

/// Pinhole depth camera: field of view in degrees, resolution in pixels,
/// range-noise standard deviation and maximum range in metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorModel {
    pub theta_x_deg: f64,
    pub theta_y_deg: f64,
    pub omega_x: u32,
    pub omega_y: u32,
    pub sigma: f64,
    pub max_range: f64,
}

impl SensorModel {
    pub fn new(
        theta_x_deg: f64,
        theta_y_deg: f64,
        omega_x: u32,
        omega_y: u32,
        sigma: f64,
        max_range: f64,
    ) -> Result<Self, SensorError> {
        if !(theta_x_deg > 0.0 && theta_x_deg < 180.0 && theta_y_deg > 0.0 && theta_y_deg < 180.0)
        {
            return Err(SensorError::BadModel(format!(
                "fov must be in (0, 180) degrees, got {theta_x_deg} x {theta_y_deg}"
            )));
        }
        if omega_x == 0 || omega_y == 0 {
            return Err(SensorError::BadModel("resolution must be at least 1 px".into()));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(SensorError::BadModel(format!("sigma must be >= 0, got {sigma}")));
        }
        if !(max_range > 0.0) {
            return Err(SensorError::BadModel(format!("max_range must be > 0, got {max_range}")));
        }
        Ok(Self { theta_x_deg, theta_y_deg, omega_x, omega_y, sigma, max_range })
    }
}

/// Right-handed orthonormal camera frame: right × up = forward.
#[derive(Debug, Clone, Copy)]
pub struct CameraFrame {
    pub origin: Vec3,
    pub forward: Vec3,
    pub right: Vec3,
    pub up: Vec3,
}

/// Derive a roll-free frame from a view: up is world +z projected orthogonal
/// to the forward axis, falling back to world +x when forward is parallel
/// to z.
pub fn pose_from_view(view: &View) -> CameraFrame {
    let forward = view.orientation;
    let mut up = Vec3::new(0.0, 0.0, 1.0);
    up -= forward * up.dot(&forward);
    if up.norm() < 1e-9 {
        up = Vec3::new(1.0, 0.0, 0.0);
        up -= forward * up.dot(&forward);
    }
    let up = up.normalize();
    let right = up.cross(&forward);
    CameraFrame { origin: view.position, forward, right, up }
}

/// Raycast one frame: a ray through every pixel center, nearest mesh hit
/// within max_range, Gaussian noise along the ray per hit. Points come back
/// in row-major pixel order (hitless pixels are skipped), deterministic for
/// a fixed seed.
pub fn capture(mesh: &SceneMesh, view: &View, sensor: &SensorModel, seed: u64) -> Vec<Vec3> {
    let frame = pose_from_view(view);
    let hx = (sensor.theta_x_deg.to_radians() / 2.0).tan();
    let hy = (sensor.theta_y_deg.to_radians() / 2.0).tan();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = if sensor.sigma > 0.0 {
        Some(Normal::new(0.0, sensor.sigma).expect("sigma validated at construction"))
    } else {
        None
    };
    let mut out = Vec::new();
    for row in 0..sensor.omega_y {
        let v = 1.0 - 2.0 * (row as f64 + 0.5) / sensor.omega_y as f64;
        for col in 0..sensor.omega_x {
            let u = 2.0 * (col as f64 + 0.5) / sensor.omega_x as f64 - 1.0;
            let dir =
                (frame.forward + frame.right * (u * hx) + frame.up * (v * hy)).normalize();
            if let Some(hit) = mesh.raycast(&frame.origin, &dir, sensor.max_range) {
                let t = match &normal {
                    Some(n) => hit.t + n.sample(&mut rng),
                    None => hit.t,
                };
                out.push(frame.origin + dir * t);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn plane(z: f64, half: f64) -> SceneMesh {
        SceneMesh::new(
            vec![
                Vec3::new(-half, -half, z),
                Vec3::new(half, -half, z),
                Vec3::new(half, half, z),
                Vec3::new(-half, half, z),
            ],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap()
    }

    fn down_view(height: f64) -> View {
        View::new(Vec3::new(0.0, 0.0, height), Vec3::new(0.0, 0.0, -1.0)).unwrap()
    }

    #[test]
    fn model_validation() {
        assert!(SensorModel::new(69.4, 42.5, 848, 480, 0.01, 10.0).is_ok());
        assert!(SensorModel::new(0.0, 42.5, 848, 480, 0.01, 10.0).is_err());
        assert!(SensorModel::new(69.4, 180.0, 848, 480, 0.01, 10.0).is_err());
        assert!(SensorModel::new(69.4, 42.5, 0, 480, 0.01, 10.0).is_err());
        assert!(SensorModel::new(69.4, 42.5, 848, 480, -0.1, 10.0).is_err());
        assert!(SensorModel::new(69.4, 42.5, 848, 480, 0.01, 0.0).is_err());
    }

    #[test]
    fn frame_examples_and_orthonormality() {
        // Looking straight down: the +z projection vanishes, +x fallback.
        let f = pose_from_view(&down_view(1.0));
        assert!((f.up - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-12);
        assert!((f.right - Vec3::new(0.0, 1.0, 0.0)).norm() < 1e-12);

        // Horizontal forward keeps world up.
        let v = View::new(Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0)).unwrap();
        let f = pose_from_view(&v);
        assert!((f.up - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-12);
        assert!((f.right - Vec3::new(0.0, 1.0, 0.0)).norm() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..300 {
            let dir = Vec3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            if dir.norm() < 1e-3 {
                continue;
            }
            let f = pose_from_view(&View::new(Vec3::zeros(), dir).unwrap());
            assert!((f.right.cross(&f.up) - f.forward).norm() < 1e-9);
            assert!(f.right.dot(&f.up).abs() < 1e-9);
            assert!(f.right.dot(&f.forward).abs() < 1e-9);
            assert!((f.right.norm() - 1.0).abs() < 1e-9);
            assert!((f.up.norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn noiseless_plane_fills_every_pixel_exactly() {
        let mesh = plane(0.0, 1.0);
        let sensor = SensorModel::new(28.0, 28.0, 16, 16, 0.0, 10.0).unwrap();
        let pts = capture(&mesh, &down_view(2.0), &sensor, 1);
        assert_eq!(pts.len(), 256, "all rays hit the plane");
        for p in &pts {
            assert!(p.z.abs() < 1e-12, "noiseless hits lie exactly on the plane");
            assert!(p.x.abs() <= 1.0 && p.y.abs() <= 1.0);
        }
    }

    #[test]
    fn looking_away_sees_nothing() {
        let mesh = plane(0.0, 1.0);
        let v = View::new(Vec3::new(0.0, 0.0, 2.0), Vec3::new(0.0, 0.0, 1.0)).unwrap();
        let sensor = SensorModel::new(60.0, 45.0, 32, 32, 0.01, 10.0).unwrap();
        assert!(capture(&mesh, &v, &sensor, 1).is_empty());
    }

    #[test]
    fn hits_beyond_max_range_are_dropped() {
        let mesh = plane(0.0, 1.0);
        let sensor = SensorModel::new(28.0, 28.0, 8, 8, 0.0, 1.5).unwrap();
        assert!(capture(&mesh, &down_view(2.0), &sensor, 1).is_empty());
    }

    #[test]
    fn range_noise_has_the_configured_spread() {
        let mesh = plane(0.0, 3.0);
        let clean = SensorModel::new(28.0, 28.0, 128, 128, 0.0, 10.0).unwrap();
        let noisy = SensorModel::new(28.0, 28.0, 128, 128, 0.01, 10.0).unwrap();
        let view = down_view(2.0);
        let a = capture(&mesh, &view, &clean, 9);
        let b = capture(&mesh, &view, &noisy, 9);
        assert_eq!(a.len(), b.len());
        assert!(a.len() >= 10_000);
        let origin = view.position;
        let diffs: Vec<f64> =
            a.iter().zip(&b).map(|(p, q)| (q - origin).norm() - (p - origin).norm()).collect();
        let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
        let var =
            diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (diffs.len() - 1) as f64;
        let sd = var.sqrt();
        assert!(
            (0.009..=0.011).contains(&sd),
            "sample std-dev {sd} outside [0.009, 0.011]"
        );
        assert!(mean.abs() < 3.0 * 0.01 / (diffs.len() as f64).sqrt() * 4.0);
    }

    #[test]
    fn denoised_points_stay_inside_the_frustum() {
        let mesh = plane(0.0, 3.0);
        let sensor = SensorModel::new(40.0, 25.0, 33, 17, 0.0, 10.0).unwrap();
        let view = down_view(2.0);
        let f = pose_from_view(&view);
        let half_px_x = 40.0f64.to_radians() / 2.0 / 33.0;
        let half_px_y = 25.0f64.to_radians() / 2.0 / 17.0;
        for p in capture(&mesh, &view, &sensor, 5) {
            let d = (p - view.position).normalize();
            let ax = d.dot(&f.right).atan2(d.dot(&f.forward)).abs();
            let ay = d.dot(&f.up).atan2(d.dot(&f.forward)).abs();
            assert!(ax <= (40.0f64 / 2.0).to_radians() + half_px_x);
            assert!(ay <= (25.0f64 / 2.0).to_radians() + half_px_y);
        }
    }

    #[test]
    fn two_parallel_planes_measure_only_the_nearer() {
        let mut v = Vec::new();
        let mut t = Vec::new();
        for (k, z) in [0.0, -0.5].into_iter().enumerate() {
            let base = (k * 4) as u32;
            v.extend([
                Vec3::new(-2.0, -2.0, z),
                Vec3::new(2.0, -2.0, z),
                Vec3::new(2.0, 2.0, z),
                Vec3::new(-2.0, 2.0, z),
            ]);
            t.extend([[base, base + 1, base + 2], [base, base + 2, base + 3]]);
        }
        let mesh = SceneMesh::new(v, t).unwrap();
        let sensor = SensorModel::new(30.0, 30.0, 24, 24, 0.0, 10.0).unwrap();
        let pts = capture(&mesh, &down_view(1.0), &sensor, 2);
        assert_eq!(pts.len(), 576);
        for p in &pts {
            assert!(p.z.abs() < 1e-12, "only the nearer plane is seen: {p:?}");
        }
    }

    #[test]
    fn captures_are_bit_exact_per_seed() {
        let mesh = plane(0.0, 2.0);
        let sensor = SensorModel::new(45.0, 35.0, 64, 48, 0.01, 10.0).unwrap();
        let view = View::new(Vec3::new(0.3, -0.2, 1.7), Vec3::new(-0.1, 0.05, -1.0)).unwrap();
        let a = capture(&mesh, &view, &sensor, 42);
        let b = capture(&mesh, &view, &sensor, 42);
        assert_eq!(a, b);
        let c = capture(&mesh, &view, &sensor, 43);
        assert_ne!(a, c, "different seeds draw different noise");
    }
}
