//! Visibility ceiling of the built-in benchmark scene: registers captures
//! from a dense all-around set of viewpoints, with no planning involved, and
//! reports the surface coverage that saturates. Separates "the planner left
//! observable surface unvisited" from "no outside-in sensor placement can
//! see that surface at all".
//!
//! Usage: coverage_ceiling [resolution extent rho r r_d views_per_shell]

use nbv_core::geom::{Vec3, View};
use nbv_core::metrics::{self, MetricsConfig};
use nbv_core::planner;
use nbv_core::sensor::{self, teapot_mesh, SensorModel};
use nbv_core::store::{PointStore, StoreConfig};

fn fib_dir(i: usize, n: usize) -> Vec3 {
    let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
    let rad = (1.0 - z * z).max(0.0).sqrt();
    let phi = golden * i as f64;
    Vec3::new(rad * phi.cos(), rad * phi.sin(), z)
}

fn main() {
    let mut args = std::env::args().skip(1);
    let mut next = |default: f64| -> f64 {
        args.next().map(|s| s.parse().expect("numeric argument")).unwrap_or(default)
    };
    let resolution = next(16.0) as usize;
    let extent = next(1.0);
    let rho = next(146_000.0);
    let r = next(0.017);
    let r_d = next(0.005);
    let per_shell = next(362.0) as usize;

    let mesh = teapot_mesh(resolution, extent);
    let sensor = SensorModel::new(69.4, 42.5, 424, 240, 0.01, 10.0).unwrap();
    let d = planner::view_distance(&sensor, rho).unwrap();
    let mut store = PointStore::new(StoreConfig::from_density(rho, r, d).unwrap()).unwrap();

    let metrics_cfg = MetricsConfig::new(r_d, rho).unwrap();
    let gt_count = metrics_cfg.gt_sample_count(mesh.total_area());
    let gt = metrics::sample_ground_truth(&mesh, gt_count, 1).unwrap();
    println!(
        "scene: {} triangles, {:.4} m^2, {} ground-truth samples, standoff {:.4} m",
        mesh.triangle_count(),
        mesh.total_area(),
        gt.len(),
        d
    );

    let mut view_id = 0u32;
    for (shell, scale) in [(1, 1.0f64), (2, 0.75)] {
        for i in 0..per_shell {
            let pos = fib_dir(i, per_shell) * (d * scale);
            let view = View::looking_at(pos, Vec3::zeros()).unwrap();
            let pts = sensor::capture(&mesh, &view, &sensor, view_id as u64);
            store.insert_measurements(&pts, view_id).unwrap();
            view_id += 1;
        }
        let coverage = metrics::surface_coverage(&gt, &store, r_d).unwrap();
        println!(
            "shell {shell} (radius {:.3} m): {} views total, {} stored points, coverage {:.4}",
            d * scale,
            view_id,
            store.len(),
            coverage
        );
    }
}
