//! Runs one planner trial at full desk-scale parameters and breaks the
//! uncovered ground truth down by height band, separating regions the scan
//! never reached from regions it touched but left sparse.
//!
//! Usage: scan_report [mode] [seed] [extent] [k_core] [adjust_step_deg] [normal_k]
//! Defaults: reactive 1000 0.3 0 30 16 (k_core 0 means the derived threshold)

use std::collections::BTreeSet;

use nbv_core::geom::{Vec3, View};
use nbv_core::graph::EdgeGate;
use nbv_core::harness::{capture_seed, parse_mode};
use nbv_core::metrics::{self, CoverageTracker, MetricsConfig};
use nbv_core::occlusion::OcclusionConfig;
use nbv_core::planner::{self, Planner, PlannerConfig, StepResult};
use nbv_core::proposal::ProposalConfig;
use nbv_core::sensor::{self, teapot_mesh, SensorModel};
use nbv_core::store::{StoreConfig, UniformGrid};

const BANDS: usize = 12;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mode = parse_mode(args.first().map(String::as_str).unwrap_or("reactive")).unwrap();
    let seed: u64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(1000);
    let extent: f64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(0.3);
    let k_core: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(0);
    let adjust: f64 = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(30.0);
    let normal_k: usize = args.get(5).map(|s| s.parse().unwrap()).unwrap_or(16);

    let rho = 146_000.0;
    let r = 0.017;
    let psi = 1.0;
    let r_d = 0.005;
    let sensor = SensorModel::new(69.4, 42.5, 424, 240, 0.01, 10.0).unwrap();

    let mesh = teapot_mesh(16, extent);
    let d = planner::view_distance(&sensor, rho).unwrap();
    let store_cfg = if k_core == 0 {
        StoreConfig::from_density(rho, r, d).unwrap()
    } else {
        StoreConfig::with_core_threshold(rho, r, k_core).unwrap()
    };
    let (lo, hi) = mesh.aabb();
    let seed_view = View::looking_at(Vec3::new(0.0, 0.0, hi.z + d), Vec3::default()).unwrap();

    let cfg = PlannerConfig {
        mode,
        store: store_cfg,
        occlusion: OcclusionConfig::new(psi, r).unwrap(),
        proposal: ProposalConfig::new(d, psi, normal_k).unwrap(),
        gate: EdgeGate::from_fov_deg(69.4, 42.5, d).unwrap(),
        tau: 100,
        max_views: 350,
        adjust_step_deg: adjust,
        seed_view,
    };

    let met = MetricsConfig::new(r_d, rho).unwrap();
    let n_gt = met.gt_sample_count(mesh.total_area());
    let gt = metrics::sample_ground_truth(&mesh, n_gt, seed).unwrap();
    let mut tracker = CoverageTracker::new(&gt, r_d).unwrap();

    let mut planner = Planner::new(cfg).unwrap();
    let mut step = 0u64;
    let mut adjustments = 0usize;
    loop {
        step += 1;
        let current = planner.state().current_view;
        let m = sensor::capture(&mesh, &current, &sensor, capture_seed(seed, step));
        let before = planner.store().len() as u32;
        let outcome = planner.step(&m).unwrap();
        let after = planner.store().len() as u32;
        let fresh: Vec<Vec3> = (before..after).map(|i| planner.store().position(i)).collect();
        tracker.observe(&fresh);
        if planner.state().adjustment_count > 0 {
            adjustments += 1;
        }
        if step % 25 == 0 {
            println!(
                "  step {step:>4}  frontiers {:>5}  coverage {:.4}  stored {:>7}  adjustments {adjustments}",
                planner.live_frontiers().len(),
                tracker.coverage(),
                planner.store().len()
            );
        }
        if outcome == StepResult::Complete {
            break;
        }
    }

    let views = planner.state().view_history.len();
    println!(
        "mode {:?}  seed {seed}  extent {extent}  k_core {k_core}  adjust {adjust}  normal_k {normal_k}",
        mode
    );
    println!(
        "views {views}  coverage {:.4}  stored {}  exhausted {}  live frontiers {}  adjustment views {adjustments}",
        tracker.coverage(),
        planner.store().len(),
        planner.exhausted_targets().len(),
        planner.live_frontiers().len()
    );

    // Grid over the stored cloud: uncovered samples with no stored point
    // within 3r were never measured at all, the rest were measured but left
    // below the resolution threshold.
    let mut cloud = UniformGrid::new(r);
    for i in 0..planner.store().len() as u32 {
        cloud.insert(i, planner.store().position(i));
    }
    let mask = tracker.covered_mask();
    let mut hits = Vec::new();
    let span = hi.z - lo.z;
    let mut band_total = [0usize; BANDS];
    let mut band_miss = [0usize; BANDS];
    let mut band_unseen = [0usize; BANDS];
    for (i, g) in gt.iter().enumerate() {
        let b = (((g.z - lo.z) / span * BANDS as f64) as usize).min(BANDS - 1);
        band_total[b] += 1;
        if !mask[i] {
            band_miss[b] += 1;
            cloud.neighbors_within(g, 3.0 * r, &mut hits);
            if hits.is_empty() {
                band_unseen[b] += 1;
            }
        }
    }
    println!("z band           total   miss   pct   never-measured");
    for b in (0..BANDS).rev() {
        let z0 = lo.z + span * b as f64 / BANDS as f64;
        let z1 = lo.z + span * (b + 1) as f64 / BANDS as f64;
        let pct = 100.0 * band_miss[b] as f64 / band_total[b].max(1) as f64;
        println!(
            "[{z0:+.3},{z1:+.3}) {:>7} {:>6} {pct:>5.1}% {:>8}",
            band_total[b], band_miss[b], band_unseen[b]
        );
    }

    // Abandoned targets by height, to correlate with the missed bands.
    let exhausted: &BTreeSet<u32> = planner.exhausted_targets();
    let mut ex_band = [0usize; BANDS];
    for &idx in exhausted {
        let p = planner.store().position(idx);
        let b = (((p.z - lo.z) / span * BANDS as f64) as usize).min(BANDS - 1);
        ex_band[b] += 1;
    }
    println!("exhausted targets by band (top to bottom): {ex_band:?}");

    println!(
        "store frontier-class points at exit: {}",
        planner.store().frontier_count()
    );
}
