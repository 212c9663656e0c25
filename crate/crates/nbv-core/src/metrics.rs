//! Evaluation metrics: surface coverage against area-uniform ground-truth
//! samples, sensor travel distance, and per-view statistics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geom::{Vec3, View};
use crate::sensor::SceneMesh;
use crate::store::PointStore;

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("mesh has zero surface area")]
    ZeroArea,
    #[error("ground-truth sample set is empty")]
    EmptyGroundTruth,
    #[error("invalid metrics config: {0}")]
    BadConfig(String),
    #[error("run log malformed: {0}")]
    BadRunLog(String),
}

#[derive(Debug, Clone, Copy)]
pub struct MetricsConfig {
    /// Registration distance r_d (m): a ground-truth sample counts as
    /// covered when any observed point lies within r_d of it.
    pub r_d: f64,
    /// Target observation density (points/m³), used to size the
    /// ground-truth sample set.
    pub gt_density: f64,
}

impl MetricsConfig {
    pub fn new(r_d: f64, gt_density: f64) -> Result<Self, MetricsError> {
        if !(r_d > 0.0 && r_d.is_finite()) {
            return Err(MetricsError::BadConfig(format!("r_d must be positive, got {r_d}")));
        }
        if !(gt_density > 0.0 && gt_density.is_finite()) {
            return Err(MetricsError::BadConfig(format!(
                "gt_density must be positive, got {gt_density}"
            )));
        }
        Ok(Self { r_d, gt_density })
    }

    /// Ground-truth sample count for a surface: ten times the expected
    /// observed point count, capped at 10⁶ samples. Observations are
    /// accepted down to the spacing ε = √(1/ρ), so a fully observed surface
    /// carries about area/ε² = area·ρ points. Ten-fold oversampling keeps
    /// the coverage estimator's noise well under a tenth of a percent.
    pub fn gt_sample_count(&self, surface_area: f64) -> usize {
        let expected = (surface_area * self.gt_density).ceil().max(1.0);
        ((expected * 10.0) as usize).min(1_000_000)
    }
}

/// Area-weighted uniform surface samples, deterministic per seed.
pub fn sample_ground_truth(
    mesh: &SceneMesh,
    count: usize,
    seed: u64,
) -> Result<Vec<Vec3>, MetricsError> {
    let n = mesh.triangle_count() as u32;
    let mut cumulative = Vec::with_capacity(n as usize);
    let mut total = 0.0f64;
    for i in 0..n {
        total += mesh.triangle_area(i);
        cumulative.push(total);
    }
    if total <= 0.0 {
        return Err(MetricsError::ZeroArea);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let x = rng.gen_range(0.0..total);
        let tri = cumulative.partition_point(|&c| c <= x) as u32;
        let tri = tri.min(n - 1);
        let (a, b, c) = mesh.triangle(tri);
        // Square-root reparametrization gives area-uniform barycentrics.
        let su = rng.gen_range(0.0f64..1.0).sqrt();
        let v = rng.gen_range(0.0f64..1.0);
        out.push(a * (1.0 - su) + b * (su * (1.0 - v)) + c * (su * v));
    }
    Ok(out)
}

/// Fraction of ground-truth samples with at least one stored point within
/// r_d of them.
pub fn surface_coverage(
    gt: &[Vec3],
    observed: &PointStore,
    r_d: f64,
) -> Result<f64, MetricsError> {
    if gt.is_empty() {
        return Err(MetricsError::EmptyGroundTruth);
    }
    if observed.len() == 0 {
        return Ok(0.0);
    }
    let hits = gt.iter().filter(|p| observed.any_within(p, r_d)).count();
    Ok(hits as f64 / gt.len() as f64)
}

/// Straight-line travel distance over consecutive view positions.
pub fn travel_distance(history: &[View]) -> f64 {
    history.windows(2).map(|w| (w[1].position - w[0].position).norm()).sum()
}

/// Incremental coverage estimate: ground-truth samples flip to covered as
/// observed points arrive and never flip back, so per-step queries stay
/// cheap during a run. The final value equals `surface_coverage` exactly.
#[derive(Debug, Clone)]
pub struct CoverageTracker {
    r_d: f64,
    grid: crate::store::grid::UniformGrid,
    covered: Vec<bool>,
    covered_count: usize,
}

impl CoverageTracker {
    pub fn new(gt: &[Vec3], r_d: f64) -> Result<Self, MetricsError> {
        if gt.is_empty() {
            return Err(MetricsError::EmptyGroundTruth);
        }
        if !(r_d > 0.0) {
            return Err(MetricsError::BadConfig(format!("r_d must be positive, got {r_d}")));
        }
        let mut grid = crate::store::grid::UniformGrid::new(r_d);
        for (i, p) in gt.iter().enumerate() {
            grid.insert(i as u32, *p);
        }
        Ok(Self { r_d, grid, covered: vec![false; gt.len()], covered_count: 0 })
    }

    /// Mark every ground-truth sample within r_d of each new point.
    pub fn observe(&mut self, new_points: &[Vec3]) {
        let mut hits = Vec::new();
        for p in new_points {
            self.grid.neighbors_within(p, self.r_d, &mut hits);
            for &g in &hits {
                let slot = &mut self.covered[g as usize];
                if !*slot {
                    *slot = true;
                    self.covered_count += 1;
                }
            }
        }
    }

    pub fn coverage(&self) -> f64 {
        self.covered_count as f64 / self.covered.len() as f64
    }

    /// One flag per ground-truth sample, in input order.
    pub fn covered_mask(&self) -> &[bool] {
        &self.covered
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerViewStats {
    pub mean_frontiers_resolved: f64,
    pub mean_coverage_gain: f64,
    pub total_frontiers_resolved: u64,
}

/// Per-view averages from a run log: `frontiers_resolved` holds one count
/// per view; `coverage` holds the initial value followed by the value after
/// each view (so it is one element longer).
pub fn per_view_stats(
    frontiers_resolved: &[u64],
    coverage: &[f64],
) -> Result<PerViewStats, MetricsError> {
    if frontiers_resolved.is_empty() {
        return Err(MetricsError::BadRunLog("no views in run log".into()));
    }
    if coverage.len() != frontiers_resolved.len() + 1 {
        return Err(MetricsError::BadRunLog(format!(
            "coverage sequence has {} entries for {} views",
            coverage.len(),
            frontiers_resolved.len()
        )));
    }
    let views = frontiers_resolved.len() as f64;
    let total: u64 = frontiers_resolved.iter().sum();
    Ok(PerViewStats {
        mean_frontiers_resolved: total as f64 / views,
        mean_coverage_gain: (coverage[coverage.len() - 1] - coverage[0]) / views,
        total_frontiers_resolved: total,
    })
}
