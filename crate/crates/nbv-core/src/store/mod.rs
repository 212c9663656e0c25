//! Measurement store: accepted points, fixed-radius queries, minimum-spacing
//! filter, and incremental core/outlier/frontier classification.
//!
//! Throughout this module "neighbor" means another stored point within the
//! resolution radius r; a point is never its own neighbor. A point is core
//! when it has at least `k_core` neighbors, and a non-core point is frontier
//! when its neighbors include at least one core and at least one non-core
//! point. Points are never removed, so indices are stable.

pub(crate) mod grid;

use std::collections::BTreeSet;
use std::io::{self, Read, Write};

use crate::geom::Vec3;
pub use grid::UniformGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PointClass {
    Core,
    Outlier,
    Frontier,
}

impl PointClass {
    pub fn as_u8(self) -> u8 {
        match self {
            PointClass::Core => 0,
            PointClass::Outlier => 1,
            PointClass::Frontier => 2,
        }
    }

    pub fn from_u8(b: u8) -> Option<Self> {
        match b {
            0 => Some(PointClass::Core),
            1 => Some(PointClass::Outlier),
            2 => Some(PointClass::Frontier),
            _ => None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("non-finite coordinate in input point {index}")]
    NonFinite { index: usize },
    #[error("invalid store config: {0}")]
    BadConfig(String),
    #[error("store i/o: {0}")]
    Io(#[from] io::Error),
    #[error("malformed store dump: {0}")]
    BadDump(String),
}

/// Density-classification parameters.
#[derive(Debug, Clone, Copy)]
pub struct StoreConfig {
    /// Desired measurement density, points per m³.
    pub rho: f64,
    /// Resolution radius (m): neighborhood radius for classification.
    pub r: f64,
    /// Minimum spacing between accepted measurements (m).
    pub epsilon: f64,
    /// Neighbor count (self excluded) at or above which a point is core.
    pub k_core: usize,
}

impl StoreConfig {
    /// Derives `epsilon = sqrt(1/rho)` and a core threshold referenced to
    /// the sensing density at the standoff distance `d`: a capture taken at
    /// range d deposits rho·d/3 points per m² (cone volume-to-area), so a
    /// fully measured interior disc of radius r is expected to hold
    /// μ = rho·d·π·r²/3 neighbors while a half-measured boundary disc holds
    /// μ/2. The threshold 3μ/4 = rho·d·π·r²/4 sits between the two, so
    /// interior points classify core after one capture pass and points on
    /// the measured/unmeasured boundary stay non-core until the far side is
    /// actually observed.
    pub fn from_density(rho: f64, r: f64, d: f64) -> Result<Self, StoreError> {
        if !(d > 0.0 && d.is_finite()) {
            return Err(StoreError::BadConfig(format!("d must be positive, got {d}")));
        }
        let k_core = (rho * d * std::f64::consts::PI * r * r / 4.0).ceil() as usize;
        Self::with_core_threshold(rho, r, k_core.max(1))
    }

    /// Explicit core threshold; `epsilon = sqrt(1/rho)` as in `from_density`.
    pub fn with_core_threshold(rho: f64, r: f64, k_core: usize) -> Result<Self, StoreError> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(StoreError::BadConfig(format!("rho must be positive, got {rho}")));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(StoreError::BadConfig(format!("r must be positive, got {r}")));
        }
        let epsilon = (1.0 / rho).sqrt();
        let cfg = Self { rho, r, epsilon, k_core };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), StoreError> {
        if !(self.rho > 0.0) || !(self.r > 0.0) || !(self.epsilon > 0.0) {
            return Err(StoreError::BadConfig("rho, r, epsilon must be positive".into()));
        }
        if self.k_core < 1 {
            return Err(StoreError::BadConfig("k_core must be ≥ 1".into()));
        }
        Ok(())
    }
}

struct StoredPoint {
    pos: Vec3,
    class: PointClass,
    view_id: u32,
    /// Occlusion-check start offset, cached while the point is a frontier.
    offset_zeta: Option<f64>,
    /// Count of other points within r, kept exact by `insert_measurements`.
    neighbor_count: u32,
}

pub struct PointStore {
    cfg: StoreConfig,
    points: Vec<StoredPoint>,
    /// Classification / general-purpose index, cell edge r.
    grid: UniformGrid,
    /// Spacing-filter index, cell edge epsilon.
    spacing: UniformGrid,
    frontiers: BTreeSet<u32>,
    scratch: Vec<u32>,
}

impl PointStore {
    pub fn new(cfg: StoreConfig) -> Result<Self, StoreError> {
        cfg.validate()?;
        Ok(Self {
            grid: UniformGrid::new(cfg.r),
            spacing: UniformGrid::new(cfg.epsilon),
            cfg,
            points: Vec::new(),
            frontiers: BTreeSet::new(),
            scratch: Vec::new(),
        })
    }

    pub fn config(&self) -> &StoreConfig {
        &self.cfg
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn position(&self, idx: u32) -> Vec3 {
        self.points[idx as usize].pos
    }

    pub fn class(&self, idx: u32) -> PointClass {
        self.points[idx as usize].class
    }

    pub fn view_id(&self, idx: u32) -> u32 {
        self.points[idx as usize].view_id
    }

    pub fn offset_zeta(&self, idx: u32) -> Option<f64> {
        self.points[idx as usize].offset_zeta
    }

    /// Caches ζ for a frontier point; cleared automatically if the point
    /// later leaves the frontier class.
    pub fn set_offset_zeta(&mut self, idx: u32, zeta: f64) {
        self.points[idx as usize].offset_zeta = Some(zeta);
    }

    /// Accepts the points of `batch` that have no already-accepted point
    /// (including earlier accepted points of the same batch) within epsilon,
    /// preserving batch order. Returns the indices assigned to accepted
    /// points. Classes of accepted points start as outlier; call
    /// `reclassify` with the returned indices to restore classification.
    pub fn insert_measurements(
        &mut self,
        batch: &[Vec3],
        view_id: u32,
    ) -> Result<Vec<u32>, StoreError> {
        for (i, p) in batch.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
                return Err(StoreError::NonFinite { index: i });
            }
        }
        let mut accepted = Vec::new();
        for p in batch {
            if self.spacing.has_any_within(p, self.cfg.epsilon) {
                continue;
            }
            let idx = self.points.len() as u32;
            // Neighbor counts stay exact: the new point takes the size of its
            // r-neighborhood and every member gains one.
            let mut neighbors = std::mem::take(&mut self.scratch);
            self.grid.neighbors_within(p, self.cfg.r, &mut neighbors);
            for &n in &neighbors {
                self.points[n as usize].neighbor_count += 1;
            }
            let count = neighbors.len() as u32;
            self.scratch = neighbors;
            self.points.push(StoredPoint {
                pos: *p,
                class: PointClass::Outlier,
                view_id,
                offset_zeta: None,
                neighbor_count: count,
            });
            self.grid.insert(idx, *p);
            self.spacing.insert(idx, *p);
            accepted.push(idx);
        }
        Ok(accepted)
    }

    /// Indices of stored points within the closed ball, ascending.
    pub fn radius_neighbors(&self, center: &Vec3, radius: f64) -> Vec<u32> {
        assert!(radius > 0.0);
        let mut out = Vec::new();
        self.grid.neighbors_within(center, radius, &mut out);
        out
    }

    pub fn radius_neighbors_into(&self, center: &Vec3, radius: f64, out: &mut Vec<u32>) {
        assert!(radius > 0.0);
        self.grid.neighbors_within(center, radius, out);
    }

    /// True if any stored point lies within the closed ball.
    pub fn any_within(&self, center: &Vec3, radius: f64) -> bool {
        self.grid.has_any_within(center, radius)
    }

    /// Recomputes classes for `affected` and every point within r of them,
    /// then refreshes frontier state around any core-flag change. Starting
    /// from a consistent store this reaches the same fixpoint as a full
    /// reclassification. Returns all (index, old, new) changes, ascending.
    pub fn reclassify(&mut self, affected: &[u32]) -> Vec<(u32, PointClass, PointClass)> {
        // Phase 1: core flags, a pure function of the cached neighbor count.
        let mut zone = BTreeSet::new();
        let mut neigh = std::mem::take(&mut self.scratch);
        for &i in affected {
            assert!((i as usize) < self.points.len(), "invalid index {i}");
            zone.insert(i);
            self.grid
                .neighbors_within(&self.points[i as usize].pos, self.cfg.r, &mut neigh);
            zone.extend(neigh.iter().copied());
        }
        let mut changed: std::collections::BTreeMap<u32, (PointClass, PointClass)> =
            std::collections::BTreeMap::new();
        let mut core_touched = BTreeSet::new();
        for &i in &zone {
            let p = &mut self.points[i as usize];
            let want_core = p.neighbor_count as usize >= self.cfg.k_core;
            let is_core = p.class == PointClass::Core;
            if want_core != is_core {
                core_touched.insert(i);
                let old = p.class;
                p.class = if want_core { PointClass::Core } else { PointClass::Outlier };
                changed.insert(i, (old, p.class));
            }
        }
        // Phase 2: frontier flags depend only on own non-coreness and
        // neighbor core flags, so refresh around every core change plus the
        // affected points themselves.
        let mut fzone = zone;
        for &i in &core_touched {
            self.grid
                .neighbors_within(&self.points[i as usize].pos, self.cfg.r, &mut neigh);
            fzone.extend(neigh.iter().copied());
        }
        for &i in &fzone {
            let (pos, class) = {
                let p = &self.points[i as usize];
                (p.pos, p.class)
            };
            let new_class = if class == PointClass::Core {
                PointClass::Core
            } else {
                self.grid.neighbors_within(&pos, self.cfg.r, &mut neigh);
                let mut has_core = false;
                let mut has_non_core = false;
                for &n in &neigh {
                    if n == i {
                        continue;
                    }
                    if self.points[n as usize].class == PointClass::Core {
                        has_core = true;
                    } else {
                        has_non_core = true;
                    }
                    if has_core && has_non_core {
                        break;
                    }
                }
                if has_core && has_non_core {
                    PointClass::Frontier
                } else {
                    PointClass::Outlier
                }
            };
            let p = &mut self.points[i as usize];
            if p.class != new_class {
                // Core transitions recorded in phase 1 keep their old class.
                changed
                    .entry(i)
                    .and_modify(|e| e.1 = new_class)
                    .or_insert((p.class, new_class));
                p.class = new_class;
            }
            match new_class {
                PointClass::Frontier => {
                    self.frontiers.insert(i);
                }
                _ => {
                    if self.frontiers.remove(&i) {
                        self.points[i as usize].offset_zeta = None;
                    }
                }
            }
        }
        self.scratch = neigh;
        changed
            .into_iter()
            .filter(|(_, (old, new))| old != new)
            .map(|(i, (old, new))| (i, old, new))
            .collect()
    }

    /// Current frontier indices, ascending.
    pub fn frontier_set(&self) -> Vec<u32> {
        self.frontiers.iter().copied().collect()
    }

    pub fn frontier_count(&self) -> usize {
        self.frontiers.len()
    }

    /// Writes one little-endian record per point: x, y, z as f64, class as
    /// u8, observing view id as u32.
    pub fn dump<W: Write>(&self, mut w: W) -> Result<(), StoreError> {
        for p in &self.points {
            w.write_all(&p.pos.x.to_le_bytes())?;
            w.write_all(&p.pos.y.to_le_bytes())?;
            w.write_all(&p.pos.z.to_le_bytes())?;
            w.write_all(&[p.class.as_u8()])?;
            w.write_all(&p.view_id.to_le_bytes())?;
        }
        Ok(())
    }

    /// Rebuilds a store from `dump` output, trusting the recorded classes.
    /// The spacing filter is not re-applied, so any dump of a valid store
    /// round-trips exactly.
    pub fn load<R: Read>(cfg: StoreConfig, mut rd: R) -> Result<Self, StoreError> {
        let mut store = Self::new(cfg)?;
        let mut buf = Vec::new();
        rd.read_to_end(&mut buf)?;
        const REC: usize = 8 * 3 + 1 + 4;
        if buf.len() % REC != 0 {
            return Err(StoreError::BadDump(format!(
                "length {} is not a multiple of the record size {REC}",
                buf.len()
            )));
        }
        let mut neigh = Vec::new();
        for (n, rec) in buf.chunks_exact(REC).enumerate() {
            let f = |o: usize| f64::from_le_bytes(rec[o..o + 8].try_into().unwrap());
            let pos = Vec3::new(f(0), f(8), f(16));
            if !(pos.x.is_finite() && pos.y.is_finite() && pos.z.is_finite()) {
                return Err(StoreError::BadDump(format!("non-finite record {n}")));
            }
            let class = PointClass::from_u8(rec[24])
                .ok_or_else(|| StoreError::BadDump(format!("bad class byte in record {n}")))?;
            let view_id = u32::from_le_bytes(rec[25..29].try_into().unwrap());
            let idx = store.points.len() as u32;
            store.grid.neighbors_within(&pos, store.cfg.r, &mut neigh);
            for &q in &neigh {
                store.points[q as usize].neighbor_count += 1;
            }
            store.points.push(StoredPoint {
                pos,
                class,
                view_id,
                offset_zeta: None,
                neighbor_count: neigh.len() as u32,
            });
            store.grid.insert(idx, pos);
            store.spacing.insert(idx, pos);
            if class == PointClass::Frontier {
                store.frontiers.insert(idx);
            }
        }
        Ok(store)
    }
}
