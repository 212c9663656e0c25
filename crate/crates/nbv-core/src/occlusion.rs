//! Point-based occlusion checks along the sight line between a view and a
//! frontier point.
//!
//! The corridor between a frontier f and a view is probed at discrete
//! stations f + δ·s for δ = ζ, ζ+r, ζ+2r, … up to the search distance ψ,
//! where s is the unit sight line from f toward the view position. Every
//! stored point within r of any station occludes the sight line. The discrete
//! r-step grid is the normative definition, not an approximation of a
//! continuous cylinder test.

use std::collections::BTreeSet;

use crate::geom::{GeomError, Vec3, View};
use crate::store::PointStore;

#[derive(Debug, thiserror::Error)]
pub enum OcclusionError {
    #[error("sight line is degenerate: {0}")]
    Degenerate(#[from] GeomError),
    #[error("invalid occlusion config: {0}")]
    BadConfig(String),
}

#[derive(Debug, Clone, Copy)]
pub struct OcclusionConfig {
    /// Occlusion search distance ψ (m): how far along the sight line
    /// occluders are sought.
    pub psi: f64,
    /// Resolution radius r (m): corridor radius and δ step.
    pub r: f64,
}

impl OcclusionConfig {
    pub fn new(psi: f64, r: f64) -> Result<Self, OcclusionError> {
        if !(r > 0.0 && r.is_finite() && psi > r) {
            return Err(OcclusionError::BadConfig(format!(
                "need psi > r > 0, got psi={psi}, r={r}"
            )));
        }
        Ok(Self { psi, r })
    }
}

/// Unit vector from `frontier` toward `view_position`.
pub fn sight_line(frontier: &Vec3, view_position: &Vec3) -> Result<Vec3, OcclusionError> {
    let d = view_position - frontier;
    let n = d.norm();
    if n == 0.0 || !n.is_finite() {
        return Err(GeomError::CoincidentPoints.into());
    }
    Ok(d / n)
}

/// Stored points occluding the sight line from frontier `frontier_idx`
/// toward `view`: the union of r-neighborhoods of the stations
/// δ = ζ, ζ+r, …, ≤ ψ. The frontier itself and anything within ε of it are
/// never reported (a surface cannot occlude its own frontier).
pub fn occluding_points(
    store: &PointStore,
    frontier_idx: u32,
    view: &View,
    zeta: f64,
    cfg: &OcclusionConfig,
) -> Result<BTreeSet<u32>, OcclusionError> {
    assert!(zeta >= 0.0, "zeta must be non-negative");
    let f = store.position(frontier_idx);
    let s = sight_line(&f, &view.position)?;
    let epsilon = store.config().epsilon;
    let mut out = BTreeSet::new();
    let mut neigh = Vec::new();
    let mut k = 0u32;
    loop {
        let delta = zeta + k as f64 * cfg.r;
        if delta > cfg.psi {
            break;
        }
        let station = f + s * delta;
        store.radius_neighbors_into(&station, cfg.r, &mut neigh);
        for &q in &neigh {
            if q == frontier_idx {
                continue;
            }
            if (store.position(q) - f).norm() <= epsilon {
                continue;
            }
            out.insert(q);
        }
        k += 1;
    }
    Ok(out)
}

/// True when no stored point occludes the sight line from the frontier
/// toward `view`, using the frontier's cached offset ζ (falling back to r
/// when none has been cached yet).
pub fn is_visible(store: &PointStore, frontier_idx: u32, view: &View, cfg: &OcclusionConfig) -> bool {
    let zeta = store.offset_zeta(frontier_idx).unwrap_or(cfg.r);
    match occluding_points(store, frontier_idx, view, zeta, cfg) {
        Ok(set) => set.is_empty(),
        Err(_) => false,
    }
}

/// Offset ζ for a frontier: the first station δ = r, 2r, … along the sight
/// line toward the observing view whose r-ball holds no measurement other
/// than the frontier itself, capped at ψ. Occlusion checks start past this
/// offset so local surface noise around the frontier is not mistaken for an
/// occluder.
pub fn compute_offset(
    store: &PointStore,
    frontier_idx: u32,
    observing_view: &View,
    cfg: &OcclusionConfig,
) -> Result<f64, OcclusionError> {
    let f = store.position(frontier_idx);
    let s = sight_line(&f, &observing_view.position)?;
    let mut neigh = Vec::new();
    let mut k = 1u32;
    loop {
        let delta = k as f64 * cfg.r;
        if delta > cfg.psi {
            return Ok(cfg.psi);
        }
        let station = f + s * delta;
        store.radius_neighbors_into(&station, cfg.r, &mut neigh);
        let empty = neigh.iter().all(|&q| q == frontier_idx);
        if empty {
            return Ok(delta);
        }
        k += 1;
    }
}
