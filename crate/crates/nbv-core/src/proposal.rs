//! View proposals for frontier points: initial views along estimated surface
//! normals, and occlusion-avoiding views through the spherical minimax
//! construction.

use crate::geom::{GeomError, Vec3, View};
use crate::minimax::{solve_minimax_cap, CapSolution};
use crate::occlusion::{self, OcclusionConfig, OcclusionError};
use crate::store::PointStore;

#[derive(Debug, thiserror::Error)]
pub enum ProposalError {
    #[error("invalid proposal config: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Occlusion(#[from] OcclusionError),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

#[derive(Debug, Clone, Copy)]
pub struct ProposalConfig {
    /// View distance d (m): sensor standoff along the proposed sight line.
    pub d: f64,
    /// Occlusion search distance ψ (m), also the projection neighborhood
    /// radius.
    pub psi: f64,
    /// Maximum number of nearest neighbors used for plane fitting.
    pub normal_k: usize,
}

impl ProposalConfig {
    pub fn new(d: f64, psi: f64, normal_k: usize) -> Result<Self, ProposalError> {
        if !(d > 0.0 && d.is_finite()) {
            return Err(ProposalError::BadConfig(format!("d must be positive, got {d}")));
        }
        if !(psi > 0.0 && psi.is_finite()) {
            return Err(ProposalError::BadConfig(format!("psi must be positive, got {psi}")));
        }
        if normal_k < 3 {
            return Err(ProposalError::BadConfig("normal_k must be ≥ 3".into()));
        }
        Ok(Self { d, psi, normal_k })
    }
}

/// Unit normal of the best-fit plane through the frontier's r-neighborhood
/// (up to `normal_k` nearest points), signed to have a non-negative dot
/// product with the sight line toward the observing view. With fewer than 3
/// neighbors the sight line itself is the only usable estimate.
pub fn estimate_normal(
    store: &PointStore,
    frontier_idx: u32,
    observing_view: &View,
    cfg: &ProposalConfig,
) -> Result<Vec3, ProposalError> {
    let f = store.position(frontier_idx);
    let sight = occlusion::sight_line(&f, &observing_view.position)?;
    let r = store.config().r;
    let mut neigh = store.radius_neighbors(&f, r);
    neigh.retain(|&i| i != frontier_idx);
    if neigh.len() < 3 {
        return Ok(sight);
    }
    if neigh.len() > cfg.normal_k {
        neigh.sort_by(|&a, &b| {
            let da = (store.position(a) - f).norm_squared();
            let db = (store.position(b) - f).norm_squared();
            da.partial_cmp(&db).unwrap().then(a.cmp(&b))
        });
        neigh.truncate(cfg.normal_k);
    }

    let mut pts: Vec<Vec3> = neigh.iter().map(|&i| store.position(i)).collect();
    pts.push(f);
    let mean: Vec3 = pts.iter().sum::<Vec3>() / pts.len() as f64;
    let mut cov = nalgebra::Matrix3::zeros();
    for p in &pts {
        let d = p - mean;
        cov += d * d.transpose();
    }
    let eig = nalgebra::SymmetricEigen::new(cov);
    let mut arg = 0;
    for i in 1..3 {
        if eig.eigenvalues[i] < eig.eigenvalues[arg] {
            arg = i;
        }
    }
    let mut n: Vec3 = eig.eigenvectors.column(arg).into();
    if n.norm() < 1e-12 {
        return Ok(sight);
    }
    n = n.normalize();
    let dot = n.dot(&sight);
    if dot < 0.0 {
        n = -n;
    } else if dot == 0.0 {
        // Exactly tangent estimates keep a canonical sign.
        let flip = if n.x != 0.0 {
            n.x < 0.0
        } else if n.y != 0.0 {
            n.y < 0.0
        } else {
            n.z < 0.0
        };
        if flip {
            n = -n;
        }
    }
    Ok(n)
}

/// Initial proposal for a frontier: a view at distance d along the surface
/// normal, looking back at the frontier.
pub fn propose_initial_view(
    store: &PointStore,
    frontier_idx: u32,
    observing_view: &View,
    cfg: &ProposalConfig,
) -> Result<View, ProposalError> {
    let f = store.position(frontier_idx);
    let n = estimate_normal(store, frontier_idx, observing_view, cfg)?;
    Ok(View::new(f + n * cfg.d, -n)?)
}

/// Directions from `center` to every stored point within ψ of the frontier,
/// normalized to the unit sphere. The frontier itself and points within ε of
/// `center` are dropped. Duplicate directions (1e-9) are dropped too, except
/// in very large gathers where the solver's own thinning makes the dedup
/// pass pure overhead.
pub fn project_to_sphere(
    store: &PointStore,
    frontier_idx: u32,
    center: &Vec3,
    cfg: &ProposalConfig,
) -> Vec<Vec3> {
    let f = store.position(frontier_idx);
    let epsilon = store.config().epsilon;
    let neigh = store.radius_neighbors(&f, cfg.psi);
    let dedupe = neigh.len() <= 8192;
    let mut out = Vec::with_capacity(neigh.len());
    let mut seen = std::collections::BTreeSet::new();
    for idx in neigh {
        if idx == frontier_idx {
            continue;
        }
        let p = store.position(idx);
        let d = p - center;
        let norm = d.norm();
        if norm <= epsilon {
            continue;
        }
        let q = d / norm;
        if dedupe {
            let key = (
                (q.x / 1e-9).round() as i64,
                (q.y / 1e-9).round() as i64,
                (q.z / 1e-9).round() as i64,
            );
            if !seen.insert(key) {
                continue;
            }
        }
        out.push(q);
    }
    out
}

/// Occlusion-avoiding proposal: project the ψ-neighborhood onto a unit
/// sphere centered ζ along the observing sight line, solve the smallest-cap
/// program, and place the view at distance d along the maximin (clearest)
/// direction, oriented along the minimax point back toward the frontier.
/// Returns the view and the cap solution it came from.
pub fn propose_unoccluded_view(
    store: &PointStore,
    frontier_idx: u32,
    observing_view: &View,
    occl: &OcclusionConfig,
    cfg: &ProposalConfig,
) -> Result<(View, CapSolution), ProposalError> {
    let f = store.position(frontier_idx);
    let sight = occlusion::sight_line(&f, &observing_view.position)?;
    let zeta = match store.offset_zeta(frontier_idx) {
        Some(z) => z,
        None => occlusion::compute_offset(store, frontier_idx, observing_view, occl)?,
    };
    let center = f + sight * zeta;
    let q = project_to_sphere(store, frontier_idx, &center, cfg);
    let sol = solve_minimax_cap(&q, &sight);
    let view = View::new(f + sol.maximin_point * cfg.d, sol.minimax_point)?;
    Ok((view, sol))
}
