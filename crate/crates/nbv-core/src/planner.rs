//! Observation loop: ingest captured points, reclassify, maintain view
//! proposals, and pick the next view until no observable frontiers remain.
//!
//! Two strategies share the loop. `Reactive` always moves to the proposal
//! closest to the sensor and only reacts to occlusion after a capture fails.
//! `Proactive` additionally screens the proposals nearest the sensor for
//! occluded sight lines, re-proposes them to look around the blockers, and
//! selects through the frontier visibility graph (outdegree per distance).
//! Both strategies recover from failed captures by rotating the view around
//! the target and abandon a target after a full revolution of failures.

use std::collections::{BTreeMap, BTreeSet};

use crate::geom::{self, GeomError, Vec3, View};
use crate::graph::{EdgeGate, GraphError, VisibilityGraph};
use crate::occlusion::{self, OcclusionConfig, OcclusionError};
use crate::proposal::{self, ProposalConfig, ProposalError};
use crate::sensor::SensorModel;
use crate::store::{PointClass, PointStore, StoreConfig, StoreError};

#[derive(Debug, thiserror::Error)]
pub enum PlannerError {
    #[error("invalid planner config: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Proposal(#[from] ProposalError),
    #[error(transparent)]
    Occlusion(#[from] OcclusionError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Closest-proposal selection; occlusion handled only after failures.
    Reactive,
    /// Occlusion screening plus graph selection by outdegree per distance.
    Proactive,
}

#[derive(Debug, Clone)]
pub struct PlannerConfig {
    pub mode: Mode,
    pub store: StoreConfig,
    pub occlusion: OcclusionConfig,
    pub proposal: ProposalConfig,
    /// Frustum-and-range gate for graph edges; its distance should match
    /// `proposal.d`.
    pub gate: EdgeGate,
    /// Update limit: occlusion checks and graph connectivity updates touch
    /// only the tau nearest proposals to the sensor.
    pub tau: usize,
    /// Safety stop: total views held, counting the seed view.
    pub max_views: usize,
    /// Rotation per recovery attempt after a failed capture (degrees).
    pub adjust_step_deg: f64,
    /// The pose the first capture is taken from; the planner never invents
    /// an initial view.
    pub seed_view: View,
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<(), PlannerError> {
        if self.max_views < 1 {
            return Err(PlannerError::BadConfig("max_views must be >= 1".into()));
        }
        if self.tau < 1 {
            return Err(PlannerError::BadConfig("tau must be >= 1".into()));
        }
        if !(self.adjust_step_deg > 0.0 && self.adjust_step_deg <= 360.0) {
            return Err(PlannerError::BadConfig(format!(
                "adjust_step_deg must be in (0, 360], got {}",
                self.adjust_step_deg
            )));
        }
        if self.occlusion.r != self.store.r {
            return Err(PlannerError::BadConfig(format!(
                "occlusion radius {} disagrees with store resolution {}",
                self.occlusion.r, self.store.r
            )));
        }
        if self.occlusion.psi != self.proposal.psi {
            return Err(PlannerError::BadConfig(format!(
                "occlusion search distance {} disagrees with proposal psi {}",
                self.occlusion.psi, self.proposal.psi
            )));
        }
        Ok(())
    }

    /// Failed capture attempts tolerated per target: one full revolution of
    /// the recovery rotation.
    pub fn attempts_per_revolution(&self) -> u32 {
        ((360.0 / self.adjust_step_deg).round() as u32).max(1)
    }
}

#[derive(Debug, Clone)]
pub struct PlannerState {
    pub current_view: View,
    /// Every view held so far, seed first; grows by one per returned view.
    pub view_history: Vec<View>,
    /// Frontier the last selected view was meant to observe.
    pub pending_target: Option<u32>,
    /// Consecutive failed captures of the pending target.
    pub adjustment_count: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepResult {
    /// Move to this view and capture from it before the next step.
    Next(View),
    /// No observable frontier remains, or the view budget is spent.
    Complete,
}

/// Sensor standoff distance making the expected measurement density inside
/// the viewing frustum equal `rho`: d = (3 ωx ωy / (4 ρ tan(θx/2) tan(θy/2)))^(1/3).
pub fn view_distance(sensor: &SensorModel, rho: f64) -> Result<f64, PlannerError> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(PlannerError::BadConfig(format!("density must be positive, got {rho}")));
    }
    let hx = (sensor.theta_x_deg.to_radians() / 2.0).tan();
    let hy = (sensor.theta_y_deg.to_radians() / 2.0).tan();
    let pixels = sensor.omega_x as f64 * sensor.omega_y as f64;
    Ok((3.0 * pixels / (4.0 * rho * hx * hy)).cbrt())
}

pub struct Planner {
    cfg: PlannerConfig,
    store: PointStore,
    graph: VisibilityGraph,
    /// Current proposal per live frontier.
    proposals: BTreeMap<u32, View>,
    /// Targets abandoned after a full revolution of failures; excluded from
    /// selection permanently, even if the point later rejoins the frontier
    /// class.
    exhausted: BTreeSet<u32>,
    state: PlannerState,
    finished: bool,
}

impl Planner {
    pub fn new(cfg: PlannerConfig) -> Result<Self, PlannerError> {
        cfg.validate()?;
        let store = PointStore::new(cfg.store)?;
        let graph = VisibilityGraph::new(cfg.tau);
        let state = PlannerState {
            current_view: cfg.seed_view,
            view_history: vec![cfg.seed_view],
            pending_target: None,
            adjustment_count: 0,
        };
        Ok(Self {
            cfg,
            store,
            graph,
            proposals: BTreeMap::new(),
            exhausted: BTreeSet::new(),
            state,
            finished: false,
        })
    }

    pub fn config(&self) -> &PlannerConfig {
        &self.cfg
    }

    pub fn state(&self) -> &PlannerState {
        &self.state
    }

    pub fn store(&self) -> &PointStore {
        &self.store
    }

    pub fn graph(&self) -> &VisibilityGraph {
        &self.graph
    }

    pub fn proposals(&self) -> &BTreeMap<u32, View> {
        &self.proposals
    }

    pub fn exhausted_targets(&self) -> &BTreeSet<u32> {
        &self.exhausted
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    /// Frontiers still eligible for selection.
    pub fn live_frontiers(&self) -> BTreeSet<u32> {
        self.store
            .frontier_set()
            .into_iter()
            .filter(|f| !self.exhausted.contains(f))
            .collect()
    }

    /// Ingest a capture taken from the current view and decide where to go
    /// next. Completes when no live frontier remains or the view budget
    /// (`max_views`, seed included) is spent; calling again after completion
    /// keeps returning `Complete`.
    pub fn step(&mut self, measurements: &[Vec3]) -> Result<StepResult, PlannerError> {
        if self.finished {
            return Ok(StepResult::Complete);
        }
        let view_id = (self.state.view_history.len() - 1) as u32;
        let accepted = self.store.insert_measurements(measurements, view_id)?;
        self.store.reclassify(&accepted);

        // A pending target still in the frontier class means the capture
        // aimed at it failed; rotate around it, or abandon it once the
        // recovery rotation has come full circle.
        let mut retry_target = None;
        if let Some(t) = self.state.pending_target {
            if self.store.class(t) == PointClass::Frontier && !self.exhausted.contains(&t) {
                self.state.adjustment_count += 1;
                if self.state.adjustment_count >= self.cfg.attempts_per_revolution() {
                    self.exhausted.insert(t);
                    self.proposals.remove(&t);
                    self.state.pending_target = None;
                    self.state.adjustment_count = 0;
                } else {
                    retry_target = Some(t);
                }
            } else {
                self.state.pending_target = None;
                self.state.adjustment_count = 0;
            }
        }

        if self.state.view_history.len() >= self.cfg.max_views {
            self.finished = true;
            return Ok(StepResult::Complete);
        }
        if let Some(t) = retry_target {
            let failed = self.state.current_view;
            let next = self.reactive_adjustment(t, &failed)?;
            self.proposals.insert(t, next);
            return Ok(self.commit(next, t));
        }

        let live = self.live_frontiers();
        if live.is_empty() {
            self.finished = true;
            return Ok(StepResult::Complete);
        }

        // Proposal upkeep: drop resolved frontiers, propose for new ones
        // along their estimated normals as seen from the observing view.
        self.proposals.retain(|f, _| live.contains(f));
        for &f in &live {
            if !self.proposals.contains_key(&f) {
                let observer = self.state.view_history[self.store.view_id(f) as usize];
                let v = proposal::propose_initial_view(&self.store, f, &observer, &self.cfg.proposal)?;
                self.proposals.insert(f, v);
            }
        }

        let (target, next) = match self.cfg.mode {
            Mode::Reactive => self.select_closest(),
            Mode::Proactive => self.select_through_graph(&live)?,
        };
        self.state.adjustment_count = 0;
        Ok(self.commit(next, target))
    }

    fn commit(&mut self, next: View, target: u32) -> StepResult {
        self.state.pending_target = Some(target);
        self.state.current_view = next;
        self.state.view_history.push(next);
        StepResult::Next(next)
    }

    /// Closest proposal to the sensor; ties resolve to the lowest frontier
    /// index via the strict comparison over an index-ordered walk.
    fn select_closest(&self) -> (u32, View) {
        let cur = self.state.current_view.position;
        let mut best: Option<(f64, u32, View)> = None;
        for (&f, v) in &self.proposals {
            let d2 = (v.position - cur).norm_squared();
            if best.as_ref().is_none_or(|(bd, _, _)| d2 < *bd) {
                best = Some((d2, f, *v));
            }
        }
        let (_, f, v) = best.expect("live frontiers imply proposals");
        (f, v)
    }

    /// Occlusion screening for the tau nearest proposals, then graph
    /// selection.
    fn select_through_graph(&mut self, live: &BTreeSet<u32>) -> Result<(u32, View), PlannerError> {
        let cur = self.state.current_view.position;
        let mut order: Vec<(f64, u32)> = self
            .proposals
            .iter()
            .map(|(&f, v)| ((v.position - cur).norm_squared(), f))
            .collect();
        order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        order.truncate(self.cfg.tau);
        for (_, f) in order {
            let v = self.proposals[&f];
            if self.store.offset_zeta(f).is_none() {
                let zeta = occlusion::compute_offset(&self.store, f, &v, &self.cfg.occlusion)?;
                self.store.set_offset_zeta(f, zeta);
            }
            if !occlusion::is_visible(&self.store, f, &v, &self.cfg.occlusion) {
                let (fresh, _) = proposal::propose_unoccluded_view(
                    &self.store,
                    f,
                    &v,
                    &self.cfg.occlusion,
                    &self.cfg.proposal,
                )?;
                self.proposals.insert(f, fresh);
            }
        }
        self.graph.sync_vertices(live, &self.proposals);
        self.graph.update_connectivity(&self.store, &self.cfg.occlusion, &self.cfg.gate, &cur);
        let vertex = self
            .graph
            .select_nbv(&self.state.current_view)
            .expect("live frontiers imply graph vertices");
        Ok((vertex.frontier_idx, vertex.view))
    }

    /// Recovery view after a failed capture: rotate the sight direction by
    /// the configured step around the axis normal x sight line (any
    /// perpendicular axis when the two align), keeping the proposal
    /// distance.
    pub fn reactive_adjustment(&self, target: u32, failed_view: &View) -> Result<View, PlannerError> {
        let f = self.store.position(target);
        let sight = occlusion::sight_line(&f, &failed_view.position)?;
        let normal = proposal::estimate_normal(&self.store, target, failed_view, &self.cfg.proposal)?;
        let mut axis = normal.cross(&sight);
        if axis.norm() < 1e-9 {
            axis = geom::any_perpendicular(&sight);
        }
        let axis = axis.normalize();
        let dir = geom::rotate_about(&sight, &axis, self.cfg.adjust_step_deg.to_radians());
        Ok(View::new(f + dir * self.cfg.proposal.d, -dir)?)
    }
}

#[cfg(test)]
mod tests;
