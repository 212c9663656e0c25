//! Directed frontier-visibility graph: one vertex per live frontier paired
//! with its current view proposal, edges meaning "this proposal can also
//! observe that frontier", and next-best-view selection by outgoing degree
//! per travel distance.

use std::collections::{BTreeMap, BTreeSet};

use crate::geom::{Vec3, View};
use crate::occlusion::{self, OcclusionConfig};
use crate::store::PointStore;

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("invalid edge gate: {0}")]
    BadGate(String),
}

/// A frontier point paired with its current view proposal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontierVertex {
    pub vertex_id: u64,
    pub frontier_idx: u32,
    pub view: View,
}

/// Pass criteria for an edge (u, w) beyond occlusion freedom: w's frontier
/// must sit inside u's angular frustum and within a workable range band
/// around the nominal view distance.
#[derive(Debug, Clone, Copy)]
pub struct EdgeGate {
    /// Angular half-width (rad): min(θx, θy)/2 of the sensor.
    pub half_angle: f64,
    /// Nominal view distance d (m); accepted range is [0.5d, 1.5d].
    pub d: f64,
}

impl EdgeGate {
    pub fn new(half_angle: f64, d: f64) -> Result<Self, GraphError> {
        if !(half_angle > 0.0 && half_angle < std::f64::consts::FRAC_PI_2) {
            return Err(GraphError::BadGate(format!(
                "half_angle must be in (0, pi/2), got {half_angle}"
            )));
        }
        if !(d > 0.0 && d.is_finite()) {
            return Err(GraphError::BadGate(format!("d must be positive, got {d}")));
        }
        Ok(Self { half_angle, d })
    }

    pub fn from_fov_deg(theta_x: f64, theta_y: f64, d: f64) -> Result<Self, GraphError> {
        let half = theta_x.min(theta_y).to_radians() / 2.0;
        Self::new(half, d)
    }

    /// Whether a capture from `view` would plausibly measure `target`.
    pub fn admits(&self, view: &View, target: &Vec3) -> bool {
        let to = target - view.position;
        let range = to.norm();
        if range < 0.5 * self.d || range > 1.5 * self.d {
            return false;
        }
        if range == 0.0 {
            return false;
        }
        view.orientation.dot(&(to / range)) >= self.half_angle.cos()
    }
}

/// Edge changes produced by one connectivity update.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct EdgeDelta {
    pub added: Vec<(u64, u64)>,
    pub removed: Vec<(u64, u64)>,
}

#[derive(Debug, Clone)]
pub struct VisibilityGraph {
    tau: usize,
    next_id: u64,
    vertices: BTreeMap<u64, FrontierVertex>,
    by_frontier: BTreeMap<u32, u64>,
    out: BTreeMap<u64, BTreeSet<u64>>,
    incoming: BTreeMap<u64, BTreeSet<u64>>,
}

impl VisibilityGraph {
    pub fn new(tau: usize) -> Self {
        Self {
            tau: tau.max(1),
            next_id: 0,
            vertices: BTreeMap::new(),
            by_frontier: BTreeMap::new(),
            out: BTreeMap::new(),
            incoming: BTreeMap::new(),
        }
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex(&self, vertex_id: u64) -> Option<&FrontierVertex> {
        self.vertices.get(&vertex_id)
    }

    pub fn vertex_for_frontier(&self, frontier_idx: u32) -> Option<&FrontierVertex> {
        self.by_frontier.get(&frontier_idx).and_then(|id| self.vertices.get(id))
    }

    pub fn vertices(&self) -> impl Iterator<Item = &FrontierVertex> {
        self.vertices.values()
    }

    pub fn out_degree(&self, vertex_id: u64) -> usize {
        self.out.get(&vertex_id).map_or(0, |s| s.len())
    }

    pub fn edge_count(&self) -> usize {
        self.out.values().map(|s| s.len()).sum()
    }

    pub fn has_edge(&self, src: u64, dst: u64) -> bool {
        self.out.get(&src).is_some_and(|s| s.contains(&dst))
    }

    /// All edges as (src, dst), sorted.
    pub fn edges(&self) -> Vec<(u64, u64)> {
        let mut v = Vec::with_capacity(self.edge_count());
        for (src, dsts) in &self.out {
            for dst in dsts {
                v.push((*src, *dst));
            }
        }
        v
    }

    /// Directly insert one edge. Rejects self-loops and unknown endpoints;
    /// returns whether the edge was new. Connectivity updates are the normal
    /// producer of edges; this hook exists for tools and tests that build
    /// prescribed graph shapes.
    pub fn insert_edge(&mut self, src: u64, dst: u64) -> bool {
        if src == dst || !self.vertices.contains_key(&src) || !self.vertices.contains_key(&dst) {
            return false;
        }
        let new = self.out.entry(src).or_default().insert(dst);
        if new {
            self.incoming.entry(dst).or_default().insert(src);
        }
        new
    }

    fn drop_all_edges_of(&mut self, id: u64, delta: Option<&mut Vec<(u64, u64)>>) {
        let mut scratch = Vec::new();
        if let Some(dsts) = self.out.remove(&id) {
            for dst in dsts {
                self.incoming.get_mut(&dst).map(|s| s.remove(&id));
                scratch.push((id, dst));
            }
        }
        if let Some(srcs) = self.incoming.remove(&id) {
            for src in srcs {
                self.out.get_mut(&src).map(|s| s.remove(&id));
                scratch.push((src, id));
            }
        }
        if let Some(d) = delta {
            d.extend(scratch);
        }
    }

    /// Reconcile vertices with the live frontier set: add vertices for new
    /// frontiers, remove vertices (and their incident edges) for indices
    /// that are no longer live, and for frontiers whose proposal changed
    /// keep the vertex but drop its incoming and outgoing edges so the next
    /// connectivity update re-derives them. Returns (added, removed) vertex
    /// ids, sorted.
    pub fn sync_vertices(
        &mut self,
        live_frontiers: &BTreeSet<u32>,
        proposals: &BTreeMap<u32, View>,
    ) -> (Vec<u64>, Vec<u64>) {
        let mut removed = Vec::new();
        let stale: Vec<(u32, u64)> = self
            .by_frontier
            .iter()
            .filter(|(f, _)| !live_frontiers.contains(f))
            .map(|(f, id)| (*f, *id))
            .collect();
        for (f, id) in stale {
            self.drop_all_edges_of(id, None);
            self.vertices.remove(&id);
            self.by_frontier.remove(&f);
            removed.push(id);
        }

        let mut added = Vec::new();
        for &f in live_frontiers {
            let view = *proposals
                .get(&f)
                .expect("every live frontier must carry a view proposal");
            match self.by_frontier.get(&f) {
                Some(&id) => {
                    let v = self.vertices.get_mut(&id).expect("vertex for mapped frontier");
                    if v.view != view {
                        v.view = view;
                        self.drop_all_edges_of(id, None);
                    }
                }
                None => {
                    let id = self.next_id;
                    self.next_id += 1;
                    self.vertices.insert(
                        id,
                        FrontierVertex { vertex_id: id, frontier_idx: f, view },
                    );
                    self.by_frontier.insert(f, id);
                    added.push(id);
                }
            }
        }
        removed.sort_unstable();
        (added, removed)
    }

    /// Recompute outgoing edges for the τ-nearest vertices (by view position)
    /// to the sensor: each such vertex u gets an edge to every vertex w whose
    /// view is among the τ nearest to u's view and whose frontier u's view
    /// can observe (occlusion-free corridor, frustum, and range gates).
    /// Vertices outside the τ-nearest set keep their outgoing edges.
    pub fn update_connectivity(
        &mut self,
        store: &PointStore,
        occl: &OcclusionConfig,
        gate: &EdgeGate,
        sensor_position: &Vec3,
    ) -> EdgeDelta {
        let mut delta = EdgeDelta::default();
        let updated = self.nearest_by_view_position(sensor_position, self.tau, None);

        let mut old_out: BTreeMap<u64, BTreeSet<u64>> = BTreeMap::new();
        for &u in &updated {
            let dsts = self.out.remove(&u).unwrap_or_default();
            for &dst in &dsts {
                self.incoming.get_mut(&dst).map(|s| s.remove(&u));
            }
            old_out.insert(u, dsts);
        }

        for &u in &updated {
            let u_view = self.vertices[&u].view;
            let candidates = self.nearest_by_view_position(&u_view.position, self.tau, Some(u));
            for w in candidates {
                let target = store.position(self.vertices[&w].frontier_idx);
                if !gate.admits(&u_view, &target) {
                    continue;
                }
                if !occlusion::is_visible(store, self.vertices[&w].frontier_idx, &u_view, occl) {
                    continue;
                }
                self.out.entry(u).or_default().insert(w);
                self.incoming.entry(w).or_default().insert(u);
                if !old_out[&u].contains(&w) {
                    delta.added.push((u, w));
                }
            }
            let new_out = self.out.get(&u);
            for &dst in &old_out[&u] {
                if new_out.is_none_or(|s| !s.contains(&dst)) {
                    delta.removed.push((u, dst));
                }
            }
        }
        delta.added.sort_unstable();
        delta.removed.sort_unstable();
        delta
    }

    /// Ids of up to `limit` vertices nearest to `p` by view position,
    /// excluding `skip`. Ties break toward lower vertex id.
    fn nearest_by_view_position(&self, p: &Vec3, limit: usize, skip: Option<u64>) -> Vec<u64> {
        let mut all: Vec<(f64, u64)> = self
            .vertices
            .values()
            .filter(|v| Some(v.vertex_id) != skip)
            .map(|v| ((v.view.position - p).norm_squared(), v.vertex_id))
            .collect();
        all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        all.truncate(limit);
        all.into_iter().map(|(_, id)| id).collect()
    }

    /// Next best view: start from m_c, the vertex whose view is closest to
    /// the current position, and among parents of m_c with strictly greater
    /// outgoing degree pick the one maximizing degree per travel distance.
    /// Falls back to m_c when no parent dominates it; returns None on an
    /// empty graph (scan complete).
    pub fn select_nbv(&self, current_view: &View) -> Option<&FrontierVertex> {
        let mc = self
            .vertices
            .values()
            .map(|v| ((v.view.position - current_view.position).norm(), v.vertex_id))
            .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)))?
            .1;
        let mc_deg = self.out_degree(mc);

        let mut best: Option<(f64, usize, u64)> = None; // (ratio, deg, id)
        if let Some(parents) = self.incoming.get(&mc) {
            for &m in parents {
                let deg = self.out_degree(m);
                if deg <= mc_deg {
                    continue;
                }
                let dist = (self.vertices[&m].view.position - current_view.position).norm();
                let ratio = if dist == 0.0 { f64::INFINITY } else { deg as f64 / dist };
                let better = match best {
                    None => true,
                    Some((br, bd, bid)) => {
                        ratio > br
                            || (ratio == br && (deg > bd || (deg == bd && m < bid)))
                    }
                };
                if better {
                    best = Some((ratio, deg, m));
                }
            }
        }
        let id = best.map_or(mc, |(_, _, id)| id);
        self.vertices.get(&id)
    }

    /// Edge list as text, one "src dst" pair per line, sorted.
    pub fn export_edge_list(&self) -> String {
        let mut s = String::new();
        for (src, dst) in self.edges() {
            s.push_str(&format!("{src} {dst}\n"));
        }
        s
    }

    /// Internal consistency: mirrored in/out maps, endpoints exist, no
    /// self-loops. Used by tests and debug assertions.
    pub fn check_invariants(&self) -> Result<(), String> {
        for (src, dsts) in &self.out {
            if !self.vertices.contains_key(src) {
                return Err(format!("out edges from unknown vertex {src}"));
            }
            for dst in dsts {
                if src == dst {
                    return Err(format!("self-loop at {src}"));
                }
                if !self.vertices.contains_key(dst) {
                    return Err(format!("edge to unknown vertex {dst}"));
                }
                if !self.incoming.get(dst).is_some_and(|s| s.contains(src)) {
                    return Err(format!("edge ({src},{dst}) missing incoming mirror"));
                }
            }
        }
        for (dst, srcs) in &self.incoming {
            for src in srcs {
                if !self.out.get(src).is_some_and(|s| s.contains(dst)) {
                    return Err(format!("incoming ({src},{dst}) missing outgoing mirror"));
                }
            }
        }
        for (f, id) in &self.by_frontier {
            match self.vertices.get(id) {
                Some(v) if v.frontier_idx == *f => {}
                _ => return Err(format!("frontier map entry {f}->{id} broken")),
            }
        }
        if self.by_frontier.len() != self.vertices.len() {
            return Err("frontier map and vertex set out of sync".into());
        }
        Ok(())
    }
}
