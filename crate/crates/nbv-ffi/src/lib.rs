//! C ABI for the next-best-view planner: opaque handles over the mesh,
//! capture buffer, and planner, flat structs for views and sensor
//! parameters, and status-code error reporting.
//!
//! Conventions:
//! * Every function that can fail returns an `NbvStatus`; outputs go through
//!   pointers and are written only on `Ok`.
//! * Handles are created by `*_new`/`*_load` and released by the matching
//!   `*_free`; passing null to a free is a no-op, any other null pointer
//!   argument yields `NullPointer`.
//! * A thread-local message with the detail of the last failure on the
//!   calling thread is available via `nbv_last_error`.
//! * Panics never unwind across the boundary; they surface as `Internal`.
//!
//! The generated header lives at `include/nbv.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use nbv_core::geom::{Vec3, View};
use nbv_core::graph::EdgeGate;
use nbv_core::metrics::CoverageTracker;
use nbv_core::occlusion::OcclusionConfig;
use nbv_core::planner::{self, Mode, Planner, PlannerConfig, StepResult};
use nbv_core::proposal::ProposalConfig;
use nbv_core::sensor::{self, MeshError, SceneMesh, SensorModel};
use nbv_core::store::StoreConfig;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NbvStatus {
    /// Success.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Arguments were structurally valid but semantically rejected.
    InvalidArgument = 2,
    /// The filesystem refused a read or write.
    Io = 3,
    /// A string argument was not valid UTF-8.
    Utf8 = 4,
    /// Unexpected internal failure (a bug); details via nbv_last_error.
    Internal = 5,
}

/// Planning behavior on occlusion: adjust after failures, or route around
/// known occluders before committing to a view.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NbvMode {
    Reactive = 0,
    Proactive = 1,
}

/// Outcome of one planner step.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NbvStepOutcome {
    /// `next_view` holds the pose to capture from.
    Next = 0,
    /// The run is finished; `next_view` is untouched.
    Complete = 1,
}

/// Sensor placement: metric position and unit orientation.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NbvView {
    pub position: [f64; 3],
    pub orientation: [f64; 3],
}

/// Virtual depth camera description.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NbvSensorParams {
    /// Horizontal field of view, degrees.
    pub theta_x_deg: f64,
    /// Vertical field of view, degrees.
    pub theta_y_deg: f64,
    /// Horizontal resolution, pixels.
    pub omega_x: u32,
    /// Vertical resolution, pixels.
    pub omega_y: u32,
    /// Gaussian range-noise standard deviation, meters.
    pub sigma: f64,
    /// Maximum measured range, meters.
    pub max_range: f64,
}

/// Full planner construction parameters. The standoff distance is derived
/// from the sensor and `rho` exactly as `nbv_view_distance` computes it.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NbvPlannerParams {
    pub mode: NbvMode,
    pub sensor: NbvSensorParams,
    /// Desired measurement density, points/m^3.
    pub rho: f64,
    /// Classification radius, meters.
    pub r: f64,
    /// Occlusion search distance, meters.
    pub psi: f64,
    /// Nearest-frontier candidate count for graph selection.
    pub tau: usize,
    /// Hard stop on total views, seed included.
    pub max_views: usize,
    /// Neighbor cap for surface-normal estimation.
    pub normal_k: usize,
    /// Rotation applied per reactive adjustment, degrees.
    pub adjust_step_deg: f64,
    /// First sensor pose.
    pub seed_view: NbvView,
}

/// Opaque triangle mesh handle.
pub struct NbvMesh(SceneMesh);

/// Opaque point buffer handle; data is xyz-interleaved f64.
pub struct NbvPoints(Vec<Vec3>);

/// Opaque planner handle.
pub struct NbvPlanner(Planner);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn fail(status: NbvStatus, msg: impl std::fmt::Display) -> NbvStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.to_string());
    status
}

fn guard(f: impl FnOnce() -> NbvStatus) -> NbvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(NbvStatus::Internal, "internal panic"),
    }
}

fn mesh_status(e: &MeshError) -> NbvStatus {
    match e {
        MeshError::Io(_) => NbvStatus::Io,
        _ => NbvStatus::InvalidArgument,
    }
}

fn to_view(v: &NbvView) -> Result<View, NbvStatus> {
    let pos = Vec3::new(v.position[0], v.position[1], v.position[2]);
    let dir = Vec3::new(v.orientation[0], v.orientation[1], v.orientation[2]);
    View::new(pos, dir).map_err(|e| fail(NbvStatus::InvalidArgument, e))
}

fn from_view(v: &View) -> NbvView {
    NbvView {
        position: [v.position.x, v.position.y, v.position.z],
        orientation: [v.orientation.x, v.orientation.y, v.orientation.z],
    }
}

fn to_sensor(s: &NbvSensorParams) -> Result<SensorModel, NbvStatus> {
    SensorModel::new(s.theta_x_deg, s.theta_y_deg, s.omega_x, s.omega_y, s.sigma, s.max_range)
        .map_err(|e| fail(NbvStatus::InvalidArgument, e))
}

/// Collect a flat xyz array into vectors, rejecting non-finite values.
fn to_points(xyz: *const f64, n: usize) -> Result<Vec<Vec3>, NbvStatus> {
    if n == 0 {
        return Ok(Vec::new());
    }
    if xyz.is_null() {
        return Err(fail(NbvStatus::NullPointer, "point array is null"));
    }
    let flat = unsafe { std::slice::from_raw_parts(xyz, n * 3) };
    let mut out = Vec::with_capacity(n);
    for c in flat.chunks_exact(3) {
        if !(c[0].is_finite() && c[1].is_finite() && c[2].is_finite()) {
            return Err(fail(NbvStatus::InvalidArgument, "non-finite point coordinate"));
        }
        out.push(Vec3::new(c[0], c[1], c[2]));
    }
    Ok(out)
}

/// Copy the last error message on this thread into `buf` (NUL-terminated,
/// truncated to `cap` bytes) and return the full message length in bytes,
/// excluding the NUL. With a null or zero-capacity buffer, just returns the
/// length.
#[no_mangle]
pub unsafe extern "C" fn nbv_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
                *buf.add(n) = 0;
            }
        }
        bytes.len()
    })
}

/// Standoff distance that spreads one frame's pixels to the density `rho`
/// over the frame footprint.
///
/// # Safety
/// `sensor` and `out_d` must be valid for reads and writes respectively.
#[no_mangle]
pub unsafe extern "C" fn nbv_view_distance(
    sensor: *const NbvSensorParams,
    rho: f64,
    out_d: *mut f64,
) -> NbvStatus {
    guard(|| {
        if sensor.is_null() || out_d.is_null() {
            return fail(NbvStatus::NullPointer, "sensor or out_d is null");
        }
        let model = match to_sensor(unsafe { &*sensor }) {
            Ok(m) => m,
            Err(s) => return s,
        };
        match planner::view_distance(&model, rho) {
            Ok(d) => {
                unsafe { *out_d = d };
                NbvStatus::Ok
            }
            Err(e) => fail(NbvStatus::InvalidArgument, e),
        }
    })
}

/// Load a triangle mesh from an OBJ file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable. The
/// returned handle must be released with `nbv_mesh_free`.
#[no_mangle]
pub unsafe extern "C" fn nbv_mesh_load(path: *const c_char, out: *mut *mut NbvMesh) -> NbvStatus {
    guard(|| {
        if path.is_null() || out.is_null() {
            return fail(NbvStatus::NullPointer, "path or out is null");
        }
        let path = match unsafe { CStr::from_ptr(path) }.to_str() {
            Ok(s) => s,
            Err(e) => return fail(NbvStatus::Utf8, e),
        };
        match sensor::load_mesh(std::path::Path::new(path)) {
            Ok(m) => {
                unsafe { *out = Box::into_raw(Box::new(NbvMesh(m))) };
                NbvStatus::Ok
            }
            Err(e) => {
                let s = mesh_status(&e);
                fail(s, e)
            }
        }
    })
}

/// Build the in-crate benchmark scene (a classic teapot) at the given patch
/// resolution, rescaled so its longest axis spans `extent` meters.
///
/// # Safety
/// `out` must be writable; release the handle with `nbv_mesh_free`.
#[no_mangle]
pub unsafe extern "C" fn nbv_mesh_teapot(
    resolution: usize,
    extent: f64,
    out: *mut *mut NbvMesh,
) -> NbvStatus {
    guard(|| {
        if out.is_null() {
            return fail(NbvStatus::NullPointer, "out is null");
        }
        if !(extent > 0.0 && extent.is_finite()) {
            return fail(NbvStatus::InvalidArgument, format!("extent must be positive, got {extent}"));
        }
        let mesh = sensor::teapot_mesh(resolution, extent);
        unsafe { *out = Box::into_raw(Box::new(NbvMesh(mesh))) };
        NbvStatus::Ok
    })
}

/// Release a mesh handle. Null is a no-op.
///
/// # Safety
/// `mesh` must be a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nbv_mesh_free(mesh: *mut NbvMesh) {
    if !mesh.is_null() {
        drop(unsafe { Box::from_raw(mesh) });
    }
}

/// Vertex count, triangle count, and total surface area of a mesh. Any of
/// the output pointers may be null to skip that field.
///
/// # Safety
/// `mesh` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn nbv_mesh_stats(
    mesh: *const NbvMesh,
    out_vertices: *mut usize,
    out_triangles: *mut usize,
    out_area: *mut f64,
) -> NbvStatus {
    guard(|| {
        if mesh.is_null() {
            return fail(NbvStatus::NullPointer, "mesh is null");
        }
        let m = unsafe { &(*mesh).0 };
        unsafe {
            if !out_vertices.is_null() {
                *out_vertices = m.vertex_count();
            }
            if !out_triangles.is_null() {
                *out_triangles = m.triangle_count();
            }
            if !out_area.is_null() {
                *out_area = m.total_area();
            }
        }
        NbvStatus::Ok
    })
}

/// Simulate one depth frame: one ray per pixel, nearest hit within range,
/// Gaussian range noise seeded by `seed`.
///
/// # Safety
/// All pointers must be valid; release the buffer with `nbv_points_free`.
#[no_mangle]
pub unsafe extern "C" fn nbv_capture(
    mesh: *const NbvMesh,
    view: *const NbvView,
    sensor: *const NbvSensorParams,
    seed: u64,
    out: *mut *mut NbvPoints,
) -> NbvStatus {
    guard(|| {
        if mesh.is_null() || view.is_null() || sensor.is_null() || out.is_null() {
            return fail(NbvStatus::NullPointer, "null argument to nbv_capture");
        }
        let v = match to_view(unsafe { &*view }) {
            Ok(v) => v,
            Err(s) => return s,
        };
        let model = match to_sensor(unsafe { &*sensor }) {
            Ok(m) => m,
            Err(s) => return s,
        };
        let pts = sensor::capture(unsafe { &(*mesh).0 }, &v, &model, seed);
        unsafe { *out = Box::into_raw(Box::new(NbvPoints(pts))) };
        NbvStatus::Ok
    })
}

/// Draw `count` area-uniform surface samples from the mesh, deterministic
/// per seed. Useful as coverage ground truth.
///
/// # Safety
/// `mesh` and `out` must be valid; release with `nbv_points_free`.
#[no_mangle]
pub unsafe extern "C" fn nbv_sample_surface(
    mesh: *const NbvMesh,
    count: usize,
    seed: u64,
    out: *mut *mut NbvPoints,
) -> NbvStatus {
    guard(|| {
        if mesh.is_null() || out.is_null() {
            return fail(NbvStatus::NullPointer, "mesh or out is null");
        }
        match nbv_core::metrics::sample_ground_truth(unsafe { &(*mesh).0 }, count, seed) {
            Ok(pts) => {
                unsafe { *out = Box::into_raw(Box::new(NbvPoints(pts))) };
                NbvStatus::Ok
            }
            Err(e) => fail(NbvStatus::InvalidArgument, e),
        }
    })
}

/// Number of points in a buffer; 0 for null.
///
/// # Safety
/// `points` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nbv_points_len(points: *const NbvPoints) -> usize {
    if points.is_null() {
        return 0;
    }
    unsafe { (*points).0.len() }
}

/// Borrow the xyz-interleaved data of a buffer: 3 × len doubles, valid until
/// the buffer is freed. Null for null or empty buffers.
///
/// # Safety
/// `points` must be null or a live handle; do not use the pointer after
/// `nbv_points_free`.
#[no_mangle]
pub unsafe extern "C" fn nbv_points_data(points: *const NbvPoints) -> *const f64 {
    if points.is_null() {
        return std::ptr::null();
    }
    let v = unsafe { &(*points).0 };
    if v.is_empty() {
        return std::ptr::null();
    }
    v.as_ptr().cast::<f64>()
}

/// Release a point buffer. Null is a no-op.
///
/// # Safety
/// `points` must be a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nbv_points_free(points: *mut NbvPoints) {
    if !points.is_null() {
        drop(unsafe { Box::from_raw(points) });
    }
}

fn build_planner(p: &NbvPlannerParams) -> Result<Planner, NbvStatus> {
    let sensor = to_sensor(&p.sensor)?;
    let seed_view = to_view(&p.seed_view)?;
    let inv = |e: &dyn std::fmt::Display| fail(NbvStatus::InvalidArgument, e);
    let d = planner::view_distance(&sensor, p.rho).map_err(|e| inv(&e))?;
    let mode = match p.mode {
        NbvMode::Reactive => Mode::Reactive,
        NbvMode::Proactive => Mode::Proactive,
    };
    let cfg = PlannerConfig {
        mode,
        store: StoreConfig::from_density(p.rho, p.r, d).map_err(|e| inv(&e))?,
        occlusion: OcclusionConfig::new(p.psi, p.r).map_err(|e| inv(&e))?,
        proposal: ProposalConfig::new(d, p.psi, p.normal_k).map_err(|e| inv(&e))?,
        gate: EdgeGate::from_fov_deg(p.sensor.theta_x_deg, p.sensor.theta_y_deg, d)
            .map_err(|e| inv(&e))?,
        tau: p.tau,
        max_views: p.max_views,
        adjust_step_deg: p.adjust_step_deg,
        seed_view,
    };
    Planner::new(cfg).map_err(|e| inv(&e))
}

/// Create a planner. The seed view becomes the current view; feed it the
/// seed capture on the first `nbv_planner_step`.
///
/// # Safety
/// `params` and `out` must be valid; release with `nbv_planner_free`.
#[no_mangle]
pub unsafe extern "C" fn nbv_planner_new(
    params: *const NbvPlannerParams,
    out: *mut *mut NbvPlanner,
) -> NbvStatus {
    guard(|| {
        if params.is_null() || out.is_null() {
            return fail(NbvStatus::NullPointer, "params or out is null");
        }
        match build_planner(unsafe { &*params }) {
            Ok(p) => {
                unsafe { *out = Box::into_raw(Box::new(NbvPlanner(p))) };
                NbvStatus::Ok
            }
            Err(s) => s,
        }
    })
}

/// Release a planner handle. Null is a no-op.
///
/// # Safety
/// `planner` must be a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nbv_planner_free(planner: *mut NbvPlanner) {
    if !planner.is_null() {
        drop(unsafe { Box::from_raw(planner) });
    }
}

/// Ingest the capture taken from the current view (`xyz`: n_points × 3
/// doubles; may be empty) and decide what happens next. On `Next`,
/// `out_next` receives the pose to capture from; on `Complete` it is left
/// untouched and further calls keep returning `Complete`.
///
/// # Safety
/// `planner`, `out_outcome`, and `out_next` must be valid; `xyz` must hold
/// 3 × n_points doubles when n_points > 0.
#[no_mangle]
pub unsafe extern "C" fn nbv_planner_step(
    planner: *mut NbvPlanner,
    xyz: *const f64,
    n_points: usize,
    out_outcome: *mut NbvStepOutcome,
    out_next: *mut NbvView,
) -> NbvStatus {
    guard(|| {
        if planner.is_null() || out_outcome.is_null() || out_next.is_null() {
            return fail(NbvStatus::NullPointer, "null argument to nbv_planner_step");
        }
        let pts = match to_points(xyz, n_points) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match unsafe { &mut (*planner).0 }.step(&pts) {
            Ok(StepResult::Next(v)) => {
                unsafe {
                    *out_outcome = NbvStepOutcome::Next;
                    *out_next = from_view(&v);
                }
                NbvStatus::Ok
            }
            Ok(StepResult::Complete) => {
                unsafe { *out_outcome = NbvStepOutcome::Complete };
                NbvStatus::Ok
            }
            Err(e) => fail(NbvStatus::InvalidArgument, e),
        }
    })
}

/// The view the next capture should be taken from.
///
/// # Safety
/// `planner` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nbv_planner_current_view(
    planner: *const NbvPlanner,
    out: *mut NbvView,
) -> NbvStatus {
    guard(|| {
        if planner.is_null() || out.is_null() {
            return fail(NbvStatus::NullPointer, "planner or out is null");
        }
        let v = unsafe { &(*planner).0 }.state().current_view;
        unsafe { *out = from_view(&v) };
        NbvStatus::Ok
    })
}

/// Views taken so far, the seed included. 0 for null.
///
/// # Safety
/// `planner` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nbv_planner_view_count(planner: *const NbvPlanner) -> usize {
    if planner.is_null() {
        return 0;
    }
    unsafe { &(*planner).0 }.state().view_history.len()
}

/// Frontier points still considered observable. 0 for null.
///
/// # Safety
/// `planner` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nbv_planner_frontier_count(planner: *const NbvPlanner) -> usize {
    if planner.is_null() {
        return 0;
    }
    unsafe { &(*planner).0 }.live_frontiers().len()
}

/// Accepted measurements stored so far. 0 for null.
///
/// # Safety
/// `planner` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nbv_planner_point_count(planner: *const NbvPlanner) -> usize {
    if planner.is_null() {
        return 0;
    }
    unsafe { &(*planner).0 }.store().len()
}

/// Fraction of `gt` (n_gt × 3 doubles) within `r_d` of some point of `pts`
/// (n_pts × 3 doubles).
///
/// # Safety
/// Arrays must hold 3 × count doubles each when their count is > 0; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn nbv_coverage(
    gt_xyz: *const f64,
    n_gt: usize,
    pts_xyz: *const f64,
    n_pts: usize,
    r_d: f64,
    out: *mut f64,
) -> NbvStatus {
    guard(|| {
        if out.is_null() {
            return fail(NbvStatus::NullPointer, "out is null");
        }
        let gt = match to_points(gt_xyz, n_gt) {
            Ok(p) => p,
            Err(s) => return s,
        };
        let pts = match to_points(pts_xyz, n_pts) {
            Ok(p) => p,
            Err(s) => return s,
        };
        let mut tracker = match CoverageTracker::new(&gt, r_d) {
            Ok(t) => t,
            Err(e) => return fail(NbvStatus::InvalidArgument, e),
        };
        tracker.observe(&pts);
        unsafe { *out = tracker.coverage() };
        NbvStatus::Ok
    })
}
