#ifndef NBV_H
#define NBV_H

/* Generated by cbindgen from the nbv-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Planning behavior on occlusion: adjust after failures, or route around
 * known occluders before committing to a view.
 */
typedef enum NbvMode {
  NBV_MODE_REACTIVE = 0,
  NBV_MODE_PROACTIVE = 1,
} NbvMode;

/**
 * Result code of every fallible call.
 */
typedef enum NbvStatus {
  /**
   * Success.
   */
  NBV_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  NBV_STATUS_NULL_POINTER = 1,
  /**
   * Arguments were structurally valid but semantically rejected.
   */
  NBV_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The filesystem refused a read or write.
   */
  NBV_STATUS_IO = 3,
  /**
   * A string argument was not valid UTF-8.
   */
  NBV_STATUS_UTF8 = 4,
  /**
   * Unexpected internal failure (a bug); details via nbv_last_error.
   */
  NBV_STATUS_INTERNAL = 5,
} NbvStatus;

/**
 * Outcome of one planner step.
 */
typedef enum NbvStepOutcome {
  /**
   * `next_view` holds the pose to capture from.
   */
  NBV_STEP_OUTCOME_NEXT = 0,
  /**
   * The run is finished; `next_view` is untouched.
   */
  NBV_STEP_OUTCOME_COMPLETE = 1,
} NbvStepOutcome;

/**
 * Opaque triangle mesh handle.
 */
typedef struct NbvMesh NbvMesh;

/**
 * Opaque planner handle.
 */
typedef struct NbvPlanner NbvPlanner;

/**
 * Opaque point buffer handle; data is xyz-interleaved f64.
 */
typedef struct NbvPoints NbvPoints;

/**
 * Virtual depth camera description.
 */
typedef struct NbvSensorParams {
  /**
   * Horizontal field of view, degrees.
   */
  double theta_x_deg;
  /**
   * Vertical field of view, degrees.
   */
  double theta_y_deg;
  /**
   * Horizontal resolution, pixels.
   */
  uint32_t omega_x;
  /**
   * Vertical resolution, pixels.
   */
  uint32_t omega_y;
  /**
   * Gaussian range-noise standard deviation, meters.
   */
  double sigma;
  /**
   * Maximum measured range, meters.
   */
  double max_range;
} NbvSensorParams;

/**
 * Sensor placement: metric position and unit orientation.
 */
typedef struct NbvView {
  double position[3];
  double orientation[3];
} NbvView;

/**
 * Full planner construction parameters. The standoff distance is derived
 * from the sensor and `rho` exactly as `nbv_view_distance` computes it.
 */
typedef struct NbvPlannerParams {
  enum NbvMode mode;
  struct NbvSensorParams sensor;
  /**
   * Desired measurement density, points/m^3.
   */
  double rho;
  /**
   * Classification radius, meters.
   */
  double r;
  /**
   * Occlusion search distance, meters.
   */
  double psi;
  /**
   * Nearest-frontier candidate count for graph selection.
   */
  size_t tau;
  /**
   * Hard stop on total views, seed included.
   */
  size_t max_views;
  /**
   * Neighbor cap for surface-normal estimation.
   */
  size_t normal_k;
  /**
   * Rotation applied per reactive adjustment, degrees.
   */
  double adjust_step_deg;
  /**
   * First sensor pose.
   */
  struct NbvView seed_view;
} NbvPlannerParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the last error message on this thread into `buf` (NUL-terminated,
 * truncated to `cap` bytes) and return the full message length in bytes,
 * excluding the NUL. With a null or zero-capacity buffer, just returns the
 * length.
 */
size_t nbv_last_error(char *buf, size_t cap);

/**
 * Standoff distance that spreads one frame's pixels to the density `rho`
 * over the frame footprint.
 *
 * # Safety
 * `sensor` and `out_d` must be valid for reads and writes respectively.
 */
enum NbvStatus nbv_view_distance(const struct NbvSensorParams *sensor, double rho, double *out_d);

/**
 * Load a triangle mesh from an OBJ file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable. The
 * returned handle must be released with `nbv_mesh_free`.
 */
enum NbvStatus nbv_mesh_load(const char *path, struct NbvMesh **out);

/**
 * Build the in-crate benchmark scene (a classic teapot) at the given patch
 * resolution, rescaled so its longest axis spans `extent` meters.
 *
 * # Safety
 * `out` must be writable; release the handle with `nbv_mesh_free`.
 */
enum NbvStatus nbv_mesh_teapot(size_t resolution, double extent, struct NbvMesh **out);

/**
 * Release a mesh handle. Null is a no-op.
 *
 * # Safety
 * `mesh` must be a handle from this library, not yet freed.
 */
void nbv_mesh_free(struct NbvMesh *mesh);

/**
 * Vertex count, triangle count, and total surface area of a mesh. Any of
 * the output pointers may be null to skip that field.
 *
 * # Safety
 * `mesh` must be a live handle; non-null outputs must be writable.
 */
enum NbvStatus nbv_mesh_stats(const struct NbvMesh *mesh,
                              size_t *out_vertices,
                              size_t *out_triangles,
                              double *out_area);

/**
 * Simulate one depth frame: one ray per pixel, nearest hit within range,
 * Gaussian range noise seeded by `seed`.
 *
 * # Safety
 * All pointers must be valid; release the buffer with `nbv_points_free`.
 */
enum NbvStatus nbv_capture(const struct NbvMesh *mesh,
                           const struct NbvView *view,
                           const struct NbvSensorParams *sensor,
                           uint64_t seed,
                           struct NbvPoints **out);

/**
 * Draw `count` area-uniform surface samples from the mesh, deterministic
 * per seed. Useful as coverage ground truth.
 *
 * # Safety
 * `mesh` and `out` must be valid; release with `nbv_points_free`.
 */
enum NbvStatus nbv_sample_surface(const struct NbvMesh *mesh,
                                  size_t count,
                                  uint64_t seed,
                                  struct NbvPoints **out);

/**
 * Number of points in a buffer; 0 for null.
 *
 * # Safety
 * `points` must be null or a live handle.
 */
size_t nbv_points_len(const struct NbvPoints *points);

/**
 * Borrow the xyz-interleaved data of a buffer: 3 × len doubles, valid until
 * the buffer is freed. Null for null or empty buffers.
 *
 * # Safety
 * `points` must be null or a live handle; do not use the pointer after
 * `nbv_points_free`.
 */
const double *nbv_points_data(const struct NbvPoints *points);

/**
 * Release a point buffer. Null is a no-op.
 *
 * # Safety
 * `points` must be a handle from this library, not yet freed.
 */
void nbv_points_free(struct NbvPoints *points);

/**
 * Create a planner. The seed view becomes the current view; feed it the
 * seed capture on the first `nbv_planner_step`.
 *
 * # Safety
 * `params` and `out` must be valid; release with `nbv_planner_free`.
 */
enum NbvStatus nbv_planner_new(const struct NbvPlannerParams *params, struct NbvPlanner **out);

/**
 * Release a planner handle. Null is a no-op.
 *
 * # Safety
 * `planner` must be a handle from this library, not yet freed.
 */
void nbv_planner_free(struct NbvPlanner *planner);

/**
 * Ingest the capture taken from the current view (`xyz`: n_points × 3
 * doubles; may be empty) and decide what happens next. On `Next`,
 * `out_next` receives the pose to capture from; on `Complete` it is left
 * untouched and further calls keep returning `Complete`.
 *
 * # Safety
 * `planner`, `out_outcome`, and `out_next` must be valid; `xyz` must hold
 * 3 × n_points doubles when n_points > 0.
 */
enum NbvStatus nbv_planner_step(struct NbvPlanner *planner,
                                const double *xyz,
                                size_t n_points,
                                enum NbvStepOutcome *out_outcome,
                                struct NbvView *out_next);

/**
 * The view the next capture should be taken from.
 *
 * # Safety
 * `planner` and `out` must be valid.
 */
enum NbvStatus nbv_planner_current_view(const struct NbvPlanner *planner, struct NbvView *out);

/**
 * Views taken so far, the seed included. 0 for null.
 *
 * # Safety
 * `planner` must be null or a live handle.
 */
size_t nbv_planner_view_count(const struct NbvPlanner *planner);

/**
 * Frontier points still considered observable. 0 for null.
 *
 * # Safety
 * `planner` must be null or a live handle.
 */
size_t nbv_planner_frontier_count(const struct NbvPlanner *planner);

/**
 * Accepted measurements stored so far. 0 for null.
 *
 * # Safety
 * `planner` must be null or a live handle.
 */
size_t nbv_planner_point_count(const struct NbvPlanner *planner);

/**
 * Fraction of `gt` (n_gt × 3 doubles) within `r_d` of some point of `pts`
 * (n_pts × 3 doubles).
 *
 * # Safety
 * Arrays must hold 3 × count doubles each when their count is > 0; `out`
 * must be writable.
 */
enum NbvStatus nbv_coverage(const double *gt_xyz,
                            size_t n_gt,
                            const double *pts_xyz,
                            size_t n_pts,
                            double r_d,
                            double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NBV_H */
