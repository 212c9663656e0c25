//! Next-best-view planning over unstructured point-density scene observations.
//!
//! The crate keeps an incrementally classified point cloud (core, outlier,
//! frontier), proposes sensor views at frontier points, detects and avoids
//! occluded sight lines with a spherical minimax search, maintains a frontier
//! visibility graph, and selects the next view by outdegree per travel
//! distance. A mesh-raycasting depth sensor and an experiment harness with
//! deterministic CSV output round out the toolkit.

pub mod geom;
pub mod graph;
pub mod harness;
pub mod metrics;
pub mod minimax;
pub mod occlusion;
pub mod planner;
pub mod proposal;
pub mod sensor;
pub mod store;
