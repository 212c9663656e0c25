//! Experiment runner: load a scene and a declarative config, run seeded
//! trials of each planning mode, and write per-step CSVs, a per-run results
//! CSV, and an aggregate CSV with means and standard deviations.
//!
//! Reproducibility contract: with `record_timing` off (the default), the
//! config and seeds fully determine every CSV byte. Timing columns are
//! written as zero unless `record_timing` is on, because wall-clock values
//! can never be byte-stable.

mod plot;

pub use plot::emit_plots;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Deserialize;

use crate::geom::{Vec3, View};
use crate::graph::EdgeGate;
use crate::metrics::{self, CoverageTracker, MetricsConfig, MetricsError};
use crate::occlusion::OcclusionConfig;
use crate::planner::{self, Mode, Planner, PlannerConfig, PlannerError, StepResult};
use crate::proposal::ProposalConfig;
use crate::sensor::{self, MeshError, SceneMesh, SensorError, SensorModel};
use crate::store::StoreConfig;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid experiment config: {0}")]
    BadConfig(String),
    #[error("failed to read config {path}: {source}")]
    ConfigIo { path: PathBuf, source: std::io::Error },
    #[error("failed to parse config {path}: {source}")]
    ConfigParse { path: PathBuf, source: toml::de::Error },
    #[error("output error on {path}: {source}")]
    OutputIo { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Sensor(#[from] SensorError),
    #[error(transparent)]
    Planner(#[from] PlannerError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("csv error on {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

/// Fully validated experiment description. Construct directly or via
/// `load_config`; `run_experiment` assumes `validate` has passed.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub scene_path: PathBuf,
    /// Rescale the scene so its longest axis spans this extent (meters).
    pub scene_extent: Option<f64>,
    pub modes: Vec<Mode>,
    pub trials: usize,
    pub seed_base: i64,
    pub output_dir: PathBuf,
    /// Record wall-clock step times. Off by default: timing columns are
    /// zero so repeated runs stay byte-identical.
    pub record_timing: bool,
    pub sensor: SensorModel,
    /// Desired measurement density (points/m^3).
    pub rho: f64,
    /// Classification radius (m).
    pub r: f64,
    /// Occlusion search distance (m).
    pub psi: f64,
    pub tau: usize,
    pub max_views: usize,
    pub adjust_step_deg: f64,
    /// Neighbor cap for surface-normal estimation.
    pub normal_k: usize,
    /// First sensor pose; derived from the scene bounds when absent.
    pub seed_position: Option<Vec3>,
    /// What the seed view looks at.
    pub seed_target: Vec3,
    /// Coverage registration distance (m).
    pub r_d: f64,
    /// Ground-truth sampling density; defaults to `rho`.
    pub gt_density: Option<f64>,
}

// Serde mirror of the TOML file; every field is plain data so the format
// stays trivially documentable.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scene_path: String,
    scene_extent: Option<f64>,
    modes: Vec<String>,
    trials: usize,
    seed_base: i64,
    output_dir: String,
    #[serde(default)]
    record_timing: bool,
    sensor: RawSensor,
    planner: RawPlanner,
    metrics: RawMetrics,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSensor {
    fov_deg: [f64; 2],
    resolution: [u32; 2],
    sigma: f64,
    max_range: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPlanner {
    rho: f64,
    r: f64,
    psi: f64,
    tau: usize,
    max_views: usize,
    #[serde(default = "default_adjust_step")]
    adjust_step_deg: f64,
    #[serde(default = "default_normal_k")]
    normal_k: usize,
    seed_position: Option<[f64; 3]>,
    seed_target: Option<[f64; 3]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMetrics {
    r_d: f64,
    gt_density: Option<f64>,
}

fn default_adjust_step() -> f64 {
    30.0
}

fn default_normal_k() -> usize {
    16
}

pub fn parse_mode(s: &str) -> Result<Mode, HarnessError> {
    match s {
        "reactive" => Ok(Mode::Reactive),
        "proactive" => Ok(Mode::Proactive),
        other => Err(HarnessError::BadConfig(format!(
            "unknown mode {other:?}; expected \"reactive\" or \"proactive\""
        ))),
    }
}

pub fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Reactive => "reactive",
        Mode::Proactive => "proactive",
    }
}

/// Read and validate a TOML experiment config. Relative paths resolve
/// against the config file's directory.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, HarnessError> {
    let text = fs::read_to_string(path)
        .map_err(|source| HarnessError::ConfigIo { path: path.to_path_buf(), source })?;
    let raw: RawConfig = toml::from_str(&text)
        .map_err(|source| HarnessError::ConfigParse { path: path.to_path_buf(), source })?;
    let base = path.parent().unwrap_or(Path::new("."));
    let resolve = |p: &str| {
        let pb = PathBuf::from(p);
        if pb.is_absolute() {
            pb
        } else {
            base.join(pb)
        }
    };
    let modes = raw.modes.iter().map(|m| parse_mode(m)).collect::<Result<Vec<_>, _>>()?;
    let cfg = ExperimentConfig {
        scene_path: resolve(&raw.scene_path),
        scene_extent: raw.scene_extent,
        modes,
        trials: raw.trials,
        seed_base: raw.seed_base,
        output_dir: resolve(&raw.output_dir),
        record_timing: raw.record_timing,
        sensor: SensorModel::new(
            raw.sensor.fov_deg[0],
            raw.sensor.fov_deg[1],
            raw.sensor.resolution[0],
            raw.sensor.resolution[1],
            raw.sensor.sigma,
            raw.sensor.max_range,
        )?,
        rho: raw.planner.rho,
        r: raw.planner.r,
        psi: raw.planner.psi,
        tau: raw.planner.tau,
        max_views: raw.planner.max_views,
        adjust_step_deg: raw.planner.adjust_step_deg,
        normal_k: raw.planner.normal_k,
        seed_position: raw.planner.seed_position.map(|p| Vec3::new(p[0], p[1], p[2])),
        seed_target: raw
            .planner
            .seed_target
            .map(|p| Vec3::new(p[0], p[1], p[2]))
            .unwrap_or_else(Vec3::zeros),
        r_d: raw.metrics.r_d,
        gt_density: raw.metrics.gt_density,
    };
    cfg.validate()?;
    Ok(cfg)
}

impl ExperimentConfig {
    /// Structural checks cheap enough to run before touching the scene:
    /// counts, mode list, and referenced-file existence. Numeric parameter
    /// validity is enforced by the module configs built in `plan_for`.
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.trials < 1 {
            return Err(HarnessError::BadConfig("trials must be >= 1".into()));
        }
        if self.modes.is_empty() {
            return Err(HarnessError::BadConfig("modes must not be empty".into()));
        }
        let unique: BTreeSet<&'static str> = self.modes.iter().map(|&m| mode_name(m)).collect();
        if unique.len() != self.modes.len() {
            return Err(HarnessError::BadConfig("modes must be unique".into()));
        }
        if !self.scene_path.is_file() {
            return Err(HarnessError::BadConfig(format!(
                "scene file {} does not exist",
                self.scene_path.display()
            )));
        }
        if let Some(e) = self.scene_extent {
            if !(e > 0.0 && e.is_finite()) {
                return Err(HarnessError::BadConfig(format!(
                    "scene_extent must be positive, got {e}"
                )));
            }
        }
        Ok(())
    }

    /// Standoff distance for this sensor and density.
    pub fn view_distance(&self) -> Result<f64, HarnessError> {
        Ok(planner::view_distance(&self.sensor, self.rho)?)
    }

    fn metrics_config(&self) -> Result<MetricsConfig, HarnessError> {
        Ok(MetricsConfig::new(self.r_d, self.gt_density.unwrap_or(self.rho))?)
    }

    /// Planner config for one mode, seeded above the scene when no explicit
    /// seed pose is given.
    fn plan_for(&self, mode: Mode, mesh: &SceneMesh) -> Result<PlannerConfig, HarnessError> {
        let d = self.view_distance()?;
        let position = match self.seed_position {
            Some(p) => p,
            None => {
                let (_, hi) = mesh.aabb();
                Vec3::new(0.0, 0.0, hi.z + d)
            }
        };
        let seed_view = View::looking_at(position, self.seed_target)
            .map_err(|e| HarnessError::BadConfig(format!("seed pose: {e}")))?;
        let cfg = PlannerConfig {
            mode,
            store: StoreConfig::from_density(self.rho, self.r, d)
                .map_err(PlannerError::from)?,
            occlusion: OcclusionConfig::new(self.psi, self.r).map_err(PlannerError::from)?,
            proposal: ProposalConfig::new(d, self.psi, self.normal_k)
                .map_err(PlannerError::from)?,
            gate: EdgeGate::from_fov_deg(self.sensor.theta_x_deg, self.sensor.theta_y_deg, d)
                .map_err(PlannerError::from)?,
            tau: self.tau,
            max_views: self.max_views,
            adjust_step_deg: self.adjust_step_deg,
            seed_view,
        };
        cfg.validate().map_err(HarnessError::from)?;
        Ok(cfg)
    }
}

/// Deterministic per-capture noise seed: a splitmix64 finalizer over the
/// trial seed and step index, so every capture in every trial draws an
/// independent noise stream.
pub fn capture_seed(trial_seed: u64, step: u64) -> u64 {
    let mut z = trial_seed ^ step.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy)]
pub struct TrialResult {
    pub mode: Mode,
    pub seed: i64,
    pub views: usize,
    pub coverage: f64,
    pub distance_m: f64,
    pub time_s: f64,
}

#[derive(Debug, Clone)]
pub struct AggregateRow {
    pub mode: String,
    pub trials: usize,
    pub views_mean: f64,
    pub views_std: f64,
    pub coverage_mean: f64,
    pub coverage_std: f64,
    pub distance_mean: f64,
    pub distance_std: f64,
    pub time_mean: f64,
    pub time_std: f64,
}

#[derive(Debug)]
pub struct ExperimentOutputs {
    pub output_dir: PathBuf,
    pub results_csv: PathBuf,
    pub aggregate_csv: PathBuf,
    pub step_csvs: Vec<PathBuf>,
    pub aggregates: Vec<AggregateRow>,
}

struct StepRow {
    step: usize,
    views_total: usize,
    frontiers: usize,
    coverage_est: f64,
    cumulative_distance_m: f64,
    step_time_s: f64,
}

fn fmt6(x: f64) -> String {
    format!("{x:.6}")
}

fn write_file(path: &Path, text: &str) -> Result<(), HarnessError> {
    fs::write(path, text)
        .map_err(|source| HarnessError::OutputIo { path: path.to_path_buf(), source })
}

/// Run every (mode, trial) combination and write all CSV outputs. Trial i
/// uses seed `seed_base + i` for its capture noise; the ground-truth sample
/// set is drawn once per experiment from `seed_base` so every run is scored
/// against identical samples.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutputs, HarnessError> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.output_dir)
        .map_err(|source| HarnessError::OutputIo { path: cfg.output_dir.clone(), source })?;

    let mut mesh = sensor::load_mesh(&cfg.scene_path)?;
    if let Some(extent) = cfg.scene_extent {
        mesh = mesh.normalized_to_extent(extent);
    }
    let metrics_cfg = cfg.metrics_config()?;
    let gt_count = metrics_cfg.gt_sample_count(mesh.total_area());
    let gt = metrics::sample_ground_truth(&mesh, gt_count, cfg.seed_base as u64)?;

    let scene_name = cfg
        .scene_path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("scene")
        .to_string();

    let mut results: Vec<TrialResult> = Vec::new();
    let mut step_csvs = Vec::new();
    for &mode in &cfg.modes {
        let plan = cfg.plan_for(mode, &mesh)?;
        for i in 0..cfg.trials {
            let seed = cfg.seed_base + i as i64;
            let (result, rows) = run_trial(cfg, &plan, &mesh, &gt, mode, seed)?;
            let path = cfg
                .output_dir
                .join(format!("{}_trial{:03}_steps.csv", mode_name(mode), i));
            write_step_csv(&path, &rows)?;
            step_csvs.push(path);
            results.push(result);
        }
    }

    let results_csv = cfg.output_dir.join("results.csv");
    write_results_csv(&results_csv, &scene_name, &results)?;

    // Aggregates are computed from the results file as written, so an
    // external recomputation from the same rows matches bit for bit.
    let parsed = read_results_csv(&results_csv)?;
    let aggregates = aggregate(&parsed);
    let aggregate_csv = cfg.output_dir.join("aggregate.csv");
    write_aggregate_csv(&aggregate_csv, &aggregates)?;

    Ok(ExperimentOutputs {
        output_dir: cfg.output_dir.clone(),
        results_csv,
        aggregate_csv,
        step_csvs,
        aggregates,
    })
}

fn run_trial(
    cfg: &ExperimentConfig,
    plan: &PlannerConfig,
    mesh: &SceneMesh,
    gt: &[Vec3],
    mode: Mode,
    seed: i64,
) -> Result<(TrialResult, Vec<StepRow>), HarnessError> {
    let mut planner = Planner::new(plan.clone())?;
    let mut tracker = CoverageTracker::new(gt, cfg.r_d)?;
    let mut rows: Vec<StepRow> = Vec::new();
    let mut cumulative = 0.0f64;
    let mut total_time = 0.0f64;
    let mut step = 0usize;
    loop {
        step += 1;
        let current = planner.state().current_view;
        let m = sensor::capture(mesh, &current, &cfg.sensor, capture_seed(seed as u64, step as u64));
        let before = planner.store().len() as u32;
        let t0 = Instant::now();
        let outcome = planner.step(&m)?;
        let dt = if cfg.record_timing { t0.elapsed().as_secs_f64() } else { 0.0 };
        total_time += dt;

        let after = planner.store().len() as u32;
        let fresh: Vec<Vec3> = (before..after).map(|i| planner.store().position(i)).collect();
        tracker.observe(&fresh);

        if let StepResult::Next(v) = outcome {
            cumulative += (v.position - current.position).norm();
        }
        rows.push(StepRow {
            step,
            views_total: planner.state().view_history.len(),
            frontiers: planner.live_frontiers().len(),
            coverage_est: tracker.coverage(),
            cumulative_distance_m: cumulative,
            step_time_s: dt,
        });
        if outcome == StepResult::Complete {
            break;
        }
    }
    let result = TrialResult {
        mode,
        seed,
        views: planner.state().view_history.len(),
        coverage: tracker.coverage(),
        distance_m: cumulative,
        time_s: total_time,
    };
    Ok((result, rows))
}

fn write_step_csv(path: &Path, rows: &[StepRow]) -> Result<(), HarnessError> {
    let mut out = String::from(
        "step,views_total,frontiers,coverage_est,cumulative_distance_m,step_time_s\n",
    );
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.step,
            r.views_total,
            r.frontiers,
            fmt6(r.coverage_est),
            fmt6(r.cumulative_distance_m),
            fmt6(r.step_time_s)
        )
        .expect("string write");
    }
    write_file(path, &out)
}

fn write_results_csv(
    path: &Path,
    scene: &str,
    results: &[TrialResult],
) -> Result<(), HarnessError> {
    let mut out = String::from("scene,mode,seed,views,coverage,distance_m,time_s\n");
    for r in results {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            scene,
            mode_name(r.mode),
            r.seed,
            r.views,
            fmt6(r.coverage),
            fmt6(r.distance_m),
            fmt6(r.time_s)
        )
        .expect("string write");
    }
    write_file(path, &out)
}

/// One parsed row of results.csv, as written (post-rounding).
#[derive(Debug, Clone)]
pub struct ResultRow {
    pub scene: String,
    pub mode: String,
    pub seed: i64,
    pub views: f64,
    pub coverage: f64,
    pub distance_m: f64,
    pub time_s: f64,
}

pub fn read_results_csv(path: &Path) -> Result<Vec<ResultRow>, HarnessError> {
    let mut rdr = csv::Reader::from_path(path)
        .map_err(|source| HarnessError::Csv { path: path.to_path_buf(), source })?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|source| HarnessError::Csv { path: path.to_path_buf(), source })?;
        let field = |i: usize| rec.get(i).unwrap_or("").to_string();
        let num = |i: usize| -> Result<f64, HarnessError> {
            rec.get(i)
                .unwrap_or("")
                .parse()
                .map_err(|e| HarnessError::BadConfig(format!("bad number in {}: {e}", path.display())))
        };
        rows.push(ResultRow {
            scene: field(0),
            mode: field(1),
            seed: num(2)? as i64,
            views: num(3)?,
            coverage: num(4)?,
            distance_m: num(5)?,
            time_s: num(6)?,
        });
    }
    Ok(rows)
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Per-mode mean and sample standard deviation over the parsed result rows,
/// in first-appearance mode order.
pub fn aggregate(rows: &[ResultRow]) -> Vec<AggregateRow> {
    let mut order: Vec<String> = Vec::new();
    for r in rows {
        if !order.contains(&r.mode) {
            order.push(r.mode.clone());
        }
    }
    order
        .into_iter()
        .map(|mode| {
            let of = |f: fn(&ResultRow) -> f64| -> Vec<f64> {
                rows.iter().filter(|r| r.mode == mode).map(f).collect()
            };
            let views = of(|r| r.views);
            let coverage = of(|r| r.coverage);
            let distance = of(|r| r.distance_m);
            let time = of(|r| r.time_s);
            let (views_mean, views_std) = mean_std(&views);
            let (coverage_mean, coverage_std) = mean_std(&coverage);
            let (distance_mean, distance_std) = mean_std(&distance);
            let (time_mean, time_std) = mean_std(&time);
            AggregateRow {
                mode,
                trials: views.len(),
                views_mean,
                views_std,
                coverage_mean,
                coverage_std,
                distance_mean,
                distance_std,
                time_mean,
                time_std,
            }
        })
        .collect()
}

fn write_aggregate_csv(path: &Path, rows: &[AggregateRow]) -> Result<(), HarnessError> {
    let mut out = String::from(
        "mode,trials,views_mean,views_std,coverage_mean,coverage_std,distance_m_mean,distance_m_std,time_s_mean,time_s_std\n",
    );
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.mode,
            r.trials,
            fmt6(r.views_mean),
            fmt6(r.views_std),
            fmt6(r.coverage_mean),
            fmt6(r.coverage_std),
            fmt6(r.distance_mean),
            fmt6(r.distance_std),
            fmt6(r.time_mean),
            fmt6(r.time_std)
        )
        .expect("string write");
    }
    write_file(path, &out)
}

pub fn read_aggregate_csv(path: &Path) -> Result<Vec<AggregateRow>, HarnessError> {
    let mut rdr = csv::Reader::from_path(path)
        .map_err(|source| HarnessError::Csv { path: path.to_path_buf(), source })?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|source| HarnessError::Csv { path: path.to_path_buf(), source })?;
        let num = |i: usize| -> Result<f64, HarnessError> {
            rec.get(i)
                .unwrap_or("")
                .parse()
                .map_err(|e| HarnessError::BadConfig(format!("bad number in {}: {e}", path.display())))
        };
        rows.push(AggregateRow {
            mode: rec.get(0).unwrap_or("").to_string(),
            trials: num(1)? as usize,
            views_mean: num(2)?,
            views_std: num(3)?,
            coverage_mean: num(4)?,
            coverage_std: num(5)?,
            distance_mean: num(6)?,
            distance_std: num(7)?,
            time_mean: num(8)?,
            time_std: num(9)?,
        });
    }
    Ok(rows)
}
