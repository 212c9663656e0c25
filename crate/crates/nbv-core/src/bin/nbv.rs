//! Experiment runner CLI: run seeded planning trials from a TOML config,
//! render plots from a results directory, validate configs, and generate
//! the built-in benchmark scene.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nbv_core::harness;
use nbv_core::sensor::{teapot_mesh, write_obj};

#[derive(Parser)]
#[command(name = "nbv", version, about = "Density-guided next-best-view experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (mode, trial) combination from a config and write CSVs.
    Run {
        /// Experiment config (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Override the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the config's trial count.
        #[arg(long)]
        trials_override: Option<usize>,
        /// Run a single mode: "reactive" or "proactive".
        #[arg(long)]
        mode_override: Option<String>,
        /// Render the standard plots once the run finishes.
        #[arg(long)]
        plots: bool,
    },
    /// Render the three standard SVG plots from an existing results directory.
    Plot {
        /// Directory holding aggregate.csv and the per-step CSVs.
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse and validate a config, then report the derived run geometry.
    ValidateConfig {
        /// Experiment config (TOML).
        #[arg(long)]
        config: PathBuf,
    },
    /// Write the built-in benchmark scene as an OBJ file.
    GenScene {
        /// Output OBJ path.
        #[arg(long)]
        out: PathBuf,
        /// Patch subdivision level; triangle count grows with its square.
        #[arg(long, default_value_t = 16)]
        resolution: usize,
        /// Longest-axis extent of the scene in meters.
        #[arg(long, default_value_t = 1.0)]
        extent: f64,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.command {
        Command::Run { config, out, trials_override, mode_override, plots } => {
            let mut cfg = harness::load_config(&config)?;
            if let Some(dir) = out {
                cfg.output_dir = dir;
            }
            if let Some(trials) = trials_override {
                cfg.trials = trials;
            }
            if let Some(mode) = mode_override {
                cfg.modes = vec![harness::parse_mode(&mode)?];
            }
            cfg.validate()?;
            let outputs = harness::run_experiment(&cfg)?;
            for row in &outputs.aggregates {
                println!(
                    "{}: trials={} views={:.2}±{:.2} coverage={:.2}%±{:.2} \
                     distance={:.3}m±{:.3} time={:.2}s±{:.2}",
                    row.mode,
                    row.trials,
                    row.views_mean,
                    row.views_std,
                    row.coverage_mean * 100.0,
                    row.coverage_std * 100.0,
                    row.distance_mean,
                    row.distance_std,
                    row.time_mean,
                    row.time_std
                );
            }
            if plots {
                for p in harness::emit_plots(&outputs.output_dir)? {
                    println!("plot: {}", p.display());
                }
            }
            println!("results in {}", outputs.output_dir.display());
        }
        Command::Plot { out } => {
            for p in harness::emit_plots(&out)? {
                println!("plot: {}", p.display());
            }
        }
        Command::ValidateConfig { config } => {
            let cfg = harness::load_config(&config)?;
            let mesh = nbv_core::sensor::load_mesh(&cfg.scene_path)?;
            let modes: Vec<&str> =
                cfg.modes.iter().map(|&m| harness::mode_name(m)).collect();
            println!(
                "config ok: modes=[{}] trials={} scene={} ({} triangles, {:.4} m^2) \
                 standoff d={:.4} m",
                modes.join(", "),
                cfg.trials,
                cfg.scene_path.display(),
                mesh.triangle_count(),
                mesh.total_area(),
                cfg.view_distance()?
            );
        }
        Command::GenScene { out, resolution, extent } => {
            let mesh = teapot_mesh(resolution, extent);
            write_obj(&mesh, &out)?;
            println!(
                "wrote {} ({} vertices, {} triangles, extent {extent} m)",
                out.display(),
                mesh.vertex_count(),
                mesh.triangle_count()
            );
        }
    }
    Ok(())
}
