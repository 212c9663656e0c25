//! Static SVG plots rendered without a plotting dependency: a coverage
//! versus views curve per mode, plus bar charts of planning time and travel
//! distance, each with one-standard-deviation error bars.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{mean_std, read_aggregate_csv, write_file, AggregateRow, HarnessError};

const W: f64 = 640.0;
const H: f64 = 420.0;
const ML: f64 = 72.0;
const MR: f64 = 24.0;
const MT: f64 = 44.0;
const MB: f64 = 58.0;

fn color(mode: &str) -> &'static str {
    match mode {
        "reactive" => "#d95f02",
        "proactive" => "#1b9e77",
        _ => "#666666",
    }
}

/// Render the three standard figures from the CSVs in `dir`:
/// coverage_vs_views.svg (coverage axis starts at 50%), time_bars.svg, and
/// distance_bars.svg.
pub fn emit_plots(dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    let aggregate = read_aggregate_csv(&dir.join("aggregate.csv"))?;
    if aggregate.is_empty() {
        return Err(HarnessError::BadConfig(format!(
            "aggregate.csv in {} has no data rows",
            dir.display()
        )));
    }
    Ok(vec![
        plot_coverage(dir, &aggregate)?,
        plot_bars(dir, &aggregate, "time_bars.svg", "Planning time per run", "time (s)", |r| {
            (r.time_mean, r.time_std)
        })?,
        plot_bars(
            dir,
            &aggregate,
            "distance_bars.svg",
            "Distance travelled per run",
            "distance (m)",
            |r| (r.distance_mean, r.distance_std),
        )?,
    ])
}

// Linear data-to-pixel mapping; y scales run top-down so px_lo > px_hi.
struct Scale {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Scale {
    fn x(lo: f64, hi: f64) -> Self {
        Self::new(lo, hi, ML, W - MR)
    }
    fn y(lo: f64, hi: f64) -> Self {
        Self::new(lo, hi, H - MB, MT)
    }
    fn new(lo: f64, hi: f64, px_lo: f64, px_hi: f64) -> Self {
        let hi = if (hi - lo).abs() < 1e-12 { lo + 1.0 } else { hi };
        Self { lo, hi, px_lo, px_hi }
    }
    fn map(&self, v: f64) -> f64 {
        self.px_lo + (v - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }
}

fn svg_open(title: &str) -> String {
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    );
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n");
    let _ = writeln!(
        s,
        "<text x=\"{:.1}\" y=\"26\" font-family=\"sans-serif\" font-size=\"15\" \
         text-anchor=\"middle\" fill=\"#222222\">{title}</text>",
        W / 2.0
    );
    s
}

fn draw_axes(
    s: &mut String,
    x: &Scale,
    y: &Scale,
    x_label: &str,
    y_label: &str,
    fmt_x: &dyn Fn(f64) -> String,
    fmt_y: &dyn Fn(f64) -> String,
) {
    let _ = writeln!(
        s,
        "<line x1=\"{ML}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"#222222\"/>",
        H - MB,
        W - MR
    );
    let _ = writeln!(
        s,
        "<line x1=\"{ML}\" y1=\"{MT}\" x2=\"{ML}\" y2=\"{}\" stroke=\"#222222\"/>",
        H - MB
    );
    for i in 0..=5 {
        let t = i as f64 / 5.0;
        let xv = x.lo + t * (x.hi - x.lo);
        let yv = y.lo + t * (y.hi - y.lo);
        let px = x.map(xv);
        let py = y.map(yv);
        let _ = writeln!(
            s,
            "<line x1=\"{px:.1}\" y1=\"{0}\" x2=\"{px:.1}\" y2=\"{1}\" stroke=\"#222222\"/>",
            H - MB,
            H - MB + 5.0
        );
        let _ = writeln!(
            s,
            "<text x=\"{px:.1}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"middle\" fill=\"#222222\">{}</text>",
            H - MB + 18.0,
            fmt_x(xv)
        );
        let _ = writeln!(
            s,
            "<line x1=\"{0}\" y1=\"{py:.1}\" x2=\"{ML}\" y2=\"{py:.1}\" stroke=\"#222222\"/>",
            ML - 5.0
        );
        let _ = writeln!(
            s,
            "<text x=\"{0}\" y=\"{1:.1}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"end\" fill=\"#222222\">{2}</text>",
            ML - 8.0,
            py + 4.0,
            fmt_y(yv)
        );
        let _ = writeln!(
            s,
            "<line x1=\"{ML}\" y1=\"{py:.1}\" x2=\"{0}\" y2=\"{py:.1}\" \
             stroke=\"#dddddd\" stroke-width=\"0.5\"/>",
            W - MR
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{:.1}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" \
         text-anchor=\"middle\" fill=\"#222222\">{x_label}</text>",
        (ML + W - MR) / 2.0,
        H - 16.0
    );
    let _ = writeln!(
        s,
        "<text transform=\"rotate(-90)\" x=\"{:.1}\" y=\"18\" font-family=\"sans-serif\" \
         font-size=\"12\" text-anchor=\"middle\" fill=\"#222222\">{y_label}</text>",
        -(MT + H - MB) / 2.0
    );
}

fn legend(s: &mut String, modes: &[&str]) {
    for (i, mode) in modes.iter().enumerate() {
        let ly = MT + 14.0 + 18.0 * i as f64;
        let _ = writeln!(
            s,
            "<line x1=\"{0}\" y1=\"{ly:.1}\" x2=\"{1}\" y2=\"{ly:.1}\" \
             stroke=\"{2}\" stroke-width=\"2.5\"/>",
            ML + 12.0,
            ML + 34.0,
            color(mode)
        );
        let _ = writeln!(
            s,
            "<text x=\"{0}\" y=\"{1:.1}\" font-family=\"sans-serif\" font-size=\"12\" \
             fill=\"#222222\">{mode}</text>",
            ML + 40.0,
            ly + 4.0
        );
    }
}

fn error_bar(s: &mut String, px: f64, y: &Scale, mean: f64, std: f64, stroke: &str) {
    if std <= 0.0 {
        return;
    }
    let lo = y.map((mean - std).max(y.lo.min(y.hi)));
    let hi = y.map((mean + std).min(y.lo.max(y.hi)));
    let _ = writeln!(
        s,
        "<line x1=\"{px:.1}\" y1=\"{lo:.1}\" x2=\"{px:.1}\" y2=\"{hi:.1}\" stroke=\"{stroke}\"/>"
    );
    for py in [lo, hi] {
        let _ = writeln!(
            s,
            "<line x1=\"{0:.1}\" y1=\"{py:.1}\" x2=\"{1:.1}\" y2=\"{py:.1}\" stroke=\"{stroke}\"/>",
            px - 4.0,
            px + 4.0
        );
    }
}

struct StepPoint {
    views_total: f64,
    coverage: f64,
}

fn read_step_csv(path: &Path) -> Result<Vec<StepPoint>, HarnessError> {
    let mut rdr = csv::Reader::from_path(path)
        .map_err(|source| HarnessError::Csv { path: path.to_path_buf(), source })?;
    let headers = rdr
        .headers()
        .map_err(|source| HarnessError::Csv { path: path.to_path_buf(), source })?
        .clone();
    let col = |name: &str| -> Result<usize, HarnessError> {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            HarnessError::BadConfig(format!("{} is missing column {name}", path.display()))
        })
    };
    let c_views = col("views_total")?;
    let c_cov = col("coverage_est")?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|source| HarnessError::Csv { path: path.to_path_buf(), source })?;
        let num = |i: usize| -> Result<f64, HarnessError> {
            rec.get(i).unwrap_or("").parse().map_err(|e| {
                HarnessError::BadConfig(format!("bad number in {}: {e}", path.display()))
            })
        };
        out.push(StepPoint { views_total: num(c_views)?, coverage: num(c_cov)? });
    }
    Ok(out)
}

fn mode_step_files(dir: &Path, mode: &str) -> Result<Vec<PathBuf>, HarnessError> {
    let prefix = format!("{mode}_trial");
    let mut files = Vec::new();
    let entries = fs::read_dir(dir)
        .map_err(|source| HarnessError::OutputIo { path: dir.to_path_buf(), source })?;
    for entry in entries {
        let entry =
            entry.map_err(|source| HarnessError::OutputIo { path: dir.to_path_buf(), source })?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.starts_with(&prefix) && name.ends_with("_steps.csv") {
            files.push(entry.path());
        }
    }
    files.sort();
    Ok(files)
}

struct CurvePoint {
    x: f64,
    y: f64,
    y_std: f64,
}

// Mean coverage across the trials that reached each step index; trials end
// at different steps so later points average fewer runs.
fn mode_curve(trials: &[Vec<StepPoint>]) -> Vec<CurvePoint> {
    let max_len = trials.iter().map(|t| t.len()).max().unwrap_or(0);
    (0..max_len)
        .map(|s| {
            let xs: Vec<f64> =
                trials.iter().filter_map(|t| t.get(s)).map(|p| p.views_total).collect();
            let ys: Vec<f64> =
                trials.iter().filter_map(|t| t.get(s)).map(|p| p.coverage).collect();
            let (x, _) = mean_std(&xs);
            let (y, y_std) = mean_std(&ys);
            CurvePoint { x, y, y_std }
        })
        .collect()
}

fn plot_coverage(dir: &Path, aggregate: &[AggregateRow]) -> Result<PathBuf, HarnessError> {
    let mut curves: Vec<(String, Vec<CurvePoint>)> = Vec::new();
    for row in aggregate {
        let files = mode_step_files(dir, &row.mode)?;
        let trials =
            files.iter().map(|f| read_step_csv(f)).collect::<Result<Vec<_>, _>>()?;
        let curve = mode_curve(&trials);
        if !curve.is_empty() {
            curves.push((row.mode.clone(), curve));
        }
    }
    let x_hi = curves
        .iter()
        .flat_map(|(_, c)| c.iter().map(|p| p.x))
        .fold(1.0f64, f64::max);
    let x = Scale::x(0.0, x_hi);
    // Fixed floor at 50% coverage; earlier points are clamped to the floor.
    let y = Scale::y(0.5, 1.0);

    let mut s = svg_open("Surface coverage vs views");
    draw_axes(
        &mut s,
        &x,
        &y,
        "views",
        "coverage",
        &|v| format!("{v:.0}"),
        &|v| format!("{:.0}%", v * 100.0),
    );
    for (mode, curve) in &curves {
        let stroke = color(mode);
        let pts: String = curve
            .iter()
            .map(|p| format!("{:.1},{:.1} ", x.map(p.x), y.map(p.y.max(0.5))))
            .collect();
        let _ = writeln!(
            s,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"2\"/>",
            pts.trim_end()
        );
        if curve.len() == 1 {
            let _ = writeln!(
                s,
                "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"{stroke}\"/>",
                x.map(curve[0].x),
                y.map(curve[0].y.max(0.5))
            );
        }
        let stride = (curve.len() / 12).max(1);
        for (i, p) in curve.iter().enumerate() {
            if i % stride == 0 || i + 1 == curve.len() {
                error_bar(&mut s, x.map(p.x), &y, p.y, p.y_std, stroke);
            }
        }
    }
    let modes: Vec<&str> = curves.iter().map(|(m, _)| m.as_str()).collect();
    legend(&mut s, &modes);
    s.push_str("</svg>\n");
    let path = dir.join("coverage_vs_views.svg");
    write_file(&path, &s)?;
    Ok(path)
}

fn plot_bars(
    dir: &Path,
    aggregate: &[AggregateRow],
    file: &str,
    title: &str,
    y_label: &str,
    value: fn(&AggregateRow) -> (f64, f64),
) -> Result<PathBuf, HarnessError> {
    let y_hi = aggregate
        .iter()
        .map(|r| {
            let (m, sd) = value(r);
            m + sd
        })
        .fold(0.0f64, f64::max);
    let y = Scale::y(0.0, if y_hi > 0.0 { y_hi * 1.15 } else { 1.0 });
    let x = Scale::x(0.0, aggregate.len() as f64);

    let mut s = svg_open(title);
    draw_axes(&mut s, &x, &y, "", y_label, &|_| String::new(), &|v| format!("{v:.2}"));
    let slot = (W - ML - MR) / aggregate.len() as f64;
    for (i, row) in aggregate.iter().enumerate() {
        let (mean, std) = value(row);
        let cx = ML + slot * (i as f64 + 0.5);
        let bw = slot * 0.5;
        let top = y.map(mean);
        let _ = writeln!(
            s,
            "<rect x=\"{:.1}\" y=\"{top:.1}\" width=\"{bw:.1}\" height=\"{:.1}\" \
             fill=\"{}\" fill-opacity=\"0.85\"/>",
            cx - bw / 2.0,
            (H - MB - top).max(0.0),
            color(&row.mode)
        );
        error_bar(&mut s, cx, &y, mean, std, "#333333");
        let _ = writeln!(
            s,
            "<text x=\"{cx:.1}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" \
             text-anchor=\"middle\" fill=\"#222222\">{}</text>",
            H - MB + 18.0,
            row.mode
        );
    }
    s.push_str("</svg>\n");
    let path = dir.join(file);
    write_file(&path, &s)?;
    Ok(path)
}
