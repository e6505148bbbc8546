//! Static SVG plots with CSV sidecars.
//!
//! Every `emit_plot` call writes `<stem>.svg` (standalone, no scripts) and
//! `<stem>.csv` holding exactly the plotted data, so plots can be
//! regenerated or re-styled elsewhere. Output bytes are deterministic.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{AnalysisError, ImportanceReport};
use crate::bo::pareto_front;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

const SERIES_COLORS: [&str; 2] = ["#1f77b4", "#ff7f0e"];
const FRONT_COLOR: &str = "#d62728";

/// A renderable data series.
#[derive(Debug, Clone, PartialEq)]
pub enum PlotSeries {
    /// Per-trial values with a running-best line; `minimize` selects
    /// whether best means lowest (losses) or highest (hypervolume).
    History { title: String, ylabel: String, values: Vec<f64>, minimize: bool },
    /// Objective scatter; non-dominated points are marked distinctly.
    Pareto { title: String, xlabel: String, ylabel: String, points: Vec<[f64; 2]> },
    /// Per-parameter importance bars, grouped when several reports are
    /// overlaid (e.g. energy vs time).
    Importance { title: String, reports: Vec<ImportanceReport> },
    /// Gridded surface values (posterior mean over two parameters);
    /// `values` is row-major over `ys` then `xs`.
    Contour { title: String, xlabel: String, ylabel: String, xs: Vec<f64>, ys: Vec<f64>, values: Vec<f64> },
}

impl PlotSeries {
    fn validate(&self) -> Result<(), AnalysisError> {
        let finite = |vs: &[f64]| vs.iter().all(|v| v.is_finite());
        match self {
            PlotSeries::History { values, .. } => {
                if values.is_empty() {
                    return Err(AnalysisError::EmptySeries);
                }
                if !finite(values) {
                    return Err(AnalysisError::NonFiniteData);
                }
            }
            PlotSeries::Pareto { points, .. } => {
                if points.is_empty() {
                    return Err(AnalysisError::EmptySeries);
                }
                if !points.iter().all(|p| p[0].is_finite() && p[1].is_finite()) {
                    return Err(AnalysisError::NonFiniteData);
                }
            }
            PlotSeries::Importance { reports, .. } => {
                if reports.is_empty() || reports.iter().any(|r| r.weights.is_empty()) {
                    return Err(AnalysisError::EmptySeries);
                }
                if !reports.iter().all(|r| finite(&r.weights.iter().map(|(_, w)| *w).collect::<Vec<_>>())) {
                    return Err(AnalysisError::NonFiniteData);
                }
            }
            PlotSeries::Contour { xs, ys, values, .. } => {
                if xs.is_empty() || ys.is_empty() || values.len() != xs.len() * ys.len() {
                    return Err(AnalysisError::EmptySeries);
                }
                if !finite(xs) || !finite(ys) || !finite(values) {
                    return Err(AnalysisError::NonFiniteData);
                }
            }
        }
        Ok(())
    }
}

struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    fn from_values(values: impl Iterator<Item = f64>) -> Axis {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if lo == hi {
            lo -= 0.5;
            hi += 0.5;
        }
        let pad = 0.05 * (hi - lo);
        Axis { lo: lo - pad, hi: hi + pad }
    }

    fn to_x(&self, v: f64) -> f64 {
        MARGIN_LEFT + (v - self.lo) / (self.hi - self.lo) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn to_y(&self, v: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM
            - (v - self.lo) / (self.hi - self.lo) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }

    fn ticks(&self) -> Vec<f64> {
        (0..=4).map(|i| self.lo + (self.hi - self.lo) * i as f64 / 4.0).collect()
    }
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if !(1e-3..1e4).contains(&a) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

struct Svg {
    body: String,
}

impl Svg {
    fn new(title: &str) -> Svg {
        let mut body = String::new();
        let _ = write!(
            body,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = write!(body, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = write!(
            body,
            r#"<text x="{:.2}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            escape(title)
        );
        Svg { body }
    }

    fn frame_and_ticks(&mut self, x_axis: &Axis, y_axis: &Axis, xlabel: &str, ylabel: &str) {
        let _ = write!(
            self.body,
            r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
            WIDTH - MARGIN_LEFT - MARGIN_RIGHT,
            HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
        );
        for t in x_axis.ticks() {
            let x = x_axis.to_x(t);
            let _ = write!(
                self.body,
                r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
                HEIGHT - MARGIN_BOTTOM,
                HEIGHT - MARGIN_BOTTOM + 5.0,
                HEIGHT - MARGIN_BOTTOM + 18.0,
                fmt_tick(t)
            );
        }
        for t in y_axis.ticks() {
            let y = y_axis.to_y(t);
            let _ = write!(
                self.body,
                r#"<line x1="{:.2}" y1="{y:.2}" x2="{MARGIN_LEFT}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
                MARGIN_LEFT - 5.0,
                MARGIN_LEFT - 8.0,
                y + 4.0,
                fmt_tick(t)
            );
        }
        let _ = write!(
            self.body,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
            (MARGIN_LEFT + WIDTH - MARGIN_RIGHT) / 2.0,
            HEIGHT - 12.0,
            escape(xlabel)
        );
        let _ = write!(
            self.body,
            r#"<text x="16" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
            (MARGIN_TOP + HEIGHT - MARGIN_BOTTOM) / 2.0,
            (MARGIN_TOP + HEIGHT - MARGIN_BOTTOM) / 2.0,
            escape(ylabel)
        );
    }

    fn circle(&mut self, x: f64, y: f64, r: f64, fill: &str) {
        let _ = write!(self.body, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r}" fill="{fill}"/>"#);
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        let _ = write!(
            self.body,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="{fill}"/>"#
        );
    }

    fn polyline(&mut self, points: &[(f64, f64)], stroke: &str) {
        let coords: Vec<String> =
            points.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = write!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="1.5"/>"#,
            coords.join(" ")
        );
    }

    fn text(&mut self, x: f64, y: f64, size: u32, anchor: &str, content: &str, extra: &str) {
        let _ = write!(
            self.body,
            r#"<text x="{x:.2}" y="{y:.2}" font-family="sans-serif" font-size="{size}" text-anchor="{anchor}"{extra}>{}</text>"#,
            escape(content)
        );
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn grayscale(t: f64) -> String {
    // Dark = low value, matching "darker is better" for losses.
    let level = (40.0 + 200.0 * t.clamp(0.0, 1.0)) as u8;
    format!("rgb({level},{level},{level})")
}

fn render(series: &PlotSeries) -> (String, String) {
    match series {
        PlotSeries::History { title, ylabel, values, minimize } => {
            let mut csv = String::from("trial,value,best_so_far\n");
            let mut best = if *minimize { f64::INFINITY } else { f64::NEG_INFINITY };
            let bests: Vec<f64> = values
                .iter()
                .map(|&l| {
                    best = if *minimize { best.min(l) } else { best.max(l) };
                    best
                })
                .collect();
            for (i, (&l, &b)) in values.iter().zip(&bests).enumerate() {
                let _ = writeln!(csv, "{i},{l},{b}");
            }
            let x_axis = Axis::from_values((0..values.len()).map(|i| i as f64));
            let y_axis = Axis::from_values(values.iter().copied());
            let mut svg = Svg::new(title);
            svg.frame_and_ticks(&x_axis, &y_axis, "trial", ylabel);
            let line: Vec<(f64, f64)> = bests
                .iter()
                .enumerate()
                .map(|(i, &b)| (x_axis.to_x(i as f64), y_axis.to_y(b)))
                .collect();
            svg.polyline(&line, FRONT_COLOR);
            for (i, &l) in values.iter().enumerate() {
                svg.circle(x_axis.to_x(i as f64), y_axis.to_y(l), 3.0, SERIES_COLORS[0]);
            }
            (svg.finish(), csv)
        }
        PlotSeries::Pareto { title, xlabel, ylabel, points } => {
            let front = pareto_front(points);
            let on_front: Vec<bool> = {
                let mut mask = vec![false; points.len()];
                for m in &front.members {
                    mask[m.trial_index] = true;
                }
                mask
            };
            let mut csv = String::from("x,y,on_front\n");
            for (p, &f) in points.iter().zip(&on_front) {
                let _ = writeln!(csv, "{},{},{}", p[0], p[1], u8::from(f));
            }
            let x_axis = Axis::from_values(points.iter().map(|p| p[0]));
            let y_axis = Axis::from_values(points.iter().map(|p| p[1]));
            let mut svg = Svg::new(title);
            svg.frame_and_ticks(&x_axis, &y_axis, xlabel, ylabel);
            for (p, &f) in points.iter().zip(&on_front) {
                let (r, color) = if f { (4.5, FRONT_COLOR) } else { (3.0, SERIES_COLORS[0]) };
                svg.circle(x_axis.to_x(p[0]), y_axis.to_y(p[1]), r, color);
            }
            (svg.finish(), csv)
        }
        PlotSeries::Importance { title, reports } => {
            let mut csv = String::from("parameter,objective,weight\n");
            for r in reports {
                for (name, w) in &r.weights {
                    let _ = writeln!(csv, "{name},{},{w}", r.objective_label);
                }
            }
            let params: Vec<&str> = reports[0].weights.iter().map(|(n, _)| n.as_str()).collect();
            let max_w = reports
                .iter()
                .flat_map(|r| r.weights.iter().map(|(_, w)| *w))
                .fold(0.0_f64, f64::max);
            let y_axis = Axis { lo: 0.0, hi: (max_w * 1.1).max(1e-9) };
            let x_axis = Axis { lo: 0.0, hi: params.len() as f64 };
            let mut svg = Svg::new(title);
            svg.frame_and_ticks(&y_axis_frame(&x_axis), &y_axis, "parameter", "importance");
            let slot = (WIDTH - MARGIN_LEFT - MARGIN_RIGHT) / params.len() as f64;
            let bar = slot * 0.8 / reports.len() as f64;
            for (ri, report) in reports.iter().enumerate() {
                for (pi, (_, w)) in report.weights.iter().enumerate() {
                    let x = MARGIN_LEFT + pi as f64 * slot + slot * 0.1 + ri as f64 * bar;
                    let y = y_axis.to_y(*w);
                    svg.rect(x, y, bar, HEIGHT - MARGIN_BOTTOM - y, SERIES_COLORS[ri % 2]);
                }
            }
            for (pi, name) in params.iter().enumerate() {
                let x = MARGIN_LEFT + (pi as f64 + 0.5) * slot;
                svg.text(
                    x,
                    HEIGHT - MARGIN_BOTTOM + 16.0,
                    10,
                    "middle",
                    name,
                    &format!(r#" transform="rotate(-30 {x:.2} {:.2})""#, HEIGHT - MARGIN_BOTTOM + 16.0),
                );
            }
            for (ri, report) in reports.iter().enumerate() {
                svg.circle(WIDTH - 120.0, MARGIN_TOP + 14.0 * ri as f64 + 8.0, 4.0, SERIES_COLORS[ri % 2]);
                svg.text(
                    WIDTH - 110.0,
                    MARGIN_TOP + 14.0 * ri as f64 + 12.0,
                    11,
                    "start",
                    &report.objective_label,
                    "",
                );
            }
            (svg.finish(), csv)
        }
        PlotSeries::Contour { title, xlabel, ylabel, xs, ys, values } => {
            let mut csv = String::from("x,y,value\n");
            for (yi, y) in ys.iter().enumerate() {
                for (xi, x) in xs.iter().enumerate() {
                    let _ = writeln!(csv, "{x},{y},{}", values[yi * xs.len() + xi]);
                }
            }
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let span = if hi > lo { hi - lo } else { 1.0 };
            let x_axis = Axis::from_values(xs.iter().copied());
            let y_axis = Axis::from_values(ys.iter().copied());
            let mut svg = Svg::new(title);
            svg.frame_and_ticks(&x_axis, &y_axis, xlabel, ylabel);
            let cell_w = (WIDTH - MARGIN_LEFT - MARGIN_RIGHT) / xs.len() as f64;
            let cell_h = (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM) / ys.len() as f64;
            for (yi, _) in ys.iter().enumerate() {
                for (xi, _) in xs.iter().enumerate() {
                    let v = values[yi * xs.len() + xi];
                    let x = MARGIN_LEFT + xi as f64 * cell_w;
                    let y = HEIGHT - MARGIN_BOTTOM - (yi as f64 + 1.0) * cell_h;
                    svg.rect(x, y, cell_w + 0.5, cell_h + 0.5, &grayscale((v - lo) / span));
                }
            }
            (svg.finish(), csv)
        }
    }
}

// Importance plots index parameters by slot, so the x axis is categorical;
// reuse the numeric frame with plain slot coordinates.
fn y_axis_frame(x_axis: &Axis) -> Axis {
    Axis { lo: x_axis.lo, hi: x_axis.hi }
}

/// Drops points with any coordinate above its 99th percentile or equal to
/// the penalty sentinel; used before Pareto scatters so extreme penalties
/// do not flatten the interesting region.
pub fn filter_outliers(points: &[[f64; 2]], penalty: f64) -> Vec<[f64; 2]> {
    let percentile_99 = |dim: usize| -> f64 {
        let mut vals: Vec<f64> = points.iter().map(|p| p[dim]).collect();
        vals.sort_by(f64::total_cmp);
        let rank = ((0.99 * vals.len() as f64).ceil() as usize).clamp(1, vals.len());
        vals[rank - 1]
    };
    let (q0, q1) = (percentile_99(0), percentile_99(1));
    points
        .iter()
        .copied()
        .filter(|p| {
            p[0] != penalty && p[1] != penalty && p[0] <= q0 && p[1] <= q1
        })
        .collect()
}

/// Renders `series` to `<stem>.svg` and `<stem>.csv`; returns both paths.
pub fn emit_plot(series: &PlotSeries, stem: &Path) -> Result<(PathBuf, PathBuf), AnalysisError> {
    series.validate()?;
    let (svg, csv) = render(series);
    let svg_path = stem.with_extension("svg");
    let csv_path = stem.with_extension("csv");
    std::fs::write(&svg_path, svg)
        .map_err(|source| AnalysisError::Io { path: svg_path.clone(), source })?;
    std::fs::write(&csv_path, csv)
        .map_err(|source| AnalysisError::Io { path: csv_path.clone(), source })?;
    Ok((svg_path, csv_path))
}
