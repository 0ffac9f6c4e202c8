//! Minimal line charts: one polyline per series with a mean ± stddev band.

use std::fmt::Write as _;
use std::path::Path;

use atrophy::harness::{CurveResult, Experiment, LesionKind, Series};

use crate::CliError;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 230.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

const COLOURS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
const DASHES: [&str; 4] = ["", "6 3", "2 3", "8 3 2 3"];

/// One chart: a group of series sharing axes.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    /// Appended to the run id to form the file name.
    pub suffix: String,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

fn panel_key(name: &str) -> &str {
    let mut parts = name.splitn(3, '/');
    let first = parts.next().unwrap_or("");
    if first == "gradient" {
        let second = parts.next().map_or(0, str::len);
        &name[..first.len() + 1 + second]
    } else if name.contains('/') {
        first
    } else {
        ""
    }
}

fn labels(result: &CurveResult, key: &str) -> (&'static str, &'static str) {
    let level = match result.config.lesion.kind {
        LesionKind::Deletion => "final deletion level",
        LesionKind::Tau => "units considered",
    };
    match (result.config.experiment, key) {
        (Experiment::DeletionBaseline | Experiment::Robustness, _) => ("fraction of synapses deleted", "mean overlap"),
        (Experiment::SetGradient, "per_set") => ("memory set (1 = first stored)", "mean overlap"),
        (Experiment::SetGradient, _) => (level, "mean overlap"),
        (Experiment::Capacity, "retrieval_time") => ("clustering coefficient", "retrieval time (sweeps)"),
        (Experiment::Capacity, _) => ("clustering coefficient", "capacity (patterns)"),
        (Experiment::Tau, "gradient/per_set") => ("memory set (1 = first stored)", "mean overlap"),
        (Experiment::Tau, "gradient/overall") => ("units considered", "mean overlap"),
        (Experiment::Tau, _) => ("units considered", "mean overlap"),
        (Experiment::LesionSnapshot, _) => ("units considered", "mean transmission"),
    }
}

/// Split a result into charts whose series share an x axis.
pub fn panels(result: &CurveResult) -> Vec<Panel> {
    let mut out: Vec<(String, Vec<Series>)> = Vec::new();
    for s in &result.series {
        let key = panel_key(&s.name).to_string();
        match out.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(s.clone()),
            None => out.push((key, vec![s.clone()])),
        }
    }
    let first = out.first().map(|(k, _)| k.clone()).unwrap_or_default();
    out.into_iter()
        .map(|(key, series)| {
            let (x, y) = labels(result, &key);
            let suffix = if key == first {
                String::new()
            } else {
                format!("_{}", key.replace('/', "_"))
            };
            let title = if key.is_empty() {
                result.config.experiment.id().to_string()
            } else {
                format!("{} ({key})", result.config.experiment.id())
            };
            Panel {
                suffix,
                title,
                x_label: x.into(),
                y_label: y.into(),
                series,
            }
        })
        .collect()
}

/// Every series of `curve` on one chart.
pub fn render_svg(curve: &CurveResult, path: &Path) -> Result<(), CliError> {
    let (x, y) = labels(curve, "");
    let panel = Panel {
        suffix: String::new(),
        title: curve.config.experiment.id().into(),
        x_label: x.into(),
        y_label: y.into(),
        series: curve.series.clone(),
    };
    render_panel(&panel, path)
}

pub fn render_panel(panel: &Panel, path: &Path) -> Result<(), CliError> {
    let text = to_svg(panel)?;
    std::fs::write(path, text).map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Tick step of 1, 2 or 5 times a power of ten giving about five ticks.
fn tick_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let f = raw / mag;
    let nice = if f < 1.5 {
        1.0
    } else if f < 3.5 {
        2.0
    } else if f < 7.5 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn ticks(lo: f64, hi: f64) -> (f64, f64, Vec<f64>, usize) {
    let step = tick_step(hi - lo);
    let start = (lo / step).floor() * step;
    let end = (hi / step).ceil() * step;
    let count = ((end - start) / step).round() as usize;
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let t = (0..=count).map(|i| start + i as f64 * step).collect();
    (start, end, t, decimals)
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if hi - lo < 1e-9 {
        let pad = if lo.abs() > 1e-9 { lo.abs() * 0.1 } else { 1.0 };
        (lo - pad, hi + pad)
    } else {
        (lo, hi)
    }
}

/// SVG text for a panel. Fails when no series has a row.
pub fn to_svg(panel: &Panel) -> Result<String, CliError> {
    let rows = || panel.series.iter().flat_map(|s| s.rows.iter());
    if rows().next().is_none() {
        return Err(CliError::Runtime("nothing to plot: no rows".into()));
    }
    let (x0, x1) = range(rows().map(|r| r.x));
    let (y0, y1) = range(rows().flat_map(|r| [r.mean - r.stddev, r.mean + r.stddev, r.mean]));
    let (x0, x1, xt, xd) = ticks(x0, x1);
    let (y0, y1, yt, yd) = ticks(y0, y1);
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

    let mut s = String::new();
    let w = &mut s;
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(w, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        w,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + pw / 2.0,
        escape(&panel.title)
    );

    let _ = writeln!(w, r##"<g stroke="#ccc" stroke-width="0.5">"##);
    for &t in &xt {
        let _ = writeln!(w, r#"<line x1="{0:.1}" y1="{1:.1}" x2="{0:.1}" y2="{2:.1}"/>"#, sx(t), TOP, TOP + ph);
    }
    for &t in &yt {
        let _ = writeln!(w, r#"<line x1="{1:.1}" y1="{0:.1}" x2="{2:.1}" y2="{0:.1}"/>"#, sy(t), LEFT, LEFT + pw);
    }
    let _ = writeln!(w, "</g>");
    let _ = writeln!(
        w,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for &t in &xt {
        let _ = writeln!(
            w,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{:.*}</text>"#,
            sx(t),
            TOP + ph + 16.0,
            xd,
            t
        );
    }
    for &t in &yt {
        let _ = writeln!(
            w,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{:.*}</text>"#,
            LEFT - 6.0,
            sy(t) + 4.0,
            yd,
            t
        );
    }
    let _ = writeln!(
        w,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 18.0,
        escape(&panel.x_label)
    );
    let _ = writeln!(
        w,
        r#"<text x="18" y="{0:.1}" text-anchor="middle" transform="rotate(-90 18 {0:.1})">{1}</text>"#,
        TOP + ph / 2.0,
        escape(&panel.y_label)
    );

    for (i, series) in panel.series.iter().enumerate() {
        let colour = COLOURS[i % COLOURS.len()];
        let dash = DASHES[(i / COLOURS.len() + i) % DASHES.len()];
        let dash_attr = if dash.is_empty() {
            String::new()
        } else {
            format!(r#" stroke-dasharray="{dash}""#)
        };
        let mut rows = series.rows.clone();
        rows.sort_by(|a, b| a.x.total_cmp(&b.x));
        let _ = writeln!(w, r#"<g class="series" data-name="{}">"#, escape(&series.name));
        if rows.len() == 1 {
            let r = rows[0];
            if r.stddev > 0.0 {
                let _ = writeln!(
                    w,
                    r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="{colour}"/>"#,
                    sx(r.x),
                    sy(r.mean + r.stddev),
                    sy(r.mean - r.stddev)
                );
            }
            let _ = writeln!(
                w,
                r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{colour}"/>"#,
                sx(r.x),
                sy(r.mean)
            );
        } else if !rows.is_empty() {
            let band: Vec<String> = rows
                .iter()
                .map(|r| format!("{:.2},{:.2}", sx(r.x), sy(r.mean + r.stddev)))
                .chain(rows.iter().rev().map(|r| format!("{:.2},{:.2}", sx(r.x), sy(r.mean - r.stddev))))
                .collect();
            let _ = writeln!(
                w,
                r#"<polygon points="{}" fill="{colour}" fill-opacity="0.15" stroke="none"/>"#,
                band.join(" ")
            );
            let line: Vec<String> = rows.iter().map(|r| format!("{:.2},{:.2}", sx(r.x), sy(r.mean))).collect();
            let _ = writeln!(
                w,
                r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"{dash_attr}/>"#,
                line.join(" ")
            );
        }
        let _ = writeln!(w, "</g>");
    }

    let lx = LEFT + pw + 14.0;
    for (i, series) in panel.series.iter().enumerate() {
        let colour = COLOURS[i % COLOURS.len()];
        let dash = DASHES[(i / COLOURS.len() + i) % DASHES.len()];
        let y = TOP + 10.0 + i as f64 * 18.0;
        let dash_attr = if dash.is_empty() {
            String::new()
        } else {
            format!(r#" stroke-dasharray="{dash}""#)
        };
        let _ = writeln!(
            w,
            r#"<line class="legend" x1="{lx:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="{colour}" stroke-width="1.5"{dash_attr}/>"#,
            lx + 24.0
        );
        let _ = writeln!(
            w,
            r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 30.0,
            y + 4.0,
            escape(&series.name)
        );
    }
    let _ = writeln!(w, "</svg>");
    Ok(s)
}
