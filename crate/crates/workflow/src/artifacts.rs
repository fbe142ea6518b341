//! Run artifacts: the series as CSV and a plot as SVG. Both are pure functions of the
//! run, so identical runs give identical bytes.

use std::fmt::Write;

use simforge_core::ir::SystemKind;
use simforge_core::{RunResult, SimulationSpec};

pub const CSV_HEADER: &str = "series,x,y";

/// Series recorded per customer rather than over time; they do not share the time axis.
pub const PER_CUSTOMER_SERIES: [&str; 2] = ["wait", "sojourn"];

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// `series,x,y` rows, series in name order, points in recorded order, LF line ends.
pub fn to_csv(result: &RunResult) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for (name, points) in &result.series {
        let name = csv_field(name);
        for (x, y) in points {
            let _ = writeln!(out, "{name},{x},{y}");
        }
    }
    out
}

/// What to draw, resolved from the run and the spec it was made from.
#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub xlabel: String,
    pub ylabel: String,
    pub grid: bool,
    pub legend: bool,
    /// Hold each value until the next point (queue state) instead of joining points.
    pub step: bool,
    pub series: Vec<(String, Vec<(f64, f64)>)>,
    pub markers: Vec<f64>,
}

impl Plot {
    /// Labels and flags come from the program's `plot_decl` when it made one, else from
    /// the spec. Without a spec, replenishment markers are drawn whenever the run has them.
    pub fn new(result: &RunResult, spec: Option<&SimulationSpec>) -> Plot {
        let (xlabel, ylabel, grid, legend) = match (&result.plot, spec) {
            (Some(p), _) => (p.xlabel.clone(), p.ylabel.clone(), p.grid, p.legend),
            (None, Some(s)) => (s.output.xlabel.clone(), s.output.ylabel.clone(), s.output.grid, s.output.legend),
            (None, None) => ("x".into(), "y".into(), false, false),
        };
        let kind = spec.map(|s| s.kind).or_else(|| {
            if result.series.contains_key("system_size") {
                Some(SystemKind::Queue)
            } else if result.series.contains_key("on_hand") {
                Some(SystemKind::Inventory)
            } else {
                None
            }
        });
        let queue = kind == Some(SystemKind::Queue);
        let series = result
            .series
            .iter()
            .filter(|(name, pts)| !pts.is_empty() && !(queue && PER_CUSTOMER_SERIES.contains(&name.as_str())))
            .map(|(name, pts)| (name.clone(), pts.clone()))
            .collect();
        let show_markers = spec.map_or(true, |s| s.output.replenishment_markers);
        let markers = if show_markers { result.events_named("replenishment").collect() } else { Vec::new() };
        Plot { xlabel, ylabel, grid, legend, step: queue, series, markers }
    }

    pub fn to_svg(&self) -> String {
        render_svg(self)
    }
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
const LEGEND_WIDTH: f64 = 170.0;
const PALETTE: [&str; 7] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2"];
const MARKER_COLOR: &str = "#7f7f7f";

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Round step (1, 2 or 5 times a power of ten) giving about `target` intervals.
fn nice_step(span: f64, target: f64) -> f64 {
    let raw = span / target;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let m = if norm < 1.5 {
        1.0
    } else if norm < 3.0 {
        2.0
    } else if norm < 7.0 {
        5.0
    } else {
        10.0
    };
    m * mag
}

/// Axis range widened to whole steps, plus the tick positions.
fn axis(lo: f64, hi: f64) -> (f64, f64, Vec<f64>, f64) {
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 1.0, hi + 1.0) };
    let step = nice_step(hi - lo, 6.0);
    let start = (lo / step).floor() * step;
    let end = (hi / step).ceil() * step;
    let n = ((end - start) / step).round() as usize;
    let ticks = (0..=n).map(|i| start + i as f64 * step).collect();
    (start, end, ticks, step)
}

fn tick_label(v: f64, step: f64) -> String {
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let s = format!("{v:.decimals$}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

fn render_svg(plot: &Plot) -> String {
    let right = if plot.legend { 20.0 + LEGEND_WIDTH } else { 20.0 };
    let pw = WIDTH - LEFT - right;
    let ph = HEIGHT - TOP - BOTTOM;

    let all = plot.series.iter().flat_map(|(_, p)| p.iter()).filter(|(x, y)| x.is_finite() && y.is_finite());
    let (mut x_lo, mut x_hi, mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64, f64::NEG_INFINITY);
    for &(x, y) in all {
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
        y_lo = y_lo.min(y);
        y_hi = y_hi.max(y);
    }
    for &m in &plot.markers {
        x_lo = x_lo.min(m);
        x_hi = x_hi.max(m);
    }
    if !x_lo.is_finite() {
        (x_lo, x_hi) = (0.0, 1.0);
    }
    if !y_hi.is_finite() {
        y_hi = 1.0;
    }
    let (x0, x1, xticks, xstep) = axis(x_lo, x_hi);
    let (y0, y1, yticks, ystep) = axis(y_lo, y_hi);
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<defs><clipPath id="plot-area"><rect x="{LEFT}" y="{TOP}" width="{pw:.2}" height="{ph:.2}"/></clipPath></defs>"#
    );

    if plot.grid {
        let _ = writeln!(s, r##"<g class="grid" stroke="#dddddd" stroke-width="1">"##);
        for &t in &xticks {
            let _ = writeln!(s, r#"<line x1="{0:.2}" y1="{TOP}" x2="{0:.2}" y2="{1:.2}"/>"#, sx(t), TOP + ph);
        }
        for &t in &yticks {
            let _ = writeln!(s, r#"<line x1="{LEFT}" y1="{0:.2}" x2="{1:.2}" y2="{0:.2}"/>"#, sy(t), LEFT + pw);
        }
        let _ = writeln!(s, "</g>");
    }

    // axes and ticks
    let _ = writeln!(s, r##"<g class="axes" stroke="#000000" stroke-width="1">"##);
    let _ = writeln!(s, r#"<line x1="{LEFT}" y1="{0:.2}" x2="{1:.2}" y2="{0:.2}"/>"#, TOP + ph, LEFT + pw);
    let _ = writeln!(s, r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{:.2}"/>"#, TOP + ph);
    for &t in &xticks {
        let _ = writeln!(s, r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}"/>"#, sx(t), TOP + ph, TOP + ph + 5.0);
    }
    for &t in &yticks {
        let _ = writeln!(s, r#"<line x1="{0:.2}" y1="{1:.2}" x2="{LEFT}" y2="{1:.2}"/>"#, LEFT - 5.0, sy(t));
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g class="tick-labels">"#);
    for &t in &xticks {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            sx(t),
            TOP + ph + 20.0,
            tick_label(t, xstep)
        );
    }
    for &t in &yticks {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 8.0,
            sy(t) + 4.0,
            tick_label(t, ystep)
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<text class="xlabel" x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0,
        escape(&plot.xlabel)
    );
    let (ly_x, ly_y) = (20.0, TOP + ph / 2.0);
    let _ = writeln!(
        s,
        r#"<text class="ylabel" x="{ly_x}" y="{ly_y:.2}" text-anchor="middle" font-size="14" transform="rotate(-90 {ly_x} {ly_y:.2})">{}</text>"#,
        escape(&plot.ylabel)
    );

    if !plot.markers.is_empty() {
        let _ = writeln!(
            s,
            r#"<g class="replenishment-markers" stroke="{MARKER_COLOR}" stroke-width="1.5" stroke-dasharray="6 4">"#
        );
        for &m in &plot.markers {
            let _ = writeln!(
                s,
                r#"<line class="replenishment-marker" x1="{0:.2}" y1="{TOP}" x2="{0:.2}" y2="{1:.2}"/>"#,
                sx(m),
                TOP + ph
            );
        }
        let _ = writeln!(s, "</g>");
    }

    let _ = writeln!(s, r#"<g class="series" clip-path="url(#plot-area)" fill="none" stroke-width="1.5">"#);
    for (i, (name, pts)) in plot.series.iter().enumerate() {
        let mut coords: Vec<(f64, f64)> = Vec::with_capacity(pts.len() * if plot.step { 2 } else { 1 });
        let mut prev: Option<f64> = None;
        for &(x, y) in pts.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
            if let (true, Some(py)) = (plot.step, prev) {
                coords.push((x, py));
            }
            coords.push((x, y));
            prev = Some(y);
        }
        let points: Vec<String> = coords.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(
            s,
            r#"<polyline data-series="{}" stroke="{}" points="{}"/>"#,
            escape(name),
            PALETTE[i % PALETTE.len()],
            points.join(" ")
        );
    }
    let _ = writeln!(s, "</g>");
    if plot.series.is_empty() {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">no data</text>"#,
            LEFT + pw / 2.0,
            TOP + ph / 2.0
        );
    }

    if plot.legend {
        let lx = LEFT + pw + 20.0;
        let _ = writeln!(s, r#"<g class="legend">"#);
        let mut y = TOP + 10.0;
        for (i, (name, _)) in plot.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let _ = writeln!(
                s,
                r#"<line x1="{lx:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
                lx + 24.0,
                lx + 30.0,
                y + 4.0,
                escape(name)
            );
            y += 20.0;
        }
        if !plot.markers.is_empty() {
            let _ = writeln!(
                s,
                r#"<line x1="{lx:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{MARKER_COLOR}" stroke-width="1.5" stroke-dasharray="6 4"/><text x="{:.2}" y="{:.2}">replenishment</text>"#,
                lx + 24.0,
                lx + 30.0,
                y + 4.0
            );
        }
        let _ = writeln!(s, "</g>");
    }
    s.push_str("</svg>\n");
    s
}
