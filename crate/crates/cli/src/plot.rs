//! Self-contained SVG log-log plot of a scaling report.

use std::fmt::Write as _;
use std::path::Path;

use scolab::empirics::{stats::ols, ScalingReport};

use crate::error::CliError;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;

pub const REFERENCE_SLOPES: [f64; 2] = [-1.0, -0.5];

/// Slope and natural-log intercept drawn for `report`: the report's own fit
/// when present, otherwise least squares over its positive quantiles.
pub fn plotted_fit(report: &ScalingReport) -> Result<(f64, f64), CliError> {
    let pts = positive_points(report)?;
    match (report.slope, report.intercept) {
        (Some(s), Some(b)) => Ok((s, b)),
        _ => {
            let x: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
            let y: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
            ols(&x, &y).map_err(|e| CliError::Output(e.to_string()))
        }
    }
}

fn positive_points(report: &ScalingReport) -> Result<Vec<(f64, f64)>, CliError> {
    if report.n_grid.len() != report.quantiles.len() {
        return Err(CliError::Output("report has mismatched n_grid and quantiles".into()));
    }
    let pts: Vec<(f64, f64)> = report
        .n_grid
        .iter()
        .zip(&report.quantiles)
        .filter(|(_, q)| **q > 0.0 && q.is_finite())
        .map(|(&n, &q)| (n as f64, q))
        .collect();
    if pts.len() < 2 {
        return Err(CliError::Output(
            "a plot needs at least two grid points with positive quantiles".into(),
        ));
    }
    Ok(pts)
}

pub fn render_svg(report: &ScalingReport) -> Result<String, CliError> {
    let pts = positive_points(report)?;
    let (slope, intercept) = plotted_fit(report)?;
    let logs: Vec<(f64, f64)> = pts.iter().map(|(n, q)| (n.log10(), q.log10())).collect();
    let (x0, x1) = span(logs.iter().map(|p| p.0), 0.1);
    let (y0, y1) = span(logs.iter().map(|p| p.1), 0.25);
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * (WIDTH - LEFT - RIGHT);
    let py = |y: f64| HEIGHT - BOTTOM - (y - y0) / (y1 - y0) * (HEIGHT - TOP - BOTTOM);
    let fit = |x: f64| slope * x + intercept / std::f64::consts::LN_10;
    let (ax, ay) = logs[0];

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<metadata id="scolab-fit">{{"slope":{slope},"intercept":{intercept},"delta":{},"reference_slopes":[-1,-0.5]}}</metadata>"#,
        report.delta
    );
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let _ = writeln!(
        s,
        r#"<defs><clipPath id="plot-area"><rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}"/></clipPath></defs>"#
    );
    let _ = writeln!(
        s,
        r##"<rect class="frame" x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>"##
    );
    for d in (x0.ceil() as i32)..=(x1.floor() as i32) {
        let _ = writeln!(
            s,
            r#"<text class="tick" x="{:.2}" y="{:.2}" text-anchor="middle">1e{d}</text>"#,
            px(d as f64),
            HEIGHT - BOTTOM + 18.0
        );
    }
    for d in (y0.ceil() as i32)..=(y1.floor() as i32) {
        let _ = writeln!(
            s,
            r#"<text class="tick" x="{:.2}" y="{:.2}" text-anchor="end">1e{d}</text>"#,
            LEFT - 6.0,
            py(d as f64) + 4.0
        );
    }
    let _ = writeln!(s, r#"<g clip-path="url(#plot-area)">"#);
    let _ = writeln!(
        s,
        r##"<line class="fit" data-slope="{slope}" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#c0392b" stroke-width="2"/>"##,
        px(x0),
        py(fit(x0)),
        px(x1),
        py(fit(x1))
    );
    for (r, dash) in REFERENCE_SLOPES.iter().zip(["6 4", "2 4"]) {
        let y = |x: f64| ay + r * (x - ax);
        let _ = writeln!(
            s,
            r##"<line class="reference" data-slope="{r}" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#777" stroke-dasharray="{dash}"/>"##,
            px(x0),
            py(y(x0)),
            px(x1),
            py(y(x1))
        );
    }
    for (x, y) in &logs {
        let _ = writeln!(
            s,
            r##"<circle class="marker" cx="{:.2}" cy="{:.2}" r="4" fill="#2c3e50"/>"##,
            px(*x),
            py(*y)
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">n</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}-quantile of excess risk</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        1.0 - report.delta
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="20">fitted slope {slope:.3}; reference slopes -1 and -0.5</text>"#,
        LEFT
    );
    s.push_str("</svg>\n");
    Ok(s)
}

fn span(values: impl Iterator<Item = f64>, pad: f64) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    (lo - pad, hi + pad)
}

/// Writes the SVG for `report` to `path`.
pub fn emit_plot(report: &ScalingReport, path: &Path) -> Result<(), CliError> {
    let svg = render_svg(report)?;
    std::fs::write(path, svg).map_err(|e| CliError::io(path, e))
}
