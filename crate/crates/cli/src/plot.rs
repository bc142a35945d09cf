//! SVG 1.1 scatter plot of a clustering.

use std::fmt::Write;

use anyhow::bail;

use gmwp_core::{Dataset, SolveReport};

const SIZE: f64 = 640.0;
const MARGIN: f64 = 32.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

/// Fill color of cluster `l`. Beyond the palette, hues are spread by the
/// golden angle.
pub fn cluster_color(l: usize) -> String {
    match PALETTE.get(l) {
        Some(c) => (*c).to_string(),
        None => format!("hsl({:.0},65%,45%)", (l as f64 * 137.507_764) % 360.0),
    }
}

/// Points are drawn as circles filled with their cluster's color, centers as
/// black-edged diamonds. Output depends only on the inputs.
pub fn render_svg(data: &Dataset, report: &SolveReport, first_two: bool) -> anyhow::Result<String> {
    let dim = data.dim();
    if dim != 2 && !(first_two && dim > 2) {
        if dim > 2 {
            bail!("data has {dim} dimensions; pass --first-two to plot the first two coordinates");
        }
        bail!("data has {dim} dimension; plots need two");
    }
    if report.assignment.owner.len() != data.len() {
        bail!("report assigns {} points but the data has {}", report.assignment.owner.len(), data.len());
    }
    if report.centers.dim() != dim {
        bail!("report centers have dimension {}, data has {dim}", report.centers.dim());
    }

    let xy = |p: &[f64]| (p[0], p[1]);
    let all = data.points().map(xy).chain(report.centers.blocks().map(xy));
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    // Equal scale on both axes; a degenerate extent still gets a unit box.
    let span = (x1 - x0).max(y1 - y0).max(f64::MIN_POSITIVE);
    let scale = (SIZE - 2.0 * MARGIN) / span;
    let cx = (x0 + x1) / 2.0;
    let cy = (y0 + y1) / 2.0;
    let to_px = |x: f64, y: f64| (SIZE / 2.0 + (x - cx) * scale, SIZE / 2.0 - (y - cy) * scale);

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<g class="points" stroke="none">"#);
    for (p, &owner) in data.points().zip(&report.assignment.owner) {
        let (px, py) = to_px(p[0], p[1]);
        let _ = writeln!(
            svg,
            r#"<circle class="point" cx="{px:.2}" cy="{py:.2}" r="3" fill="{}"/>"#,
            cluster_color(owner)
        );
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(svg, r#"<g class="centers" stroke="black" stroke-width="1.5">"#);
    for (l, c) in report.centers.blocks().enumerate() {
        let (px, py) = to_px(c[0], c[1]);
        let _ = writeln!(
            svg,
            r#"<path class="center" d="M{px:.2},{:.2}l9,9l-9,9l-9,-9z" fill="{}"/>"#,
            py - 9.0,
            cluster_color(l)
        );
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(svg, "</svg>");
    Ok(svg)
}
