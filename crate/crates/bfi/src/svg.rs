//! SVG 1.1 rendering of a Kaplan-Meier staircase.
//!
//! The curve polyline carries its data-space coordinates in a `data-points`
//! attribute alongside the pixel `points`, so the plotted values can be read
//! back exactly.

use std::fmt::Write as _;

use bfi_core::PlotPoints;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
const TICK_HALF: f64 = 5.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Rounds the axis maximum up to 1, 2 or 5 times a power of ten.
fn nice_ceiling(x: f64) -> f64 {
    if !(x > 0.0) {
        return 1.0;
    }
    let exp = x.log10().floor();
    let base = 10f64.powf(exp);
    [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * base)
        .find(|&v| v >= x)
        .unwrap_or(10.0 * base)
}

pub fn render_km_svg(points: &PlotPoints, time_unit: Option<&str>, title: Option<&str>) -> String {
    let x_data_max = points
        .line
        .iter()
        .map(|p| p.0)
        .chain(points.censor_ticks.iter().map(|p| p.0))
        .fold(0.0, f64::max);
    let x_max = nice_ceiling(x_data_max);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + x / x_max * plot_w;
    let py = |y: f64| TOP + (1.0 - y) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#
    );
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"  <rect width="100%" height="100%" fill="white"/>"#);
    if let Some(t) = title {
        let _ = writeln!(
            s,
            r#"  <text x="{}" y="18" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(t)
        );
    }

    // axes
    let _ = writeln!(
        s,
        r#"  <g class="axes" stroke="black" stroke-width="1" fill="none">
    <line x1="{l}" y1="{b}" x2="{r}" y2="{b}"/>
    <line x1="{l}" y1="{t}" x2="{l}" y2="{b}"/>
  </g>"#,
        l = LEFT,
        r = WIDTH - RIGHT,
        t = TOP,
        b = HEIGHT - BOTTOM
    );
    let _ = writeln!(
        s,
        r#"  <g class="ticks" font-family="sans-serif" font-size="11">"#
    );
    for i in 0..=5 {
        let v = x_max * i as f64 / 5.0;
        let x = px(v);
        let _ = writeln!(
            s,
            r#"    <line x1="{x:.2}" y1="{b}" x2="{x:.2}" y2="{b2}" stroke="black"/><text x="{x:.2}" y="{ty}" text-anchor="middle">{v}</text>"#,
            b = HEIGHT - BOTTOM,
            b2 = HEIGHT - BOTTOM + 5.0,
            ty = HEIGHT - BOTTOM + 18.0
        );
    }
    for i in 0..=5 {
        let v = i as f64 / 5.0;
        let y = py(v);
        let _ = writeln!(
            s,
            r#"    <line x1="{l2}" y1="{y:.2}" x2="{l}" y2="{y:.2}" stroke="black"/><text x="{tx}" y="{ty:.2}" text-anchor="end">{v}</text>"#,
            l = LEFT,
            l2 = LEFT - 5.0,
            tx = LEFT - 8.0,
            ty = y + 4.0
        );
    }
    let _ = writeln!(s, "  </g>");
    let x_label = match time_unit {
        Some(u) => format!("Time ({})", escape(u)),
        None => "Time".to_owned(),
    };
    let _ = writeln!(
        s,
        r#"  <text class="x-label" x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13">{x_label}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"  <text class="y-label" x="18" y="{y}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 18 {y})">Survival probability</text>"#,
        y = TOP + plot_h / 2.0
    );

    let data_points: Vec<String> = points
        .line
        .iter()
        .map(|(x, y)| format!("{x},{y}"))
        .collect();
    let pixel_points: Vec<String> = points
        .line
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
        .collect();
    let _ = writeln!(
        s,
        r#"  <polyline class="km-curve" fill="none" stroke="steelblue" stroke-width="2" data-points="{}" points="{}"/>"#,
        data_points.join(" "),
        pixel_points.join(" ")
    );
    let _ = writeln!(
        s,
        r#"  <g class="censor-ticks" stroke="black" stroke-width="1">"#
    );
    for &(x, y) in &points.censor_ticks {
        let (cx, cy) = (px(x), py(y));
        let _ = writeln!(
            s,
            r#"    <line data-x="{x}" data-y="{y}" x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}"/>"#,
            cy - TICK_HALF,
            cy + TICK_HALF
        );
    }
    let _ = writeln!(s, "  </g>");
    s.push_str("</svg>\n");
    s
}
