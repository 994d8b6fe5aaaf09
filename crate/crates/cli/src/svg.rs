//! Minimal SVG line plots and category maps.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#2ca02c", "#d62728", "#9467bd", "#ff7f0e", "#000000"];

pub struct Series<'a> {
    pub name: &'a str,
    pub x: &'a [f64],
    pub y: &'a [f64],
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="20" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn axes(s: &mut String, x_label: &str, y_label: &str, (x0, x1): (f64, f64), (y0, y1): (f64, f64)) {
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN / 2.0, MARGIN / 2.0, HEIGHT - MARGIN);
    let _ = writeln!(
        s,
        r#"<rect x="{l:.1}" y="{t:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
        r - l,
        b - t
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
        (l + r) / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 14 {:.1})">{}</text>"#,
        (t + b) / 2.0,
        (t + b) / 2.0,
        escape(y_label)
    );
    for (v, x, anchor) in [(x0, l, "start"), (x1, r, "end")] {
        let _ = writeln!(
            s,
            r#"<text x="{x:.1}" y="{:.1}" font-family="sans-serif" font-size="10" text-anchor="{anchor}">{v:.4}</text>"#,
            b + 14.0
        );
    }
    for (v, y) in [(y0, b), (y1, t + 10.0)] {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{y:.1}" font-family="sans-serif" font-size="10" text-anchor="end">{v:.4}</text>"#,
            l - 4.0
        );
    }
}

/// Line plot of several series on shared linear axes.
pub fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[Series<'_>]) -> String {
    let xr = bounds(series.iter().flat_map(|s| s.x.iter().copied()));
    let yr = bounds(series.iter().flat_map(|s| s.y.iter().copied()));
    let mut s = header(title);
    axes(&mut s, x_label, y_label, xr, yr);
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN / 2.0, MARGIN / 2.0, HEIGHT - MARGIN);
    let px = |x: f64| l + (x - xr.0) / (xr.1 - xr.0) * (r - l);
    let py = |y: f64| b - (y - yr.0) / (yr.1 - yr.0) * (b - t);
    for (k, ser) in series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let mut points = String::new();
        for (&x, &y) in ser.x.iter().zip(ser.y) {
            if x.is_finite() && y.is_finite() {
                let _ = write!(points, "{:.2},{:.2} ", px(x), py(y));
            }
        }
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
            points.trim_end()
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" fill="{colour}">{}</text>"#,
            l + 8.0,
            t + 16.0 + 14.0 * k as f64,
            escape(ser.name)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Colour map of categorical labels on an `n x n` grid.
pub fn category_map(title: &str, n: usize, x: &[f64], y: &[f64], labels: &[&str], legend: &[&str]) -> String {
    let mut s = header(title);
    let xr = bounds(x.iter().copied());
    let yr = bounds(y.iter().copied());
    axes(&mut s, "c1", "c2", xr, yr);
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN / 2.0, MARGIN / 2.0, HEIGHT - MARGIN);
    let cw = (r - l) / n.max(1) as f64;
    let ch = (b - t) / n.max(1) as f64;
    for ((&xi, &yi), label) in x.iter().zip(y).zip(labels) {
        let k = legend.iter().position(|l| l == label).unwrap_or(legend.len());
        let colour = PALETTE[k % PALETTE.len()];
        let cx = l + (xi - xr.0) / (xr.1 - xr.0) * (r - l - cw);
        let cy = b - ch - (yi - yr.0) / (yr.1 - yr.0) * (b - t - ch);
        let _ = writeln!(
            s,
            r#"<rect x="{cx:.2}" y="{cy:.2}" width="{cw:.2}" height="{ch:.2}" fill="{colour}" fill-opacity="0.6"/>"#
        );
    }
    for (k, name) in legend.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" fill="{}">{}</text>"#,
            l + 8.0,
            t + 16.0 + 14.0 * k as f64,
            PALETTE[k % PALETTE.len()],
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}
