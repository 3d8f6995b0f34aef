//! Static SVG line charts.

use std::fmt::Write as _;

use crate::error::Result;

use super::csv::{format_g, CsvTable};

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    /// Pairs two columns of a table; fails on an unknown column name.
    pub fn from_table(table: &CsvTable, x: &str, y: &str, label: impl Into<String>) -> Result<Self> {
        let xs = table.column(x)?;
        let ys = table.column(y)?;
        Ok(Series {
            label: label.into(),
            points: xs.into_iter().zip(ys).collect(),
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Axes {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Draw x decreasing from left to right (error against training loss).
    pub reversed_x: bool,
    pub x_range: Option<(f64, f64)>,
    pub y_range: Option<(f64, f64)>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const TICKS: usize = 5;
const COLOURS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo > hi {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Renders the series as one polyline each, with axes, ticks and a legend.
/// Points with a non-finite coordinate are skipped.
pub fn render_plot(series: &[Series], axes: &Axes) -> String {
    let all = || series.iter().flat_map(|s| s.points.iter());
    let (x0, x1) = axes.x_range.unwrap_or_else(|| extent(all().map(|p| p.0)));
    let (y0, y1) = axes.y_range.unwrap_or_else(|| extent(all().map(|p| p.1)));
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| {
        let f = (x - x0) / (x1 - x0);
        LEFT + plot_w * if axes.reversed_x { 1.0 - f } else { f }
    };
    let sy = |y: f64| TOP + plot_h * (1.0 - (y - y0) / (y1 - y0));

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + plot_w / 2.0,
        escape(&axes.title)
    );
    let (bx, by) = (LEFT, TOP + plot_h);
    let _ = writeln!(
        out,
        r#"<line x1="{bx}" y1="{by}" x2="{}" y2="{by}" stroke="black"/>"#,
        LEFT + plot_w
    );
    let _ = writeln!(out, r#"<line x1="{bx}" y1="{TOP}" x2="{bx}" y2="{by}" stroke="black"/>"#);
    for i in 0..=TICKS {
        let f = i as f64 / TICKS as f64;
        let xv = x0 + f * (x1 - x0);
        let px = sx(xv);
        let _ = writeln!(
            out,
            r#"<line x1="{px:.2}" y1="{by}" x2="{px:.2}" y2="{}" stroke="black"/><text x="{px:.2}" y="{}" text-anchor="middle">{}</text>"#,
            by + 5.0,
            by + 18.0,
            format_g(xv)
        );
        let yv = y0 + f * (y1 - y0);
        let py = sy(yv);
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{py:.2}" x2="{bx}" y2="{py:.2}" stroke="black"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            bx - 5.0,
            bx - 8.0,
            py + 4.0,
            format_g(yv)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 12.0,
        escape(&axes.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text transform="translate(18 {}) rotate(-90)" text-anchor="middle">{}</text>"#,
        TOP + plot_h / 2.0,
        escape(&axes.y_label)
    );

    for (i, s) in series.iter().enumerate() {
        let colour = COLOURS[i % COLOURS.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        if !pts.is_empty() {
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
                pts.join(" ")
            );
        }
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = WIDTH - RIGHT + 12.0;
        let _ = writeln!(
            out,
            r#"<rect x="{lx}" y="{}" width="14" height="3" fill="{colour}"/><text x="{}" y="{}">{}</text>"#,
            ly - 2.0,
            lx + 20.0,
            ly + 3.0,
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}
