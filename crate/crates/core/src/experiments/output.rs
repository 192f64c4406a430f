//! Deterministic CSV and SVG emission for sweep results.

use super::SweepResult;
use std::fmt::Write as _;
use std::io;
use std::path::Path;

/// Fixed CSV column order.
pub const CSV_HEADER: &str =
    "alpha,depth,err_l1,err_linf_sc,est_err_l2,iterations,upper_bound,lower_bound";

fn fmt_f64(v: f64) -> String {
    // 17 significant digits: enough for exact f64 round trips, and the
    // fixed width keeps byte output deterministic.
    format!("{:.16e}", v)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn csv_string(result: &SweepResult) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in &result.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_f64(row.alpha),
            row.depth,
            fmt_f64(row.err_l1),
            fmt_f64(row.err_linf_sc),
            fmt_opt(row.est_err_l2),
            row.iterations,
            fmt_opt(row.upper_bound),
            fmt_opt(row.lower_bound),
        );
    }
    out
}

/// Write a sweep as CSV: header, then one line per row, 17 significant
/// digits, empty fields for absent values. Byte-deterministic.
pub fn emit_csv(result: &SweepResult, path: &Path) -> io::Result<()> {
    std::fs::write(path, csv_string(result))
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

fn coord(v: f64) -> String {
    format!("{:.2}", v)
}

pub fn svg_string(results: &[SweepResult]) -> String {
    assert!(!results.is_empty(), "need at least one series");
    // Collect log10 data ranges over positive entries.
    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for res in results {
        for row in &res.rows {
            if row.alpha > 0.0 && row.err_l1 > 0.0 {
                x_min = x_min.min(row.alpha.log10());
                x_max = x_max.max(row.alpha.log10());
                y_min = y_min.min(row.err_l1.log10());
                y_max = y_max.max(row.err_l1.log10());
            }
        }
    }
    if !x_min.is_finite() {
        x_min = -1.0;
        x_max = 0.0;
        y_min = -1.0;
        y_max = 0.0;
    }
    if x_max - x_min < 1e-9 {
        x_max = x_min + 1.0;
    }
    if y_max - y_min < 1e-9 {
        y_max = y_min + 1.0;
    }
    let sx = |lx: f64| MARGIN + (lx - x_min) / (x_max - x_min) * (WIDTH - 2.0 * MARGIN);
    let sy = |ly: f64| HEIGHT - MARGIN - (ly - y_min) / (y_max - y_min) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(
        svg,
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    );
    // Axes.
    let _ = writeln!(
        svg,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        coord(MARGIN),
        coord(HEIGHT - MARGIN),
        coord(WIDTH - MARGIN),
        coord(HEIGHT - MARGIN)
    );
    let _ = writeln!(
        svg,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        coord(MARGIN),
        coord(MARGIN),
        coord(MARGIN),
        coord(HEIGHT - MARGIN)
    );
    // Decade ticks.
    let mut tick = x_min.ceil() as i64;
    while (tick as f64) <= x_max {
        let x = sx(tick as f64);
        let _ = writeln!(
            svg,
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/><text x=\"{0}\" y=\"{3}\" font-size=\"11\" text-anchor=\"middle\">1e{4}</text>",
            coord(x),
            coord(HEIGHT - MARGIN),
            coord(HEIGHT - MARGIN + 5.0),
            coord(HEIGHT - MARGIN + 18.0),
            tick
        );
        tick += 1;
    }
    let mut tick = y_min.ceil() as i64;
    while (tick as f64) <= y_max {
        let y = sy(tick as f64);
        let _ = writeln!(
            svg,
            "<line x1=\"{1}\" y1=\"{0}\" x2=\"{2}\" y2=\"{0}\" stroke=\"black\"/><text x=\"{3}\" y=\"{0}\" font-size=\"11\" text-anchor=\"end\">1e{4}</text>",
            coord(y),
            coord(MARGIN - 5.0),
            coord(MARGIN),
            coord(MARGIN - 8.0),
            tick
        );
        tick += 1;
    }
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">scale of initialization</text>",
        coord(WIDTH / 2.0),
        coord(HEIGHT - 14.0)
    );
    // Series.
    for (idx, res) in results.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let mut points = String::new();
        for row in &res.rows {
            if row.alpha > 0.0 && row.err_l1 > 0.0 {
                let _ = write!(
                    points,
                    "{},{} ",
                    coord(sx(row.alpha.log10())),
                    coord(sy(row.err_l1.log10()))
                );
            }
        }
        let _ = writeln!(
            svg,
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>",
            color,
            points.trim_end()
        );
        let label = &res.label;
        let ly = MARGIN + 16.0 * idx as f64;
        let _ = writeln!(
            svg,
            "<line x1=\"{0}\" y1=\"{2}\" x2=\"{1}\" y2=\"{2}\" stroke=\"{3}\" stroke-width=\"1.5\"/><text x=\"{4}\" y=\"{5}\" font-size=\"11\">{6}</text>",
            coord(WIDTH - MARGIN - 140.0),
            coord(WIDTH - MARGIN - 115.0),
            coord(ly),
            color,
            coord(WIDTH - MARGIN - 110.0),
            coord(ly + 4.0),
            label
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Write sweep results as a self-contained log–log SVG, one polyline per
/// series, legend from the series labels. No external assets.
pub fn emit_svg(results: &[SweepResult], path: &Path) -> io::Result<()> {
    std::fs::write(path, svg_string(results))
}
