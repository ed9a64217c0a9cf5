//! Line charts of a results table, rendered as standalone SVG.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::table::{fmt_g6, Table, TableError, METRIC_COLUMNS, PARAM_COLUMNS};

#[derive(Debug, Error)]
pub enum ChartError {
    #[error("unknown x column `{0}` (expected one of lambda_inv, p_prop, t_rw, i_p, t_p)")]
    UnknownX(String),
    #[error("unknown metric `{0}` (expected one of mu_unsatisfied, mu_completion, tasks_spawned, tasks_completed)")]
    UnknownMetric(String),
    #[error("no rows with numeric `{x}` and `{metric}`")]
    NoData { x: String, metric: String },
    #[error(transparent)]
    Table(#[from] TableError),
}

/// One plotted line: mean metric per x value.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Per-x running (x, sum, count) of one series, keyed by the bits of x.
type Accumulated = BTreeMap<u64, (f64, f64, usize)>;

/// Groups rows into series: one per algorithm and combination of the
/// parameter columns other than `x`.
pub fn series(table: &Table, x: &str, metric: &str) -> Result<Vec<Series>, ChartError> {
    if !PARAM_COLUMNS.contains(&x) {
        return Err(ChartError::UnknownX(x.to_string()));
    }
    if !METRIC_COLUMNS.contains(&metric) {
        return Err(ChartError::UnknownMetric(metric.to_string()));
    }
    let xi = table.column(x)?;
    let mi = table.column(metric)?;
    let mut keys = vec![table.column("algo")?];
    for c in PARAM_COLUMNS.iter().filter(|&&c| c != x) {
        keys.push(table.column(c)?);
    }
    let mut rows = table.trial_rows()?;
    if rows.is_empty() {
        rows = table.mean_rows()?;
    }

    let mut groups: BTreeMap<Vec<String>, Accumulated> = BTreeMap::new();
    let mut order: Vec<Vec<String>> = Vec::new();
    for row in rows {
        let (Ok(xv), Ok(mv)) = (row[xi].parse::<f64>(), row[mi].parse::<f64>()) else {
            continue;
        };
        if !xv.is_finite() || !mv.is_finite() {
            continue;
        }
        let key: Vec<String> = keys.iter().map(|&k| row[k].clone()).collect();
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        let e = groups
            .entry(key)
            .or_default()
            .entry(xv.to_bits())
            .or_insert((xv, 0.0, 0));
        e.1 += mv;
        e.2 += 1;
    }
    if order.is_empty() {
        return Err(ChartError::NoData {
            x: x.to_string(),
            metric: metric.to_string(),
        });
    }

    // Only parameters that differ between series go into labels.
    let varying: Vec<usize> = (1..keys.len())
        .filter(|&j| order.iter().any(|k| k[j] != order[0][j]))
        .collect();
    let names: Vec<&str> = std::iter::once("algo")
        .chain(PARAM_COLUMNS.iter().copied().filter(|&c| c != x))
        .collect();
    Ok(order
        .into_iter()
        .map(|key| {
            let mut label = key[0].clone();
            for &j in &varying {
                if !key[j].is_empty() {
                    let _ = write!(label, " {}={}", names[j], key[j]);
                }
            }
            let mut points: Vec<(f64, f64)> = groups[&key]
                .values()
                .map(|&(xv, sum, n)| (xv, sum / n as f64))
                .collect();
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            Series { label, points }
        })
        .collect())
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if hi > lo {
        (lo, hi)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        (lo - pad, hi + pad)
    }
}

/// Roughly five evenly spaced round tick values covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Renders `series` as an SVG line chart.
pub fn render(series: &[Series], x_label: &str, y_label: &str) -> String {
    let (x0, x1) = padded_range(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (y0, y1) = padded_range(
        series
            .iter()
            .flat_map(|s| s.points.iter().map(|p| p.1))
            .chain(std::iter::once(0.0)),
    );
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for t in ticks(x0, x1) {
        let px = sx(t);
        let _ = writeln!(
            svg,
            r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 20.0,
            fmt_g6(t)
        );
    }
    for t in ticks(y0, y1) {
        let py = sy(t);
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT + pw,
            LEFT - 6.0,
            py + 4.0,
            fmt_g6(t)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(y_label)
    );

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if s.points.len() > 1 {
            let pts: Vec<String> = s
                .points
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                pts.join(" ")
            );
        }
        for &(x, y) in &s.points {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                sx(x),
                sy(y)
            );
        }
        let ly = TOP + 10.0 + 20.0 * i as f64;
        let lx = LEFT + pw + 15.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Reads a results table and renders `metric` against `x`.
pub fn chart(table: &Table, x: &str, metric: &str) -> Result<String, ChartError> {
    let s = series(table, x, metric)?;
    Ok(render(&s, x, metric))
}
