//! Minimal SVG renderer for result tables: one polyline per (statistic,
//! series) group, shard count on a log-scaled x axis, linear y axis.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::table::{stat, Row, Table};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 170.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 55.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

/// Statistics worth a curve. Bound diagnostics with per-point flags and the
/// optimum markers are left to the CSV.
const PLOTTED: [&str; 6] = [
    stat::RISK_MEAN,
    stat::TEST_MSE,
    stat::EFFICIENCY,
    stat::TOTAL_BOUND,
    stat::LOWER_BOUND,
    stat::UNIVERSAL_LOWER,
];

/// Legend label for a row: the model columns that vary across the table,
/// so single-series tables collapse to just the statistic name.
fn series_label(row: &Row, varying: &[&str]) -> String {
    let mut parts = vec![row.stat.clone()];
    for &col in varying {
        match col {
            "f" => {
                if let Some(f) = row.f {
                    parts.push(format!("F={f}"));
                }
            }
            "rho2" => {
                if let Some(v) = row.rho2 {
                    parts.push(format!("rho2={v}"));
                }
            }
            "eps" => {
                if let Some(v) = row.eps {
                    parts.push(format!("eps={v}"));
                }
            }
            "alpha" => {
                if let Some(v) = row.alpha {
                    parts.push(format!("alpha={v}"));
                }
            }
            "d" => parts.push(format!("d={}", row.d)),
            _ => {}
        }
    }
    parts.join(" ")
}

/// Which model columns distinguish series in this table.
fn varying_columns(rows: &[&Row]) -> Vec<&'static str> {
    let mut out = Vec::new();
    let distinct = |key: fn(&Row) -> String| -> usize {
        rows.iter().map(|r| key(r)).collect::<BTreeSet<_>>().len()
    };
    if distinct(|r| format!("{:?}", r.f)) > 1 {
        out.push("f");
    }
    if distinct(|r| format!("{:?}", r.rho2)) > 1 {
        out.push("rho2");
    }
    if distinct(|r| format!("{:?}", r.eps)) > 1 {
        out.push("eps");
    }
    if distinct(|r| format!("{:?}", r.alpha)) > 1 {
        out.push("alpha");
    }
    if distinct(|r| r.d.to_string()) > 1 {
        out.push("d");
    }
    out
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if (1e-3..1e5).contains(&a) {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        format!("{v:.2e}")
    }
}

/// Render the table's plottable series to a standalone SVG document.
pub fn render_svg(table: &Table) -> String {
    let rows: Vec<&Row> = table
        .rows
        .iter()
        .filter(|r| PLOTTED.contains(&r.stat.as_str()) && r.value.is_finite())
        .collect();
    let varying = varying_columns(&rows);

    // Group into named series, preserving first-appearance order.
    let mut order: Vec<String> = Vec::new();
    let mut series: std::collections::BTreeMap<String, Vec<(f64, f64)>> = Default::default();
    for r in &rows {
        let label = series_label(r, &varying);
        if !series.contains_key(&label) {
            order.push(label.clone());
        }
        series.entry(label).or_default().push((r.m as f64, r.value));
    }
    order.retain(|label| series[label].len() >= 2);

    let mut svg = String::new();
    let _ = write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">
<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>
"#
    );

    if order.is_empty() {
        let _ = write!(
            svg,
            r##"<text x="{}" y="{}" text-anchor="middle" fill="#444">no plottable series</text></svg>"##,
            WIDTH / 2.0,
            HEIGHT / 2.0
        );
        return svg;
    }

    let points: Vec<(f64, f64)> = order
        .iter()
        .flat_map(|l| series[l].iter().copied())
        .collect();
    let x_min = points.iter().map(|p| p.0.ln()).fold(f64::INFINITY, f64::min);
    let x_max = points.iter().map(|p| p.0.ln()).fold(f64::NEG_INFINITY, f64::max);
    let mut y_min = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let mut y_max = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    if y_min == y_max {
        y_min -= 0.5;
        y_max += 0.5;
    }
    let pad = 0.05 * (y_max - y_min);
    let (y_lo, y_hi) = (y_min - pad, y_max + pad);
    let x_span = if x_max > x_min { x_max - x_min } else { 1.0 };

    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = |m: f64| MARGIN_L + (m.ln() - x_min) / x_span * plot_w;
    let sy = |v: f64| MARGIN_T + (y_hi - v) / (y_hi - y_lo) * plot_h;

    // Frame.
    let _ = write!(
        svg,
        r##"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#333"/>
"##
    );

    // X ticks at the shard counts actually present (thinned to <= 12).
    let mut ms: Vec<f64> = points.iter().map(|p| p.0).collect();
    ms.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ms.dedup();
    let step = ms.len().div_ceil(12);
    for m in ms.iter().step_by(step.max(1)) {
        let x = sx(*m);
        let _ = write!(
            svg,
            r##"<line x1="{x:.1}" y1="{}" x2="{x:.1}" y2="{}" stroke="#333"/>
<text x="{x:.1}" y="{}" text-anchor="middle">{}</text>
"##,
            MARGIN_T + plot_h,
            MARGIN_T + plot_h + 5.0,
            MARGIN_T + plot_h + 20.0,
            m
        );
    }
    let _ = write!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">shards M (log scale)</text>
"#,
        MARGIN_L + plot_w / 2.0,
        HEIGHT - 12.0
    );

    // Y ticks: 5 evenly spaced.
    for k in 0..=4 {
        let v = y_lo + (y_hi - y_lo) * k as f64 / 4.0;
        let y = sy(v);
        let _ = write!(
            svg,
            r##"<line x1="{}" y1="{y:.1}" x2="{MARGIN_L}" y2="{y:.1}" stroke="#333"/>
<text x="{}" y="{:.1}" text-anchor="end">{}</text>
"##,
            MARGIN_L - 5.0,
            MARGIN_L - 9.0,
            y + 4.0,
            fmt_tick(v)
        );
    }

    // Curves + legend.
    for (i, label) in order.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut pts = series[label].clone();
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let path: Vec<String> = pts
            .iter()
            .map(|(m, v)| format!("{:.2},{:.2}", sx(*m), sy(*v)))
            .collect();
        let _ = write!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>
"#,
            path.join(" ")
        );
        for (m, v) in &pts {
            let _ = write!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>
"#,
                sx(*m),
                sy(*v)
            );
        }
        let ly = MARGIN_T + 14.0 + 16.0 * i as f64;
        let _ = write!(
            svg,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>
<text x="{}" y="{}">{}</text>
"#,
            WIDTH - MARGIN_R + 10.0,
            WIDTH - MARGIN_R + 30.0,
            WIDTH - MARGIN_R + 36.0,
            ly + 4.0,
            label
        );
    }

    svg.push_str("</svg>");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(stat_name: &str, m: usize, value: f64, f: Option<usize>) -> Row {
        Row {
            preset: "custom".into(),
            n: 200,
            d: 600,
            m,
            f,
            rho2: None,
            eps: None,
            alpha: None,
            snr: None,
            tau: 1.0,
            rep_count: 10,
            stat: stat_name.into(),
            value,
            stderr: None,
            valid_flags: String::new(),
            seed: 0,
            config_hash: "x".into(),
        }
    }

    #[test]
    fn renders_polylines_for_plottable_series() {
        let mut t = Table::new(Vec::new());
        for (m, v) in [(1, 1.0), (2, 0.8), (4, 0.9)] {
            t.rows.push(row(stat::RISK_MEAN, m, v, Some(100)));
            t.rows.push(row(stat::RISK_MEAN, m, v * 1.1, Some(200)));
            t.rows.push(row(stat::COND_BIAS, m, v, Some(100)));
        }
        let svg = render_svg(&t);
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("F=100"));
        assert!(svg.contains("F=200"));
        // Non-plotted diagnostics stay out of the legend.
        assert!(!svg.contains(stat::COND_BIAS));
    }

    #[test]
    fn single_series_label_is_just_the_stat() {
        let mut t = Table::new(Vec::new());
        for (m, v) in [(1, 1.0), (2, 0.5)] {
            t.rows.push(row(stat::TEST_MSE, m, v, None));
        }
        let svg = render_svg(&t);
        assert!(svg.contains(">test_mse<"));
    }

    #[test]
    fn empty_table_renders_placeholder() {
        let t = Table::new(Vec::new());
        let svg = render_svg(&t);
        assert!(svg.contains("no plottable series"));
        assert!(!svg.contains("<polyline"));
    }

    #[test]
    fn groups_smaller_than_two_points_are_dropped() {
        let mut t = Table::new(Vec::new());
        t.rows.push(row(stat::RISK_MEAN, 1, 1.0, None));
        let svg = render_svg(&t);
        assert!(svg.contains("no plottable series"));
    }
}
