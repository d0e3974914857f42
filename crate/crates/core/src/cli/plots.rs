//! Static SVG plots: dataset histograms and a per-model radar chart.

use std::fmt::Write;

use crate::dataset::{DatasetSummary, Histogram};
use crate::scoring::{Leaderboard, Metric};

const PALETTE: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Vertical bar chart with one labelled bar per entry.
pub fn bar_chart(title: &str, x_label: &str, bars: &[(String, usize)]) -> String {
    let (w, h) = (640.0, 360.0);
    let (left, right, top, bottom) = (50.0, 20.0, 40.0, 70.0);
    let plot_w = w - left - right;
    let plot_h = h - top - bottom;
    let max = bars.iter().map(|b| b.1).max().unwrap_or(0).max(1) as f64;
    let slot = plot_w / bars.len().max(1) as f64;

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, w / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<line x1="{left}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        top + plot_h,
        left + plot_w,
        top + plot_h
    );
    let _ = writeln!(s, r#"<line x1="{left}" y1="{top}" x2="{left}" y2="{}" stroke="black"/>"#, top + plot_h);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, left - 4.0, top + 4.0, max as usize);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">0</text>"#, left - 4.0, top + plot_h);
    for (i, (label, count)) in bars.iter().enumerate() {
        let bh = plot_h * *count as f64 / max;
        let x = left + i as f64 * slot;
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
            x + slot * 0.1,
            top + plot_h - bh,
            slot * 0.8,
            bh,
            PALETTE[0]
        );
        let (lx, ly) = (x + slot / 2.0, top + plot_h + 12.0);
        let _ = writeln!(
            s,
            r#"<text x="{lx:.2}" y="{ly:.2}" text-anchor="end" transform="rotate(-45 {lx:.2} {ly:.2})">{}</text>"#,
            escape(label)
        );
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, left + plot_w / 2.0, h - 6.0, escape(x_label));
    s.push_str("</svg>\n");
    s
}

fn histogram_bars(h: &Histogram, decimals: usize) -> Vec<(String, usize)> {
    h.counts
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let lo = i as f64 * h.bin_width;
            (format!("{lo:.decimals$}-{:.decimals$}", lo + h.bin_width), *c)
        })
        .collect()
}

/// File name and SVG for each dataset plot.
pub fn dataset_plots(summary: &DatasetSummary) -> Vec<(&'static str, String)> {
    let cats: Vec<(String, usize)> = summary.categories.iter().map(|(k, v)| (k.clone(), *v)).collect();
    let subs: Vec<(String, usize)> = summary.subcategories.iter().map(|(k, v)| (k.clone(), *v)).collect();
    vec![
        ("categories.svg", bar_chart("Videos per category", "category", &cats)),
        ("subcategories.svg", bar_chart("Videos per subcategory", "subcategory", &subs)),
        (
            "duration.svg",
            bar_chart("Video duration", "seconds", &histogram_bars(&summary.duration_seconds, 0)),
        ),
        (
            "caption_length.svg",
            bar_chart("Caption length", "characters", &histogram_bars(&summary.caption_length, 0)),
        ),
        (
            "aesthetic.svg",
            bar_chart("Aesthetic score", "normalized score", &histogram_bars(&summary.aesthetic_score, 1)),
        ),
    ]
}

/// Radar chart of the nine normalized metrics, one polygon per model.
pub fn radar_chart(board: &Leaderboard) -> String {
    let (w, h) = (640.0, 560.0);
    let (cx, cy, r) = (320.0, 290.0, 200.0);
    let n = Metric::ALL.len();
    let point = |axis: usize, value: f64| {
        let a = -std::f64::consts::FRAC_PI_2 + 2.0 * std::f64::consts::PI * axis as f64 / n as f64;
        (cx + r * value * a.cos(), cy + r * value * a.sin())
    };
    let polygon = |pts: &[(f64, f64)]| pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect::<Vec<_>>().join(" ");

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    for ring in [0.2, 0.4, 0.6, 0.8, 1.0] {
        let pts: Vec<_> = (0..n).map(|i| point(i, ring)).collect();
        let _ = writeln!(s, r##"<polygon points="{}" fill="none" stroke="#cccccc"/>"##, polygon(&pts));
    }
    for (i, m) in Metric::ALL.iter().enumerate() {
        let (x, y) = point(i, 1.0);
        let _ = writeln!(s, r##"<line x1="{cx}" y1="{cy}" x2="{x:.2}" y2="{y:.2}" stroke="#cccccc"/>"##);
        let (lx, ly) = point(i, 1.12);
        let _ = writeln!(s, r#"<text x="{lx:.2}" y="{ly:.2}" text-anchor="middle">{}</text>"#, m.key());
    }
    for (k, row) in board.rows.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<_> = Metric::ALL
            .iter()
            .enumerate()
            .map(|(i, m)| point(i, row.metrics_normalized.get(*m).unwrap_or(0.0).clamp(0.0, 1.0)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polygon points="{}" fill="{color}" fill-opacity="0.12" stroke="{color}" stroke-width="1.5"/>"#,
            polygon(&pts)
        );
        let ly = 20.0 + 16.0 * k as f64;
        let _ = writeln!(s, r#"<rect x="12" y="{:.2}" width="10" height="10" fill="{color}"/>"#, ly - 9.0);
        let _ = writeln!(s, r#"<text x="28" y="{ly:.2}">{}</text>"#, escape(&row.model));
    }
    s.push_str("</svg>\n");
    s
}
