use std::fmt::Write;

use crate::model::{AdCategory, ExposureTable};

pub const CANVAS_W: f64 = 960.0;
pub const CANVAS_H: f64 = 540.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 90.0;
pub const PLOT_W: f64 = CANVAS_W - LEFT - RIGHT;
pub const PLOT_H: f64 = CANVAS_H - TOP - BOTTOM;
/// Y coordinate of the horizontal axis.
pub const BASELINE: f64 = TOP + PLOT_H;

const COLORS: [&str; 4] = ["#d95f02", "#7570b3", "#e7298a", "#999999"];

/// Value plotted per (group, category).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BarMetric {
    /// Percentage of the group's images containing the category.
    ImagePct,
    /// Percentage of the category's ads located in the group.
    AdSharePct,
}

impl BarMetric {
    fn label(self) -> &'static str {
        match self {
            BarMetric::ImagePct => "% of images with category",
            BarMetric::AdSharePct => "% of category ads in group",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bar {
    pub group: String,
    pub category: AdCategory,
    pub value: f64,
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

/// Smallest 1, 2 or 5 times a power of ten not below `v`; 1 for `v <= 0`.
pub fn axis_max(v: f64) -> f64 {
    if v <= 0.0 {
        return 1.0;
    }
    let p = 10f64.powf(v.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * p)
        .find(|&c| c >= v)
        .unwrap_or(10.0 * p)
}

/// Bars in table order (groups as given, categories in canonical order).
pub fn bar_layout(table: &ExposureTable, metric: BarMetric) -> (f64, Vec<Bar>) {
    let value = |r: &crate::model::ExposureRow, c: AdCategory| match metric {
        BarMetric::ImagePct => r.get(c).image_pct,
        BarMetric::AdSharePct => r.get(c).ad_share_pct,
    };
    let max = table
        .rows
        .iter()
        .flat_map(|r| AdCategory::ALL.map(|c| value(r, c)))
        .fold(0.0, f64::max);
    let top = axis_max(max);
    let n = table.rows.len().max(1) as f64;
    let slot = PLOT_W / n;
    let bar_w = slot * 0.8 / 4.0;
    let mut bars = Vec::new();
    for (g, r) in table.rows.iter().enumerate() {
        for (k, c) in AdCategory::ALL.into_iter().enumerate() {
            let v = value(r, c);
            let h = v / top * PLOT_H;
            bars.push(Bar {
                group: r.group.clone(),
                category: c,
                value: v,
                x: LEFT + g as f64 * slot + slot * 0.1 + k as f64 * bar_w,
                y: BASELINE - h,
                width: bar_w,
                height: h,
            });
        }
    }
    (top, bars)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Grouped bar chart on a fixed 960x540 canvas.
pub fn emit_svg_bars(table: &ExposureTable, metric: BarMetric) -> String {
    let (top, bars) = bar_layout(table, metric);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS_W}" height="{CANVAS_H}" viewBox="0 0 {CANVAS_W} {CANVAS_H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{CANVAS_W}" height="{CANVAS_H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" font-size="14" text-anchor="middle">{} by {}</text>"#,
        CANVAS_W / 2.0,
        metric.label(),
        table.group_by
    );
    for i in 0..=5 {
        let v = top * i as f64 / 5.0;
        let y = BASELINE - PLOT_H * i as f64 / 5.0;
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##,
            LEFT + PLOT_W
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.2}</text>"#,
            LEFT - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT:.2}" y1="{BASELINE:.2}" x2="{:.2}" y2="{BASELINE:.2}" stroke="black"/>"#,
        LEFT + PLOT_W
    );
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT:.2}" y1="{TOP:.2}" x2="{LEFT:.2}" y2="{BASELINE:.2}" stroke="black"/>"#
    );
    for b in &bars {
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"><title>{} {}: {:.2}</title></rect>"#,
            b.x,
            b.y,
            b.width,
            b.height,
            COLORS[b.category.index()],
            escape(&b.group),
            b.category,
            b.value
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="8" text-anchor="middle">{:.2}</text>"#,
            b.x + b.width / 2.0,
            b.y - 3.0,
            b.value
        );
    }
    for (g, r) in table.rows.iter().enumerate() {
        let slot = PLOT_W / table.rows.len() as f64;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            LEFT + (g as f64 + 0.5) * slot,
            BASELINE + 16.0,
            escape(&r.group)
        );
    }
    for (k, c) in AdCategory::ALL.into_iter().enumerate() {
        let x = LEFT + k as f64 * 120.0;
        let y = CANVAS_H - 30.0;
        let _ = writeln!(
            s,
            r#"<rect x="{x:.2}" y="{:.2}" width="12" height="12" fill="{}"/><text x="{:.2}" y="{y:.2}">{c}</text>"#,
            y - 10.0,
            COLORS[k],
            x + 16.0
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CategoryExposure, ExposureRow, GroupBy};

    fn table(rows: &[(&str, [f64; 4])]) -> ExposureTable {
        ExposureTable {
            group_by: GroupBy::Decile,
            rows: rows
                .iter()
                .map(|(g, pct)| ExposureRow {
                    group: g.to_string(),
                    image_total: 10,
                    categories: std::array::from_fn(|c| CategoryExposure {
                        image_pct: pct[c],
                        ..Default::default()
                    }),
                })
                .collect(),
        }
    }

    #[test]
    fn axis_rounding() {
        assert_eq!(axis_max(0.0), 1.0);
        assert_eq!(axis_max(20.0), 20.0);
        assert_eq!(axis_max(21.0), 50.0);
        assert_eq!(axis_max(0.37), 0.5);
        assert_eq!(axis_max(73.0), 100.0);
    }

    #[test]
    fn single_bar_height() {
        let t = table(&[("1", [20.0, 0.0, 0.0, 0.0])]);
        let (top, bars) = bar_layout(&t, BarMetric::ImagePct);
        assert_eq!(top, 20.0);
        assert_eq!(bars.len(), 4);
        assert_eq!(bars[0].height, PLOT_H);
        assert_eq!(bars[0].y, BASELINE - PLOT_H);
        assert!(emit_svg_bars(&t, BarMetric::ImagePct).contains(">20.00<"));

        let t = table(&[("1", [20.0, 0.0, 0.0, 0.0]), ("2", [5.0, 40.0, 0.0, 0.0])]);
        let (top, bars) = bar_layout(&t, BarMetric::ImagePct);
        assert_eq!(top, 50.0);
        assert!((bars[0].height - PLOT_H * 20.0 / 50.0).abs() < 1e-12);
    }

    #[test]
    fn all_zero_table() {
        let t = table(&[("1", [0.0; 4]), ("2", [0.0; 4])]);
        let (_, bars) = bar_layout(&t, BarMetric::ImagePct);
        assert!(bars.iter().all(|b| b.height == 0.0));
        let svg = emit_svg_bars(&t, BarMetric::ImagePct);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains(r#"stroke="black""#));
    }

    #[test]
    fn deterministic_and_ordered() {
        let t = table(&[("1", [3.0, 1.0, 0.5, 9.0]), ("2", [2.0, 0.0, 0.0, 3.0])]);
        assert_eq!(emit_svg_bars(&t, BarMetric::ImagePct), emit_svg_bars(&t, BarMetric::ImagePct));
        let (_, bars) = bar_layout(&t, BarMetric::ImagePct);
        assert!(bars.windows(2).all(|w| w[0].x < w[1].x));
    }
}
