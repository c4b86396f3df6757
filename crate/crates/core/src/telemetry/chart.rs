use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.into(),
            points,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChartAxes {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const TICKS: usize = 5;

const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];
const DASHES: [&str; 4] = ["none", "6,3", "2,2", "8,3,2,3"];

fn style(i: usize) -> (&'static str, &'static str) {
    (
        COLORS[i % COLORS.len()],
        DASHES[(i / COLORS.len() + i) % DASHES.len()],
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Renders the series as a standalone SVG 1.1 document.
///
/// With `log_y` every y value must be positive.
pub fn render_line_chart_svg(series: &[Series], axes: &ChartAxes) -> Result<String> {
    if series.is_empty() || series.iter().any(|s| s.points.is_empty()) {
        return Err(Error::Empty("chart series"));
    }
    let all = series.iter().flat_map(|s| s.points.iter().copied());
    if all.clone().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::InvalidArgument("chart points must be finite".into()));
    }
    if axes.log_y && all.clone().any(|(_, y)| y <= 0.0) {
        return Err(Error::InvalidArgument(
            "log-scale chart needs positive y values".into(),
        ));
    }
    let ty = |y: f64| if axes.log_y { y.log10() } else { y };
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for (x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(ty(y));
        y1 = y1.max(ty(y));
    }
    if x1 == x0 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 == y0 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * plot_w;
    let py = |y: f64| TOP + plot_h - (ty(y) - y0) / (y1 - y0) * plot_h;

    let mut svg = String::new();
    let w = &mut svg;
    let _ = writeln!(w, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        w,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        LEFT + plot_w / 2.0,
        escape(&axes.title)
    );
    let _ = writeln!(
        w,
        r##"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#444"/>"##
    );

    for k in 0..=TICKS {
        let f = k as f64 / TICKS as f64;
        let xv = x0 + f * (x1 - x0);
        let gx = px(xv);
        let _ = writeln!(
            w,
            r##"<line x1="{gx:.2}" y1="{:.2}" x2="{gx:.2}" y2="{:.2}" stroke="#444"/>"##,
            TOP + plot_h,
            TOP + plot_h + 5.0
        );
        let _ = writeln!(
            w,
            r#"<text x="{gx:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + plot_h + 20.0,
            tick_label(xv)
        );
        let yt = y0 + f * (y1 - y0);
        let gy = TOP + plot_h - f * plot_h;
        let shown = if axes.log_y { 10f64.powf(yt) } else { yt };
        let _ = writeln!(
            w,
            r##"<line x1="{:.2}" y1="{gy:.2}" x2="{LEFT}" y2="{gy:.2}" stroke="#444"/>"##,
            LEFT - 5.0
        );
        let _ = writeln!(
            w,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 8.0,
            gy + 4.0,
            tick_label(shown)
        );
    }
    let _ = writeln!(
        w,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0,
        escape(&axes.x_label)
    );
    let y_label = if axes.log_y {
        format!("{} (log scale)", axes.y_label)
    } else {
        axes.y_label.clone()
    };
    let _ = writeln!(
        w,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        escape(&y_label)
    );

    for (i, s) in series.iter().enumerate() {
        let (color, dash) = style(i);
        let coords: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            w,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" stroke-dasharray="{dash}" points="{}"/>"#,
            coords.join(" ")
        );
        let ly = TOP + 10.0 + 20.0 * i as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            w,
            r#"<line x1="{lx}" y1="{ly}" x2="{:.1}" y2="{ly}" stroke="{color}" stroke-width="1.5" stroke-dasharray="{dash}"/>"#,
            lx + 30.0
        );
        let _ = writeln!(
            w,
            r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 36.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    let _ = writeln!(w, "</svg>");
    Ok(svg)
}

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e5).contains(&a) {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" {
            "0".to_string()
        } else {
            s.to_string()
        }
    }
}

/// Writes [`render_line_chart_svg`] output to `path`.
pub fn render_line_chart(
    series: &[Series],
    axes: &ChartAxes,
    path: impl AsRef<Path>,
) -> Result<()> {
    let svg = render_line_chart_svg(series, axes)?;
    let path = path.as_ref();
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_two_point_series() {
        let svg = render_line_chart_svg(
            &[Series::new("a", vec![(0.0, 1.0), (1.0, 2.0)])],
            &ChartAxes::default(),
        )
        .unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
        let pts = svg
            .split("points=\"")
            .nth(1)
            .unwrap()
            .split('"')
            .next()
            .unwrap();
        assert_eq!(pts.split(' ').count(), 2);
    }

    #[test]
    fn legend_entries_have_distinct_styles() {
        let s = [
            Series::new("adam", vec![(0.0, 1.0), (1.0, 2.0)]),
            Series::new("adamnorm", vec![(0.0, 2.0), (1.0, 3.0)]),
        ];
        let svg = render_line_chart_svg(&s, &ChartAxes::default()).unwrap();
        assert!(svg.contains(">adam</text>") && svg.contains(">adamnorm</text>"));
        assert_ne!(style(0), style(1));
        let strokes: Vec<&str> = svg
            .lines()
            .filter(|l| l.starts_with("<polyline"))
            .map(|l| {
                l.split("stroke=\"")
                    .nth(1)
                    .unwrap()
                    .split('"')
                    .next()
                    .unwrap()
            })
            .collect();
        assert_eq!(strokes.len(), 2);
        assert_ne!(strokes[0], strokes[1]);
    }

    #[test]
    fn styles_stay_distinct_past_the_palette() {
        let styles: Vec<_> = (0..16).map(style).collect();
        for i in 0..styles.len() {
            for j in i + 1..styles.len() {
                assert_ne!(styles[i], styles[j], "{i} vs {j}");
            }
        }
    }

    #[test]
    fn log_axis_rejects_non_positive() {
        let axes = ChartAxes {
            log_y: true,
            ..Default::default()
        };
        assert!(render_line_chart_svg(&[Series::new("a", vec![(0.0, 0.0)])], &axes).is_err());
        assert!(
            render_line_chart_svg(&[Series::new("a", vec![(0.0, 1e-3), (1.0, 10.0)])], &axes)
                .is_ok()
        );
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(render_line_chart_svg(&[], &ChartAxes::default()).is_err());
        assert!(render_line_chart_svg(&[Series::new("a", vec![])], &ChartAxes::default()).is_err());
    }
}
