//! Static SVG line plots of polarization traces.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::csv::Column;
use crate::error::{CliError, CliResult};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 60.0;

/// Stroke color and dash pattern per series, cycled.
const STYLES: [(&str, &str); 6] = [
    ("#000000", ""),
    ("#d62728", "6 3"),
    ("#2ca02c", "2 3"),
    ("#c55fd1", "8 3 2 3"),
    ("#1f77b4", "4 2"),
    ("#ff7f0e", "1 2"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct PlotStyle {
    /// Unit shown as `t [1/<unit>]`.
    pub time_unit: String,
    /// Times are multiplied by this before plotting.
    pub time_scale: f64,
    pub title: Option<String>,
}

impl Default for PlotStyle {
    fn default() -> Self {
        PlotStyle {
            time_unit: "b_x".into(),
            time_scale: 1.0,
            title: None,
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Round tick spacing giving roughly `target` intervals over `span`.
fn tick_step(span: f64, target: f64) -> f64 {
    let raw = span / target;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag)
}

/// Renders `series` over `times` as a standalone SVG document. Polarization
/// values are clamped to `[-1, 1]`.
pub fn render_svg(times: &[f64], series: &[Column], style: &PlotStyle) -> CliResult<String> {
    if series.is_empty() {
        return Err(CliError::config(
            "output.svg",
            "plot needs at least one trace",
        ));
    }
    if times.len() < 2 || series.iter().any(|s| s.values.len() != times.len()) {
        return Err(CliError::Core(qpar::Error::GridMismatch));
    }
    let x_max = times.last().copied().unwrap_or(1.0) * style.time_scale;
    let x_min = times[0] * style.time_scale;
    let x_span = if x_max > x_min { x_max - x_min } else { 1.0 };
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |t: f64| LEFT + (t * style.time_scale - x_min) / x_span * plot_w;
    let py = |p: f64| TOP + (1.0 - p.clamp(-1.0, 1.0)) / 2.0 * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"##
    );
    let _ = writeln!(
        s,
        r##"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"##
    );
    if let Some(title) = &style.title {
        let _ = writeln!(s, r##"<title>{}</title>"##, escape(title));
    }

    // Axes box, ticks and the zero gridline.
    let _ = writeln!(
        s,
        r##"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#444"/>"##
    );
    for k in 0..=4 {
        let p = 1.0 - 0.5 * k as f64;
        let y = py(p);
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="#444"/><text x="{:.2}" y="{:.2}" text-anchor="end">{p}</text>"##,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0
        );
    }
    let y0 = py(0.0);
    let _ = writeln!(
        s,
        r##"<line class="zero" x1="{LEFT}" y1="{y0:.2}" x2="{:.2}" y2="{y0:.2}" stroke="#999" stroke-dasharray="3 3"/>"##,
        LEFT + plot_w
    );
    let step = tick_step(x_span, 6.0);
    let mut tick = (x_min / step).ceil() * step;
    while tick <= x_max + 1e-9 * step {
        let x = LEFT + (tick - x_min) / x_span * plot_w;
        let y = TOP + plot_h;
        let digits = if step >= 1.0 {
            0
        } else {
            (-step.log10().floor()) as usize
        };
        let label = format!("{tick:.digits$}");
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{y:.2}" x2="{x:.2}" y2="{:.2}" stroke="#444"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{label}</text>"##,
            y + 5.0,
            y + 18.0
        );
        tick += step;
    }
    let _ = writeln!(
        s,
        r##"<text x="{:.2}" y="{:.2}" text-anchor="middle">t [1/{}]</text>"##,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0,
        escape(&style.time_unit)
    );
    let _ = writeln!(
        s,
        r##"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">P(t)</text>"##,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    for (k, col) in series.iter().enumerate() {
        let (color, dash) = STYLES[k % STYLES.len()];
        let mut points = String::with_capacity(times.len() * 16);
        for (t, p) in times.iter().zip(&col.values) {
            let _ = write!(points, "{:.2},{:.2} ", px(*t), py(*p));
        }
        let dash_attr = if dash.is_empty() {
            String::new()
        } else {
            format!(r##" stroke-dasharray="{dash}""##)
        };
        let _ = writeln!(
            s,
            r##"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash_attr} points="{}"><title>{}</title></polyline>"##,
            points.trim_end(),
            escape(&col.name)
        );
    }

    // Legend, top right inside the axes.
    let lx = LEFT + plot_w - 190.0;
    for (k, col) in series.iter().enumerate() {
        let (color, dash) = STYLES[k % STYLES.len()];
        let y = TOP + 16.0 + 16.0 * k as f64;
        let _ = writeln!(
            s,
            r##"<line x1="{lx:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="1.5" stroke-dasharray="{dash}"/><text x="{:.2}" y="{:.2}">{}</text>"##,
            lx + 24.0,
            lx + 30.0,
            y + 4.0,
            escape(&col.name)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_svg_plot(
    path: &Path,
    times: &[f64],
    series: &[Column],
    style: &PlotStyle,
) -> CliResult<()> {
    let doc = render_svg(times, series, style)?;
    fs::write(path, doc).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn times(n: usize) -> Vec<f64> {
        (0..n).map(|k| k as f64 * 0.5).collect()
    }

    #[test]
    fn one_trace_one_polyline() {
        let doc = render_svg(
            &times(5),
            &[Column::new("ensemble", vec![1.0, 0.5, 0.0, -0.5, -1.0])],
            &PlotStyle::default(),
        )
        .unwrap();
        assert_eq!(doc.matches("<polyline").count(), 1);
        assert!(doc.starts_with("<svg xmlns=\"http://www.w3.org/2000/svg\""));
        assert!(doc.trim_end().ends_with("</svg>"));
        assert!(doc.contains("t [1/b_x]"));
        assert!(doc.contains(">P(t)<"));
        assert!(doc.contains("ensemble"));
    }

    #[test]
    fn values_are_clamped_and_zero_line_drawn() {
        let doc = render_svg(
            &times(3),
            &[Column::new("P", vec![1.5, 0.0, -3.0])],
            &PlotStyle::default(),
        )
        .unwrap();
        let top = TOP;
        let bottom = HEIGHT - BOTTOM;
        let mid = (top + bottom) / 2.0;
        assert!(doc.contains(&format!(",{top:.2} ")));
        assert!(doc.contains(&format!(",{bottom:.2}\"")));
        assert!(doc.contains(&format!(r##"class="zero" x1="{LEFT}" y1="{mid:.2}""##)));
    }

    #[test]
    fn compare_series_are_distinguishable() {
        let t = times(4);
        let cols = [
            Column::new("P_ens", vec![1.0, 0.5, 0.2, 0.1]),
            Column::new("P_pure", vec![1.0, 0.6, 0.1, 0.0]),
            Column::new("residual", vec![0.0, 0.05, -0.05, -0.05]),
        ];
        let style = PlotStyle {
            time_unit: "σ".into(),
            ..PlotStyle::default()
        };
        let doc = render_svg(&t, &cols, &style).unwrap();
        assert_eq!(doc.matches("<polyline").count(), 3);
        for (color, _) in &STYLES[..3] {
            assert!(doc.contains(&format!(r##"<polyline fill="none" stroke="{color}""##)));
        }
        assert!(doc.contains("t [1/σ]"));
    }

    #[test]
    fn rejects_empty_and_mismatched() {
        assert!(render_svg(&times(3), &[], &PlotStyle::default()).is_err());
        assert!(render_svg(
            &times(3),
            &[Column::new("P", vec![0.0; 2])],
            &PlotStyle::default()
        )
        .is_err());
    }

    #[test]
    fn tick_steps_are_round() {
        assert_eq!(tick_step(60.0, 6.0), 10.0);
        assert_eq!(tick_step(1.5, 6.0), 0.5);
        assert_eq!(tick_step(7.0, 6.0), 2.0);
    }
}
