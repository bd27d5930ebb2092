//! Minimal SVG plotter for the CSV files the runners write.

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PlotError {
    #[error("column `{0}` not found in CSV header")]
    MissingColumn(String),
    #[error("row {row}: column `{column}`: {message}")]
    BadValue {
        row: usize,
        column: String,
        message: String,
    },
    #[error("CSV error: {0}")]
    Csv(String),
    #[error("no plottable rows")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Kind {
    #[default]
    Scatter,
    Line,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlotSpec {
    pub x: String,
    pub y: String,
    pub x_scale: Scale,
    pub y_scale: Scale,
    pub kind: Kind,
    pub title: Option<String>,
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 70.0;
const TARGET_TICKS: f64 = 10.0;

/// Renders columns `spec.x` and `spec.y` of `csv_text` as an SVG document.
/// Rows with an empty cell in either column are skipped.
pub fn emit_plot_svg(csv_text: &str, spec: &PlotSpec) -> Result<String, PlotError> {
    let points = read_points(csv_text, spec)?;
    if points.is_empty() {
        return Err(PlotError::Empty);
    }
    let xs = Axis::new(points.iter().map(|p| p.0), spec.x_scale);
    let ys = Axis::new(points.iter().map(|p| p.1), spec.y_scale);
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);
    let px = |v: f64| x0 + xs.frac(v) * (x1 - x0);
    let py = |v: f64| y0 + ys.frac(v) * (y1 - y0);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let title = spec
        .title
        .clone()
        .unwrap_or_else(|| format!("{} vs {}", spec.y, spec.x));
    let _ = writeln!(
        s,
        r#"<text x="{}" y="28" text-anchor="middle" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        escape(&title)
    );

    let _ = writeln!(s, r#"<g stroke="black" stroke-width="1">"#);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/>"#);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/>"#);
    for t in &xs.ticks {
        let x = px(t.value);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{:.2}"/>"#,
            y0 + 5.0
        );
    }
    for t in &ys.ticks {
        let y = py(t.value);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0}" y2="{y:.2}"/>"#,
            x0 - 5.0
        );
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g fill="black">"#);
    for t in &xs.ticks {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            px(t.value),
            y0 + 20.0,
            escape(&t.label)
        );
    }
    for t in &ys.ticks {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 8.0,
            py(t.value) + 4.0,
            escape(&t.label)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 20.0,
        escape(&spec.x)
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(&spec.y)
    );
    let _ = writeln!(s, "</g>");

    match spec.kind {
        Kind::Scatter => {
            let _ = writeln!(s, r#"<g fill="steelblue">"#);
            for &(x, y) in &points {
                let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3"/>"#, px(x), py(y));
            }
            let _ = writeln!(s, "</g>");
        }
        Kind::Line => {
            let coords: Vec<String> = points
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/>"#,
                coords.join(" ")
            );
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn read_points(csv_text: &str, spec: &PlotSpec) -> Result<Vec<(f64, f64)>, PlotError> {
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| PlotError::Csv(e.to_string()))?
        .clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| PlotError::MissingColumn(name.to_string()))
    };
    let (ix, iy) = (find(&spec.x)?, find(&spec.y)?);
    let mut points = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| PlotError::Csv(e.to_string()))?;
        let (Some(sx), Some(sy)) = (record.get(ix), record.get(iy)) else {
            continue;
        };
        if sx.trim().is_empty() || sy.trim().is_empty() {
            continue;
        }
        let x = parse_cell(sx, row, &spec.x, spec.x_scale)?;
        let y = parse_cell(sy, row, &spec.y, spec.y_scale)?;
        points.push((x, y));
    }
    Ok(points)
}

fn parse_cell(cell: &str, row: usize, column: &str, scale: Scale) -> Result<f64, PlotError> {
    let bad = |message: String| PlotError::BadValue {
        row,
        column: column.to_string(),
        message,
    };
    let v: f64 = cell
        .trim()
        .parse()
        .map_err(|_| bad(format!("not a number: {cell:?}")))?;
    if !v.is_finite() {
        return Err(bad(format!("not finite: {cell:?}")));
    }
    if scale == Scale::Log && v <= 0.0 {
        return Err(bad(format!("value {v} cannot be shown on a log axis")));
    }
    Ok(v)
}

struct Tick {
    value: f64,
    label: String,
}

struct Axis {
    scale: Scale,
    /// Axis limits in transformed units (log10 for log axes).
    lo: f64,
    hi: f64,
    ticks: Vec<Tick>,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>, scale: Scale) -> Axis {
        let t = |v: f64| match scale {
            Scale::Linear => v,
            Scale::Log => v.log10(),
        };
        let (min, max) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(t(v)), b.max(t(v)))
        });
        match scale {
            Scale::Log => {
                let lo = min.floor();
                let mut hi = max.ceil();
                if hi <= lo {
                    hi = lo + 1.0;
                }
                let stride = ((hi - lo) / TARGET_TICKS).ceil().max(1.0);
                let mut ticks = Vec::new();
                let mut k = lo;
                while k <= hi + 1e-9 {
                    ticks.push(Tick {
                        value: 10f64.powf(k),
                        label: format!("1e{}", k as i64),
                    });
                    k += stride;
                }
                Axis {
                    scale,
                    lo,
                    hi,
                    ticks,
                }
            }
            Scale::Linear => {
                let (mut min, mut max) = (min, max);
                if max <= min {
                    let pad = if min == 0.0 { 0.5 } else { min.abs() * 0.1 };
                    min -= pad;
                    max += pad;
                }
                let step = nice_step((max - min) / TARGET_TICKS);
                let lo = (min / step).floor() * step;
                let hi = (max / step).ceil() * step;
                let decimals = (-step.log10().floor()).max(0.0) as usize;
                let n = ((hi - lo) / step).round() as i64;
                let ticks = (0..=n)
                    .map(|i| {
                        let value = lo + i as f64 * step;
                        let label = format!("{value:.decimals$}");
                        let label = if label
                            .trim_start_matches('-')
                            .chars()
                            .all(|c| c == '0' || c == '.')
                        {
                            format!("{:.decimals$}", 0.0)
                        } else {
                            label
                        };
                        Tick { value, label }
                    })
                    .collect();
                Axis {
                    scale,
                    lo,
                    hi,
                    ticks,
                }
            }
        }
    }

    /// Position of `v` along the axis in [0, 1].
    fn frac(&self, v: f64) -> f64 {
        let t = match self.scale {
            Scale::Linear => v,
            Scale::Log => v.log10(),
        };
        (t - self.lo) / (self.hi - self.lo)
    }
}

/// Smallest of 1, 2, 5 times a power of ten that is at least `raw`.
fn nice_step(raw: f64) -> f64 {
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|&s| s >= raw * (1.0 - 1e-12))
        .unwrap_or(10.0 * mag)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(x: &str, y: &str) -> PlotSpec {
        PlotSpec {
            x: x.into(),
            y: y.into(),
            ..Default::default()
        }
    }

    #[test]
    fn nice_steps() {
        assert_eq!(nice_step(0.1), 0.1);
        assert_eq!(nice_step(0.13), 0.2);
        assert_eq!(nice_step(3.0), 5.0);
        assert_eq!(nice_step(7.0), 10.0);
    }

    #[test]
    fn linear_axis_has_about_ten_ticks() {
        let axis = Axis::new([0.03, 9.7].into_iter(), Scale::Linear);
        assert!((8..=13).contains(&axis.ticks.len()), "{}", axis.ticks.len());
        assert_eq!(axis.ticks[0].label, "0");
        assert_eq!(axis.ticks.last().unwrap().label, "10");
    }

    #[test]
    fn log_axis_ticks_at_decades() {
        let axis = Axis::new([0.02, 300.0].into_iter(), Scale::Log);
        let labels: Vec<&str> = axis.ticks.iter().map(|t| t.label.as_str()).collect();
        assert_eq!(labels, ["1e-2", "1e-1", "1e0", "1e1", "1e2", "1e3"]);
    }

    #[test]
    fn escapes_title() {
        let mut s = spec("a", "b");
        s.title = Some("x < y & z".into());
        let svg = emit_plot_svg("a,b\n1,2\n", &s).unwrap();
        assert!(svg.contains("x &lt; y &amp; z"));
    }

    #[test]
    fn skips_empty_cells_and_rejects_text() {
        let svg = emit_plot_svg("a,b\n1,2\n2,\n3,4\n", &spec("a", "b")).unwrap();
        assert_eq!(svg.matches("<circle").count(), 2);
        assert!(matches!(
            emit_plot_svg("a,b\n1,x\n", &spec("a", "b")),
            Err(PlotError::BadValue { row: 1, .. })
        ));
        assert_eq!(
            emit_plot_svg("a,b\n", &spec("a", "b")),
            Err(PlotError::Empty)
        );
    }
}
