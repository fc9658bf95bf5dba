//! Minimal deterministic SVG line and bar charts.

use std::fmt::Write;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ChartError {
    #[error("no series to plot")]
    Empty,
    #[error("series {0:?} has no points")]
    EmptySeries(String),
    #[error("series {0:?} has a non-finite value")]
    NonFinite(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series {
            label: label.into(),
            points,
        }
    }

    /// Points at x = 0, 1, 2, ...
    pub fn indexed(label: impl Into<String>, values: &[f64]) -> Self {
        Series::new(label, values.iter().enumerate().map(|(i, &v)| (i as f64, v)).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartOptions {
    pub width: u32,
    pub height: u32,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Categorical tick labels at x = 0, 1, 2, ... replacing numeric ticks.
    pub x_categories: Option<Vec<String>>,
}

impl Default for ChartOptions {
    fn default() -> Self {
        ChartOptions {
            width: 800,
            height: 480,
            title: String::new(),
            x_label: String::new(),
            y_label: String::new(),
            x_categories: None,
        }
    }
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

const LEFT: f64 = 72.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 44.0;
const BOTTOM: f64 = 72.0;

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

/// Widens a degenerate range.
fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        return (lo, hi);
    }
    let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
    (lo - pad, hi + pad)
}

/// Tick positions at a 1/2/5 step, roughly five per axis.
fn ticks(lo: f64, hi: f64) -> (Vec<f64>, usize) {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    ((first..=last).map(|i| i as f64 * step).collect(), decimals.min(8))
}

fn tick_label(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

struct Frame {
    width: f64,
    height: f64,
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (self.width - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        self.height - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (self.height - TOP - BOTTOM)
    }
}

fn header(svg: &mut String, opts: &ChartOptions) {
    let (w, h) = (opts.width, opts.height);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#);
    if !opts.title.is_empty() {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            num(f64::from(w) / 2.0),
            escape(&opts.title)
        );
    }
}

fn axes(svg: &mut String, f: &Frame, opts: &ChartOptions, x_numeric: bool) {
    let (x0, x1) = (LEFT, f.width - RIGHT);
    let (y0, y1) = (f.height - BOTTOM, TOP);
    let _ = writeln!(
        svg,
        r#"<g class="axes" stroke="black" stroke-width="1"><line x1="{}" y1="{}" x2="{}" y2="{}"/><line x1="{}" y1="{}" x2="{}" y2="{}"/></g>"#,
        num(x0), num(y0), num(x1), num(y0), num(x0), num(y0), num(x0), num(y1)
    );
    let (yt, yd) = ticks(f.y.0, f.y.1);
    for v in yt {
        let y = f.py(v);
        let _ = writeln!(
            svg,
            r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#dddddd"/><text x="{}" y="{}" text-anchor="end">{}</text>"##,
            num(x0), num(y), num(x1), num(y), num(x0 - 6.0), num(y + 4.0), tick_label(v, yd)
        );
    }
    if x_numeric {
        let (xt, xd) = ticks(f.x.0, f.x.1);
        for v in xt {
            let x = f.px(v);
            let _ = writeln!(
                svg,
                r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/><text x="{}" y="{}" text-anchor="middle">{}</text>"#,
                num(x), num(y0), num(x), num(y0 + 5.0), num(x), num(y0 + 18.0), tick_label(v, xd)
            );
        }
    }
    if !opts.x_label.is_empty() {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            num((x0 + x1) / 2.0),
            num(f.height - 12.0),
            escape(&opts.x_label)
        );
    }
    if !opts.y_label.is_empty() {
        let cy = (y0 + y1) / 2.0;
        let _ = writeln!(
            svg,
            r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
            num(cy),
            num(cy),
            escape(&opts.y_label)
        );
    }
}

/// Category labels under the x axis, thinned so at most 16 are drawn.
fn category_ticks(svg: &mut String, f: &Frame, labels: &[String], position: impl Fn(usize) -> f64) {
    let every = labels.len().div_ceil(16).max(1);
    let y0 = f.height - BOTTOM;
    for (i, label) in labels.iter().enumerate().filter(|(i, _)| i % every == 0) {
        let x = position(i);
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/><text x="{}" y="{}" text-anchor="end" transform="rotate(-40 {} {})">{}</text>"#,
            num(x), num(y0), num(x), num(y0 + 5.0), num(x), num(y0 + 16.0), num(x), num(y0 + 16.0), escape(label)
        );
    }
}

fn validate(series: &[Series]) -> Result<(), ChartError> {
    if series.is_empty() {
        return Err(ChartError::Empty);
    }
    for s in series {
        if s.points.is_empty() {
            return Err(ChartError::EmptySeries(s.label.clone()));
        }
        if s.points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(ChartError::NonFinite(s.label.clone()));
        }
    }
    Ok(())
}

/// One polyline per series with axes, ticks and a legend.
pub fn render_line_chart(series: &[Series], opts: &ChartOptions) -> Result<String, ChartError> {
    validate(series)?;
    let all = || series.iter().flat_map(|s| s.points.iter());
    let fold = |f: fn(&(f64, f64)) -> f64| {
        all().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    };
    let (mut xlo, mut xhi) = fold(|p| p.0);
    if let Some(cats) = &opts.x_categories {
        xlo = xlo.min(0.0);
        xhi = xhi.max(cats.len().saturating_sub(1) as f64);
    }
    let (ylo, yhi) = fold(|p| p.1);
    let frame = Frame {
        width: f64::from(opts.width),
        height: f64::from(opts.height),
        x: padded(xlo, xhi),
        y: padded(ylo, yhi),
    };

    let mut svg = String::new();
    header(&mut svg, opts);
    axes(&mut svg, &frame, opts, opts.x_categories.is_none());
    if let Some(cats) = &opts.x_categories {
        category_ticks(&mut svg, &frame, cats, |i| frame.px(i as f64));
    }
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{},{}", num(frame.px(x)), num(frame.py(y))))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            pts.join(" ")
        );
        let ly = TOP + 8.0 + 18.0 * i as f64;
        let lx = frame.width - RIGHT + 14.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            num(lx), num(ly), num(lx + 20.0), num(ly), num(lx + 26.0), num(ly + 4.0), escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Vertical bars from a zero baseline, one per labelled value.
pub fn render_bar_chart(bars: &[(String, f64)], opts: &ChartOptions) -> Result<String, ChartError> {
    if bars.is_empty() {
        return Err(ChartError::Empty);
    }
    if let Some((label, _)) = bars.iter().find(|(_, v)| !v.is_finite()) {
        return Err(ChartError::NonFinite(label.clone()));
    }
    let lo = bars.iter().map(|b| b.1).fold(0.0, f64::min);
    let hi = bars.iter().map(|b| b.1).fold(0.0, f64::max);
    let frame = Frame {
        width: f64::from(opts.width),
        height: f64::from(opts.height),
        x: (0.0, bars.len() as f64),
        y: padded(lo, hi),
    };
    let mut svg = String::new();
    header(&mut svg, opts);
    axes(&mut svg, &frame, opts, false);
    let slot = (frame.width - LEFT - RIGHT) / bars.len() as f64;
    for (i, (_, v)) in bars.iter().enumerate() {
        let x = LEFT + slot * (i as f64 + 0.1);
        let (a, b) = (frame.py(0.0), frame.py(*v));
        let _ = writeln!(
            svg,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{}"/>"#,
            num(x),
            num(a.min(b)),
            num(slot * 0.8),
            num((a - b).abs()),
            PALETTE[0]
        );
    }
    let labels: Vec<String> = bars.iter().map(|b| b.0.clone()).collect();
    category_ticks(&mut svg, &frame, &labels, |i| LEFT + slot * (i as f64 + 0.5));
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_series_has_one_polyline() {
        let svg = render_line_chart(&[Series::indexed("a", &[1.0, 2.0, 3.0])], &ChartOptions::default()).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn renders_are_identical() {
        let s = [Series::indexed("x", &[0.1, 0.7, 0.3]), Series::indexed("y", &[0.2, 0.2, 0.9])];
        let o = ChartOptions {
            title: "t".into(),
            ..ChartOptions::default()
        };
        assert_eq!(render_line_chart(&s, &o).unwrap(), render_line_chart(&s, &o).unwrap());
    }

    #[test]
    fn constant_series_is_horizontal() {
        let svg = render_line_chart(&[Series::indexed("c", &[0.5, 0.5, 0.5])], &ChartOptions::default()).unwrap();
        let line = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        let pts = line.split("points=\"").nth(1).unwrap().trim_end_matches("\"/>");
        let ys: Vec<&str> = pts.split(' ').map(|p| p.split(',').nth(1).unwrap()).collect();
        assert!(ys.windows(2).all(|w| w[0] == w[1]));
        assert!(!line.contains("NaN"));
    }

    #[test]
    fn empty_inputs_are_errors() {
        assert_eq!(render_line_chart(&[], &ChartOptions::default()), Err(ChartError::Empty));
        assert!(matches!(
            render_line_chart(&[Series::new("e", vec![])], &ChartOptions::default()),
            Err(ChartError::EmptySeries(_))
        ));
        assert_eq!(render_bar_chart(&[], &ChartOptions::default()), Err(ChartError::Empty));
    }

    #[test]
    fn labels_are_escaped() {
        let svg = render_bar_chart(&[("a<b & c".into(), 2.0)], &ChartOptions::default()).unwrap();
        assert!(svg.contains("a&lt;b &amp; c"));
    }

    #[test]
    fn tick_steps() {
        let (t, d) = ticks(0.0, 1.0);
        let labels: Vec<String> = t.iter().map(|&v| tick_label(v, d)).collect();
        assert_eq!(labels, ["0.0", "0.2", "0.4", "0.6", "0.8", "1.0"]);
        assert_eq!(tick_label(-0.0001, 2), "0.00");
    }
}
