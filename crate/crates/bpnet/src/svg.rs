//! Minimal static SVG charts: line, scatter and bar series on linear axes.
//! Output depends only on the data, so files are byte-stable.

use std::fmt::Write as _;

pub const PANEL_WIDTH: f64 = 480.0;
pub const PANEL_HEIGHT: f64 = 320.0;
const MARGIN_LEFT: f64 = 56.0;
const MARGIN_RIGHT: f64 = 16.0;
const MARGIN_TOP: f64 = 28.0;
const MARGIN_BOTTOM: f64 = 40.0;
const TICKS: usize = 5;
/// Scatter series are thinned to at most this many points.
pub const MAX_MARKERS: usize = 4000;

#[derive(Debug, Clone, PartialEq)]
pub enum Series {
    Line { label: String, colour: &'static str, points: Vec<(f64, f64)> },
    Scatter { label: String, colour: &'static str, points: Vec<(f64, f64)> },
    /// Bars spanning `[x0, x1]` with height `y`.
    Bars { label: String, colour: &'static str, bars: Vec<(f64, f64, f64)> },
    HorizontalRule { label: String, colour: &'static str, y: f64 },
}

impl Series {
    fn label(&self) -> (&str, &'static str) {
        match self {
            Series::Line { label, colour, .. }
            | Series::Scatter { label, colour, .. }
            | Series::Bars { label, colour, .. }
            | Series::HorizontalRule { label, colour, .. } => (label, colour),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

impl Panel {
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            series: Vec::new(),
        }
    }

    pub fn with(mut self, series: Series) -> Self {
        self.series.push(series);
        self
    }

    fn bounds(&self) -> (f64, f64, f64, f64) {
        let mut xs: Vec<f64> = Vec::new();
        let mut ys: Vec<f64> = Vec::new();
        for s in &self.series {
            match s {
                Series::Line { points, .. } | Series::Scatter { points, .. } => {
                    xs.extend(points.iter().map(|p| p.0));
                    ys.extend(points.iter().map(|p| p.1));
                }
                Series::Bars { bars, .. } => {
                    for &(x0, x1, y) in bars {
                        xs.extend([x0, x1]);
                        ys.extend([0.0, y]);
                    }
                }
                Series::HorizontalRule { y, .. } => ys.push(*y),
            }
        }
        let range = |v: &[f64]| {
            let lo = v.iter().copied().filter(|x| x.is_finite()).fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().filter(|x| x.is_finite()).fold(f64::NEG_INFINITY, f64::max);
            if !lo.is_finite() {
                return (0.0, 1.0);
            }
            let pad = if hi > lo { 0.05 * (hi - lo) } else { 1.0 };
            (lo - pad, hi + pad)
        };
        let (x0, x1) = range(&xs);
        let (y0, y1) = range(&ys);
        (x0, x1, y0, y1)
    }

    fn render(&self, out: &mut String, offset_x: f64) {
        let (x0, x1, y0, y1) = self.bounds();
        let plot_w = PANEL_WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let plot_h = PANEL_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * plot_w;
        let sy = |y: f64| MARGIN_TOP + (y1 - y) / (y1 - y0) * plot_h;

        let _ = writeln!(out, r#"<g transform="translate({offset_x:.0},0)">"#);
        let _ = writeln!(
            out,
            r##"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#444"/>"##
        );
        for k in 0..=TICKS {
            let f = k as f64 / TICKS as f64;
            let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="middle">{}</text>"#,
                sx(xv),
                MARGIN_TOP + plot_h + 14.0,
                tick_label(xv)
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="end">{}</text>"#,
                MARGIN_LEFT - 4.0,
                sy(yv) + 3.0,
                tick_label(yv)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="18" font-size="13" text-anchor="middle">{}</text>"#,
            MARGIN_LEFT + plot_w / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"#,
            MARGIN_LEFT + plot_w / 2.0,
            PANEL_HEIGHT - 6.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="12" y="{:.2}" font-size="11" text-anchor="middle" transform="rotate(-90 12 {:.2})">{}</text>"#,
            MARGIN_TOP + plot_h / 2.0,
            MARGIN_TOP + plot_h / 2.0,
            escape(&self.y_label)
        );

        for s in &self.series {
            match s {
                Series::Line { colour, points, .. } => {
                    let _ = write!(out, r#"<polyline fill="none" stroke="{colour}" stroke-width="1" points=""#);
                    for &(x, y) in points {
                        let _ = write!(out, "{:.2},{:.2} ", sx(x), sy(y));
                    }
                    out.push_str("\"/>\n");
                }
                Series::Scatter { colour, points, .. } => {
                    let step = points.len().div_ceil(MAX_MARKERS).max(1);
                    for &(x, y) in points.iter().step_by(step) {
                        let _ = writeln!(
                            out,
                            r#"<circle cx="{:.2}" cy="{:.2}" r="1.5" fill="{colour}" fill-opacity="0.5"/>"#,
                            sx(x),
                            sy(y)
                        );
                    }
                }
                Series::Bars { colour, bars, .. } => {
                    for &(a, b, h) in bars {
                        let top = sy(h.max(0.0));
                        let _ = writeln!(
                            out,
                            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{colour}" stroke="white" stroke-width="0.5"/>"#,
                            sx(a),
                            top,
                            sx(b) - sx(a),
                            sy(0.0) - top
                        );
                    }
                }
                Series::HorizontalRule { colour, y, .. } => {
                    let _ = writeln!(
                        out,
                        r#"<line x1="{MARGIN_LEFT}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{colour}" stroke-dasharray="4 3"/>"#,
                        sy(*y),
                        MARGIN_LEFT + plot_w,
                        sy(*y)
                    );
                }
            }
        }
        for (k, s) in self.series.iter().enumerate() {
            let (label, colour) = s.label();
            if label.is_empty() {
                continue;
            }
            let y = MARGIN_TOP + 12.0 + 13.0 * k as f64;
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{y:.2}" font-size="10" fill="{colour}">{}</text>"#,
                MARGIN_LEFT + 6.0,
                escape(label)
            );
        }
        out.push_str("</g>\n");
    }
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.1}");
    if s == "-0.0" {
        "0.0".into()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Panels laid out left to right.
pub fn render(panels: &[Panel]) -> String {
    let width = PANEL_WIDTH * panels.len() as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{PANEL_HEIGHT:.0}" viewBox="0 0 {width:.0} {PANEL_HEIGHT:.0}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (k, p) in panels.iter().enumerate() {
        p.render(&mut out, k as f64 * PANEL_WIDTH);
    }
    out.push_str("</svg>\n");
    out
}
