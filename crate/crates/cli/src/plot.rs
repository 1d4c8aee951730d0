//! Minimal self-contained SVG line and scatter plots.

use std::fmt::Write as _;

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: (f64, f64, f64, f64) = (60.0, 20.0, 40.0, 50.0); // left, right, top, bottom
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

pub struct Axes {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
}

impl Axes {
    fn sx(&self, x: f64) -> f64 {
        let (lo, hi) = self.x_range;
        MARGIN.0 + (x - lo) / (hi - lo) * (W - MARGIN.0 - MARGIN.1)
    }

    fn sy(&self, y: f64) -> f64 {
        let (lo, hi) = self.y_range;
        H - MARGIN.3 - (y - lo) / (hi - lo) * (H - MARGIN.2 - MARGIN.3)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn frame(ax: &Axes) -> String {
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    let (x0, x1) = (ax.sx(ax.x_range.0), ax.sx(ax.x_range.1));
    let (y0, y1) = (ax.sy(ax.y_range.0), ax.sy(ax.y_range.1));
    writeln!(s, r#"<rect x="{x0:.1}" y="{y1:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#, x1 - x0, y0 - y1)
        .unwrap();
    for i in 0..=5 {
        let t = f64::from(i) / 5.0;
        let xv = ax.x_range.0 + t * (ax.x_range.1 - ax.x_range.0);
        let yv = ax.y_range.0 + t * (ax.y_range.1 - ax.y_range.0);
        let (px, py) = (ax.sx(xv), ax.sy(yv));
        writeln!(s, r#"<text x="{px:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, y0 + 16.0, tick(xv)).unwrap();
        writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, x0 - 6.0, py + 4.0, tick(yv)).unwrap();
    }
    writeln!(s, r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(&ax.title)).unwrap();
    writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, H - 12.0, escape(&ax.x_label))
        .unwrap();
    writeln!(
        s,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(&ax.y_label)
    )
    .unwrap();
    s
}

fn tick(v: f64) -> String {
    if v.abs() >= 1000.0 || (v != 0.0 && v.abs() < 0.01) {
        format!("{v:.1e}")
    } else {
        format!("{v:.2}")
    }
}

fn legend(s: &mut String, series: &[Series]) {
    for (i, se) in series.iter().enumerate() {
        let y = MARGIN.2 + 14.0 + 16.0 * i as f64;
        let x = W - MARGIN.1 - 110.0;
        let c = PALETTE[i % PALETTE.len()];
        writeln!(s, r#"<rect x="{x:.1}" y="{:.1}" width="10" height="10" fill="{c}"/>"#, y - 9.0).unwrap();
        writeln!(s, r#"<text x="{:.1}" y="{y:.1}">{}</text>"#, x + 14.0, escape(&se.name)).unwrap();
    }
}

/// Polylines with markers; `diagonal` adds a dashed y = x reference.
pub fn line_plot(ax: &Axes, series: &[Series], diagonal: bool) -> String {
    let mut s = frame(ax);
    if diagonal {
        let lo = ax.x_range.0.max(ax.y_range.0);
        let hi = ax.x_range.1.min(ax.y_range.1);
        writeln!(
            s,
            r##"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#999" stroke-dasharray="4 3"/>"##,
            ax.sx(lo),
            ax.sy(lo),
            ax.sx(hi),
            ax.sy(hi)
        )
        .unwrap();
    }
    for (i, se) in series.iter().enumerate() {
        let c = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = se
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", ax.sx(x), ax.sy(y)))
            .collect();
        writeln!(s, r#"<polyline points="{}" fill="none" stroke="{c}" stroke-width="2"/>"#, pts.join(" ")).unwrap();
        for p in &pts {
            let (x, y) = p.split_once(',').unwrap();
            writeln!(s, r#"<circle cx="{x}" cy="{y}" r="3" fill="{c}"/>"#).unwrap();
        }
    }
    legend(&mut s, series);
    s.push_str("</svg>\n");
    s
}

pub fn scatter_plot(ax: &Axes, series: &[Series]) -> String {
    let mut s = frame(ax);
    for (i, se) in series.iter().enumerate() {
        let c = PALETTE[i % PALETTE.len()];
        for &(x, y) in se.points.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
            writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="{c}" fill-opacity="0.5"/>"#, ax.sx(x), ax.sy(y))
                .unwrap();
        }
    }
    legend(&mut s, series);
    s.push_str("</svg>\n");
    s
}

/// `(min, max)` of finite values, padded when degenerate.
pub fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}
