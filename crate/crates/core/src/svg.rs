//! Minimal SVG output: line plots and point heat maps.
//!
//! Output is a plain string with fixed number formatting, so identical input
//! gives identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self { label: label.into(), points }
    }
}

#[derive(Debug, Clone)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

#[derive(Debug, Clone, Copy)]
struct Bounds {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Bounds {
    fn of(points: impl Iterator<Item = (f64, f64)>) -> Option<Self> {
        let mut b = Bounds { x0: f64::INFINITY, x1: f64::NEG_INFINITY, y0: f64::INFINITY, y1: f64::NEG_INFINITY };
        let mut any = false;
        for (x, y) in points.filter(|(x, y)| x.is_finite() && y.is_finite()) {
            any = true;
            b.x0 = b.x0.min(x);
            b.x1 = b.x1.max(x);
            b.y0 = b.y0.min(y);
            b.y1 = b.y1.max(y);
        }
        if !any {
            return None;
        }
        if b.x1 - b.x0 <= 0.0 {
            b.x0 -= 0.5;
            b.x1 += 0.5;
        }
        if b.y1 - b.y0 <= 0.0 {
            let pad = 0.5 * b.y0.abs().max(1.0);
            b.y0 -= pad;
            b.y1 += pad;
        }
        Some(b)
    }

    fn sx(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn sy(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(title));
}

fn axes(out: &mut String, b: &Bounds, x_label: &str, y_label: &str) {
    let (l, r, t, bot) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(out, r#"<path d="M{l:.1},{t:.1} L{l:.1},{bot:.1} L{r:.1},{bot:.1}" fill="none" stroke="black"/>"#);
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let xv = b.x0 + f * (b.x1 - b.x0);
        let yv = b.y0 + f * (b.y1 - b.y0);
        let (px, py) = (b.sx(xv), b.sy(yv));
        let _ = writeln!(out, r#"<line x1="{px:.1}" y1="{bot:.1}" x2="{px:.1}" y2="{:.1}" stroke="black"/>"#, bot + 4.0);
        let _ = writeln!(out, r#"<text x="{px:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, bot + 17.0, tick(xv));
        let _ = writeln!(out, r#"<line x1="{:.1}" y1="{py:.1}" x2="{l:.1}" y2="{py:.1}" stroke="black"/>"#, l - 4.0);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, l - 6.0, py + 4.0, tick(yv));
    }
    let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 14.0, escape(x_label));
    let _ = writeln!(
        out,
        r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
}

fn tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-2..1e4).contains(&a) {
        format!("{v:.1e}")
    } else {
        format!("{v:.3}")
    }
}

impl LinePlot {
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>) -> Self {
        Self { title: title.into(), x_label: x_label.into(), y_label: y_label.into(), series: Vec::new() }
    }

    pub fn with_series(mut self, s: Series) -> Self {
        self.series.push(s);
        self
    }

    pub fn render(&self) -> Result<String> {
        let b = Bounds::of(self.series.iter().flat_map(|s| s.points.iter().copied()))
            .ok_or_else(|| Error::InvalidInput("line plot has no finite points".into()))?;
        let mut out = String::new();
        header(&mut out, &self.title);
        axes(&mut out, &b, &self.x_label, &self.y_label);
        for (k, s) in self.series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let mut d = String::new();
            for (x, y) in s.points.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
                let _ = write!(d, "{}{:.2},{:.2} ", if d.is_empty() { "M" } else { "L" }, b.sx(*x), b.sy(*y));
                let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, b.sx(*x), b.sy(*y));
            }
            let _ = writeln!(out, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, d.trim_end());
            let ly = MARGIN + 14.0 * k as f64;
            let _ = writeln!(out, r#"<rect x="{:.1}" y="{:.1}" width="10" height="10" fill="{color}"/>"#, WIDTH - MARGIN - 150.0, ly - 9.0);
            let _ = writeln!(out, r#"<text x="{:.1}" y="{ly:.1}">{}</text>"#, WIDTH - MARGIN - 135.0, escape(&s.label));
        }
        out.push_str("</svg>\n");
        Ok(out)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render()?)?;
        Ok(())
    }
}

/// Scattered points in the plane coloured by value on a blue-to-red ramp.
#[derive(Debug, Clone)]
pub struct HeatMap {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64, f64)>,
}

fn ramp(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let r = (255.0 * t).round() as u8;
    let b = (255.0 * (1.0 - t)).round() as u8;
    let g = (255.0 * (1.0 - (2.0 * t - 1.0).abs()) * 0.6).round() as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

impl HeatMap {
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>, points: Vec<(f64, f64, f64)>) -> Self {
        Self { title: title.into(), x_label: x_label.into(), y_label: y_label.into(), points }
    }

    pub fn render(&self) -> Result<String> {
        let b = Bounds::of(self.points.iter().map(|p| (p.0, p.1)))
            .ok_or_else(|| Error::InvalidInput("heat map has no finite points".into()))?;
        let (lo, hi) = self
            .points
            .iter()
            .map(|p| p.2)
            .filter(|v| v.is_finite())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, c), v| (a.min(v), c.max(v)));
        let span = if hi > lo { hi - lo } else { 1.0 };
        let mut out = String::new();
        header(&mut out, &self.title);
        axes(&mut out, &b, &self.x_label, &self.y_label);
        let mut order: Vec<usize> = (0..self.points.len()).collect();
        order.sort_by(|&i, &j| self.points[i].2.total_cmp(&self.points[j].2));
        for i in order {
            let (x, y, v) = self.points[i];
            if !(x.is_finite() && y.is_finite() && v.is_finite()) {
                continue;
            }
            let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{}"/>"#, b.sx(x), b.sy(y), ramp((v - lo) / span));
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">min {} / max {}</text>"#,
            WIDTH - MARGIN,
            MARGIN - 8.0,
            tick(lo),
            tick(hi)
        );
        out.push_str("</svg>\n");
        Ok(out)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render()?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_plot_is_deterministic_and_well_formed() {
        let p = LinePlot::new("w vs stage", "stage", "w <value>").with_series(Series::new("w", vec![(1.0, 3.0), (2.0, 2.5), (3.0, 2.4)]));
        let a = p.render().unwrap();
        assert_eq!(a, p.render().unwrap());
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert!(a.contains("&lt;value&gt;"));
        assert_eq!(a.matches("<circle").count(), 3);
    }

    #[test]
    fn constant_series_still_renders() {
        let p = LinePlot::new("flat", "x", "y").with_series(Series::new("c", vec![(0.0, 1.0), (1.0, 1.0)]));
        assert!(p.render().unwrap().contains("<path d=\"M"));
    }

    #[test]
    fn empty_inputs_are_rejected() {
        assert!(LinePlot::new("e", "x", "y").render().is_err());
        assert!(HeatMap::new("e", "x", "y", vec![(f64::NAN, 0.0, 1.0)]).render().is_err());
    }

    #[test]
    fn heat_map_ramp_ends() {
        assert_eq!(ramp(0.0), "#0000ff");
        assert_eq!(ramp(1.0), "#ff0000");
        let h = HeatMap::new("h", "x", "z", vec![(0.0, 0.0, 0.0), (1.0, 1.0, 2.0)]);
        let s = h.render().unwrap();
        assert!(s.contains("#ff0000") && s.contains("#0000ff"));
    }
}
