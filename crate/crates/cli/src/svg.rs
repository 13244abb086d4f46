//! Minimal self-contained SVG emission (no external assets).
//!
//! Palette: Stokes lines solid dark, anti-Stokes lines dashed blue, turning
//! points as filled circles sized by multiplicity.

use num_complex::Complex64 as C64;
use std::fmt::Write;

pub struct Canvas {
    width: f64,
    height: f64,
    // world window
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
    body: String,
}

impl Canvas {
    pub fn new(width: f64, height: f64, x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self {
            width,
            height,
            x0,
            y0,
            x1,
            y1,
            body: String::new(),
        }
    }

    fn map(&self, p: C64) -> (f64, f64) {
        let sx = self.width / (self.x1 - self.x0);
        let sy = self.height / (self.y1 - self.y0);
        ((p.re - self.x0) * sx, (self.y1 - p.im) * sy)
    }

    pub fn polyline(&mut self, pts: &[C64], stroke: &str, width: f64, dash: Option<&str>) {
        if pts.len() < 2 {
            return;
        }
        let mut d = String::new();
        for (i, &p) in pts.iter().enumerate() {
            let (x, y) = self.map(p);
            if !(x.is_finite() && y.is_finite()) {
                continue;
            }
            let _ = write!(d, "{}{x:.2},{y:.2} ", if i == 0 { "" } else { "" });
        }
        let dash_attr = dash
            .map(|v| format!(" stroke-dasharray=\"{v}\""))
            .unwrap_or_default();
        let _ = write!(
            self.body,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\"{}/>\n",
            d.trim(),
            stroke,
            width,
            dash_attr
        );
    }

    pub fn circle(&mut self, at: C64, r: f64, fill: &str) {
        let (x, y) = self.map(at);
        let _ = write!(
            self.body,
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{r:.2}\" fill=\"{fill}\"/>\n"
        );
    }

    pub fn cross(&mut self, at: C64, half: f64, stroke: &str) {
        let (x, y) = self.map(at);
        let _ = write!(
            self.body,
            "<path d=\"M{:.2},{:.2} L{:.2},{:.2} M{:.2},{:.2} L{:.2},{:.2}\" stroke=\"{stroke}\" stroke-width=\"1.4\"/>\n",
            x - half, y - half, x + half, y + half, x - half, y + half, x + half, y - half
        );
    }

    pub fn text(&mut self, at: C64, s: &str, size: f64) {
        let (x, y) = self.map(at);
        let _ = write!(
            self.body,
            "<text x=\"{x:.2}\" y=\"{y:.2}\" font-size=\"{size}\" font-family=\"monospace\" fill=\"#333\">{s}</text>\n"
        );
    }

    pub fn axes(&mut self) {
        self.polyline(
            &[C64::new(self.x0, 0.0), C64::new(self.x1, 0.0)],
            "#bbb",
            0.8,
            None,
        );
        self.polyline(
            &[C64::new(0.0, self.y0), C64::new(0.0, self.y1)],
            "#bbb",
            0.8,
            None,
        );
    }

    pub fn finish(self) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.width, self.height, self.width, self.height, self.body
        )
    }
}

pub const STOKES_STROKE: &str = "#1b1b1b";
pub const ANTI_STROKE: &str = "#1b6fb8";
pub const ANTI_DASH: &str = "6,4";
pub const TP_FILL: &str = "#c22f2f";
