//! Minimal SVG writer for the report plots.

use std::fmt::Write;

/// Linear map from data coordinates to the plot rectangle.
#[derive(Clone, Copy, Debug)]
pub struct Frame {
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
    pub width: f64,
    pub height: f64,
    pub margin: f64,
}

impl Frame {
    pub fn new(x_range: [f64; 2], y_range: [f64; 2]) -> Self {
        Self { x_range, y_range, width: 600.0, height: 600.0, margin: 60.0 }
    }

    pub fn x(&self, x: f64) -> f64 {
        self.margin + (x - self.x_range[0]) / (self.x_range[1] - self.x_range[0]) * self.width
    }

    pub fn y(&self, y: f64) -> f64 {
        self.margin + self.height - (y - self.y_range[0]) / (self.y_range[1] - self.y_range[0]) * self.height
    }
}

pub struct Svg {
    frame: Frame,
    body: String,
}

impl Svg {
    pub fn new(frame: Frame) -> Self {
        Self { frame, body: String::new() }
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    /// Axis-aligned rectangle given by data-space corners.
    pub fn rect(&mut self, x0: f64, y0: f64, x1: f64, y1: f64, fill: &str) {
        let f = self.frame;
        let (px0, px1) = (f.x(x0).min(f.x(x1)), f.x(x0).max(f.x(x1)));
        let (py0, py1) = (f.y(y0).min(f.y(y1)), f.y(y0).max(f.y(y1)));
        let _ = writeln!(
            self.body,
            r#"<rect x="{px0:.2}" y="{py0:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
            px1 - px0,
            py1 - py0
        );
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], stroke: &str, width: f64, dashed: bool) {
        if points.len() < 2 {
            return;
        }
        let f = self.frame;
        let pts: Vec<String> = points.iter().map(|&(x, y)| format!("{:.2},{:.2}", f.x(x), f.y(y))).collect();
        let dash = if dashed { r#" stroke-dasharray="6,4""# } else { "" };
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="{width}"{dash}/>"#,
            pts.join(" ")
        );
    }

    pub fn circle(&mut self, x: f64, y: f64, r: f64, fill: &str) {
        let f = self.frame;
        let _ = writeln!(self.body, r#"<circle cx="{:.2}" cy="{:.2}" r="{r}" fill="{fill}"/>"#, f.x(x), f.y(y));
    }

    /// Text at a pixel position.
    pub fn text(&mut self, px: f64, py: f64, size: f64, anchor: &str, content: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{px:.2}" y="{py:.2}" font-size="{size}" font-family="sans-serif" text-anchor="{anchor}">{}</text>"#,
            escape(content)
        );
    }

    /// Frame, ticks and axis labels.
    pub fn axes(&mut self, x_label: &str, y_label: &str, ticks: usize) {
        let f = self.frame;
        let _ = writeln!(
            self.body,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            f.margin, f.margin, f.width, f.height
        );
        for k in 0..=ticks {
            let s = k as f64 / ticks as f64;
            let xv = f.x_range[0] + s * (f.x_range[1] - f.x_range[0]);
            let yv = f.y_range[0] + s * (f.y_range[1] - f.y_range[0]);
            self.text(f.x(xv), f.margin + f.height + 16.0, 11.0, "middle", &tick(xv));
            self.text(f.margin - 6.0, f.y(yv) + 4.0, 11.0, "end", &tick(yv));
        }
        self.text(f.margin + f.width / 2.0, f.margin + f.height + 40.0, 13.0, "middle", x_label);
        let _ = writeln!(
            self.body,
            r#"<text x="16" y="{:.2}" font-size="13" font-family="sans-serif" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
            f.margin + f.height / 2.0,
            f.margin + f.height / 2.0,
            escape(y_label)
        );
    }

    pub fn finish(self) -> String {
        let w = self.frame.width + 2.0 * self.frame.margin;
        let h = self.frame.height + 2.0 * self.frame.margin;
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body
        )
    }
}

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Zero set of `f` on the frame's data rectangle by marching squares; returns segments.
pub fn contour(frame: &Frame, resolution: usize, f: impl Fn(f64, f64) -> f64) -> Vec<[(f64, f64); 2]> {
    let n = resolution;
    let xs: Vec<f64> =
        (0..=n).map(|k| frame.x_range[0] + (frame.x_range[1] - frame.x_range[0]) * k as f64 / n as f64).collect();
    let ys: Vec<f64> =
        (0..=n).map(|k| frame.y_range[0] + (frame.y_range[1] - frame.y_range[0]) * k as f64 / n as f64).collect();
    let values: Vec<Vec<f64>> = ys.iter().map(|&y| xs.iter().map(|&x| f(x, y)).collect()).collect();
    let mut segments = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let corners = [
                (xs[i], ys[j], values[j][i]),
                (xs[i + 1], ys[j], values[j][i + 1]),
                (xs[i + 1], ys[j + 1], values[j + 1][i + 1]),
                (xs[i], ys[j + 1], values[j + 1][i]),
            ];
            let mut crossings = Vec::with_capacity(4);
            for k in 0..4 {
                let (x0, y0, v0) = corners[k];
                let (x1, y1, v1) = corners[(k + 1) % 4];
                if (v0 < 0.0) != (v1 < 0.0) {
                    let s = v0 / (v0 - v1);
                    crossings.push((x0 + s * (x1 - x0), y0 + s * (y1 - y0)));
                }
            }
            for pair in crossings.chunks_exact(2) {
                segments.push([pair[0], pair[1]]);
            }
        }
    }
    segments
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_contour() {
        let frame = Frame::new([-2.0, 2.0], [-2.0, 2.0]);
        let segs = contour(&frame, 40, |x, y| x * x + y * y - 1.0);
        assert!(!segs.is_empty());
        for s in segs {
            for (x, y) in s {
                assert!(((x * x + y * y).sqrt() - 1.0).abs() < 0.02);
            }
        }
    }
}
