//! Standalone SVG figures: angular profiles, solution fields and log-log fits.

use std::f64::consts::PI;
use std::path::Path;

use svg::node::element::path::Data;
use svg::node::element::{Circle, Group, Line, Path as SvgPath, Rectangle, Text};
use svg::Document;

use crate::CliError;

/// Data for one figure. The variant selects the kind of plot.
#[derive(Debug, Clone)]
pub enum Plot {
    /// `(theta, phi)` samples with the two sector interfaces.
    Angular { samples: Vec<(f64, f64)>, theta1: f64, theta2: f64, omega: f64 },
    /// Row-major field on an `n x n` grid over `[-1, 1]^2`.
    Field { n: usize, u: Vec<f64>, z: Option<f64> },
    /// `(r, sup)` pairs, the fitted line and `(r, slope)` local slopes.
    LogLog { points: Vec<(f64, f64)>, slope: f64, intercept: f64, local_slopes: Vec<(f64, f64)> },
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;

struct Frame {
    left: f64,
    top: f64,
    width: f64,
    height: f64,
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64, y: f64) -> (f64, f64) {
        let sx = self.left + self.width * (x - self.x.0) / (self.x.1 - self.x.0);
        let sy = self.top + self.height * (1.0 - (y - self.y.0) / (self.y.1 - self.y.0));
        (round2(sx), round2(sy))
    }

    fn axes(&self, doc: Group, xlabel: &str, ylabel: &str, ticks: usize) -> Group {
        let mut g = doc.add(
            Rectangle::new()
                .set("x", self.left)
                .set("y", self.top)
                .set("width", self.width)
                .set("height", self.height)
                .set("fill", "none")
                .set("stroke", "black"),
        );
        for k in 0..=ticks {
            let t = k as f64 / ticks as f64;
            let xv = self.x.0 + t * (self.x.1 - self.x.0);
            let yv = self.y.0 + t * (self.y.1 - self.y.0);
            let (px, _) = self.px(xv, self.y.0);
            let (_, py) = self.px(self.x.0, yv);
            let bottom = self.top + self.height;
            g = g
                .add(
                    Line::new()
                        .set("x1", px)
                        .set("x2", px)
                        .set("y1", bottom)
                        .set("y2", bottom + 5.0)
                        .set("stroke", "black"),
                )
                .add(label(px, bottom + 18.0, &tick(xv), "middle"))
                .add(
                    Line::new()
                        .set("x1", self.left - 5.0)
                        .set("x2", self.left)
                        .set("y1", py)
                        .set("y2", py)
                        .set("stroke", "black"),
                )
                .add(label(self.left - 8.0, py + 4.0, &tick(yv), "end"));
        }
        g.add(label(self.left + self.width / 2.0, self.top + self.height + 36.0, xlabel, "middle")).add(
            label(16.0, self.top + self.height / 2.0, ylabel, "middle")
                .set("transform", format!("rotate(-90 16 {})", self.top + self.height / 2.0)),
        )
    }
}

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

fn tick(v: f64) -> String {
    let s = format!("{:.3}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn label(x: f64, y: f64, text: &str, anchor: &str) -> Text {
    Text::new(text)
        .set("x", round2(x))
        .set("y", round2(y))
        .set("font-family", "sans-serif")
        .set("font-size", 12)
        .set("text-anchor", anchor)
}

fn polyline(frame: &Frame, pts: &[(f64, f64)], color: &str) -> SvgPath {
    let mut data = Data::new();
    for (k, &(x, y)) in pts.iter().enumerate() {
        let p = frame.px(x, y);
        data = if k == 0 { data.move_to(p) } else { data.line_to(p) };
    }
    SvgPath::new().set("d", data).set("fill", "none").set("stroke", color).set("stroke-width", 1.5)
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    let pad = 0.05 * (hi - lo).max(1e-12);
    (lo - pad, hi + pad)
}

fn frame(x: (f64, f64), y: (f64, f64)) -> Frame {
    Frame { left: 70.0, top: 30.0, width: WIDTH - 100.0, height: HEIGHT - 90.0, x, y }
}

fn angular(samples: &[(f64, f64)], theta1: f64, theta2: f64, omega: f64) -> Group {
    let f = frame((0.0, 2.0 * PI), bounds(samples.iter().map(|s| s.1)));
    let mut g = f.axes(Group::new(), "theta", "phi", 4);
    let (_, zero) = f.px(0.0, 0.0);
    g = g.add(
        Line::new()
            .set("x1", f.left)
            .set("x2", f.left + f.width)
            .set("y1", zero)
            .set("y2", zero)
            .set("stroke", "#999")
            .set("stroke-dasharray", "4 3"),
    );
    for (t, name) in [(theta1, "theta1"), (theta2, "theta2")] {
        let (x, _) = f.px(t, 0.0);
        g = g
            .add(
                Line::new()
                    .set("x1", x)
                    .set("x2", x)
                    .set("y1", f.top)
                    .set("y2", f.top + f.height)
                    .set("stroke", "#c33")
                    .set("stroke-dasharray", "6 3"),
            )
            .add(label(x + 4.0, f.top + 14.0, name, "start").set("fill", "#c33"));
    }
    for (k, (a, b)) in [(0.0, theta1), (theta1, theta2), (theta2, 2.0 * PI)].into_iter().enumerate() {
        let (x, _) = f.px(0.5 * (a + b), 0.0);
        g = g.add(label(x, f.top + f.height - 8.0, &format!("sector {}", k + 1), "middle"));
    }
    g.add(polyline(&f, samples, "#1f5fa8")).add(label(
        f.left + f.width,
        f.top - 10.0,
        &format!("omega = {omega}"),
        "end",
    ))
}

fn diverging(t: f64) -> String {
    let t = t.clamp(-1.0, 1.0);
    let (r, g, b) = if t >= 0.0 {
        (255.0, 255.0 * (1.0 - t), 255.0 * (1.0 - t))
    } else {
        (255.0 * (1.0 + t), 255.0 * (1.0 + t), 255.0)
    };
    format!("#{:02x}{:02x}{:02x}", r.round() as u8, g.round() as u8, b.round() as u8)
}

/// Cells per side of the field heatmap.
const MAX_CELLS: usize = 128;

fn field(n: usize, u: &[f64], z: Option<f64>) -> Group {
    let f =
        Frame { left: 70.0, top: 30.0, width: HEIGHT - 90.0, height: HEIGHT - 90.0, x: (-1.0, 1.0), y: (-1.0, 1.0) };
    let cells = n.min(MAX_CELLS);
    let scale = u.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let mut g = Group::new();
    let side = f.width / cells as f64;
    for cj in 0..cells {
        for ci in 0..cells {
            let i0 = ci * n / cells;
            let i1 = ((ci + 1) * n / cells).max(i0 + 1);
            let j0 = cj * n / cells;
            let j1 = ((cj + 1) * n / cells).max(j0 + 1);
            let mut sum = 0.0;
            for j in j0..j1 {
                for i in i0..i1 {
                    sum += u[j * n + i];
                }
            }
            let v = sum / ((i1 - i0) * (j1 - j0)) as f64;
            g = g.add(
                Rectangle::new()
                    .set("x", round2(f.left + ci as f64 * side))
                    .set("y", round2(f.top + (cells - 1 - cj) as f64 * side))
                    .set("width", round2(side + 0.05))
                    .set("height", round2(side + 0.05))
                    .set("fill", diverging(v / scale)),
            );
        }
    }
    let (x0, y0) = f.px(-1.0, 0.0);
    let (x1, _) = f.px(1.0, 0.0);
    g = g.add(
        Line::new()
            .set("x1", x0)
            .set("x2", x1)
            .set("y1", y0)
            .set("y2", y0)
            .set("stroke", "black")
            .set("stroke-width", 1.5),
    );
    // Contact set: thin-line nodes at zero.
    let mid = (n - 1) / 2;
    let h = 2.0 / (n - 1) as f64;
    let contact: Vec<usize> = (1..n - 1).filter(|&i| u[mid * n + i] <= 1e-10).collect();
    if let (Some(&a), Some(&b)) = (contact.first(), contact.last()) {
        let (xa, y) = f.px(-1.0 + a as f64 * h, 0.0);
        let (xb, _) = f.px(-1.0 + b as f64 * h, 0.0);
        g = g.add(
            Line::new()
                .set("x1", xa)
                .set("x2", xb)
                .set("y1", y)
                .set("y2", y)
                .set("stroke", "#2a2")
                .set("stroke-width", 4),
        );
    }
    if let Some(z) = z {
        let (x, y) = f.px(z, 0.0);
        g = g.add(Circle::new().set("cx", x).set("cy", y).set("r", 4).set("fill", "black"));
        g = g.add(label(x, y - 8.0, &format!("z = {}", tick(z)), "middle"));
    }
    let g = f.axes(g, "x1", "x2", 4);
    let legend_x = f.left + f.width + 20.0;
    let mut legend = Group::new();
    let steps = 20;
    for k in 0..steps {
        let t = 1.0 - 2.0 * (k as f64 + 0.5) / steps as f64;
        legend = legend.add(
            Rectangle::new()
                .set("x", legend_x)
                .set("y", round2(f.top + k as f64 * f.height / steps as f64))
                .set("width", 16)
                .set("height", round2(f.height / steps as f64 + 0.05))
                .set("fill", diverging(t)),
        );
    }
    legend = legend.add(label(legend_x + 22.0, f.top + 10.0, &format!("{:.3e}", scale), "start")).add(label(
        legend_x + 22.0,
        f.top + f.height,
        &format!("{:.3e}", -scale),
        "start",
    ));
    g.add(legend)
}

fn loglog(points: &[(f64, f64)], slope: f64, intercept: f64, local: &[(f64, f64)]) -> Group {
    let logs: Vec<(f64, f64)> =
        points.iter().filter(|p| p.0 > 0.0 && p.1 > 0.0).map(|p| (p.0.ln(), p.1.ln())).collect();
    let f = frame(bounds(logs.iter().map(|p| p.0)), bounds(logs.iter().map(|p| p.1)));
    let mut g = f.axes(Group::new(), "log r", "log sup |u|", 4);
    for &(x, y) in &logs {
        let (px, py) = f.px(x, y);
        g = g.add(Circle::new().set("cx", px).set("cy", py).set("r", 3).set("fill", "#1f5fa8"));
    }
    let (a, b) = f.x;
    g = g.add(polyline(&f, &[(a, slope * a + intercept), (b, slope * b + intercept)], "#c33"));
    g = g.add(label(f.left + 10.0, f.top + 16.0, &format!("slope = {slope:.4}"), "start"));
    if local.len() >= 2 {
        let inset = Frame {
            left: f.left + f.width * 0.58,
            top: f.top + f.height * 0.62,
            width: f.width * 0.38,
            height: f.height * 0.3,
            x: bounds(local.iter().map(|p| p.0.ln())),
            y: bounds(local.iter().map(|p| p.1)),
        };
        let pts: Vec<(f64, f64)> = local.iter().map(|p| (p.0.ln(), p.1)).collect();
        g = g
            .add(
                Rectangle::new()
                    .set("x", inset.left)
                    .set("y", inset.top)
                    .set("width", inset.width)
                    .set("height", inset.height)
                    .set("fill", "white")
                    .set("stroke", "#666"),
            )
            .add(polyline(&inset, &pts, "#2a2"))
            .add(label(inset.left + 4.0, inset.top + 12.0, "local slopes", "start"))
            .add(label(inset.left - 4.0, inset.top + 10.0, &tick(inset.y.1), "end"))
            .add(label(inset.left - 4.0, inset.top + inset.height, &tick(inset.y.0), "end"));
    }
    g
}

/// SVG document text for a plot.
pub fn render_svg(plot: &Plot) -> String {
    let body = match plot {
        Plot::Angular { samples, theta1, theta2, omega } => angular(samples, *theta1, *theta2, *omega),
        Plot::Field { n, u, z } => field(*n, u, *z),
        Plot::LogLog { points, slope, intercept, local_slopes } => loglog(points, *slope, *intercept, local_slopes),
    };
    Document::new()
        .set("viewBox", (0, 0, WIDTH, HEIGHT))
        .set("width", WIDTH)
        .set("height", HEIGHT)
        .add(Rectangle::new().set("width", "100%").set("height", "100%").set("fill", "white"))
        .add(body)
        .to_string()
}

/// Writes the plot to `path`.
pub fn emit_svg(plot: &Plot, path: &Path) -> Result<(), CliError> {
    std::fs::write(path, render_svg(plot)).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
