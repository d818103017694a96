//! Minimal SVG rendering. World y points up; screen y points down.

use std::fmt::Write as _;

use slag_toric::fibration::DiscriminantGraph;
use slag_toric::lattice::to_f64;

use crate::commands::{MirrorRun, SmoothRun};
use crate::error::{CliError, CliResult};

const MARGIN: f64 = 24.0;
const MAX_CLOUD_POINTS: usize = 4000;

pub struct Canvas {
    lo: [f64; 2],
    hi: [f64; 2],
    scale: f64,
    width: f64,
    height: f64,
    body: String,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Canvas {
    /// A canvas showing the world box `[lo, hi]`, `width` pixels wide before margins.
    pub fn new(lo: [f64; 2], hi: [f64; 2], width: f64) -> Canvas {
        let span = [(hi[0] - lo[0]).max(1e-9), (hi[1] - lo[1]).max(1e-9)];
        let scale = width / span[0];
        Canvas { lo, hi, scale, width: width + 2.0 * MARGIN, height: span[1] * scale + 2.0 * MARGIN, body: String::new() }
    }

    fn map(&self, p: [f64; 2]) -> (f64, f64) {
        (MARGIN + (p[0] - self.lo[0]) * self.scale, MARGIN + (self.hi[1] - p[1]) * self.scale)
    }

    pub fn line(&mut self, a: [f64; 2], b: [f64; 2], color: &str, width: f64) {
        let ((x1, y1), (x2, y2)) = (self.map(a), self.map(b));
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" stroke="{color}" stroke-width="{width}"/>"#
        );
    }

    pub fn arrow(&mut self, a: [f64; 2], b: [f64; 2], color: &str, width: f64) {
        let ((x1, y1), (x2, y2)) = (self.map(a), self.map(b));
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" stroke="{color}" stroke-width="{width}" marker-end="url(#arrow)"/>"#
        );
    }

    pub fn dot(&mut self, p: [f64; 2], r: f64, color: &str) {
        let (x, y) = self.map(p);
        let _ = writeln!(self.body, r#"<circle cx="{x:.3}" cy="{y:.3}" r="{r}" fill="{color}"/>"#);
    }

    pub fn polygon(&mut self, pts: &[[f64; 2]], fill: &str, stroke: &str) {
        let coords: Vec<String> = pts.iter().map(|&p| self.map(p)).map(|(x, y)| format!("{x:.3},{y:.3}")).collect();
        let _ = writeln!(
            self.body,
            r#"<polygon points="{}" fill="{fill}" stroke="{stroke}" stroke-width="1.5"/>"#,
            coords.join(" ")
        );
    }

    pub fn text(&mut self, p: [f64; 2], dx: f64, dy: f64, size: f64, s: &str) {
        let (x, y) = self.map(p);
        let _ = writeln!(
            self.body,
            r#"<text x="{:.3}" y="{:.3}" font-size="{size}" font-family="monospace">{}</text>"#,
            x + dx,
            y + dy,
            escape(s)
        );
    }

    /// Far end of the ray from `p` along `d`, cut at the canvas box.
    pub fn ray_end(&self, p: [f64; 2], d: [f64; 2]) -> [f64; 2] {
        let mut s = f64::INFINITY;
        for k in 0..2 {
            if d[k] > 0.0 {
                s = s.min((self.hi[k] - p[k]) / d[k]);
            } else if d[k] < 0.0 {
                s = s.min((self.lo[k] - p[k]) / d[k]);
            }
        }
        let s = if s.is_finite() { s.max(0.0) } else { 0.0 };
        [p[0] + s * d[0], p[1] + s * d[1]]
    }

    pub fn finish(self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#,
            w = self.width,
            h = self.height
        );
        let _ = writeln!(out, "<!-- slag-toric {} -->", env!("CARGO_PKG_VERSION"));
        out.push_str(
            "<defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"9\" refY=\"5\" markerWidth=\"8\" markerHeight=\"8\" orient=\"auto\">\
             <path d=\"M0,0 L10,5 L0,10 z\" fill=\"black\"/></marker></defs>\n",
        );
        out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
        out.push_str(&self.body);
        out.push_str("</svg>\n");
        out
    }
}

fn bounds(pts: &[[f64; 2]], pad_fraction: f64, min_pad: f64) -> ([f64; 2], [f64; 2]) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in pts {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    if pts.is_empty() {
        return ([-1.0, -1.0], [1.0, 1.0]);
    }
    let pad = ((hi[0] - lo[0]).max(hi[1] - lo[1]) * pad_fraction).max(min_pad);
    ([lo[0] - pad, lo[1] - pad], [hi[0] + pad, hi[1] + pad])
}

fn matrix_label(rows: &[Vec<String>]) -> String {
    let inner: Vec<String> = rows.iter().map(|r| r.join(" ")).collect();
    format!("T=[{}]", inner.join("; "))
}

/// Planar discriminant graph with fiber types at vertices and monodromy at edges.
pub fn discriminant_svg(g: &DiscriminantGraph) -> CliResult<String> {
    if g.ambient_dim() != 2 {
        return Err(CliError::Parse(format!("SVG output needs a planar graph, got dimension {}", g.ambient_dim())));
    }
    let verts: Vec<[f64; 2]> = g.vertices.iter().map(|v| [to_f64(&v[0]), to_f64(&v[1])]).collect();
    let (lo, hi) = bounds(&verts, 0.6, 1.0);
    let mut c = Canvas::new(lo, hi, 640.0);
    let label = |e: usize| matrix_label(&g.edge_labels[e].monodromy.to_rows().iter().map(|r| r.iter().map(ToString::to_string).collect()).collect::<Vec<_>>());
    for (i, &(a, b)) in g.bounded_edges.iter().enumerate() {
        c.line(verts[a], verts[b], "black", 2.0);
        let mid = [(verts[a][0] + verts[b][0]) / 2.0, (verts[a][1] + verts[b][1]) / 2.0];
        c.text(mid, 4.0, -4.0, 10.0, &label(i));
    }
    let nb = g.bounded_edges.len();
    for (i, (v, d)) in g.rays.iter().enumerate() {
        let end = c.ray_end(verts[*v], [to_f64(&d[0]), to_f64(&d[1])]);
        c.arrow(verts[*v], end, "black", 2.0);
        let at = [0.4 * verts[*v][0] + 0.6 * end[0], 0.4 * verts[*v][1] + 0.6 * end[1]];
        c.text(at, 4.0, -4.0, 10.0, &label(nb + i));
    }
    for (i, p) in verts.iter().enumerate() {
        c.dot(*p, 5.0, "crimson");
        c.text(*p, 6.0, 14.0, 11.0, &format!("v{i} {}", g.vertex_types[i].name()));
    }
    Ok(c.finish())
}

/// Amoeba sample points with the spine on top, clipped to the sampling window.
pub fn mirror_svg(run: &MirrorRun) -> String {
    let (lo, hi) = (run.window.lo, run.window.hi);
    let mut c = Canvas::new([lo, lo], [hi, hi], 640.0);
    c.polygon(&[[lo, lo], [hi, lo], [hi, hi], [lo, hi]], "none", "#999");
    let stride = run.cloud.points.len().div_ceil(MAX_CLOUD_POINTS).max(1);
    for p in run.cloud.points.iter().step_by(stride) {
        c.dot(*p, 1.0, "#4a7fb5");
    }
    for piece in run.curve.pieces() {
        if let Some((a, b)) = piece.clip(lo, hi) {
            c.line(a, b, "crimson", 2.0);
        }
    }
    for v in 0..run.curve.vertices.len() {
        let p = run.curve.vertex_f64(v);
        if run.window.contains(p) {
            c.dot(p, 4.0, "crimson");
        }
    }
    c.text([lo, hi], 4.0, 14.0, 12.0, &format!("t = {}", run.output.t));
    c.finish()
}

/// One row per decomposition: the polygon followed by its summands.
pub fn smooth_svg(run: &SmoothRun) -> String {
    let pv: Vec<[f64; 2]> = run.polygon.vertices().iter().map(|v| [v[0] as f64, v[1] as f64]).collect();
    let (plo, phi) = bounds(&pv, 0.0, 0.0);
    let cell = (phi[0] - plo[0]).max(phi[1] - plo[1]) + 2.0;
    let rows = run.decompositions.len().max(1);
    let cols = run.decompositions.iter().map(|d| d.summands.len()).max().unwrap_or(0) + 1;
    let mut c = Canvas::new([0.0, -(rows as f64) * cell], [cols as f64 * cell, 0.0], 160.0 * cols as f64);
    let draw = |c: &mut Canvas, pts: &[[i64; 2]], origin: [f64; 2]| {
        let shifted: Vec<[f64; 2]> = pts.iter().map(|v| [origin[0] + v[0] as f64, origin[1] + v[1] as f64]).collect();
        if shifted.len() == 2 {
            c.line(shifted[0], shifted[1], "black", 2.0);
        } else {
            c.polygon(&shifted, "#dde8f3", "black");
        }
        for p in shifted {
            c.dot(p, 3.0, "black");
        }
    };
    for r in 0..rows {
        let base = [1.0 - plo[0], -((r + 1) as f64) * cell + 1.0 - plo[1]];
        draw(&mut c, run.polygon.vertices(), base);
        if let Some(d) = run.decompositions.get(r) {
            for (k, s) in d.summands.iter().enumerate() {
                let o = [((k + 1) as f64) * cell + 1.0, -((r + 1) as f64) * cell + 1.0];
                draw(&mut c, s.vertices(), o);
                let sep = if k == 0 { "=" } else { "+" };
                c.text([((k + 1) as f64) * cell, -((r as f64) + 0.5) * cell], -4.0, 4.0, 16.0, sep);
            }
        }
    }
    c.finish()
}
