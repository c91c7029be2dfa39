//! SVG rendering of colored multivector fields and embedding scatters.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cmf::Cmf;
use crate::embed::Rgba;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotSpec {
    pub width: f64,
    pub height: f64,
    pub margin: f64,
    pub background: String,
    pub point_radius: f64,
}

impl Default for PlotSpec {
    fn default() -> Self {
        PlotSpec { width: 600.0, height: 600.0, margin: 10.0, background: "white".into(), point_radius: 3.0 }
    }
}

impl PlotSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0 && self.height > 0.0) {
            return Err(Error::validation("plot width and height must be positive"));
        }
        if !(self.margin >= 0.0 && 2.0 * self.margin < self.width.min(self.height)) {
            return Err(Error::validation("plot margin must be non-negative and leave room to draw"));
        }
        if !(self.point_radius > 0.0) {
            return Err(Error::validation("point radius must be positive"));
        }
        Ok(())
    }
}

/// Maps data coordinates into the drawable area, y pointing up.
struct Frame {
    lo: [f64; 2],
    span: [f64; 2],
    spec: PlotSpec,
}

impl Frame {
    fn fit(points: impl Iterator<Item = [f64; 2]>, spec: &PlotSpec) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in points {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let span = [hi[0] - lo[0], hi[1] - lo[1]];
        Frame { lo, span, spec: spec.clone() }
    }

    fn map(&self, p: [f64; 2]) -> (f64, f64) {
        let s = &self.spec;
        let w = s.width - 2.0 * s.margin;
        let h = s.height - 2.0 * s.margin;
        let unit = |k: usize| if self.span[k] > 0.0 { (p[k] - self.lo[k]) / self.span[k] } else { 0.5 };
        (s.margin + unit(0) * w, s.height - s.margin - unit(1) * h)
    }
}

fn header(spec: &PlotSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = spec.width,
        h = spec.height
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{}" height="{}" fill="{}"/>"#, spec.width, spec.height, escape(&spec.background));
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn paint(c: &Rgba) -> String {
    let ch = |x: f64| (x.clamp(0.0, 1.0) * 255.0).round() as u8;
    format!("rgb({},{},{})", ch(c.r), ch(c.g), ch(c.b))
}

/// Draws every triangle filled with its multivector's color, then edges and
/// vertices on top. Transparent (or missing) colors are skipped.
pub fn render_cmf(cmf: &Cmf, colors: &[Rgba], spec: &PlotSpec) -> Result<String> {
    spec.validate()?;
    let complex = cmf.complex();
    let frame = Frame::fit(complex.points().iter().copied(), spec);
    let color_of = |sid: usize| colors.get(cmf.owner(sid)).filter(|c| !c.is_transparent());
    let stroke = spec.point_radius.max(1.0);
    let mut out = header(spec);

    for sid in complex.ids_of_dim(2) {
        if let Some(c) = color_of(sid) {
            let pts: Vec<String> = complex
                .simplex(sid)
                .vertices()
                .iter()
                .map(|&v| {
                    let (x, y) = frame.map(complex.points()[v]);
                    format!("{x:.3},{y:.3}")
                })
                .collect();
            let _ = writeln!(out, r#"<polygon points="{}" fill="{}" fill-opacity="{:.4}"/>"#, pts.join(" "), paint(c), c.a);
        }
    }
    for sid in complex.ids_of_dim(1) {
        if let Some(c) = color_of(sid) {
            let v = complex.simplex(sid).vertices();
            let (x1, y1) = frame.map(complex.points()[v[0]]);
            let (x2, y2) = frame.map(complex.points()[v[1]]);
            let _ = writeln!(
                out,
                r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" stroke="{}" stroke-opacity="{:.4}" stroke-width="{stroke:.3}"/>"#,
                paint(c),
                c.a
            );
        }
    }
    for sid in complex.ids_of_dim(0) {
        if let Some(c) = color_of(sid) {
            let (x, y) = frame.map(complex.points()[complex.simplex(sid).vertices()[0]]);
            let _ = writeln!(
                out,
                r#"<circle cx="{x:.3}" cy="{y:.3}" r="{:.3}" fill="{}" fill-opacity="{:.4}"/>"#,
                spec.point_radius,
                paint(c),
                c.a
            );
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// One circle per point at its first two coordinates, min-max scaled to the
/// canvas. Axes carry no labels.
pub fn render_scatter(points: &[(Vec<f64>, Rgba)], spec: &PlotSpec) -> Result<String> {
    spec.validate()?;
    if let Some((v, _)) = points.iter().find(|(v, _)| v.len() < 2) {
        return Err(Error::validation(format!("scatter needs at least 2 coordinates, got {}", v.len())));
    }
    let frame = Frame::fit(points.iter().map(|(v, _)| [v[0], v[1]]), spec);
    let mut out = header(spec);
    for (v, c) in points {
        let (x, y) = frame.map([v[0], v[1]]);
        let _ = writeln!(
            out,
            r#"<circle cx="{x:.3}" cy="{y:.3}" r="{:.3}" fill="{}" fill-opacity="{:.4}"/>"#,
            spec.point_radius,
            paint(c),
            c.a
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}
