//! SVG drawings of embedded graphs.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{check_sizes, Error, Result};
use crate::geometry::{Embedding, Graph};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvgStyle {
    pub vertex_dots: bool,
    /// Vertices drawn with a larger red dot.
    pub highlight: Vec<usize>,
    /// In edge units.
    pub stroke_width: f64,
}

impl Default for SvgStyle {
    fn default() -> Self {
        Self {
            vertex_dots: true,
            highlight: Vec::new(),
            stroke_width: 0.03,
        }
    }
}

/// Coordinates are drawn as given; SVG's y axis points down, like the
/// figure sources.
pub fn render_svg(g: &Graph, emb: &Embedding, style: &SvgStyle) -> Result<String> {
    check_sizes(g, emb)?;
    if emb.is_empty() {
        return Err(Error::Degenerate("nothing to draw".into()));
    }
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in emb.positions() {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    let margin = 0.05 * (x1 - x0).max(y1 - y0).max(1.0);
    let (vx, vy) = (x0 - margin, y0 - margin);
    let (vw, vh) = (x1 - x0 + 2.0 * margin, y1 - y0 + 2.0 * margin);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{vx:.6} {vy:.6} {vw:.6} {vh:.6}">"#
    );
    let _ = writeln!(
        out,
        r#"<g stroke="black" stroke-width="{:.6}" stroke-linecap="round">"#,
        style.stroke_width
    );
    for &(a, b) in g.edges() {
        let (p, q) = (emb.get(a), emb.get(b));
        let _ = writeln!(
            out,
            r#"<line x1="{:.6}" y1="{:.6}" x2="{:.6}" y2="{:.6}"/>"#,
            p.x, p.y, q.x, q.y
        );
    }
    out.push_str("</g>\n");
    if style.vertex_dots {
        out.push_str("<g fill=\"black\">\n");
        for p in emb.positions() {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.6}" cy="{:.6}" r="{:.6}"/>"#,
                p.x,
                p.y,
                1.5 * style.stroke_width
            );
        }
        out.push_str("</g>\n");
    }
    if !style.highlight.is_empty() {
        out.push_str("<g fill=\"red\">\n");
        for &v in &style.highlight {
            if v >= emb.len() {
                return Err(Error::VertexOutOfRange {
                    index: v,
                    n_vertices: emb.len(),
                });
            }
            let p = emb.get(v);
            let _ = writeln!(
                out,
                r#"<circle cx="{:.6}" cy="{:.6}" r="{:.6}"/>"#,
                p.x,
                p.y,
                3.0 * style.stroke_width
            );
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    Ok(out)
}
