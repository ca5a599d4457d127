//! The line-oriented MSG text format.
//!
//! ```text
//! # comment
//! v 0 0.5 -0.25
//! v 1 1.5 -0.25
//! e 0 1
//! n 0 a
//! ```
//!
//! Vertex ids must be consecutive from 0. Coordinates are written with the
//! shortest decimal representation that round-trips (at most 17 significant
//! digits), so `write ∘ read` is the identity on canonical files.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{Embedding, Graph, Point2};

#[derive(Debug, Clone, PartialEq)]
pub struct MsgDocument {
    pub graph: Graph,
    pub embedding: Embedding,
    /// `(vertex id, name)` in file order.
    pub names: Vec<(usize, String)>,
}

impl MsgDocument {
    pub fn name_of(&self, name: &str) -> Option<usize> {
        self.names.iter().find(|(_, n)| n == name).map(|&(v, _)| v)
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn read_msg(text: &str) -> Result<MsgDocument> {
    let mut positions = Vec::new();
    let mut edges = Vec::new();
    let mut names = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut parts = trimmed.splitn(2, char::is_whitespace);
        let directive = parts.next().unwrap_or("");
        let rest = parts.next().unwrap_or("").trim();
        let id = |s: Option<&str>| -> Result<usize> {
            s.and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err(line, format!("bad vertex id in '{trimmed}'")))
        };
        let coord = |s: Option<&str>| -> Result<f64> {
            s.and_then(|s| s.parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(line, format!("bad coordinate in '{trimmed}'")))
        };
        match directive {
            "v" => {
                let mut f = rest.split_whitespace();
                let v = id(f.next())?;
                let (x, y) = (coord(f.next())?, coord(f.next())?);
                if f.next().is_some() {
                    return Err(parse_err(line, "trailing fields after vertex"));
                }
                if v < positions.len() {
                    return Err(parse_err(line, format!("duplicate vertex id {v}")));
                }
                if v != positions.len() {
                    return Err(parse_err(
                        line,
                        format!("vertex id {v} out of sequence (expected {})", positions.len()),
                    ));
                }
                positions.push(Point2::new(x, y));
            }
            "e" => {
                let mut f = rest.split_whitespace();
                let (a, b) = (id(f.next())?, id(f.next())?);
                if f.next().is_some() {
                    return Err(parse_err(line, "trailing fields after edge"));
                }
                edges.push((line, a, b));
            }
            "n" => {
                let mut f = rest.splitn(2, char::is_whitespace);
                let v = id(f.next())?;
                let name = f.next().unwrap_or("").trim();
                if name.is_empty() {
                    return Err(parse_err(line, "empty name"));
                }
                names.push((line, v, name.to_string()));
            }
            other => return Err(parse_err(line, format!("unknown directive '{other}'"))),
        }
    }
    let n = positions.len();
    for &(line, a, b) in &edges {
        if a >= n || b >= n {
            return Err(parse_err(
                line,
                format!("edge ({a}, {b}) references a vertex out of range (n = {n})"),
            ));
        }
    }
    for (line, v, _) in &names {
        if *v >= n {
            return Err(parse_err(*line, format!("name references vertex {v} out of range")));
        }
    }
    let graph = Graph::new(n, edges.iter().map(|&(_, a, b)| (a, b)))?;
    Ok(MsgDocument {
        graph,
        embedding: Embedding::new(positions)?,
        names: names.into_iter().map(|(_, v, s)| (v, s)).collect(),
    })
}

pub fn write_msg(g: &Graph, emb: &Embedding, names: &[(usize, String)]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# matchstick graph: {} vertices, {} edges",
        g.n_vertices(),
        g.n_edges()
    );
    for (v, p) in emb.positions().iter().enumerate() {
        let _ = writeln!(out, "v {v} {} {}", p.x, p.y);
    }
    for &(a, b) in g.edges() {
        let _ = writeln!(out, "e {a} {b}");
    }
    for (v, name) in names {
        let _ = writeln!(out, "n {v} {name}");
    }
    out
}
