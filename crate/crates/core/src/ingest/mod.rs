//! Figure ingestion: TikZ strokes → graph + unit-scale embedding, and the
//! native MSG text format.

mod msg;
mod snap;
mod tikz;

use std::collections::BTreeMap;

pub use msg::{read_msg, write_msg, MsgDocument};
pub use snap::{build_graph, normalize_scale, IngestReport, RawGraph};
pub use tikz::{parse_tikz, Segment, SegmentList};

use crate::error::Result;
use crate::geometry::{Embedding, Graph, ToleranceProfile};

/// A figure after parsing, snapping and normalization to unit edges.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub graph: Graph,
    pub embedding: Embedding,
    pub marker_vertices: Vec<usize>,
    pub names: BTreeMap<String, usize>,
    pub report: IngestReport,
}

impl Ingested {
    /// Names in vertex order, as stored in MSG files.
    pub fn name_list(&self) -> Vec<(usize, String)> {
        let mut list: Vec<_> = self.names.iter().map(|(k, &v)| (v, k.clone())).collect();
        list.sort();
        list
    }

    pub fn to_msg(&self) -> String {
        write_msg(&self.graph, &self.embedding, &self.name_list())
    }
}

pub fn ingest_tikz(text: &str, tol: &ToleranceProfile) -> Result<Ingested> {
    let segs = parse_tikz(text)?;
    let raw = build_graph(&segs, tol)?;
    let (embedding, scale) = normalize_scale(&raw.graph, &raw.embedding)?;
    let mut report = raw.report;
    report.scale = scale;
    Ok(Ingested {
        graph: raw.graph,
        embedding,
        marker_vertices: raw.marker_vertices,
        names: raw.names,
        report,
    })
}
