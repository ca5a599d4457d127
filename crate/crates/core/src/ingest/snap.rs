//! Turning loose figure strokes into a graph.
//!
//! Endpoints closer than `snap_tol` are merged (union-find over a hash grid),
//! strokes that pass straight through another vertex are split there, and
//! repeated edges are collapsed.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{distance, point_segment_distance, Embedding, Graph, Point2, PointGrid, ToleranceProfile};

use super::tikz::SegmentList;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub n_segments: usize,
    pub n_vertices: usize,
    pub n_edges: usize,
    /// Figure units per unit edge (median edge length).
    pub scale: f64,
    /// Largest distance from a stroke endpoint to its merged vertex, in figure units.
    pub max_snap_displacement: f64,
    pub duplicate_segments_dropped: usize,
    /// Strokes that spanned several collinear edges and were split.
    pub segments_split: usize,
}

/// Output of [`build_graph`]: positions are still in figure units.
#[derive(Debug, Clone)]
pub struct RawGraph {
    pub graph: Graph,
    pub embedding: Embedding,
    /// Vertex for each entry of [`SegmentList::markers`].
    pub marker_vertices: Vec<usize>,
    /// Vertex for each label.
    pub names: BTreeMap<String, usize>,
    pub report: IngestReport,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Keep the smaller root so the result does not depend on call order.
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.0[hi] = lo;
        }
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

pub fn build_graph(segs: &SegmentList, tol: &ToleranceProfile) -> Result<RawGraph> {
    let snap = tol.snap_tol;
    let endpoints: Vec<Point2> = segs
        .segments
        .iter()
        .flat_map(|s| [s.start, s.end])
        .collect();

    let grid = PointGrid::new(&endpoints, snap);
    let mut uf = UnionFind((0..endpoints.len()).collect());
    for (i, &p) in endpoints.iter().enumerate() {
        for j in grid.within(&endpoints, p, snap) {
            uf.union(i, j);
        }
    }

    // Vertex ids in first-appearance order.
    let mut vertex_of_root = vec![usize::MAX; endpoints.len()];
    let mut vertex_of_point = Vec::with_capacity(endpoints.len());
    let mut members: Vec<Vec<usize>> = Vec::new();
    for i in 0..endpoints.len() {
        let r = uf.find(i);
        if vertex_of_root[r] == usize::MAX {
            vertex_of_root[r] = members.len();
            members.push(Vec::new());
        }
        let v = vertex_of_root[r];
        members[v].push(i);
        vertex_of_point.push(v);
    }
    let positions: Vec<Point2> = members
        .iter()
        .map(|m| {
            let sum = m.iter().fold(Point2::ORIGIN, |acc, &i| acc + endpoints[i]);
            sum * (1.0 / m.len() as f64)
        })
        .collect();
    let max_snap_displacement = endpoints
        .iter()
        .enumerate()
        .map(|(i, &p)| distance(p, positions[vertex_of_point[i]]))
        .fold(0.0, f64::max);

    let mut raw_lengths: Vec<f64> = segs.segments.iter().map(|s| s.length()).collect();
    let stroke_scale = median(&mut raw_lengths);
    let sep = tol.vertex_sep * stroke_scale;
    if sep > 0.0 {
        let sep_grid = PointGrid::new(&positions, sep.max(snap));
        for (v, &p) in positions.iter().enumerate() {
            if let Some(&w) = sep_grid.within(&positions, p, sep).iter().find(|&&w| w != v) {
                return Err(Error::AmbiguousVertices(v.min(w), v.max(w)));
            }
        }
    }

    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    let mut duplicates = 0;
    let mut split = 0;
    for (k, _) in segs.segments.iter().enumerate() {
        let (a, b) = (vertex_of_point[2 * k], vertex_of_point[2 * k + 1]);
        if a == b {
            return Err(Error::Degenerate(format!(
                "segment {k} collapses to a single vertex"
            )));
        }
        let chain = interior_chain(&positions, a, b, snap);
        if chain.len() > 2 {
            split += 1;
        }
        for w in chain.windows(2) {
            let e = (w[0].min(w[1]), w[0].max(w[1]));
            if seen.insert(e) {
                edges.push(e);
            } else {
                duplicates += 1;
            }
        }
    }

    let graph = Graph::new(positions.len(), edges)?;
    let embedding = Embedding::new(positions)?;

    let vgrid = PointGrid::new(embedding.positions(), snap);
    let resolve = |p: Point2| {
        vgrid
            .nearest_within(embedding.positions(), p, snap)
            .ok_or(Error::MarkerUnresolved { x: p.x, y: p.y })
    };
    let marker_vertices = segs
        .markers
        .iter()
        .map(|&p| resolve(p))
        .collect::<Result<Vec<_>>>()?;
    let mut names = BTreeMap::new();
    for (name, &anchor) in &segs.labels {
        // Labels are offset from the dot they annotate; attach each label to
        // the nearest marker when the figure has markers.
        let v = match nearest(&segs.markers, anchor) {
            Some(m) => marker_vertices[m],
            None => resolve(anchor)?,
        };
        names.insert(name.clone(), v);
    }

    let mut lengths: Vec<f64> = graph
        .edges()
        .iter()
        .map(|&e| embedding.edge_length(e))
        .collect();
    let report = IngestReport {
        n_segments: segs.segments.len(),
        n_vertices: graph.n_vertices(),
        n_edges: graph.n_edges(),
        scale: median(&mut lengths),
        max_snap_displacement,
        duplicate_segments_dropped: duplicates,
        segments_split: split,
    };
    Ok(RawGraph {
        graph,
        embedding,
        marker_vertices,
        names,
        report,
    })
}

fn nearest(points: &[Point2], p: Point2) -> Option<usize> {
    (0..points.len()).min_by(|&a, &b| distance(points[a], p).total_cmp(&distance(points[b], p)))
}

/// Vertices strictly inside the stroke `a`–`b` (within `snap`), ordered from `a` to `b`.
fn interior_chain(positions: &[Point2], a: usize, b: usize, snap: f64) -> Vec<usize> {
    let (pa, pb) = (positions[a], positions[b]);
    let d = pb - pa;
    let len2 = d.norm_squared();
    let mut inner: Vec<(f64, usize)> = positions
        .iter()
        .enumerate()
        .filter(|&(v, _)| v != a && v != b)
        .filter_map(|(v, &p)| {
            let t = (p - pa).dot(d) / len2;
            (t > 0.0 && t < 1.0 && point_segment_distance(p, pa, pb) < snap).then_some((t, v))
        })
        .collect();
    inner.sort_by(|x, y| x.0.total_cmp(&y.0));
    std::iter::once(a)
        .chain(inner.into_iter().map(|(_, v)| v))
        .chain(std::iter::once(b))
        .collect()
}

/// Divide all coordinates by the median edge length.
pub fn normalize_scale(g: &Graph, emb_raw: &Embedding) -> Result<(Embedding, f64)> {
    crate::error::check_sizes(g, emb_raw)?;
    if g.n_edges() == 0 {
        return Err(Error::Scale("graph has no edges".into()));
    }
    let mut lengths: Vec<f64> = g.edges().iter().map(|&e| emb_raw.edge_length(e)).collect();
    let scale = median(&mut lengths);
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::Scale(format!("median edge length is {scale}")));
    }
    Ok((emb_raw.map(|p| p * (1.0 / scale)), scale))
}
