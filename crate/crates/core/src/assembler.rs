//! Building larger graphs from placed blocks: vertex merging and unit-edge
//! insertion.

use serde::{Deserialize, Serialize};

use crate::error::{check_sizes, Error, Result};
use crate::geometry::{distance, Embedding, Graph, Isometry, Point2, PointGrid};

/// A block positioned in the plane by an isometry.
#[derive(Debug, Clone, Copy)]
pub struct Placement<'a> {
    pub graph: &'a Graph,
    pub embedding: &'a Embedding,
    pub iso: Isometry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Merged {
    pub graph: Graph,
    pub embedding: Embedding,
    /// `merge_map[p][v]` = merged id of vertex `v` of placement `p`.
    pub merge_map: Vec<Vec<usize>>,
    /// Number of block vertices absorbed into another (total block
    /// vertices minus merged vertices).
    pub identifications: usize,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Union of the placed blocks with vertices closer than `snap_tol`
/// identified (positions averaged) and duplicate edges collapsed.
///
/// Merged ids follow first appearance over placements in order. Fails if a
/// block edge would collapse to a loop, or if two distinct merged vertices
/// end up closer than `vertex_sep`.
pub fn merge(placements: &[Placement<'_>], snap_tol: f64, vertex_sep: f64) -> Result<Merged> {
    if placements.is_empty() {
        return Err(Error::Degenerate("nothing to merge".into()));
    }
    let mut points = Vec::new();
    for pl in placements {
        check_sizes(pl.graph, pl.embedding)?;
        for &q in pl.embedding.positions() {
            points.push(pl.iso.apply(q));
        }
    }
    let mut parent: Vec<usize> = (0..points.len()).collect();
    let grid = PointGrid::new(&points, snap_tol);
    for i in 0..points.len() {
        for j in grid.within(&points, points[i], snap_tol) {
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }

    let mut id_of_root = vec![usize::MAX; points.len()];
    let mut sums: Vec<(Point2, usize)> = Vec::new();
    let mut global = Vec::with_capacity(points.len());
    for i in 0..points.len() {
        let r = find(&mut parent, i);
        if id_of_root[r] == usize::MAX {
            id_of_root[r] = sums.len();
            sums.push((Point2::ORIGIN, 0));
        }
        let id = id_of_root[r];
        sums[id].0 = sums[id].0 + points[i];
        sums[id].1 += 1;
        global.push(id);
    }

    let mut merge_map = Vec::with_capacity(placements.len());
    let mut offset = 0;
    for pl in placements {
        merge_map.push(global[offset..offset + pl.embedding.len()].to_vec());
        offset += pl.embedding.len();
    }

    let mut edges = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (p, pl) in placements.iter().enumerate() {
        for &(a, b) in pl.graph.edges() {
            let (ga, gb) = (merge_map[p][a], merge_map[p][b]);
            if ga == gb {
                return Err(Error::MergeSelfLoop(a, b));
            }
            if seen.insert((ga.min(gb), ga.max(gb))) {
                edges.push((ga, gb));
            }
        }
    }
    let positions: Vec<Point2> = sums.iter().map(|&(s, c)| s * (1.0 / c as f64)).collect();
    let grid = PointGrid::new(&positions, vertex_sep);
    for (v, &q) in positions.iter().enumerate() {
        if let Some(w) = grid.within(&positions, q, vertex_sep).into_iter().find(|&w| w != v) {
            return Err(Error::AmbiguousVertices(v.min(w), v.max(w)));
        }
    }
    Ok(Merged {
        graph: Graph::new(positions.len(), edges)?,
        identifications: points.len() - positions.len(),
        embedding: Embedding::new(positions)?,
        merge_map,
    })
}

/// The orientation-preserving isometry taking `p.0 → p.1` and `q.0 → q.1`,
/// expressed as a rotation about its fixed point (or a translation).
/// `None` if the two pairs are not congruent within `tol`.
pub fn rigid_motion_between(p: (Point2, Point2), q: (Point2, Point2), tol: f64) -> Option<Isometry> {
    let (u, w) = (q.0 - p.0, q.1 - p.1);
    if (u.norm() - w.norm()).abs() > tol || u.norm() == 0.0 {
        return None;
    }
    let theta = w.angle() - u.angle();
    let (s, c) = theta.sin_cos();
    if (1.0 - c).abs() < 1e-15 && s.abs() < 1e-15 {
        return Some(Isometry::translation(p.1 - p.0));
    }
    // Fixed point C solves (I − R) C = p' − R p.
    let rhs = p.1 - p.0.rotated(theta);
    let det = 2.0 - 2.0 * c;
    let center = Point2::new((1.0 - c) * rhs.x - s * rhs.y, s * rhs.x + (1.0 - c) * rhs.y) * (1.0 / det);
    Some(Isometry::rotation(center, theta))
}

/// Append the edge `(a, b)` if the two vertices are a unit apart within
/// `eps`. The embedding is returned unchanged.
pub fn add_unit_edge(g: &Graph, emb: &Embedding, a: usize, b: usize, eps: f64) -> Result<(Graph, Embedding)> {
    check_sizes(g, emb)?;
    if a >= g.n_vertices() || b >= g.n_vertices() {
        return Err(Error::VertexOutOfRange {
            index: a.max(b),
            n_vertices: g.n_vertices(),
        });
    }
    if g.has_edge(a, b) {
        return Err(Error::EdgeExists(a.min(b), a.max(b)));
    }
    let d = distance(emb.get(a), emb.get(b));
    if (d - 1.0).abs() > eps {
        return Err(Error::NotUnitDistance { a, b, distance: d });
    }
    Ok((g.with_edge(a, b)?, emb.clone()))
}
