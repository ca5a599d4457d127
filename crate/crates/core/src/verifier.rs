//! Matchstick-graph predicates: unit edges, no crossings, degree profile,
//! connectivity and vertex separation.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{check_sizes, Error, Result};
use crate::geometry::{
    distance, point_segment_distance, segment_segment_distance, DegreeProfile, Embedding, Graph,
    PointGrid, ToleranceProfile,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitLengthCheck {
    pub ok: bool,
    pub max_deviation: f64,
    /// `| len - 1 |` per edge, in edge-list order.
    pub deviations: Vec<f64>,
}

pub fn check_unit_lengths(g: &Graph, emb: &Embedding, eps: f64) -> UnitLengthCheck {
    let deviations: Vec<f64> = g
        .edges()
        .iter()
        .map(|&e| (emb.edge_length(e) - 1.0).abs())
        .collect();
    let max_deviation = deviations.iter().copied().fold(0.0, f64::max);
    UnitLengthCheck {
        ok: deviations.iter().all(|&d| d <= eps),
        max_deviation,
        deviations,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CrossingViolation {
    /// Two edges without a common vertex come within the clearance.
    Disjoint { e1: usize, e2: usize, distance: f64 },
    /// Two edges sharing a vertex overlap beyond it.
    Overlap { e1: usize, e2: usize, distance: f64 },
    /// A vertex lies on (or too near) an edge it is not part of.
    VertexOnEdge { vertex: usize, edge: usize, distance: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingCheck {
    pub ok: bool,
    pub violations: Vec<CrossingViolation>,
}

/// Hash-grid buckets of edge indices, keyed by every cell an edge's
/// clearance-inflated bounding box touches.
fn edge_buckets(g: &Graph, emb: &Embedding, pad: f64, cell: f64) -> HashMap<(i64, i64), Vec<usize>> {
    let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (k, &(a, b)) in g.edges().iter().enumerate() {
        let (p, q) = (emb.get(a), emb.get(b));
        let x0 = ((p.x.min(q.x) - pad) / cell).floor() as i64;
        let x1 = ((p.x.max(q.x) + pad) / cell).floor() as i64;
        let y0 = ((p.y.min(q.y) - pad) / cell).floor() as i64;
        let y1 = ((p.y.max(q.y) + pad) / cell).floor() as i64;
        for x in x0..=x1 {
            for y in y0..=y1 {
                buckets.entry((x, y)).or_default().push(k);
            }
        }
    }
    buckets
}

pub fn check_noncrossing(g: &Graph, emb: &Embedding, delta_cross: f64) -> CrossingCheck {
    let edges = g.edges();
    let longest = edges
        .iter()
        .map(|&e| emb.edge_length(e))
        .fold(0.0, f64::max);
    let cell = longest.max(1.0);
    let buckets = edge_buckets(g, emb, delta_cross, cell);

    let mut pairs = BTreeSet::new();
    for bucket in buckets.values() {
        for (i, &e1) in bucket.iter().enumerate() {
            for &e2 in &bucket[i + 1..] {
                pairs.insert((e1.min(e2), e1.max(e2)));
            }
        }
    }

    let mut violations = Vec::new();
    for (e1, e2) in pairs {
        let (a, b) = edges[e1];
        let (c, d) = edges[e2];
        let shared = [a, b].into_iter().find(|&v| v == c || v == d);
        match shared {
            None => {
                let dist = segment_segment_distance(emb.get(a), emb.get(b), emb.get(c), emb.get(d));
                if dist <= delta_cross {
                    violations.push(CrossingViolation::Disjoint { e1, e2, distance: dist });
                }
            }
            Some(v) => {
                let far1 = if a == v { b } else { a };
                let far2 = if c == v { d } else { c };
                let dist = point_segment_distance(emb.get(far1), emb.get(v), emb.get(far2))
                    .min(point_segment_distance(emb.get(far2), emb.get(v), emb.get(far1)));
                if dist <= delta_cross {
                    violations.push(CrossingViolation::Overlap { e1, e2, distance: dist });
                }
            }
        }
    }

    for (v, &p) in emb.positions().iter().enumerate() {
        let key = ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64);
        let Some(bucket) = buckets.get(&key) else {
            continue;
        };
        for &k in bucket {
            let (a, b) = edges[k];
            if v == a || v == b {
                continue;
            }
            let dist = point_segment_distance(p, emb.get(a), emb.get(b));
            if dist <= delta_cross {
                violations.push(CrossingViolation::VertexOnEdge { vertex: v, edge: k, distance: dist });
            }
        }
    }

    CrossingCheck {
        ok: violations.is_empty(),
        violations,
    }
}

/// Degree histogram, and whether every degree is `m` or `n`.
pub fn degree_profile(g: &Graph, m: usize, n: usize) -> (bool, DegreeProfile) {
    let mut counts = BTreeMap::new();
    for d in g.degrees() {
        *counts.entry(d).or_insert(0) += 1;
    }
    let ok = counts.keys().all(|&d| d == m || d == n);
    (ok, DegreeProfile { m, n, counts })
}

/// Number of degree-`n` vertices forced by the handshake lemma when every
/// vertex has degree `m` or `n`.
pub fn expected_high_degree_count(vertices: usize, edges: usize, m: usize, n: usize) -> Result<usize> {
    if n <= m {
        return Err(Error::Other(format!("need n > m, got m = {m}, n = {n}")));
    }
    let excess = 2 * edges as i64 - (m * vertices) as i64;
    let step = (n - m) as i64;
    if excess < 0 || excess % step != 0 {
        return Err(Error::Other(format!(
            "{vertices} vertices and {edges} edges are inconsistent with an ({m},{n}) profile"
        )));
    }
    Ok((excess / step) as usize)
}

fn close_pairs(emb: &Embedding, sep: f64) -> Vec<(usize, usize)> {
    let pts = emb.positions();
    let grid = PointGrid::new(pts, sep);
    let mut out = Vec::new();
    for (v, &p) in pts.iter().enumerate() {
        for w in grid.within(pts, p, sep) {
            if w > v && distance(pts[v], pts[w]) < sep {
                out.push((v, w));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationCertificate {
    pub unit_ok: bool,
    pub max_abs_length_deviation: f64,
    pub crossing_ok: bool,
    pub violations: Vec<CrossingViolation>,
    pub degrees_ok: bool,
    pub degree_profile: DegreeProfile,
    pub connected: bool,
    pub separation_ok: bool,
    pub close_pairs: Vec<(usize, usize)>,
    pub overall: bool,
}

fn require_nondegenerate(g: &Graph, emb: &Embedding) -> Result<()> {
    check_sizes(g, emb)?;
    if g.n_vertices() < 2 {
        return Err(Error::Degenerate(format!(
            "{} vertices; at least 2 required",
            g.n_vertices()
        )));
    }
    Ok(())
}

/// Run every matchstick predicate with unit-length slack `eps`.
pub fn verify_matchstick(
    g: &Graph,
    emb: &Embedding,
    m: usize,
    n: usize,
    tol: &ToleranceProfile,
    eps: f64,
) -> Result<VerificationCertificate> {
    require_nondegenerate(g, emb)?;
    let unit = check_unit_lengths(g, emb, eps);
    let crossing = check_noncrossing(g, emb, tol.delta_cross);
    let (degrees_ok, degree_profile) = degree_profile(g, m, n);
    let connected = g.is_connected();
    let close = close_pairs(emb, tol.vertex_sep);
    let separation_ok = close.is_empty();
    Ok(VerificationCertificate {
        overall: unit.ok && crossing.ok && degrees_ok && connected && separation_ok,
        unit_ok: unit.ok,
        max_abs_length_deviation: unit.max_deviation,
        crossing_ok: crossing.ok,
        violations: crossing.violations,
        degrees_ok,
        degree_profile,
        connected,
        separation_ok,
        close_pairs: close,
    })
}

/// Verification of a finite piece of an infinite graph: vertices of degree
/// below `m` are boundary and exempt from the degree profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchReport {
    pub unit_ok: bool,
    pub max_abs_length_deviation: f64,
    pub crossing_ok: bool,
    pub violations: Vec<CrossingViolation>,
    pub separation_ok: bool,
    pub connected: bool,
    pub boundary: Vec<usize>,
    pub interior_degrees: BTreeMap<usize, usize>,
    pub interior_ok: bool,
    pub overall: bool,
}

pub fn verify_patch(
    g: &Graph,
    emb: &Embedding,
    m: usize,
    n: usize,
    tol: &ToleranceProfile,
    eps: f64,
) -> Result<PatchReport> {
    require_nondegenerate(g, emb)?;
    let unit = check_unit_lengths(g, emb, eps);
    let crossing = check_noncrossing(g, emb, tol.delta_cross);
    let separation_ok = close_pairs(emb, tol.vertex_sep).is_empty();
    let connected = g.is_connected();
    let mut boundary = Vec::new();
    let mut interior_degrees = BTreeMap::new();
    for (v, d) in g.degrees().into_iter().enumerate() {
        if d < m {
            boundary.push(v);
        } else {
            *interior_degrees.entry(d).or_insert(0) += 1;
        }
    }
    let interior_ok = interior_degrees.keys().all(|&d| d == m || d == n);
    Ok(PatchReport {
        overall: unit.ok && crossing.ok && separation_ok && connected && interior_ok,
        unit_ok: unit.ok,
        max_abs_length_deviation: unit.max_deviation,
        crossing_ok: crossing.ok,
        violations: crossing.violations,
        separation_ok,
        connected,
        boundary,
        interior_degrees,
        interior_ok,
    })
}
