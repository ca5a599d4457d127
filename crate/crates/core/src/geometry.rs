//! Points, isometries, graphs and embeddings shared by every other module.
//!
//! Coordinates are always in unit-edge scale: a distance of `1.0` is one
//! matchstick. Raw figure units only exist inside [`crate::ingest`].

use std::collections::{BTreeMap, HashMap, HashSet};
use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(radius: f64, angle: f64) -> Self {
        Self::new(radius * angle.cos(), radius * angle.sin())
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3-D cross product.
    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Polar angle in `(-π, π]`.
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Rotate counter-clockwise about the origin.
    pub fn rotated(self, angle: f64) -> Point2 {
        let (s, c) = angle.sin_cos();
        Point2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Point2 {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

/// Euclidean distance.
pub fn distance(p: Point2, q: Point2) -> f64 {
    (p - q).norm()
}

/// Minimum distance from `p` to the closed segment `a`–`b`.
pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let d = b - a;
    let len2 = d.norm_squared();
    if len2 == 0.0 {
        return distance(p, a);
    }
    let t = ((p - a).dot(d) / len2).clamp(0.0, 1.0);
    distance(p, a + d * t)
}

/// Minimum distance between the closed segments `a`–`b` and `c`–`d`.
pub fn segment_segment_distance(a: Point2, b: Point2, c: Point2, d: Point2) -> f64 {
    if segments_properly_intersect(a, b, c, d) {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

fn segments_properly_intersect(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let d1 = (b - a).cross(c - a);
    let d2 = (b - a).cross(d - a);
    let d3 = (d - c).cross(a - c);
    let d4 = (d - c).cross(b - c);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// The linear part of a planar isometry, before the trailing translation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IsometryKind {
    Identity,
    /// Counter-clockwise rotation by `angle` radians about `center`.
    Rotation { center: Point2, angle: f64 },
    /// Reflection in the line through `point` with direction angle `angle`.
    Reflection { point: Point2, angle: f64 },
}

/// A planar isometry `p ↦ kind(p) + translation`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Isometry {
    pub kind: IsometryKind,
    pub translation: Point2,
}

impl Isometry {
    pub const IDENTITY: Isometry = Isometry {
        kind: IsometryKind::Identity,
        translation: Point2::ORIGIN,
    };

    pub fn rotation(center: Point2, angle: f64) -> Self {
        Self {
            kind: IsometryKind::Rotation { center, angle },
            translation: Point2::ORIGIN,
        }
    }

    pub fn reflection(point: Point2, angle: f64) -> Self {
        Self {
            kind: IsometryKind::Reflection { point, angle },
            translation: Point2::ORIGIN,
        }
    }

    pub fn translation(offset: Point2) -> Self {
        Self {
            kind: IsometryKind::Identity,
            translation: offset,
        }
    }

    pub fn then_translate(mut self, offset: Point2) -> Self {
        self.translation = self.translation + offset;
        self
    }

    pub fn is_reflection(&self) -> bool {
        matches!(self.kind, IsometryKind::Reflection { .. })
    }

    pub fn apply(&self, p: Point2) -> Point2 {
        let q = match self.kind {
            IsometryKind::Identity => p,
            IsometryKind::Rotation { center, angle } => (p - center).rotated(angle) + center,
            IsometryKind::Reflection { point, angle } => reflect(p - point, angle) + point,
        };
        q + self.translation
    }

    pub fn inverse(&self) -> Isometry {
        match self.kind {
            IsometryKind::Identity => Isometry::translation(-self.translation),
            IsometryKind::Rotation { center, angle } => Isometry {
                kind: IsometryKind::Rotation {
                    center,
                    angle: -angle,
                },
                translation: -self.translation.rotated(-angle),
            },
            IsometryKind::Reflection { point, angle } => Isometry {
                kind: IsometryKind::Reflection { point, angle },
                translation: -reflect(self.translation, angle),
            },
        }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Isometry) -> Isometry {
        let offset = self.apply(other.apply(Point2::ORIGIN));
        let ex = self.apply(other.apply(Point2::new(1.0, 0.0))) - offset;
        let ey = self.apply(other.apply(Point2::new(0.0, 1.0))) - offset;
        let det = ex.x * ey.y - ex.y * ey.x;
        let kind = if det < 0.0 {
            // Reflection matrix [[cos 2θ, sin 2θ], [sin 2θ, -cos 2θ]].
            IsometryKind::Reflection {
                point: Point2::ORIGIN,
                angle: 0.5 * ex.y.atan2(ex.x),
            }
        } else {
            let angle = ex.y.atan2(ex.x);
            if angle == 0.0 {
                IsometryKind::Identity
            } else {
                IsometryKind::Rotation {
                    center: Point2::ORIGIN,
                    angle,
                }
            }
        };
        Isometry {
            kind,
            translation: offset,
        }
    }
}

fn reflect(v: Point2, angle: f64) -> Point2 {
    let (s, c) = (2.0 * angle).sin_cos();
    Point2::new(c * v.x + s * v.y, s * v.x - c * v.y)
}

/// Wrap an angle into `[0, 2π)`.
pub fn wrap_angle(angle: f64) -> f64 {
    let a = angle.rem_euclid(2.0 * PI);
    if a >= 2.0 * PI {
        0.0
    } else {
        a
    }
}

/// Combinatorial structure: vertex count plus a list of unordered edges.
///
/// Edges are stored as `(min, max)` pairs in the order they were supplied.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph", into = "RawGraph")]
pub struct Graph {
    n_vertices: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct RawGraph {
    n_vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl TryFrom<RawGraph> for Graph {
    type Error = Error;
    fn try_from(raw: RawGraph) -> Result<Self> {
        Graph::new(raw.n_vertices, raw.edges)
    }
}

impl From<Graph> for RawGraph {
    fn from(g: Graph) -> Self {
        RawGraph {
            n_vertices: g.n_vertices,
            edges: g.edges,
        }
    }
}

impl Graph {
    pub fn new(n_vertices: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut list = Vec::new();
        let mut adjacency = vec![Vec::new(); n_vertices];
        for (a, b) in edges {
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            if a >= n_vertices || b >= n_vertices {
                return Err(Error::VertexOutOfRange {
                    index: a.max(b),
                    n_vertices,
                });
            }
            let e = (a.min(b), a.max(b));
            if !seen.insert(e) {
                return Err(Error::DuplicateEdge(e.0, e.1));
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
            list.push(e);
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        Ok(Self {
            n_vertices,
            edges: list,
            adjacency,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.n_vertices && self.adjacency[a].binary_search(&b).is_ok()
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        let e = (a.min(b), a.max(b));
        self.edges.iter().position(|&f| f == e)
    }

    pub fn is_connected(&self) -> bool {
        if self.n_vertices == 0 {
            return true;
        }
        let mut seen = vec![false; self.n_vertices];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.n_vertices
    }

    /// Copy with the edge at `index` removed; remaining edges keep their order.
    pub fn without_edge(&self, index: usize) -> Graph {
        let edges = self
            .edges
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != index)
            .map(|(_, &e)| e);
        Graph::new(self.n_vertices, edges).expect("subgraph of a valid graph")
    }

    pub fn with_edge(&self, a: usize, b: usize) -> Result<Graph> {
        Graph::new(self.n_vertices, self.edges.iter().copied().chain([(a, b)]))
    }

    /// Relabel vertices: old vertex `v` becomes `perm[v]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Graph> {
        Graph::new(
            self.n_vertices,
            self.edges.iter().map(|&(a, b)| (perm[a], perm[b])),
        )
    }
}

/// Per-vertex positions for a [`Graph`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point2>", into = "Vec<Point2>")]
pub struct Embedding {
    positions: Vec<Point2>,
}

impl TryFrom<Vec<Point2>> for Embedding {
    type Error = Error;
    fn try_from(positions: Vec<Point2>) -> Result<Self> {
        Embedding::new(positions)
    }
}

impl From<Embedding> for Vec<Point2> {
    fn from(e: Embedding) -> Self {
        e.positions
    }
}

impl Embedding {
    pub fn new(positions: Vec<Point2>) -> Result<Self> {
        if let Some(v) = positions.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFinite(v));
        }
        Ok(Self { positions })
    }

    /// Interleaved `[x0, y0, x1, y1, ...]`.
    pub fn from_flat(coords: &[f64]) -> Result<Self> {
        Self::new(
            coords
                .chunks_exact(2)
                .map(|c| Point2::new(c[0], c[1]))
                .collect(),
        )
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.positions.iter().flat_map(|p| [p.x, p.y]).collect()
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Point2] {
        &self.positions
    }

    pub fn get(&self, v: usize) -> Point2 {
        self.positions[v]
    }

    pub fn centroid(&self) -> Point2 {
        let n = self.positions.len().max(1) as f64;
        let sum = self
            .positions
            .iter()
            .fold(Point2::ORIGIN, |acc, &p| acc + p);
        sum * (1.0 / n)
    }

    pub fn edge_length(&self, edge: (usize, usize)) -> f64 {
        distance(self.positions[edge.0], self.positions[edge.1])
    }

    pub fn max_abs_length_deviation(&self, g: &Graph) -> f64 {
        g.edges()
            .iter()
            .map(|&e| (self.edge_length(e) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Largest distance any vertex moved relative to `other`.
    pub fn max_displacement(&self, other: &Embedding) -> f64 {
        self.positions
            .iter()
            .zip(&other.positions)
            .map(|(&p, &q)| distance(p, q))
            .fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(Point2) -> Point2) -> Embedding {
        Embedding {
            positions: self.positions.iter().map(|&p| f(p)).collect(),
        }
    }

    pub fn relabeled(&self, perm: &[usize]) -> Embedding {
        let mut positions = vec![Point2::ORIGIN; self.positions.len()];
        for (v, &p) in self.positions.iter().enumerate() {
            positions[perm[v]] = p;
        }
        Embedding { positions }
    }
}

/// Map every vertex of `emb` through `iso`.
pub fn apply_isometry(iso: &Isometry, emb: &Embedding) -> Embedding {
    emb.map(|p| iso.apply(p))
}

/// Numerical tolerances used throughout verification, refinement, rank
/// decisions and symmetry matching.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToleranceProfile {
    /// Unit-length slack for unrefined (figure-precision) data.
    pub eps_raw: f64,
    /// Unit-length slack after refinement.
    pub eps_refined: f64,
    /// Minimum clearance between segments that must not touch.
    pub delta_cross: f64,
    /// Minimum distance between distinct vertices.
    pub vertex_sep: f64,
    /// Vertex merge radius during ingest, in figure units.
    pub snap_tol: f64,
    /// Relative singular-value cutoff for numerical rank.
    pub rank_tau: f64,
    /// Matching radius for symmetry detection.
    pub sym_tol: f64,
}

impl Default for ToleranceProfile {
    fn default() -> Self {
        Self {
            eps_raw: 1e-3,
            eps_refined: 1e-9,
            delta_cross: 1e-7,
            vertex_sep: 1e-4,
            snap_tol: 0.05,
            rank_tau: 1e-7,
            sym_tol: 1e-6,
        }
    }
}

impl ToleranceProfile {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("eps_raw", self.eps_raw),
            ("eps_refined", self.eps_refined),
            ("delta_cross", self.delta_cross),
            ("vertex_sep", self.vertex_sep),
            ("snap_tol", self.snap_tol),
            ("rank_tau", self.rank_tau),
            ("sym_tol", self.sym_tol),
        ];
        for (name, value) in fields {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidTolerance(format!("{name} must be positive")));
            }
        }
        if self.eps_refined >= self.eps_raw {
            return Err(Error::InvalidTolerance(
                "eps_refined must be smaller than eps_raw".into(),
            ));
        }
        Ok(())
    }

    pub fn with_eps_raw(mut self, eps: f64) -> Self {
        self.eps_raw = eps;
        self
    }
}

/// Which degrees occur, relative to an `(m, n)` target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeProfile {
    pub m: usize,
    pub n: usize,
    /// Degree → number of vertices with that degree.
    pub counts: BTreeMap<usize, usize>,
}

impl DegreeProfile {
    pub fn count(&self, degree: usize) -> usize {
        self.counts.get(&degree).copied().unwrap_or(0)
    }
}

/// Uniform hash grid over points, used for snapping, separation checks and
/// symmetry matching.
pub(crate) struct PointGrid {
    cell: f64,
    cells: HashMap<(i64, i64), Vec<usize>>,
}

impl PointGrid {
    pub(crate) fn new(points: &[Point2], cell: f64) -> Self {
        let mut cells: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, &p) in points.iter().enumerate() {
            cells.entry(Self::key(p, cell)).or_default().push(i);
        }
        Self { cell, cells }
    }

    fn key(p: Point2, cell: f64) -> (i64, i64) {
        ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64)
    }

    /// Indices of all points within `radius` of `p`; `radius` must not exceed
    /// the cell size.
    pub(crate) fn within(&self, points: &[Point2], p: Point2, radius: f64) -> Vec<usize> {
        debug_assert!(radius <= self.cell);
        let (kx, ky) = Self::key(p, self.cell);
        let mut out = Vec::new();
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(bucket) = self.cells.get(&(kx + dx, ky + dy)) {
                    out.extend(
                        bucket
                            .iter()
                            .copied()
                            .filter(|&i| distance(points[i], p) <= radius),
                    );
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub(crate) fn nearest_within(&self, points: &[Point2], p: Point2, radius: f64) -> Option<usize> {
        self.within(points, p, radius)
            .into_iter()
            .min_by(|&a, &b| distance(points[a], p).total_cmp(&distance(points[b], p)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_examples() {
        assert_eq!(distance(Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)), 1.0);
        assert_eq!(distance(Point2::ORIGIN, Point2::ORIGIN), 0.0);
        let d = distance(Point2::new(3.65, 918.0914), Point2::new(47.286, 914.6636));
        assert!((d - 43.770).abs() < 5e-4, "{d}");
    }

    #[test]
    fn rotation_by_pi() {
        let emb = Embedding::new(vec![Point2::new(1.0, 0.0)]).unwrap();
        let out = apply_isometry(&Isometry::rotation(Point2::ORIGIN, PI), &emb);
        assert!(distance(out.get(0), Point2::new(-1.0, 0.0)) < 1e-15);
    }

    #[test]
    fn third_turn_has_order_three() {
        let emb = Embedding::new(vec![Point2::new(0.3, -2.0), Point2::new(5.0, 1.0)]).unwrap();
        let rot = Isometry::rotation(Point2::new(0.5, 0.25), 2.0 * PI / 3.0);
        let mut cur = emb.clone();
        for _ in 0..3 {
            cur = apply_isometry(&rot, &cur);
        }
        assert!(cur.max_displacement(&emb) < 1e-12);
    }

    #[test]
    fn identity_is_noop() {
        let emb = Embedding::new(vec![Point2::new(0.3, -2.0), Point2::new(5.0, 1.0)]).unwrap();
        assert_eq!(apply_isometry(&Isometry::IDENTITY, &emb), emb);
    }

    #[test]
    fn graph_rejects_loops_and_duplicates() {
        assert!(matches!(Graph::new(2, [(0, 0)]), Err(Error::SelfLoop(0))));
        assert!(matches!(
            Graph::new(2, [(0, 1), (1, 0)]),
            Err(Error::DuplicateEdge(0, 1))
        ));
        assert!(matches!(
            Graph::new(2, [(0, 2)]),
            Err(Error::VertexOutOfRange { index: 2, .. })
        ));
    }

    #[test]
    fn compose_reflections_gives_rotation() {
        let a = Isometry::reflection(Point2::ORIGIN, 0.0);
        let b = Isometry::reflection(Point2::ORIGIN, PI / 6.0);
        let c = b.compose(&a);
        let p = Point2::new(1.0, 0.0);
        assert!(distance(c.apply(p), p.rotated(PI / 3.0)) < 1e-14);
        assert!(!c.is_reflection());
    }

    #[test]
    fn default_tolerances_are_valid() {
        ToleranceProfile::default().validate().unwrap();
        let bad = ToleranceProfile {
            eps_refined: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn segment_distances() {
        let o = Point2::ORIGIN;
        let crossing = segment_segment_distance(
            o,
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
            Point2::new(1.0, 0.0),
        );
        assert_eq!(crossing, 0.0);
        let parallel = segment_segment_distance(
            o,
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 0.5),
            Point2::new(1.0, 0.5),
        );
        assert!((parallel - 0.5).abs() < 1e-15);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn point() -> impl Strategy<Value = Point2> {
            (-10.0f64..10.0, -10.0f64..10.0).prop_map(|(x, y)| Point2::new(x, y))
        }

        fn isometry() -> impl Strategy<Value = Isometry> {
            (point(), -7.0f64..7.0, point(), any::<bool>()).prop_map(|(c, a, t, refl)| {
                if refl {
                    Isometry::reflection(c, a).then_translate(t)
                } else {
                    Isometry::rotation(c, a).then_translate(t)
                }
            })
        }

        proptest! {
            #[test]
            fn distance_is_a_metric(p in point(), q in point(), r in point()) {
                prop_assert!(distance(p, q) >= 0.0);
                prop_assert_eq!(distance(p, q), distance(q, p));
                prop_assert!(distance(p, r) <= distance(p, q) + distance(q, r) + 1e-12);
            }

            #[test]
            fn isometry_preserves_pairwise_distances(
                pts in prop::collection::vec(point(), 1..50),
                iso in isometry(),
            ) {
                let emb = Embedding::new(pts).unwrap();
                let out = apply_isometry(&iso, &emb);
                for i in 0..emb.len() {
                    for j in 0..i {
                        let before = distance(emb.get(i), emb.get(j));
                        let after = distance(out.get(i), out.get(j));
                        prop_assert!((before - after).abs() < 1e-12);
                    }
                }
            }

            #[test]
            fn inverse_undoes_isometry(iso in isometry(), x in -1e3f64..1e3, y in -1e3f64..1e3) {
                let p = Point2::new(x, y);
                let back = iso.inverse().apply(iso.apply(p));
                prop_assert!(distance(back, p) < 1e-12);
            }
        }
    }
}
