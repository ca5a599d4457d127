//! Isometry groups of embedded graphs: rotations about the vertex centroid
//! and mirror lines through it.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check_sizes, Result};
use crate::geometry::{wrap_angle, Embedding, Graph, Isometry, Point2, PointGrid};
use crate::refiner::project_min_norm;

/// Radial band (relative) used only to bound the candidate rotation orders.
const ORBIT_BAND: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetryGroup {
    pub rotation_order: usize,
    pub mirror_count: usize,
    /// `"C_k"` or `"D_k"`.
    pub classification: String,
    /// Rotation by `2π/k` (if `k > 1`) and one reflection (if any).
    pub generators: Vec<Isometry>,
    pub center: Point2,
    /// Direction angles of the mirror lines, in `[0, π)`.
    pub mirror_axes: Vec<f64>,
}

impl SymmetryGroup {
    fn new(center: Point2, k: usize, mirror_axes: Vec<f64>) -> Self {
        let mut generators = Vec::new();
        if k > 1 {
            generators.push(Isometry::rotation(center, 2.0 * PI / k as f64));
        }
        if let Some(&a) = mirror_axes.first() {
            generators.push(Isometry::reflection(center, a));
        }
        let classification = if mirror_axes.is_empty() {
            format!("C_{k}")
        } else {
            format!("D_{k}")
        };
        Self {
            rotation_order: k,
            mirror_count: mirror_axes.len(),
            classification,
            generators,
            center,
            mirror_axes,
        }
    }

    /// Every group element: rotations first, then reflections.
    pub fn elements(&self) -> Vec<Isometry> {
        let k = self.rotation_order;
        let mut out: Vec<Isometry> = (0..k)
            .map(|j| {
                if j == 0 {
                    Isometry::IDENTITY
                } else {
                    Isometry::rotation(self.center, 2.0 * PI * j as f64 / k as f64)
                }
            })
            .collect();
        out.extend(self.mirror_axes.iter().map(|&a| Isometry::reflection(self.center, a)));
        out
    }
}

/// The vertex permutation induced by `iso`, if every image lies within
/// `sym_tol` of a distinct vertex.
pub fn vertex_map(emb: &Embedding, iso: &Isometry, sym_tol: f64) -> Option<Vec<usize>> {
    let pts = emb.positions();
    let grid = PointGrid::new(pts, sym_tol);
    let mut taken = vec![false; pts.len()];
    let mut perm = Vec::with_capacity(pts.len());
    for &p in pts {
        let w = grid.nearest_within(pts, iso.apply(p), sym_tol)?;
        if std::mem::replace(&mut taken[w], true) {
            return None;
        }
        perm.push(w);
    }
    Some(perm)
}

pub fn is_automorphism(g: &Graph, emb: &Embedding, iso: &Isometry, sym_tol: f64) -> bool {
    if g.n_vertices() != emb.len() {
        return false;
    }
    let Some(perm) = vertex_map(emb, iso, sym_tol) else {
        return false;
    };
    g.edges().iter().all(|&(a, b)| g.has_edge(perm[a], perm[b]))
}

/// The largest symmetry group found with the given matching radius.
pub fn detect_symmetries(g: &Graph, emb: &Embedding, sym_tol: f64) -> SymmetryGroup {
    let center = emb.centroid();
    if g.n_vertices() != emb.len() || emb.len() < 2 {
        return SymmetryGroup::new(center, 1, Vec::new());
    }
    let polar: Vec<(f64, f64)> = emb
        .positions()
        .iter()
        .map(|&p| ((p - center).norm(), (p - center).angle()))
        .collect();
    let rmax = polar.iter().map(|p| p.0).fold(0.0, f64::max);
    if rmax <= sym_tol {
        return SymmetryGroup::new(center, 1, Vec::new());
    }
    let phi0 = polar
        .iter()
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|p| p.1)
        .expect("non-empty");
    let outer: Vec<usize> = (0..polar.len())
        .filter(|&v| polar[v].0 >= rmax * (1.0 - ORBIT_BAND))
        .collect();

    let k = (2..=outer.len())
        .rev()
        .find(|&k| is_automorphism(g, emb, &Isometry::rotation(center, 2.0 * PI / k as f64), sym_tol))
        .unwrap_or(1);

    // A mirror mapping v0 to w has axis angle (φ_v0 + φ_w) / 2 (mod π).
    let axis = outer
        .iter()
        .map(|&w| wrap_angle(0.5 * (phi0 + polar[w].1)) % PI)
        .find(|&a| is_automorphism(g, emb, &Isometry::reflection(center, a), sym_tol));
    let mirror_axes = match axis {
        None => Vec::new(),
        Some(alpha) => {
            let mut axes: Vec<f64> = (0..k)
                .map(|j| (alpha + PI * j as f64 / k as f64) % PI)
                .filter(|&a| is_automorphism(g, emb, &Isometry::reflection(center, a), sym_tol))
                .collect();
            axes.sort_by(f64::total_cmp);
            axes
        }
    };
    SymmetryGroup::new(center, k, mirror_axes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetrizeReport {
    /// Group detected at the coarse radius and enforced.
    pub group: SymmetryGroup,
    pub displacement_max: f64,
    pub max_abs_length_deviation: f64,
}

/// Detect the group at `coarse_tol`, average every vertex over its orbit,
/// and project back onto the unit-length manifold with minimum-norm steps
/// (which preserve the symmetry). Removes solver noise that is large
/// compared to the matching radius but small compared to figure precision.
pub fn symmetrize(g: &Graph, emb: &Embedding, coarse_tol: f64) -> Result<(Embedding, SymmetrizeReport)> {
    check_sizes(g, emb)?;
    let group = detect_symmetries(g, emb, coarse_tol);
    let elements = group.elements();
    let perms: Vec<Vec<usize>> = elements
        .iter()
        .map(|iso| vertex_map(emb, iso, coarse_tol).expect("detected element matches"))
        .collect();
    let scale = 1.0 / elements.len() as f64;
    let averaged: Vec<Point2> = (0..emb.len())
        .map(|v| {
            elements
                .iter()
                .zip(&perms)
                .fold(Point2::ORIGIN, |acc, (iso, perm)| {
                    acc + iso.inverse().apply(emb.get(perm[v]))
                })
                * scale
        })
        .collect();
    let averaged = Embedding::new(averaged)?;
    let (out, _) = project_min_norm(g, &averaged, &[], 1e-14, 50)?;
    let report = SymmetrizeReport {
        displacement_max: out.max_displacement(emb),
        max_abs_length_deviation: out.max_abs_length_deviation(g),
        group,
    };
    Ok((out, report))
}
