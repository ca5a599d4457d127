//! Angular fans around a vertex.

use serde::{Deserialize, Serialize};

use crate::error::{check_sizes, Error, Result};
use crate::figures::DEGREE_11_ANGLES;
use crate::geometry::{Embedding, Graph};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleFan {
    pub center: usize,
    /// Neighbours in clockwise order, starting from the one with the
    /// greatest polar angle.
    pub neighbor_order: Vec<usize>,
    /// Degrees; `angles[i]` lies between `neighbor_order[i]` and the next.
    pub angles: Vec<f64>,
}

impl AngleFan {
    pub fn sum(&self) -> f64 {
        self.angles.iter().sum()
    }

    /// Same angle sequence up to a cyclic shift, within `tol` degrees.
    pub fn equivalent(&self, other: &AngleFan, tol: f64) -> bool {
        cyclic_match(&self.angles, &other.angles, tol).is_some()
    }
}

/// The shift `s` with `a[i] ≈ b[(i + s) % n]` for all `i`, if any.
pub fn cyclic_match(a: &[f64], b: &[f64], tol: f64) -> Option<usize> {
    if a.len() != b.len() {
        return None;
    }
    let n = a.len();
    (0..n.max(1)).find(|&s| (0..n).all(|i| (a[i] - b[(i + s) % n]).abs() <= tol))
}

pub fn angle_fan(g: &Graph, emb: &Embedding, v: usize) -> Result<AngleFan> {
    check_sizes(g, emb)?;
    if v >= g.n_vertices() {
        return Err(Error::VertexOutOfRange {
            index: v,
            n_vertices: g.n_vertices(),
        });
    }
    if g.degree(v) < 2 {
        return Err(Error::Degenerate(format!(
            "vertex {v} has degree {}; an angle fan needs at least 2",
            g.degree(v)
        )));
    }
    let c = emb.get(v);
    let mut around: Vec<(f64, usize)> = g
        .neighbors(v)
        .iter()
        .map(|&w| ((emb.get(w) - c).angle().to_degrees(), w))
        .collect();
    around.sort_by(|x, y| y.0.total_cmp(&x.0));
    let n = around.len();
    let angles = (0..n)
        .map(|i| {
            let gap = around[i].0 - around[(i + 1) % n].0;
            if i + 1 == n {
                gap + 360.0
            } else {
                gap
            }
        })
        .collect();
    Ok(AngleFan {
        center: v,
        neighbor_order: around.into_iter().map(|(_, w)| w).collect(),
        angles,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleListReport {
    pub count: usize,
    pub sum: f64,
    pub min: f64,
    pub max: f64,
    pub sum_ok: bool,
    pub range_ok: bool,
}

/// Check the published degree-11 angle list: full turn and plausible range.
pub fn published_angle_list_check() -> AngleListReport {
    let a = &DEGREE_11_ANGLES;
    let sum: f64 = a.iter().sum();
    let min = a.iter().copied().fold(f64::INFINITY, f64::min);
    let max = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    AngleListReport {
        count: a.len(),
        sum,
        min,
        max,
        sum_ok: (sum - 360.0).abs() <= 1e-10,
        range_ok: a.iter().all(|&x| x > 25.0 && x < 41.0),
    }
}
