//! Infinitesimal rigidity via the numerical rank of the rigidity matrix,
//! flex modes, edge criticality, and the (2,3) pebble game.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_sizes, Error, Result};
use crate::geometry::{Embedding, Graph, ToleranceProfile};
use crate::linalg;

mod pebble;

pub use pebble::{pebble_game_2_3, PebbleResult};

/// Edge-length slack above which the input is flagged as unrefined.
const REFINED_SLACK: f64 = 1e-6;
/// Gap ratio below which the rank decision is flagged as ill-conditioned.
const GAP_WARNING: f64 = 1e2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Rigid,
    Flexible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RigidityWarning {
    Unrefined { max_abs_length_deviation: f64 },
    IllConditioned { gap_ratio: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityReport {
    pub rank: usize,
    pub internal_dof: usize,
    /// Descending; `min(|E|, 2|V|)` values.
    pub singular_values: Vec<f64>,
    /// `σ_rank / σ_rank+1`; infinite when nothing was cut.
    #[serde(with = "finite_or_null")]
    pub gap_ratio: f64,
    /// Orthonormal infinitesimal flexes, each orthogonal to the trivial
    /// motions. Flat `[x0, y0, x1, y1, ...]` vectors.
    pub flex_basis: Vec<Vec<f64>>,
    pub classification: Classification,
    pub warnings: Vec<RigidityWarning>,
}

mod finite_or_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// Row per edge `(i, j)`: `v_i − v_j` in i's columns, negated in j's.
pub fn rigidity_matrix(g: &Graph, emb: &Embedding) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(g.n_edges(), 2 * g.n_vertices());
    for (k, &(i, j)) in g.edges().iter().enumerate() {
        let d = emb.get(i) - emb.get(j);
        m[(k, 2 * i)] = d.x;
        m[(k, 2 * i + 1)] = d.y;
        m[(k, 2 * j)] = -d.x;
        m[(k, 2 * j + 1)] = -d.y;
    }
    m
}

/// Orthonormal basis (columns) of the two translations and the
/// instantaneous rotation about the centroid.
pub fn trivial_motions(emb: &Embedding) -> DMatrix<f64> {
    let n = emb.len();
    let c = emb.centroid();
    let mut t = DMatrix::zeros(2 * n, 3);
    for (v, &p) in emb.positions().iter().enumerate() {
        t[(2 * v, 0)] = 1.0;
        t[(2 * v + 1, 1)] = 1.0;
        t[(2 * v, 2)] = -(p.y - c.y);
        t[(2 * v + 1, 2)] = p.x - c.x;
    }
    for k in 0..3 {
        let norm = t.column(k).norm();
        if norm > 0.0 {
            t.column_mut(k).scale_mut(1.0 / norm);
        }
    }
    t
}

/// Descending singular values of `m`.
fn sorted_singular_values(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    linalg::singular_values(m)
}

fn rank_of(sv: &[f64], tau: f64) -> usize {
    let smax = sv.first().copied().unwrap_or(0.0);
    sv.iter().filter(|&&s| s > tau * smax).count()
}

fn require_analyzable(g: &Graph, emb: &Embedding) -> Result<()> {
    check_sizes(g, emb)?;
    if g.n_vertices() < 2 {
        return Err(Error::Degenerate(format!(
            "{} vertices; at least 2 required",
            g.n_vertices()
        )));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    Ok(())
}

/// Rank, descending singular values and the right-singular vectors
/// (columns) of the rigidity matrix, padded square so the full nullspace is
/// available.
fn decompose(g: &Graph, emb: &Embedding) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let cols = 2 * g.n_vertices();
    let mut r = rigidity_matrix(g, emb);
    if r.nrows() < cols {
        r = r.resize_vertically(cols, 0.0);
    }
    let dec = linalg::svd(&r)?;
    let v = dec.v.columns(0, cols).into_owned();
    Ok((dec.s, v))
}

/// Orthonormal basis of the flex space: nullspace of the rigidity matrix
/// with the trivial motions projected out. Columns are flat vectors.
pub fn flex_space(g: &Graph, emb: &Embedding, rank_tau: f64) -> Result<DMatrix<f64>> {
    check_sizes(g, emb)?;
    let (sv, v) = decompose(g, emb)?;
    let rank = rank_of(&sv, rank_tau);
    project_off_trivial(emb, v.columns(rank, v.ncols() - rank).into_owned())
}

fn project_off_trivial(emb: &Embedding, null: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let t = trivial_motions(emb);
    let projected = &null - &t * (t.transpose() * &null);
    if projected.ncols() == 0 {
        return Ok(projected);
    }
    // Singular values are ~1 for genuine flexes and ~0 for the trivial
    // directions that were projected away.
    let dec = linalg::svd(&projected)?;
    let keep = dec.s.iter().take_while(|&&s| s > 0.5).count();
    Ok(dec.u.columns(0, keep).into_owned())
}

pub fn analyze(g: &Graph, emb: &Embedding, tol: &ToleranceProfile) -> Result<RigidityReport> {
    require_analyzable(g, emb)?;
    let mut warnings = Vec::new();
    let dev = emb.max_abs_length_deviation(g);
    if dev > REFINED_SLACK {
        warnings.push(RigidityWarning::Unrefined {
            max_abs_length_deviation: dev,
        });
    }
    let (sv, v) = decompose(g, emb)?;
    let rank = rank_of(&sv, tol.rank_tau);
    let gap_ratio = match sv.get(rank) {
        Some(&next) if rank > 0 => sv[rank - 1] / next,
        _ => f64::INFINITY,
    };
    if gap_ratio < GAP_WARNING {
        warnings.push(RigidityWarning::IllConditioned { gap_ratio });
    }
    let internal_dof = (2 * g.n_vertices()).saturating_sub(3 + rank);
    let null = v.columns(rank, v.ncols() - rank).into_owned();
    let basis = project_off_trivial(emb, null)?;
    let flex_basis = basis
        .column_iter()
        .map(|c| c.iter().copied().collect())
        .collect();
    let shown = g.n_edges().min(2 * g.n_vertices());
    Ok(RigidityReport {
        rank,
        internal_dof,
        singular_values: sv[..shown].to_vec(),
        gap_ratio,
        flex_basis,
        classification: if internal_dof == 0 {
            Classification::Rigid
        } else {
            Classification::Flexible
        },
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeCriticality {
    pub edge: (usize, usize),
    pub dof_after_removal: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriticalityScan {
    pub rank: usize,
    pub internal_dof: usize,
    /// `|E| − rank`.
    pub redundancy: usize,
    /// In edge-list order.
    pub edges: Vec<EdgeCriticality>,
}

impl CriticalityScan {
    /// Edges whose removal adds a degree of freedom.
    pub fn critical_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges
            .iter()
            .filter(move |e| e.dof_after_removal > self.internal_dof)
            .map(|e| e.edge)
    }
}

/// Recompute the rank with each edge deleted in turn.
pub fn criticality_scan(g: &Graph, emb: &Embedding, tol: &ToleranceProfile) -> Result<CriticalityScan> {
    require_analyzable(g, emb)?;
    let full = rigidity_matrix(g, emb);
    let sv = sorted_singular_values(&full)?;
    let rank = rank_of(&sv, tol.rank_tau);
    let base = 2 * g.n_vertices() - 3;
    let internal_dof = base.saturating_sub(rank);
    let mut edges = Vec::with_capacity(g.n_edges());
    for (k, &edge) in g.edges().iter().enumerate() {
        let reduced = full.clone().remove_row(k);
        let r = rank_of(&sorted_singular_values(&reduced)?, tol.rank_tau);
        if r + 1 < rank || r > rank {
            return Err(Error::Other(format!(
                "rank went from {rank} to {r} after removing edge {edge:?}; the rank decision is unstable"
            )));
        }
        edges.push(EdgeCriticality {
            edge,
            dof_after_removal: base.saturating_sub(r),
        });
    }
    Ok(CriticalityScan {
        rank,
        internal_dof,
        redundancy: g.n_edges() - rank,
        edges,
    })
}

/// `‖R·f‖` for a flat vector `f`.
pub fn infinitesimal_residual(g: &Graph, emb: &Embedding, f: &[f64]) -> f64 {
    (rigidity_matrix(g, emb) * DVector::from_column_slice(f)).norm()
}
