//! Damped Gauss–Newton refinement onto the unit-length constraint manifold.
//!
//! Residuals are squared lengths minus one. The default solver is
//! Levenberg–Marquardt with three gauge rows (pin one vertex, fix the
//! direction of one incident edge). [`project_min_norm`] is the gauge-free
//! variant used for continuation and symmetrization: each step is the
//! minimum-norm least-squares correction, so it never adds a rigid motion.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_sizes, Error, Result};
use crate::geometry::{Embedding, Graph, Point2};

/// An extra pair-distance requirement appended to the edge residuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceConstraint {
    pub a: usize,
    pub b: usize,
    pub target: f64,
}

/// Pin vertex `pinned` and the direction from it to `toward`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gauge {
    pub pinned: usize,
    pub toward: usize,
}

impl Gauge {
    /// Vertex 0 and its lowest-indexed neighbour.
    pub fn default_for(g: &Graph) -> Result<Gauge> {
        if g.n_vertices() == 0 {
            return Err(Error::Gauge("empty graph".into()));
        }
        let toward = *g
            .neighbors(0)
            .first()
            .ok_or_else(|| Error::Gauge("vertex 0 has no neighbours".into()))?;
        Ok(Gauge { pinned: 0, toward })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RefineOptions {
    pub max_iterations: usize,
    /// Stop once every `|len² − 1|` (and every extra constraint residual)
    /// is at most this.
    pub residual_target: f64,
    pub damping_init: f64,
    pub gauge: Option<Gauge>,
    pub extra: Vec<DistanceConstraint>,
}

impl Default for RefineOptions {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            residual_target: 1e-13,
            damping_init: 1e-4,
            gauge: None,
            extra: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineReport {
    pub converged: bool,
    pub iterations: usize,
    pub final_max_abs_residual: f64,
    pub displacement_max: f64,
}

/// `‖v_i − v_j‖² − 1` per edge, in edge-list order.
pub fn residuals(g: &Graph, emb: &Embedding) -> Vec<f64> {
    g.edges()
        .iter()
        .map(|&(i, j)| (emb.get(i) - emb.get(j)).norm_squared() - 1.0)
        .collect()
}

fn constraint_residuals(g: &Graph, emb: &Embedding, extra: &[DistanceConstraint]) -> Vec<f64> {
    let mut r = residuals(g, emb);
    r.extend(
        extra
            .iter()
            .map(|c| (emb.get(c.a) - emb.get(c.b)).norm_squared() - c.target * c.target),
    );
    r
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// One Jacobian row: the pair `(i, j)` and the vector `2(v_i − v_j)`.
/// Columns `2i, 2i+1` hold `+g`, columns `2j, 2j+1` hold `−g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairRow {
    pub i: usize,
    pub j: usize,
    pub grad: Point2,
}

/// Sparse Jacobian of pair-distance residuals: four nonzeros per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Jacobian {
    pub n_cols: usize,
    pub rows: Vec<PairRow>,
}

impl Jacobian {
    fn for_pairs(n_vertices: usize, emb: &Embedding, pairs: impl Iterator<Item = (usize, usize)>) -> Self {
        let rows = pairs
            .map(|(i, j)| PairRow {
                i,
                j,
                grad: (emb.get(i) - emb.get(j)) * 2.0,
            })
            .collect();
        Self {
            n_cols: 2 * n_vertices,
            rows,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows.len(), self.n_cols);
        for (k, r) in self.rows.iter().enumerate() {
            m[(k, 2 * r.i)] = r.grad.x;
            m[(k, 2 * r.i + 1)] = r.grad.y;
            m[(k, 2 * r.j)] = -r.grad.x;
            m[(k, 2 * r.j + 1)] = -r.grad.y;
        }
        m
    }

    /// `J · x` for a flat `2|V|` vector.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| {
                r.grad.x * (x[2 * r.i] - x[2 * r.j]) + r.grad.y * (x[2 * r.i + 1] - x[2 * r.j + 1])
            })
            .collect()
    }
}

/// Exact gradient of [`residuals`].
pub fn jacobian(g: &Graph, emb: &Embedding) -> Jacobian {
    Jacobian::for_pairs(g.n_vertices(), emb, g.edges().iter().copied())
}

fn constraint_jacobian(g: &Graph, emb: &Embedding, extra: &[DistanceConstraint]) -> Jacobian {
    Jacobian::for_pairs(
        g.n_vertices(),
        emb,
        g.edges().iter().copied().chain(extra.iter().map(|c| (c.a, c.b))),
    )
}

fn validate_extra(n: usize, extra: &[DistanceConstraint]) -> Result<()> {
    for c in extra {
        if c.a >= n || c.b >= n {
            return Err(Error::VertexOutOfRange {
                index: c.a.max(c.b),
                n_vertices: n,
            });
        }
        if c.a == c.b || !(c.target.is_finite() && c.target > 0.0) {
            return Err(Error::Other(format!(
                "invalid distance constraint ({}, {}, {})",
                c.a, c.b, c.target
            )));
        }
    }
    Ok(())
}

fn cost(r: &[f64], gauge_r: &[f64; 3]) -> f64 {
    r.iter().chain(gauge_r).map(|x| x * x).sum()
}

/// Levenberg–Marquardt refinement with a pinned gauge.
pub fn refine(g: &Graph, emb: &Embedding, opts: &RefineOptions) -> Result<(Embedding, RefineReport)> {
    check_sizes(g, emb)?;
    if g.n_edges() == 0 {
        return Err(Error::Degenerate("no edges to refine".into()));
    }
    validate_extra(g.n_vertices(), &opts.extra)?;
    let gauge = match opts.gauge {
        Some(gauge) => gauge,
        None => Gauge::default_for(g)?,
    };
    let (p, q) = (gauge.pinned, gauge.toward);
    if p >= g.n_vertices() || q >= g.n_vertices() || !g.has_edge(p, q) {
        return Err(Error::Gauge(format!("({p}, {q}) is not an edge")));
    }
    let anchor = emb.get(p);
    let dir0 = emb.get(q) - anchor;
    if dir0.norm() == 0.0 {
        return Err(Error::Gauge(format!("vertices {p} and {q} coincide")));
    }
    let u0 = dir0 * (1.0 / dir0.norm());

    let n = 2 * g.n_vertices();
    let gauge_residuals = |x: &[f64]| -> [f64; 3] {
        let xp = Point2::new(x[2 * p], x[2 * p + 1]);
        let xq = Point2::new(x[2 * q], x[2 * q + 1]);
        [xp.x - anchor.x, xp.y - anchor.y, u0.cross(xq - xp)]
    };
    // Gauge rows are linear, so their Jacobian is constant.
    let mut gauge_jac = DMatrix::zeros(3, n);
    gauge_jac[(0, 2 * p)] = 1.0;
    gauge_jac[(1, 2 * p + 1)] = 1.0;
    gauge_jac[(2, 2 * q)] = -u0.y;
    gauge_jac[(2, 2 * q + 1)] = u0.x;
    gauge_jac[(2, 2 * p)] = u0.y;
    gauge_jac[(2, 2 * p + 1)] = -u0.x;
    let gauge_normal = gauge_jac.transpose() * &gauge_jac;

    let mut x = emb.to_flat();
    let mut current = emb.clone();
    let mut r = constraint_residuals(g, &current, &opts.extra);
    let mut gr = gauge_residuals(&x);
    let mut lambda = opts.damping_init;
    let mut iterations = 0;

    while max_abs(&r) > opts.residual_target && iterations < opts.max_iterations {
        iterations += 1;
        let jac = constraint_jacobian(g, &current, &opts.extra).to_dense();
        let normal = jac.transpose() * &jac + &gauge_normal;
        let rhs = -(jac.transpose() * DVector::from_column_slice(&r)
            + gauge_jac.transpose() * DVector::from_column_slice(&gr));
        let base_cost = cost(&r, &gr);

        let mut accepted = false;
        for _ in 0..40 {
            let damped = &normal + DMatrix::identity(n, n) * lambda;
            let Some(chol) = damped.cholesky() else {
                if iterations == 1 && lambda == opts.damping_init {
                    return Err(Error::Gauge("singular normal equations".into()));
                }
                lambda *= 10.0;
                continue;
            };
            let step = chol.solve(&rhs);
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let trial_emb = Embedding::from_flat(&trial)?;
            let trial_r = constraint_residuals(g, &trial_emb, &opts.extra);
            let trial_gr = gauge_residuals(&trial);
            if cost(&trial_r, &trial_gr) < base_cost {
                x = trial;
                current = trial_emb;
                r = trial_r;
                gr = trial_gr;
                lambda = (lambda / 10.0).max(1e-15);
                accepted = true;
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            break;
        }
    }

    let final_max_abs_residual = max_abs(&r);
    let report = RefineReport {
        converged: final_max_abs_residual <= opts.residual_target,
        iterations,
        final_max_abs_residual,
        displacement_max: current.max_displacement(emb),
    };
    Ok((current, report))
}

/// Gauss–Newton projection onto the constraint set using minimum-norm
/// steps. Returns the projected embedding and the number of iterations, or
/// [`Error::StepTooLarge`] if the residual does not reach `tol` within
/// `max_iterations` or starts growing.
pub fn project_min_norm(
    g: &Graph,
    emb: &Embedding,
    extra: &[DistanceConstraint],
    tol: f64,
    max_iterations: usize,
) -> Result<(Embedding, usize)> {
    check_sizes(g, emb)?;
    validate_extra(g.n_vertices(), extra)?;
    let mut current = emb.clone();
    let mut r = constraint_residuals(g, &current, extra);
    let mut best = max_abs(&r);
    let mut growth = 0;
    for it in 0..=max_iterations {
        if best <= tol {
            return Ok((current, it));
        }
        if it == max_iterations {
            break;
        }
        let jac = constraint_jacobian(g, &current, extra).to_dense();
        let step = min_norm_solve(jac, &r)?;
        let x: Vec<f64> = current
            .to_flat()
            .iter()
            .zip(step.iter())
            .map(|(a, b)| a - b)
            .collect();
        current = Embedding::from_flat(&x).map_err(|_| Error::StepTooLarge)?;
        r = constraint_residuals(g, &current, extra);
        let m = max_abs(&r);
        if m < best {
            best = m;
        } else {
            growth += 1;
            if growth > 2 || m > 1.0 {
                return Err(Error::StepTooLarge);
            }
        }
    }
    Err(Error::StepTooLarge)
}

/// Minimum-norm solution of `J s = r` via SVD, with a relative cutoff on
/// the singular values.
pub(crate) fn min_norm_solve(jac: DMatrix<f64>, r: &[f64]) -> Result<DVector<f64>> {
    crate::linalg::min_norm_solve(&jac, &DVector::from_column_slice(r), 1e-10)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::{unit_square, unit_triangle};

    #[test]
    fn residual_examples() {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        let unit = Embedding::new(vec![Point2::ORIGIN, Point2::new(1.0, 0.0)]).unwrap();
        assert_eq!(residuals(&g, &unit), vec![0.0]);
        let double = Embedding::new(vec![Point2::ORIGIN, Point2::new(2.0, 0.0)]).unwrap();
        assert_eq!(residuals(&g, &double), vec![3.0]);
        let row = jacobian(&g, &unit).to_dense();
        assert_eq!(row.as_slice(), &[-2.0, 0.0, 2.0, 0.0]);
    }

    #[test]
    fn exact_triangle_is_untouched() {
        let (g, emb) = unit_triangle();
        let (out, rep) = refine(&g, &emb, &RefineOptions::default()).unwrap();
        assert!(rep.converged);
        assert!(rep.iterations <= 1);
        assert!(rep.displacement_max < 1e-15);
        assert!(out.max_displacement(&emb) < 1e-15);
    }

    #[test]
    fn perturbed_triangle_converges() {
        let (g, emb) = unit_triangle();
        let emb = emb.map(|p| if p.x == 1.0 { p + Point2::new(0.01, 0.0) } else { p });
        let (out, rep) = refine(&g, &emb, &RefineOptions::default()).unwrap();
        assert!(rep.converged);
        assert!(out.max_abs_length_deviation(&g) < 1e-12);
        // The pinned vertex stays put.
        assert!(crate::distance(out.get(0), emb.get(0)) < 1e-12);
    }

    #[test]
    fn extra_constraint_is_honoured() {
        let (g, emb) = unit_square();
        let opts = RefineOptions {
            extra: vec![DistanceConstraint { a: 0, b: 2, target: 3f64.sqrt() }],
            ..Default::default()
        };
        let (out, rep) = refine(&g, &emb, &opts).unwrap();
        assert!(rep.converged);
        assert!((crate::distance(out.get(0), out.get(2)) - 3f64.sqrt()).abs() < 1e-12);
        assert!((crate::distance(out.get(1), out.get(3)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bad_gauge_is_rejected() {
        let (g, emb) = unit_square();
        let opts = RefineOptions {
            gauge: Some(Gauge { pinned: 0, toward: 2 }),
            ..Default::default()
        };
        assert!(matches!(refine(&g, &emb, &opts), Err(Error::Gauge(_))));
    }

    #[test]
    fn min_norm_projection_adds_no_rigid_motion() {
        let (g, emb) = unit_triangle();
        let bumped = emb.map(|p| p * 1.01);
        let (out, _) = project_min_norm(&g, &bumped, &[], 1e-14, 20).unwrap();
        assert!(out.max_abs_length_deviation(&g) < 1e-13);
        // Uniform scaling is corrected radially: the centroid does not move.
        assert!(crate::distance(out.centroid(), bumped.centroid()) < 1e-12);
    }
}
