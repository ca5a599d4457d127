//! Dense SVD on nalgebra matrices, computed with faer.
//!
//! nalgebra's own SVD can return a decomposition that does not reproduce
//! its input on some rank-deficient matrices (we hit it on the flex basis
//! of a near-square rhombus), so every singular value decomposition in the
//! crate goes through here.

use faer::Mat;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// `a = u · diag(s) · vᵀ`, with `s` in descending order.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DMatrix<f64>,
    pub s: Vec<f64>,
    pub v: DMatrix<f64>,
}

fn to_faer(a: &DMatrix<f64>) -> Mat<f64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, f64>, cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), cols.len(), |i, j| m[(i, cols[j])])
}

/// Thin SVD (`min(m, n)` singular triplets). For a square input this is
/// the full decomposition, nullspace included.
pub fn svd(a: &DMatrix<f64>) -> Result<Svd> {
    let k = a.nrows().min(a.ncols());
    if k == 0 {
        return Ok(Svd {
            u: DMatrix::zeros(a.nrows(), 0),
            s: Vec::new(),
            v: DMatrix::zeros(a.ncols(), 0),
        });
    }
    let dec = to_faer(a)
        .thin_svd()
        .map_err(|e| Error::Other(format!("SVD did not converge: {e:?}")))?;
    let diag = dec.S();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&x, &y| diag[y].total_cmp(&diag[x]));
    Ok(Svd {
        s: order.iter().map(|&i| diag[i]).collect(),
        u: from_faer(dec.U(), &order),
        v: from_faer(dec.V(), &order),
    })
}

/// Descending singular values.
pub fn singular_values(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    let k = a.nrows().min(a.ncols());
    if k == 0 {
        return Ok(Vec::new());
    }
    let s = to_faer(a)
        .singular_values()
        .map_err(|e| Error::Other(format!("SVD did not converge: {e:?}")))?;
    let mut s: Vec<f64> = s.into_iter().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s)
}

/// Minimum-norm least-squares solution of `a x = b`, ignoring singular
/// values below `rel_cutoff · σ_max`.
pub fn min_norm_solve(a: &DMatrix<f64>, b: &DVector<f64>, rel_cutoff: f64) -> Result<DVector<f64>> {
    let dec = svd(a)?;
    let smax = dec.s.first().copied().unwrap_or(0.0);
    let utb = dec.u.transpose() * b;
    let mut x = DVector::zeros(a.ncols());
    for (k, &s) in dec.s.iter().enumerate() {
        if s > rel_cutoff * smax {
            x += dec.v.column(k) * (utb[k] / s);
        }
    }
    Ok(x)
}
