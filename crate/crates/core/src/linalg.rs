//! Dense linear-algebra helpers shared by the solvers.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative singular-value cutoff for pseudoinverses.
pub const PINV_CUTOFF: f64 = 1e-10;

/// Moore-Penrose pseudoinverse; singular values below `rel_cutoff * s_max`
/// are treated as zero.
pub fn pinv(m: &DMatrix<f64>, rel_cutoff: f64) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return DMatrix::zeros(cols, rows);
    }
    let svd = m.clone().svd(true, true);
    let s_max = svd.singular_values.max();
    let cut = rel_cutoff * s_max;
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let mut out = DMatrix::zeros(cols, rows);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > cut && s > 0.0 {
            out += (v_t.row(k).transpose() / s) * u.column(k).transpose();
        }
    }
    out
}

/// Numerical rank: singular values above `rel_tol * s_max`.
pub fn rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let s = m.clone().singular_values();
    let s_max = s.max();
    if s_max == 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > rel_tol * s_max).count()
}

/// Minimum-norm least-squares solution of `m x ≈ b`.
pub fn lstsq(m: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    pinv(m, PINV_CUTOFF) * b
}

/// Sub-matrix with the given columns, in the order listed.
pub fn select_columns(m: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), cols.len(), |r, c| m[(r, cols[c])])
}

/// Sub-matrix with the given rows, in the order listed.
pub fn select_rows(m: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), m.ncols(), |r, c| m[(rows[r], c)])
}

pub fn select_entries(v: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    DVector::from_iterator(idx.len(), idx.iter().map(|&i| v[i]))
}

/// Induced ∞-norm: maximum absolute row sum.
pub fn induced_inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn count_nonzero(v: &DVector<f64>, tol: f64) -> usize {
    v.iter().filter(|x| x.abs() > tol).count()
}

pub(crate) fn ensure_finite_matrix(m: &DMatrix<f64>, what: &'static str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

pub(crate) fn ensure_finite_vector(v: &DVector<f64>, what: &'static str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}
