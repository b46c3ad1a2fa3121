use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{pinv, select_columns, PINV_CUTOFF};

/// Projection onto the span of the off-target columns of `H` and the
/// transformed target `y = B b`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionPair {
    /// `P = H^Ī (H^Ī)⁺`.
    pub p: DMatrix<f64>,
    /// `B = P − I`.
    pub b: DMatrix<f64>,
    pub y: DVector<f64>,
}

impl ProjectionPair {
    /// Same projection with `y = B·given`.
    pub fn retarget(&self, given: &DVector<f64>) -> Result<ProjectionPair> {
        if given.len() != self.b.ncols() {
            return Err(Error::Dimension(format!(
                "target has length {}, expected {}",
                given.len(),
                self.b.ncols()
            )));
        }
        Ok(ProjectionPair {
            p: self.p.clone(),
            b: self.b.clone(),
            y: &self.b * given,
        })
    }
}

/// Builds `P`, `B` and `y = B Σ_{j∈I} h_j c_j`.
///
/// `(H^Ī)ᵀH^Ī` is singular for every DC Jacobian, so the projection uses
/// the pseudoinverse of `H^Ī` instead of the normal-equation inverse.
pub fn build_projection(
    h: &DMatrix<f64>,
    off_target: &[usize],
    targeted: &BTreeMap<usize, f64>,
) -> Result<ProjectionPair> {
    if off_target.is_empty() {
        return Err(Error::InvalidArgument("off-target set is empty".into()));
    }
    let d = h.ncols();
    if let Some(&j) = off_target.iter().chain(targeted.keys()).find(|&&j| j >= d) {
        return Err(Error::InvalidArgument(format!("state index {j} out of range")));
    }
    if targeted.keys().any(|j| off_target.contains(j)) {
        return Err(Error::InvalidArgument("targeted and off-target sets overlap".into()));
    }
    let n = h.nrows();
    let h_off = select_columns(h, off_target);
    let p = &h_off * pinv(&h_off, PINV_CUTOFF);
    let b = &p - DMatrix::identity(n, n);
    let mut target = DVector::zeros(n);
    for (&j, &cj) in targeted {
        target += h.column(j) * cj;
    }
    let y = &b * target;
    Ok(ProjectionPair { p, b, y })
}
