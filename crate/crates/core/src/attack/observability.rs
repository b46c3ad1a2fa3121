use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::admm::norm;
use crate::linalg::lstsq;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Unobservability {
    pub unobservable: bool,
    /// `min_c ‖a − Hc‖ / ‖a‖`.
    pub residual: f64,
}

/// Tests whether `a` lies in the column space of `H`, i.e. whether a
/// residual-based detector can see it at all.
pub fn unobservability_check(h: &DMatrix<f64>, a: &DVector<f64>, tol: f64) -> Unobservability {
    let residual = relative_range_residual(h, a);
    Unobservability {
        unobservable: residual <= tol,
        residual,
    }
}

pub(crate) fn relative_range_residual(h: &DMatrix<f64>, a: &DVector<f64>) -> f64 {
    let scale = norm(a).max(f64::MIN_POSITIVE);
    if norm(a) == 0.0 {
        return 0.0;
    }
    let c = lstsq(h, a);
    norm(&(a - h * c)) / scale
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_member_and_orthogonal() {
        let h = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let inside = &h * DVector::from_column_slice(&[0.3, -2.0]);
        let res = unobservability_check(&h, &inside, 1e-6);
        assert!(res.unobservable && res.residual <= 1e-10);
        let outside = DVector::from_column_slice(&[0.0, 0.0, 4.0]);
        let res = unobservability_check(&h, &outside, 1e-6);
        assert!(!res.unobservable);
        assert!((res.residual - 1.0).abs() < 1e-12);
    }
}
