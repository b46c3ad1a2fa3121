use nalgebra::DVector;

use crate::error::{Error, Result};

/// Proximal operator of `κ‖·‖₁`: `(φ − κ)₊ − (−φ − κ)₊` elementwise.
pub fn soft_threshold(phi: &DVector<f64>, kappa: f64) -> DVector<f64> {
    phi.map(|p| soft_scalar(p, kappa))
}

#[inline]
pub(crate) fn soft_scalar(p: f64, kappa: f64) -> f64 {
    (p - kappa).max(0.0) - (-p - kappa).max(0.0)
}

/// Keeps the `k` largest-magnitude entries and zeroes the rest. Ties in
/// magnitude go to the lower index.
pub fn hard_threshold_keep_k(v: &DVector<f64>, k: usize) -> Result<DVector<f64>> {
    if k > v.len() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} exceeds vector length {}",
            v.len()
        )));
    }
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&i, &j| {
        v[j].abs()
            .partial_cmp(&v[i].abs())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let mut out = DVector::zeros(v.len());
    for &i in order.iter().take(k) {
        out[i] = v[i];
    }
    Ok(out)
}

/// Proximal operator of `κ‖·‖₂`: `max(0, 1 − κ/‖w‖₂)·w`.
pub fn block_soft_threshold(w: &DVector<f64>, kappa: f64) -> DVector<f64> {
    let norm = w.norm();
    if norm <= kappa {
        DVector::zeros(w.len())
    } else {
        w * (1.0 - kappa / norm)
    }
}
