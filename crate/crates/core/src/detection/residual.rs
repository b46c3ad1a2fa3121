use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{MeasurementSnapshot, StateEstimate};
use crate::grid::MeasurementModel;
use crate::linalg::{induced_inf_norm, pinv, PINV_CUTOFF};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub total: f64,
    /// `(z_i − (Hx̂)_i)²`.
    pub per_measurement: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub residual_total: f64,
    pub per_measurement: DVector<f64>,
    pub attacked_mask: Vec<bool>,
    pub tau: f64,
}

fn check(model: &MeasurementModel, snapshot: &MeasurementSnapshot, estimate: &StateEstimate) -> Result<()> {
    if snapshot.z.len() != model.n_measurements() || estimate.x_hat.len() != model.n_states() {
        return Err(Error::Dimension(format!(
            "model is {}x{}, got z of length {} and x_hat of length {}",
            model.n_measurements(),
            model.n_states(),
            snapshot.z.len(),
            estimate.x_hat.len()
        )));
    }
    Ok(())
}

pub fn residuals(
    model: &MeasurementModel,
    snapshot: &MeasurementSnapshot,
    estimate: &StateEstimate,
) -> Result<Residuals> {
    check(model, snapshot, estimate)?;
    let per_measurement = (&snapshot.z - model.h() * &estimate.x_hat).map(|r| r * r);
    Ok(Residuals {
        total: per_measurement.sum(),
        per_measurement,
    })
}

/// Per-meter squared error of the realized false data, `(z_i − (Hx̂)_i)²`,
/// as seen from the attacker's side (`z` the target, `x̂` the injection).
pub fn attack_error(
    model: &MeasurementModel,
    snapshot: &MeasurementSnapshot,
    estimate: &StateEstimate,
) -> Result<DVector<f64>> {
    Ok(residuals(model, snapshot, estimate)?.per_measurement)
}

/// `τ = 2ξ‖I − H(HᵀΣ⁻¹H)⁺HᵀΣ⁻¹‖∞` with the max-row-sum norm and diagonal
/// `Σ` given by its variances.
pub fn tau_threshold(model: &MeasurementModel, noise_sigma: f64, noise_variances: &DVector<f64>) -> Result<f64> {
    if !(noise_sigma.is_finite() && noise_sigma > 0.0) {
        return Err(Error::InvalidArgument("noise sigma must be > 0".into()));
    }
    let n = model.n_measurements();
    if noise_variances.len() != n {
        return Err(Error::Dimension(format!(
            "{} variances for {n} meters",
            noise_variances.len()
        )));
    }
    if noise_variances.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::InvalidArgument("noise variances must be positive".into()));
    }
    let h = model.h();
    let inv_var = noise_variances.map(|v| 1.0 / v);
    // HᵀΣ⁻¹
    let ht_w = DMatrix::from_fn(h.ncols(), n, |j, i| h[(i, j)] * inv_var[i]);
    let gain = pinv(&(&ht_w * h), PINV_CUTOFF);
    let m = DMatrix::identity(n, n) - h * gain * ht_w;
    Ok(2.0 * noise_sigma * induced_inf_norm(&m))
}

/// Single-pass test: meter `i` is flagged when its residual strictly
/// exceeds `τ`. Flagged meters are not removed and re-estimated.
pub fn detect(per_measurement: &DVector<f64>, tau: f64) -> Vec<bool> {
    per_measurement.iter().map(|&r| r > tau).collect()
}

pub fn run_detection(
    model: &MeasurementModel,
    snapshot: &MeasurementSnapshot,
    estimate: &StateEstimate,
    tau: f64,
) -> Result<DetectionResult> {
    if !(tau >= 0.0) {
        return Err(Error::InvalidArgument("tau must be >= 0".into()));
    }
    let r = residuals(model, snapshot, estimate)?;
    Ok(DetectionResult {
        residual_total: r.total,
        attacked_mask: detect(&r.per_measurement, tau),
        per_measurement: r.per_measurement,
        tau,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::admm::SolveSummary;
    use crate::estimation::EstimationMethod;

    fn est(x: &[f64]) -> StateEstimate {
        StateEstimate {
            method: EstimationMethod::Wls,
            x_hat: DVector::from_column_slice(x),
            per_cluster: None,
            solver: SolveSummary::default(),
        }
    }

    #[test]
    fn tau_examples() {
        let m = MeasurementModel::from_matrix(DMatrix::identity(3, 3), 1.0).unwrap();
        assert_eq!(tau_threshold(&m, 1.0, &DVector::from_element(3, 1.0)).unwrap(), 0.0);
        let m = MeasurementModel::from_matrix(DMatrix::from_column_slice(2, 1, &[1.0, 0.0]), 1.0).unwrap();
        assert!((tau_threshold(&m, 1.0, &DVector::from_element(2, 1.0)).unwrap() - 2.0).abs() < 1e-12);
        assert!(tau_threshold(&m, 1.0, &DVector::from_column_slice(&[1.0, 0.0])).is_err());
    }

    #[test]
    fn residual_unit_vector() {
        let m = MeasurementModel::from_matrix(DMatrix::identity(3, 3), 1.0).unwrap();
        let snap = MeasurementSnapshot::new(&m, DVector::from_column_slice(&[1.0, 2.0, 3.0])).unwrap();
        let r = residuals(&m, &snap, &est(&[0.0, 2.0, 3.0])).unwrap();
        assert_eq!(r.per_measurement, DVector::from_column_slice(&[1.0, 0.0, 0.0]));
        assert_eq!(r.total, 1.0);
    }

    #[test]
    fn strict_threshold() {
        assert_eq!(detect(&DVector::zeros(2), 0.0), vec![false, false]);
        assert_eq!(detect(&DVector::from_column_slice(&[3.0, 1.0]), 2.0), vec![true, false]);
    }
}
