use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::case::{BusId, GridCase};
use crate::error::{Error, Result};

/// Default per-unit noise standard deviation of every meter.
pub const DEFAULT_NOISE_SIGMA: f64 = 0.01;

/// What a single meter measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Measurement {
    /// Net real-power injection at a bus (by bus id).
    Injection { bus_id: BusId },
    /// From-side real-power flow on a branch (zero-based branch position).
    Flow { branch: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeasurementScheme {
    /// One injection per bus followed by one from-side flow per branch.
    Default,
    Explicit(Vec<Measurement>),
}

/// Linear DC measurement model `z = H x + n`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementModel {
    h: DMatrix<f64>,
    descriptors: Vec<Measurement>,
    noise_variances: DVector<f64>,
}

impl MeasurementModel {
    /// Wraps an arbitrary Jacobian, treating every row as an opaque meter.
    /// Useful for synthetic problems; descriptors are flows numbered by row.
    pub fn from_matrix(h: DMatrix<f64>, noise_sigma: f64) -> Result<Self> {
        if h.nrows() == 0 || h.ncols() == 0 {
            return Err(Error::Dimension("empty Jacobian".into()));
        }
        let descriptors = (0..h.nrows()).map(|branch| Measurement::Flow { branch }).collect();
        let n = h.nrows();
        MeasurementModel {
            h,
            descriptors,
            noise_variances: DVector::from_element(n, 1.0),
        }
        .with_noise_sigma(noise_sigma)
    }

    pub fn h(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn descriptors(&self) -> &[Measurement] {
        &self.descriptors
    }

    /// Per-meter noise variances `ξ_i²`.
    pub fn noise_variances(&self) -> &DVector<f64> {
        &self.noise_variances
    }

    /// Number of meters `N`.
    pub fn n_measurements(&self) -> usize {
        self.h.nrows()
    }

    /// State dimension `D` (one phase angle per bus).
    pub fn n_states(&self) -> usize {
        self.h.ncols()
    }

    /// Sets every meter's noise standard deviation to `sigma`.
    pub fn with_noise_sigma(self, sigma: f64) -> Result<Self> {
        let n = self.n_measurements();
        self.with_noise_variances(DVector::from_element(n, sigma * sigma))
    }

    pub fn with_noise_variances(mut self, variances: DVector<f64>) -> Result<Self> {
        if variances.len() != self.n_measurements() {
            return Err(Error::Dimension(format!(
                "{} noise variances for {} meters",
                variances.len(),
                self.n_measurements()
            )));
        }
        if variances.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidArgument(
                "noise variances must be positive".into(),
            ));
        }
        self.noise_variances = variances;
        Ok(self)
    }

    /// Diagonal of the weight matrix `Λ`, `Λ_ii = ξ_i⁻²`.
    pub fn weights(&self) -> DVector<f64> {
        self.noise_variances.map(|v| 1.0 / v)
    }
}

/// Builds the DC measurement Jacobian. Columns follow bus order and no
/// reference-angle column is removed, so `H 𝟙 = 0`.
pub fn build_dc_jacobian(case: &GridCase, scheme: &MeasurementScheme) -> Result<MeasurementModel> {
    let descriptors = match scheme {
        MeasurementScheme::Default => case
            .buses()
            .iter()
            .map(|b| Measurement::Injection { bus_id: b.id })
            .chain((0..case.branch_count()).map(|branch| Measurement::Flow { branch }))
            .collect(),
        MeasurementScheme::Explicit(list) => {
            if list.is_empty() {
                return Err(Error::InvalidArgument("empty measurement list".into()));
            }
            list.clone()
        }
    };

    let index = case.bus_index();
    let d = case.bus_count();
    let mut h = DMatrix::zeros(descriptors.len(), d);
    for (row, m) in descriptors.iter().enumerate() {
        match *m {
            Measurement::Flow { branch } => {
                let br = case.branches().get(branch).ok_or_else(|| {
                    Error::InvalidArgument(format!("flow meter on unknown branch {branch}"))
                })?;
                let b = br.susceptance();
                h[(row, index[&br.from_bus])] += b;
                h[(row, index[&br.to_bus])] -= b;
            }
            Measurement::Injection { bus_id } => {
                let i = *index.get(&bus_id).ok_or_else(|| {
                    Error::InvalidArgument(format!("injection meter on unknown bus {bus_id}"))
                })?;
                for br in case.branches() {
                    let (f, t) = (index[&br.from_bus], index[&br.to_bus]);
                    let b = br.susceptance();
                    if f == i {
                        h[(row, f)] += b;
                        h[(row, t)] -= b;
                    } else if t == i {
                        h[(row, t)] += b;
                        h[(row, f)] -= b;
                    }
                }
            }
        }
    }

    let n = descriptors.len();
    MeasurementModel {
        h,
        descriptors,
        noise_variances: DVector::from_element(n, 1.0),
    }
    .with_noise_sigma(DEFAULT_NOISE_SIGMA)
}
