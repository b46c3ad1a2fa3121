use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::admm::{
    consensus_lasso_admm, sharing_group_lasso_admm, ColumnGroups, InnerSolverConfig, RowBlocks,
    SolveSummary, SolverConfig,
};
use crate::error::{Error, Result};
use crate::grid::MeasurementModel;
use crate::linalg::{ensure_finite_vector, pinv, PINV_CUTOFF};
use crate::partition::{Axis, ClusterPartition};

/// One vector of meter readings `z` (or attacked `z̃`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSnapshot {
    pub z: DVector<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<f64>,
}

impl MeasurementSnapshot {
    pub fn new(model: &MeasurementModel, z: DVector<f64>) -> Result<Self> {
        if z.len() != model.n_measurements() {
            return Err(Error::Dimension(format!(
                "{} readings for {} meters",
                z.len(),
                model.n_measurements()
            )));
        }
        ensure_finite_vector(&z, "measurements")?;
        Ok(MeasurementSnapshot { z, timestamp: None })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimationMethod {
    #[serde(rename = "wls")]
    Wls,
    #[serde(rename = "distributed_l1")]
    DistributedL1,
    #[serde(rename = "collaborative_group")]
    CollaborativeGroup,
    #[serde(rename = "delta_cs")]
    DeltaCs,
}

impl fmt::Display for EstimationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimationMethod::Wls => "wls",
            EstimationMethod::DistributedL1 => "distributed_l1",
            EstimationMethod::CollaborativeGroup => "collaborative_group",
            EstimationMethod::DeltaCs => "delta_cs",
        })
    }
}

impl FromStr for EstimationMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wls" => Ok(EstimationMethod::Wls),
            "distributed" | "distributed_l1" => Ok(EstimationMethod::DistributedL1),
            "collaborative" | "collaborative_group" => Ok(EstimationMethod::CollaborativeGroup),
            "delta" | "delta_cs" => Ok(EstimationMethod::DeltaCs),
            other => Err(Error::InvalidArgument(format!("unknown estimator '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateEstimate {
    pub method: EstimationMethod,
    pub x_hat: DVector<f64>,
    /// Final local iterates of the clusters, when the method has any.
    pub per_cluster: Option<Vec<DVector<f64>>>,
    pub solver: SolveSummary,
}

#[derive(Serialize, Deserialize)]
struct EstimateJson {
    method: EstimationMethod,
    x_hat: Vec<f64>,
    converged: bool,
    iterations: usize,
}

impl Serialize for StateEstimate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        EstimateJson {
            method: self.method,
            x_hat: self.x_hat.iter().copied().collect(),
            converged: self.solver.converged,
            iterations: self.solver.iterations,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for StateEstimate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = EstimateJson::deserialize(d)?;
        Ok(StateEstimate {
            method: raw.method,
            x_hat: DVector::from_vec(raw.x_hat),
            per_cluster: None,
            solver: SolveSummary {
                iterations: raw.iterations,
                converged: raw.converged,
                ..SolveSummary::default()
            },
        })
    }
}

fn check_snapshot(model: &MeasurementModel, snapshot: &MeasurementSnapshot) -> Result<()> {
    if snapshot.z.len() != model.n_measurements() {
        return Err(Error::Dimension(format!(
            "{} readings for {} meters",
            snapshot.z.len(),
            model.n_measurements()
        )));
    }
    ensure_finite_vector(&snapshot.z, "measurements")
}

/// Weighted least squares `x̂ = (HᵀΛH)⁺HᵀΛz`, computed as the minimum-norm
/// solution of `Λ^{1/2}Hx ≈ Λ^{1/2}z`.
pub fn wls_estimate(model: &MeasurementModel, snapshot: &MeasurementSnapshot) -> Result<StateEstimate> {
    check_snapshot(model, snapshot)?;
    let root_w = model.weights().map(f64::sqrt);
    let h = model.h();
    let weighted = DMatrix::from_fn(h.nrows(), h.ncols(), |i, j| h[(i, j)] * root_w[i]);
    let x_hat = pinv(&weighted, PINV_CUTOFF) * snapshot.z.component_mul(&root_w);
    Ok(StateEstimate {
        method: EstimationMethod::Wls,
        x_hat,
        per_cluster: None,
        solver: SolveSummary::default(),
    })
}

/// Measurement-distributed ℓ1 estimate: each row cluster solves its own
/// regularized fit and the clusters agree on `x̂` through consensus ADMM.
pub fn distributed_state_estimate(
    model: &MeasurementModel,
    snapshot: &MeasurementSnapshot,
    partition: &ClusterPartition,
    config: &SolverConfig,
) -> Result<StateEstimate> {
    check_snapshot(model, snapshot)?;
    if partition.axis() != Axis::Rows || partition.covered() != model.n_measurements() {
        return Err(Error::InvalidArgument("partition must split the measurement rows".into()));
    }
    let blocks = RowBlocks::split(model.h(), &snapshot.z, partition.groups())?;
    let result = consensus_lasso_admm(&blocks, config)?;
    Ok(StateEstimate {
        method: EstimationMethod::DistributedL1,
        solver: result.summary(),
        x_hat: result.solution,
        per_cluster: Some(result.local),
    })
}

/// Attribute-distributed group-sparse estimate: each column cluster owns
/// its block of `x̂` and the blocks share only their fitted measurements.
pub fn collaborative_state_estimate(
    model: &MeasurementModel,
    snapshot: &MeasurementSnapshot,
    partition: &ClusterPartition,
    config: &SolverConfig,
    inner: &InnerSolverConfig,
) -> Result<StateEstimate> {
    check_snapshot(model, snapshot)?;
    if partition.axis() != Axis::Columns || partition.covered() != model.n_states() {
        return Err(Error::InvalidArgument("partition must split the state columns".into()));
    }
    let problem = ColumnGroups::new(model.h().clone(), partition.groups().to_vec())?;
    let result = sharing_group_lasso_admm(&problem, &snapshot.z, config, inner)?;
    Ok(StateEstimate {
        method: EstimationMethod::CollaborativeGroup,
        solver: result.summary(),
        x_hat: result.solution,
        per_cluster: Some(result.local),
    })
}
