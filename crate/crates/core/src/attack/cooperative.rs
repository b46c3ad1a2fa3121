use nalgebra::{DMatrix, DVector};

use super::observability::relative_range_residual;
use super::types::{AttackKind, AttackVector};
use crate::admm::{
    consensus_lasso_admm, sharing_group_lasso_admm, ColumnGroups, InnerSolverConfig, RowBlocks,
    SolverConfig,
};
use crate::error::{Error, Result};
use crate::partition::{Axis, ClusterPartition};

/// Attackers split by meters: each cluster fits its slice `aᵢ` of the
/// target with a shared sparse `c` via consensus ADMM; the realized false
/// data is `Hc`.
pub fn distributed_sparse_attack(
    h: &DMatrix<f64>,
    a_target: &DVector<f64>,
    partition: &ClusterPartition,
    config: &SolverConfig,
) -> Result<AttackVector> {
    check(h, a_target, partition, Axis::Rows, h.nrows())?;
    let blocks = RowBlocks::split(h, a_target, partition.groups())?;
    let result = consensus_lasso_admm(&blocks, config)?;
    Ok(finish(h, AttackKind::Distributed, result.solution.clone(), result.summary()))
}

/// Attackers split by states: each cluster owns a block of `c` and the
/// blocks are fitted jointly with a group-sparse penalty, so whole
/// clusters stay silent.
pub fn collective_sparse_attack(
    h: &DMatrix<f64>,
    a_target: &DVector<f64>,
    partition: &ClusterPartition,
    config: &SolverConfig,
    inner: &InnerSolverConfig,
) -> Result<AttackVector> {
    check(h, a_target, partition, Axis::Columns, h.ncols())?;
    let problem = ColumnGroups::new(h.clone(), partition.groups().to_vec())?;
    let result = sharing_group_lasso_admm(&problem, a_target, config, inner)?;
    Ok(finish(h, AttackKind::Collective, result.solution.clone(), result.summary()))
}

fn check(
    h: &DMatrix<f64>,
    a_target: &DVector<f64>,
    partition: &ClusterPartition,
    axis: Axis,
    len: usize,
) -> Result<()> {
    if a_target.len() != h.nrows() {
        return Err(Error::Dimension(format!(
            "target has length {}, H has {} rows",
            a_target.len(),
            h.nrows()
        )));
    }
    if partition.axis() != axis || partition.covered() != len {
        return Err(Error::InvalidArgument(format!(
            "partition must split the {len} {}",
            if axis == Axis::Rows { "rows" } else { "columns" }
        )));
    }
    Ok(())
}

fn finish(
    h: &DMatrix<f64>,
    kind: AttackKind,
    c: DVector<f64>,
    solver: crate::admm::SolveSummary,
) -> AttackVector {
    let a = h * &c;
    AttackVector {
        kind,
        residual: relative_range_residual(h, &a),
        a,
        c: Some(c),
        k: None,
        solver,
        leak_warning: false,
    }
}
